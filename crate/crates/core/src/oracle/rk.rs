//! Reference integrator: the explicit Dormand-Prince 8(5,3) pair with the
//! usual proportional step control. Shares nothing with the phase-function
//! solver beyond the coefficient evaluators.

#![allow(clippy::excessive_precision)]

use num_complex::Complex64;

use crate::error::{ArdcError, Result};
use crate::problem::InitialValueProblem;

/// Right-hand-side evaluations allowed per reference run.
pub const EVAL_BUDGET: u64 = 100_000_000;

/// Rough cost per oscillation period at tight tolerances, used to refuse
/// hopeless runs before starting them.
const EVALS_PER_PERIOD: f64 = 60.0;

pub(crate) mod tableau {
    pub const C: [f64; 12] = [
        0.0,
        0.526001519587677318785587544488E-01,
        0.789002279381515978178381316732E-01,
        0.118350341907227396726757197510E+00,
        0.281649658092772603273242802490E+00,
        0.333333333333333333333333333333E+00,
        0.25E+00,
        0.307692307692307692307692307692E+00,
        0.651282051282051282051282051282E+00,
        0.6E+00,
        0.857142857142857142857142857142E+00,
        1.0,
    ];

    pub const A: [&[f64]; 12] = [
        &[],
        &[5.26001519587677318785587544488E-2],
        &[1.97250569845378994544595329183E-2, 5.91751709536136983633785987549E-2],
        &[
            2.95875854768068491816892993775E-2,
            0.0,
            8.87627564304205475450678981324E-2,
        ],
        &[
            2.41365134159266685502369798665E-1,
            0.0,
            -8.84549479328286085344864962717E-1,
            9.24834003261792003115737966543E-1,
        ],
        &[
            3.7037037037037037037037037037E-2,
            0.0,
            0.0,
            1.70828608729473871279604482173E-1,
            1.25467687566822425016691814123E-1,
        ],
        &[
            3.7109375E-2,
            0.0,
            0.0,
            1.70252211019544039314978060272E-1,
            6.02165389804559606850219397283E-2,
            -1.7578125E-2,
        ],
        &[
            3.70920001185047927108779319836E-2,
            0.0,
            0.0,
            1.70383925712239993810214054705E-1,
            1.07262030446373284651809199168E-1,
            -1.53194377486244017527936158236E-2,
            8.27378916381402288758473766002E-3,
        ],
        &[
            6.24110958716075717114429577812E-1,
            0.0,
            0.0,
            -3.36089262944694129406857109825E0,
            -8.68219346841726006818189891453E-1,
            2.75920996994467083049415600797E1,
            2.01540675504778934086186788979E1,
            -4.34898841810699588477366255144E1,
        ],
        &[
            4.77662536438264365890433908527E-1,
            0.0,
            0.0,
            -2.48811461997166764192642586468E0,
            -5.90290826836842996371446475743E-1,
            2.12300514481811942347288949897E1,
            1.52792336328824235832596922938E1,
            -3.32882109689848629194453265587E1,
            -2.03312017085086261358222928593E-2,
        ],
        &[
            -9.3714243008598732571704021658E-1,
            0.0,
            0.0,
            5.18637242884406370830023853209E0,
            1.09143734899672957818500254654E0,
            -8.14978701074692612513997267357E0,
            -1.85200656599969598641566180701E1,
            2.27394870993505042818970056734E1,
            2.49360555267965238987089396762E0,
            -3.0467644718982195003823669022E0,
        ],
        &[
            2.27331014751653820792359768449E0,
            0.0,
            0.0,
            -1.05344954667372501984066689879E1,
            -2.00087205822486249909675718444E0,
            -1.79589318631187989172765950534E1,
            2.79488845294199600508499808837E1,
            -2.85899827713502369474065508674E0,
            -8.87285693353062954433549289258E0,
            1.23605671757943030647266201528E1,
            6.43392746015763530355970484046E-1,
        ],
    ];

    pub const B: [f64; 12] = [
        5.42937341165687622380535766363E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        4.45031289275240888144113950566E0,
        1.89151789931450038304281599044E0,
        -5.8012039600105847814672114227E0,
        3.1116436695781989440891606237E-1,
        -1.52160949662516078556178806805E-1,
        2.01365400804030348374776537501E-1,
        4.47106157277725905176885569043E-2,
    ];

    /// Third-order companion weights on stages 1, 9 and 12.
    pub const BHH: [f64; 3] = [
        0.244094488188976377952755905512E+00,
        0.733846688281611857341361741547E+00,
        0.220588235294117647058823529412E-01,
    ];

    /// Fifth-order error weights.
    pub const E: [f64; 12] = [
        0.1312004499419488073250102996E-01,
        0.0,
        0.0,
        0.0,
        0.0,
        -0.1225156446376204440720569753E+01,
        -0.4957589496572501915214079952E+00,
        0.1664377182454986536961530415E+01,
        -0.3503288487499736816886487290E+00,
        0.3341791187130174790297318841E+00,
        0.8192320648511571246570742613E-01,
        -0.2235530786388629525884427845E-01,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub times: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
    /// Sum of accepted local error estimates, in units of the state scale.
    pub est_err: f64,
    /// Right-hand-side evaluations.
    pub cost: u64,
}

type Rhs<'a> = dyn Fn(f64, &[f64; 4], &mut [f64; 4]) -> Result<()> + 'a;

struct Dop853<'a> {
    f: &'a Rhs<'a>,
    atol: f64,
    rtol: f64,
    evals: u64,
    err_sum: f64,
}

impl Dop853<'_> {
    fn rhs(&mut self, t: f64, y: &[f64; 4], out: &mut [f64; 4]) -> Result<()> {
        self.evals += 1;
        if self.evals > EVAL_BUDGET {
            return Err(ArdcError::OracleRefusal(format!(
                "evaluation budget of {EVAL_BUDGET} exhausted at t = {t}"
            )));
        }
        (self.f)(t, y, out)
    }

    fn initial_step(&mut self, t: f64, y: &[f64; 4], f0: &[f64; 4], span: f64) -> Result<f64> {
        let sc: Vec<f64> = y.iter().map(|v| self.atol + v.abs() * self.rtol).collect();
        let norm = |v: &[f64; 4]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / 4.0).sqrt();
        let d0 = norm(y);
        let d1 = norm(f0);
        let mut h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h = h.min(span);
        let mut y1 = [0.0; 4];
        for i in 0..4 {
            y1[i] = y[i] + h * f0[i];
        }
        let mut f1 = [0.0; 4];
        self.rhs(t + h, &y1, &mut f1)?;
        let mut d = [0.0; 4];
        for i in 0..4 {
            d[i] = f1[i] - f0[i];
        }
        let d2 = norm(&d) / h;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        Ok((100.0 * h).min(h1).min(span))
    }

    /// Integrates `y` from `t` to `t_end`, returning the step size to reuse.
    fn advance(&mut self, t: &mut f64, y: &mut [f64; 4], t_end: f64, mut h: f64) -> Result<f64> {
        use tableau::*;
        let mut k = [[0.0f64; 4]; 12];
        while *t < t_end {
            let mut last = false;
            if *t + 1.01 * h >= t_end {
                h = t_end - *t;
                last = true;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(ArdcError::OracleRefusal(format!("reference step underflow at t = {t}")));
            }
            self.rhs(*t, y, &mut k[0])?;
            for s in 1..12 {
                let mut ys = *y;
                for (j, a) in A[s].iter().enumerate() {
                    if *a != 0.0 {
                        for i in 0..4 {
                            ys[i] += h * a * k[j][i];
                        }
                    }
                }
                let mut ks = [0.0; 4];
                self.rhs(*t + C[s] * h, &ys, &mut ks)?;
                k[s] = ks;
            }
            let mut incr = [0.0; 4];
            let mut err5 = [0.0; 4];
            let mut err3 = [0.0; 4];
            for i in 0..4 {
                let mut b = 0.0;
                let mut e = 0.0;
                for s in 0..12 {
                    b += B[s] * k[s][i];
                    e += E[s] * k[s][i];
                }
                incr[i] = b;
                err5[i] = e;
                err3[i] = b - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
            }
            let mut ynew = [0.0; 4];
            let (mut e5, mut e3) = (0.0, 0.0);
            for i in 0..4 {
                ynew[i] = y[i] + h * incr[i];
                let sc = self.atol + y[i].abs().max(ynew[i].abs()) * self.rtol;
                e5 += (err5[i] / sc).powi(2);
                e3 += (err3[i] / sc).powi(2);
            }
            let mut deno = e5 + 0.01 * e3;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = h.abs() * e5 * (1.0 / (4.0 * deno)).sqrt();
            if !err.is_finite() {
                return Err(ArdcError::NonFinite(format!("reference error estimate at t = {t}")));
            }
            let fac = (0.9 * err.max(1e-300).powf(-1.0 / 8.0)).clamp(1.0 / 3.0, 6.0);
            if err <= 1.0 {
                self.err_sum += err * self.rtol.max(self.atol);
                *y = ynew;
                *t = if last { t_end } else { *t + h };
                h *= fac;
            } else {
                h *= fac.min(1.0);
            }
        }
        Ok(h)
    }
}

/// Integrates the problem with an embedded 8th-order pair, reporting `(u, u')`
/// at every time in `times` (sorted, inside `[t0, t1]`).
pub fn rk_reference(ivp: &InitialValueProblem, times: &[f64], abs_tol: f64, rel_tol: f64) -> Result<OracleResult> {
    if !(abs_tol > 0.0 && rel_tol > 0.0) {
        return Err(ArdcError::InvalidParameter(
            "reference tolerances must be positive".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(ArdcError::InvalidParameter(
            "reference output times must be sorted".into(),
        ));
    }
    for &t in times {
        if t < ivp.t0 || t > ivp.t1 {
            return Err(ArdcError::OutOfRange {
                value: t,
                lo: ivp.t0,
                hi: ivp.t1,
            });
        }
    }
    let t_last = times.last().copied().unwrap_or(ivp.t0);
    let periods = estimated_periods(ivp, t_last)?;
    if periods * EVALS_PER_PERIOD > EVAL_BUDGET as f64 {
        return Err(ArdcError::OracleRefusal(format!(
            "about {periods:.3e} periods exceed the reference budget"
        )));
    }

    let coeffs = ivp.coeffs.clone();
    let f = move |t: f64, y: &[f64; 4], out: &mut [f64; 4]| -> Result<()> {
        let w = coeffs.omega(t)?;
        let g = coeffs.gamma(t)?;
        let w2 = w * w;
        out[0] = y[2];
        out[1] = y[3];
        out[2] = -2.0 * g * y[2] - w2 * y[0];
        out[3] = -2.0 * g * y[3] - w2 * y[1];
        Ok(())
    };
    let mut stepper = Dop853 {
        f: &f,
        atol: abs_tol,
        rtol: rel_tol,
        evals: 0,
        err_sum: 0.0,
    };
    let mut y = [ivp.u0.re, ivp.u0.im, ivp.du0.re, ivp.du0.im];
    let mut t = ivp.t0;
    let mut f0 = [0.0; 4];
    stepper.rhs(t, &y, &mut f0)?;
    let mut h = stepper.initial_step(t, &y, &f0, (t_last - t).max(f64::MIN_POSITIVE))?;
    let mut out = OracleResult {
        times: times.to_vec(),
        u: Vec::with_capacity(times.len()),
        du: Vec::with_capacity(times.len()),
        est_err: 0.0,
        cost: 0,
    };
    for &target in times {
        if target > t {
            h = stepper.advance(&mut t, &mut y, target, h)?;
        }
        out.u.push(Complex64::new(y[0], y[1]));
        out.du.push(Complex64::new(y[2], y[3]));
    }
    out.est_err = stepper.err_sum;
    out.cost = stepper.evals;
    Ok(out)
}

fn estimated_periods(ivp: &InitialValueProblem, t_last: f64) -> Result<f64> {
    const SAMPLES: usize = 1000;
    if t_last <= ivp.t0 {
        return Ok(0.0);
    }
    let dt = (t_last - ivp.t0) / SAMPLES as f64;
    let mut acc = 0.0;
    for i in 0..SAMPLES {
        let t = ivp.t0 + (i as f64 + 0.5) * dt;
        acc += ivp.coeffs.omega(t)?.abs() * dt;
    }
    Ok(acc / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::tableau::*;
    use super::*;
    use crate::problem::{BuiltinProblem, CoefficientPair};

    #[test]
    fn tableau_rows_sum_to_nodes() {
        for s in 1..12 {
            let sum: f64 = A[s].iter().sum();
            assert!((sum - C[s]).abs() < 1e-13, "stage {s}: {sum} vs {}", C[s]);
        }
        let bsum: f64 = B.iter().sum();
        assert!((bsum - 1.0).abs() < 1e-13);
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let coeffs = CoefficientPair::new(|_| 1.0, "unit tone");
        let ivp = InitialValueProblem::new(
            coeffs,
            0.0,
            2.0 * std::f64::consts::PI,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            0.1,
        )
        .unwrap();
        let r = rk_reference(&ivp, &[ivp.t1], 1e-14, 1e-14).unwrap();
        assert!((r.u[0].re - 1.0).abs() < 1e-11, "{}", r.u[0]);
        assert!(r.du[0].norm() < 1e-11);
    }

    #[test]
    fn damped_oscillator_matches_closed_form() {
        // u'' + 2 g u' + w^2 u = 0 with u = e^{-g t} cos(sqrt(w^2 - g^2) t)
        let (w, g) = (3.0f64, 0.25f64);
        let coeffs = CoefficientPair::new(move |_| w, "damped").with_gamma(move |_| g);
        let wd = (w * w - g * g).sqrt();
        let ivp =
            InitialValueProblem::new(coeffs, 0.0, 4.0, Complex64::new(1.0, 0.0), Complex64::new(-g, 0.0), 0.1).unwrap();
        let r = rk_reference(&ivp, &[1.0, 4.0], 1e-13, 1e-13).unwrap();
        for (t, u) in r.times.iter().zip(&r.u) {
            let exact = (-g * t).exp() * (wd * t).cos();
            assert!((u.re - exact).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn tighter_tolerance_converges_at_high_order() {
        let ivp = BuiltinProblem::Bremer237 { lambda: 10.0 }.ivp().unwrap();
        let reference = rk_reference(&ivp, &[1.0], 1e-15, 1e-15).unwrap();
        let loose = rk_reference(&ivp, &[1.0], 1e-8, 1e-8).unwrap();
        let tight = rk_reference(&ivp, &[1.0], 1e-10, 1e-10).unwrap();
        let e_loose = (loose.u[0] - reference.u[0]).norm();
        let e_tight = (tight.u[0] - reference.u[0]).norm();
        assert!(tight.cost > loose.cost);
        // error ~ tol, cost ~ tol^{-1/8}: order = ln(e ratio) / ln(cost ratio)
        let order = (e_loose / e_tight).ln() / (tight.cost as f64 / loose.cost as f64).ln();
        assert!(order >= 7.0, "observed order {order} ({e_loose:e} -> {e_tight:e})");
    }

    #[test]
    fn refuses_huge_runs() {
        let ivp = BuiltinProblem::Airy.ivp().unwrap();
        assert!(matches!(
            rk_reference(&ivp, &[ivp.t1], 1e-12, 1e-12),
            Err(ArdcError::OracleRefusal(_))
        ));
    }
}

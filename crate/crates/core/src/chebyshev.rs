//! Fixed-order Chebyshev spectral objects on `[-1, 1]` and their rescaling to
//! an arbitrary step `[t_i, t_i + h]`.
//!
//! Nodes are the Chebyshev extrema `cos(l*pi/n)`, `l = 0..=n`, stored in
//! descending order, so node `0` is the right end of a step and node `n` the
//! left end. Every matrix is built once per `n` and shared through
//! [`basis`], which caches by node count.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ArdcError, Result};

/// Largest node count the registry will build.
pub const MAX_NODES: usize = 64;

/// Above this node count the midpoint interpolation matrix loses accuracy.
pub const ACCURATE_NODES: usize = 40;

/// Spectral operators for a fixed node count `n` (grid of `n + 1` points).
#[derive(Debug, Clone)]
pub struct ChebyshevBasis {
    n: usize,
    std_nodes: Vec<f64>,
    d_std: DMatrix<f64>,
    q_std: DMatrix<f64>,
    w_cc: Vec<f64>,
    l_mid: DMatrix<f64>,
    mid_nodes: Vec<f64>,
    bary_weights: Vec<f64>,
}

/// `cos(k*pi/n)` with the index reduced first, so large products `k*l` keep
/// full accuracy.
fn cos_pi_frac(k: usize, n: usize) -> f64 {
    let m = k % (2 * n);
    // cos(m*pi/n) = sin(pi*(n - 2m)/(2n)), symmetric about the midpoint
    (PI * (n as f64 - 2.0 * m as f64) / (2.0 * n as f64)).sin()
}

impl ChebyshevBasis {
    /// Builds every operator for node count `n`. Prefer [`basis`], which caches.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(ArdcError::InvalidParameter(format!(
                "Chebyshev node count must be >= 2, got {n}"
            )));
        }
        if n > MAX_NODES {
            return Err(ArdcError::InvalidParameter(format!(
                "Chebyshev node count capped at {MAX_NODES}, got {n}"
            )));
        }
        if n > ACCURATE_NODES {
            log::warn!("Chebyshev basis with n = {n} > {ACCURATE_NODES}: midpoint interpolation degrades");
        }
        let np1 = n + 1;
        let nf = n as f64;
        let std_nodes: Vec<f64> = (0..np1).map(|l| cos_pi_frac(l, n)).collect();

        // Differentiation matrix: off-diagonal closed form, diagonal by negative row sum.
        let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
        let mut d_std = DMatrix::<f64>::zeros(np1, np1);
        for i in 0..np1 {
            let mut row_sum = 0.0;
            for j in 0..np1 {
                if i == j {
                    continue;
                }
                // x_i - x_j = 2 sin((i+j)pi/2n) sin((j-i)pi/2n)
                let diff =
                    2.0 * (PI * (i + j) as f64 / (2.0 * nf)).sin() * (PI * (j as f64 - i as f64) / (2.0 * nf)).sin();
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let v = c(i) / c(j) * sign / diff;
                d_std[(i, j)] = v;
                row_sum += v;
            }
            d_std[(i, i)] = -row_sum;
        }

        // Values -> Chebyshev coefficients (inverse DCT-I as a matrix).
        let mut t_inv = DMatrix::<f64>::zeros(np1, np1);
        for k in 0..np1 {
            let ck = if k == 0 || k == n { 0.5 } else { 1.0 };
            for l in 0..np1 {
                let wl = if l == 0 || l == n { 0.5 } else { 1.0 };
                t_inv[(k, l)] = 2.0 / nf * ck * wl * cos_pi_frac(k * l, n);
            }
        }

        // Coefficients of the antiderivative (degree n + 1), fixed so F(-1) = 0.
        let mut b = DMatrix::<f64>::zeros(n + 2, np1);
        b[(1, 0)] += 1.0;
        if n >= 2 {
            b[(1, 2)] -= 0.5;
        }
        for k in 2..=(n + 1) {
            let kf = k as f64;
            if k - 1 <= n {
                b[(k, k - 1)] += 1.0 / (2.0 * kf);
            }
            if k < n {
                b[(k, k + 1)] -= 1.0 / (2.0 * kf);
            }
        }
        for col in 0..np1 {
            let mut s = 0.0;
            for k in 1..(n + 2) {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * b[(k, col)];
            }
            b[(0, col)] = -s;
        }
        let mut eval_ext = DMatrix::<f64>::zeros(np1, n + 2);
        for l in 0..np1 {
            for k in 0..(n + 2) {
                eval_ext[(l, k)] = cos_pi_frac(k * l, n);
            }
        }
        let mut q_std = &eval_ext * (&b * &t_inv);
        for j in 0..np1 {
            q_std[(n, j)] = 0.0;
        }

        let w_cc = clenshaw_curtis_weights(n);

        // Midpoints on the half circle and the node -> midpoint interpolation matrix.
        let mid_nodes: Vec<f64> = (0..n).map(|l| (PI * (2 * l + 1) as f64 / (2.0 * nf)).cos()).collect();
        let mut v_mid = DMatrix::<f64>::zeros(n, np1);
        for l in 0..n {
            let theta = PI * (2 * l + 1) as f64 / (2.0 * nf);
            for k in 0..np1 {
                v_mid[(l, k)] = (k as f64 * theta).cos();
            }
        }
        let l_mid = &v_mid * &t_inv;

        let bary_weights = (0..np1)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();

        Ok(Self {
            n,
            std_nodes,
            d_std,
            q_std,
            w_cc,
            l_mid,
            mid_nodes,
            bary_weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn std_nodes(&self) -> &[f64] {
        &self.std_nodes
    }

    pub fn d_std(&self) -> &DMatrix<f64> {
        &self.d_std
    }

    pub fn q_std(&self) -> &DMatrix<f64> {
        &self.q_std
    }

    pub fn w_cc(&self) -> &[f64] {
        &self.w_cc
    }

    pub fn l_mid(&self) -> &DMatrix<f64> {
        &self.l_mid
    }

    /// Midpoints on `[-1, 1]`, `cos((2l + 1) pi / 2n)`, `l = 0..n`.
    pub fn std_midpoints(&self) -> &[f64] {
        &self.mid_nodes
    }

    /// Nodes on `[t_i, t_i + h]`: `t_i + h/2 (1 + cos(l pi / n))`.
    pub fn scaled_nodes(&self, t_i: f64, h: f64) -> Result<Vec<f64>> {
        check_h(h)?;
        Ok(self.map_nodes(&self.std_nodes, t_i, h))
    }

    /// Midpoints `tau*_l` on `[t_i, t_i + h]`.
    pub fn scaled_midpoints(&self, t_i: f64, h: f64) -> Result<Vec<f64>> {
        check_h(h)?;
        Ok(self.map_nodes(&self.mid_nodes, t_i, h))
    }

    fn map_nodes(&self, x: &[f64], t_i: f64, h: f64) -> Vec<f64> {
        let half = 0.5 * h;
        let mut out: Vec<f64> = x.iter().map(|&s| t_i + half * (1.0 + s)).collect();
        // pin the end nodes so steps tile exactly
        if x.len() == self.n + 1 {
            out[0] = t_i + h;
            out[self.n] = t_i;
        }
        out
    }

    pub fn scaled_diff(&self, h: f64) -> Result<DMatrix<f64>> {
        check_h(h)?;
        Ok(&self.d_std * (2.0 / h))
    }

    pub fn scaled_antideriv(&self, h: f64) -> Result<DMatrix<f64>> {
        check_h(h)?;
        Ok(&self.q_std * (0.5 * h))
    }

    pub fn scaled_quad_weights(&self, h: f64) -> Result<Vec<f64>> {
        check_h(h)?;
        Ok(self.w_cc.iter().map(|w| w * 0.5 * h).collect())
    }

    /// `(2/h) D x` for complex node values.
    ///
    /// The first value is subtracted before multiplying (`D` annihilates
    /// constants), so constant data differentiate to exactly zero.
    pub fn diff_c(&self, h: f64, x: &[Complex64]) -> Vec<Complex64> {
        let s = 2.0 / h;
        let x0 = x[0];
        let shifted: Vec<Complex64> = x.iter().map(|v| v - x0).collect();
        mat_cvec(&self.d_std, &shifted).into_iter().map(|v| v * s).collect()
    }

    /// `(2/h) D f` for real node values, with the same constant shift as
    /// [`Self::diff_c`].
    pub fn diff_r(&self, h: f64, f: &[f64]) -> Vec<f64> {
        let s = 2.0 / h;
        let f0 = f[0];
        let shifted: Vec<f64> = f.iter().map(|v| v - f0).collect();
        mat_rvec(&self.d_std, &shifted).into_iter().map(|v| v * s).collect()
    }

    /// `(h/2) Q x`: antiderivative samples vanishing at `t_i` (node `n`).
    pub fn antideriv_c(&self, h: f64, x: &[Complex64]) -> Vec<Complex64> {
        let s = 0.5 * h;
        let mut out: Vec<Complex64> = mat_cvec(&self.q_std, x).into_iter().map(|v| v * s).collect();
        out[self.n] = Complex64::new(0.0, 0.0);
        out
    }

    /// Clenshaw-Curtis quadrature of node values over a step of length `h`.
    pub fn quad_c(&self, h: f64, x: &[Complex64]) -> Complex64 {
        let s: Complex64 = self.w_cc.iter().zip(x).map(|(w, v)| v * *w).sum();
        s * (0.5 * h)
    }

    pub fn quad_r(&self, h: f64, f: &[f64]) -> f64 {
        let s: f64 = self.w_cc.iter().zip(f).map(|(w, v)| w * v).sum();
        s * 0.5 * h
    }

    /// Values of the degree-`n` interpolant at the `n` midpoints.
    pub fn interpolate_to_midpoints(&self, f_nodes: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f_nodes.len())?;
        if f_nodes.iter().any(|v| !v.is_finite()) {
            return Err(ArdcError::NonFinite("midpoint interpolation input".into()));
        }
        Ok(mat_rvec(&self.l_mid, f_nodes))
    }

    /// Evaluates the interpolant through `(tau_l, f_l)` at `t_query` by the
    /// second barycentric formula. Exact at nodes.
    pub fn barycentric_eval(&self, f_nodes: &[Complex64], t_i: f64, h: f64, t_query: f64) -> Result<Complex64> {
        check_h(h)?;
        self.check_len(f_nodes.len())?;
        let hi = t_i + h;
        if !(t_query >= t_i && t_query <= hi) {
            return Err(ArdcError::OutOfRange {
                value: t_query,
                lo: t_i,
                hi,
            });
        }
        let nodes = self.map_nodes(&self.std_nodes, t_i, h);
        if let Some(j) = nodes.iter().position(|&tj| tj == t_query) {
            return Ok(f_nodes[j]);
        }
        let x = 2.0 * (t_query - t_i) / h - 1.0;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..=self.n {
            let dx = x - self.std_nodes[j];
            if dx == 0.0 {
                return Ok(f_nodes[j]);
            }
            let c = self.bary_weights[j] / dx;
            num += f_nodes[j] * c;
            den += c;
        }
        Ok(num / den)
    }

    pub fn barycentric_eval_r(&self, f_nodes: &[f64], t_i: f64, h: f64, t_query: f64) -> Result<f64> {
        let c: Vec<Complex64> = f_nodes.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.barycentric_eval(&c, t_i, h, t_query)?.re)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n + 1 {
            return Err(ArdcError::InvalidParameter(format!(
                "expected {} node values, got {len}",
                self.n + 1
            )));
        }
        Ok(())
    }
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(ArdcError::InvalidParameter(format!(
            "step length must be positive and finite, got {h}"
        )));
    }
    Ok(())
}

/// Clenshaw-Curtis weights on `[-1, 1]` for the nodes `cos(l pi / n)`.
fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let theta = |l: usize| PI * l as f64 / nf;
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for (l, wl) in w.iter_mut().enumerate().take(n).skip(1) {
            let mut v = 1.0;
            for k in 1..(n / 2) {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta(l)).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (nf * theta(l)).cos() / (nf * nf - 1.0);
            *wl = 2.0 * v / nf;
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for (l, wl) in w.iter_mut().enumerate().take(n).skip(1) {
            let mut v = 1.0;
            for k in 1..=((n - 1) / 2) {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta(l)).cos() / (4.0 * kf * kf - 1.0);
            }
            *wl = 2.0 * v / nf;
        }
    }
    w
}

pub(crate) fn mat_cvec(m: &DMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
    let (rows, cols) = m.shape();
    debug_assert_eq!(cols, x.len());
    (0..rows)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                acc += xj * m[(i, j)];
            }
            acc
        })
        .collect()
}

pub(crate) fn mat_rvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let (rows, cols) = m.shape();
    debug_assert_eq!(cols, x.len());
    (0..rows)
        .map(|i| x.iter().enumerate().map(|(j, xj)| m[(i, j)] * xj).sum())
        .collect()
}

static REGISTRY: OnceLock<Mutex<HashMap<usize, Arc<ChebyshevBasis>>>> = OnceLock::new();

/// Shared, lazily built basis for node count `n`.
pub fn basis(n: usize) -> Result<Arc<ChebyshevBasis>> {
    let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = reg.lock().expect("basis registry poisoned").get(&n) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(ChebyshevBasis::new(n)?);
    let mut guard = reg.lock().expect("basis registry poisoned");
    Ok(Arc::clone(guard.entry(n).or_insert(built)))
}

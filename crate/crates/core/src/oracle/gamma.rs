//! Log-gamma by the Stirling series with an upward shift of small arguments.

use std::f64::consts::PI;

use crate::error::{ArdcError, Result};

const SHIFT_TO: f64 = 10.0;

// B_{2k} / (2k (2k - 1)) for k = 1..7
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

fn stirling_tail(z: f64) -> f64 {
    let zi = 1.0 / z;
    let z2 = zi * zi;
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * z2 + c;
    }
    acc * zi
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(ArdcError::Domain { t: x });
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let mut z = x;
    let mut log_prod = 0.0;
    if z < SHIFT_TO {
        let mut prod = 1.0;
        while z < SHIFT_TO {
            prod *= z;
            z += 1.0;
        }
        log_prod = prod.ln();
    }
    let val = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + stirling_tail(z);
    Ok(val - log_prod)
}

/// `ln Gamma(x + 1/2) - ln Gamma(x + 1)` for `x >= 0`, free of the
/// cancellation a plain difference suffers at large `x`.
pub fn ln_gamma_ratio_half(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(ArdcError::Domain { t: x });
    }
    if x < SHIFT_TO {
        return Ok(ln_gamma(x + 0.5)? - ln_gamma(x + 1.0)?);
    }
    // (z1 - 1/2) ln z1 - (z2 - 1/2) ln z2 - (z1 - z2) with z1 = x + 1/2, z2 = x + 1
    let main = x * (-0.5 / (x + 1.0)).ln_1p() + 0.5 - 0.5 * (x + 1.0).ln();
    Ok(main + stirling_tail(x + 0.5) - stirling_tail(x + 1.0))
}

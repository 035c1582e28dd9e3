use std::f64::consts::E;

use crate::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;

/// Principal branch of the Lambert W function: the `w ≥ −1` solving
/// `w·e^w = z`, for `z ≥ −1/e`.
pub fn lambert_w(z: f64) -> Result<f64> {
    if z.is_nan() || z < BRANCH_POINT - 1e-15 {
        return Err(Error::OutOfDomain(z));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if z > E {
        return Ok(lambert_w_exp(z.ln()));
    }
    let mut w = if z < -0.3 {
        // Series about the branch point in p = √(2(ez + 1)).
        let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        z.ln_1p()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if !(dw.abs() > 4.0 * f64::EPSILON * (1.0 + w.abs())) {
            break;
        }
    }
    Ok(w)
}

/// `W(e^x)` without forming `e^x`, so it stays finite for any real `x`.
pub fn lambert_w_exp(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 1.0 {
        // e^x < e: no overflow, and the direct iteration is well conditioned.
        return lambert_w(x.exp()).unwrap_or(f64::NAN);
    }
    if x == f64::INFINITY {
        return x;
    }
    // Newton on w + ln w = x.
    let mut w = x - x.ln();
    for _ in 0..64 {
        let dw = (w + w.ln() - x) * w / (w + 1.0);
        w -= dw;
        if !(dw.abs() > 4.0 * f64::EPSILON * w) {
            break;
        }
    }
    w
}

//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITER: usize = 50;
const REL_TOL: f64 = 1e-14;

/// Principal branch W₀(x), the solution w ≥ −1 of w·eʷ = x.
///
/// Halley iteration from a log-based starting guess (branch-point series
/// close to −1/e).
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch {
        return Err(Error::Domain {
            function: "lambert_w0",
            value: x,
            constraint: "x >= -1/e",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == branch {
        return Ok(-1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= REL_TOL * w.abs().max(1e-300) {
            return Ok(w.max(-1.0));
        }
    }
    // Halley stalls only in the last ulp; accept if the residual is tight.
    let resid = (w * w.exp() - x).abs();
    if resid <= 1e-12 * x.abs().max(1.0) {
        Ok(w.max(-1.0))
    } else {
        Err(Error::numerical(
            "lambert_w0",
            format!("no convergence for x = {x}, residual {resid:e}"),
        ))
    }
}

/// W₀(eᴸ) for arguments given by their natural logarithm.
///
/// Used where the argument itself would overflow a double. Solves
/// w + ln w = L by Newton iteration.
pub fn lambert_w0_of_exp(log_x: f64) -> Result<f64> {
    if log_x < 1.0 {
        return lambert_w0(log_x.exp());
    }
    let mut w = if log_x > 3.0 {
        log_x - log_x.ln()
    } else {
        1.0
    };
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - log_x;
        let step = f / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= REL_TOL * w {
            return Ok(w);
        }
    }
    Err(Error::numerical(
        "lambert_w0_of_exp",
        format!("no convergence for ln x = {log_x}"),
    ))
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < E {
        x.ln_1p() * (1.0 - x.ln_1p() / (2.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

//! Special functions and Gaussian-state linear algebra.

mod bessel;
mod gaussian;
mod lambert;

pub use bessel::{bessel_i, bessel_i_scaled, i0, i0e, i1, i1e, BesselOrder};
pub use gaussian::{
    condition_on_homodyne, symplectic_eigenvalues, symplectic_form, CovarianceMatrix, Quadrature,
};
pub use lambert::{lambert_w0, lambert_w0_of_exp};

use crate::error::{Error, Result};

/// Entropy (bits) of a thermal mode with symplectic eigenvalue `x`.
///
/// Values in [1 − 1e-9, 1] are treated as exactly 1.
pub fn g_function(x: f64) -> Result<f64> {
    if x.is_nan() || x < 1.0 - 1e-9 {
        return Err(Error::Domain {
            function: "g_function",
            value: x,
            constraint: "x >= 1",
        });
    }
    if x <= 1.0 {
        return Ok(0.0);
    }
    let plus = 0.5 * (x + 1.0);
    let minus = 0.5 * (x - 1.0);
    Ok(plus * plus.log2() - minus * minus.log2())
}

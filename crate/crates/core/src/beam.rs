//! Aperture transmittance of an elliptic Gaussian beam.
//!
//! A beam realization is the centroid offset (x, y), the log squared
//! semi-axis ratios θᵢ = ln(Wᵢ²/W₀²) and the orientation φ of the ellipse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{i0e, i1e, lambert_w0_of_exp};

/// Below this r₀²W² the shaping quantities are summed from their series.
const SERIES_SWITCH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSample {
    pub x: f64,
    pub y: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Orientation of the first semi-axis, in [0, π).
    pub phi: f64,
    /// Beam waist W₀ the θ values are referred to.
    pub waist: f64,
}

impl BeamSample {
    /// A circular beam of radius `radius` centred at (x, y).
    pub fn circular(x: f64, y: f64, radius: f64) -> Self {
        Self {
            x,
            y,
            theta1: 0.0,
            theta2: 0.0,
            phi: 0.0,
            waist: radius,
        }
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        (
            self.waist * (0.5 * self.theta1).exp(),
            self.waist * (0.5 * self.theta2).exp(),
        )
    }
}

/// λ and R as functions of a = r₀²W².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeScale {
    pub lambda: f64,
    pub scale: f64,
}

/// Computes (λ, R) for a = r₀²W².
///
/// Fails with a numerical error when the logarithm inside R is not
/// positive, which leaves R undefined.
pub fn shape_and_scale(a: f64) -> Result<ShapeScale> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::Domain {
            function: "shape_and_scale",
            value: a,
            constraint: "0 <= r0^2 W^2 < inf",
        });
    }
    if a < 1e-300 {
        return Ok(ShapeScale {
            lambda: 2.0,
            scale: f64::INFINITY,
        });
    }
    // f = 1 − e^{−a}I₀(a), h = 2(1 − e^{−a/2}) − f, so the log argument is 1 + h/f.
    let (f, h) = if a < SERIES_SWITCH {
        small_argument_terms(a)
    } else {
        let s0 = i0e(a);
        (1.0 - s0, 1.0 - 2.0 * (-0.5 * a).exp() + s0)
    };
    let log_arg = (h / f).ln_1p();
    if !(log_arg > 0.0) || !log_arg.is_finite() {
        return Err(Error::numerical(
            "beam.scaling_r",
            format!("log argument {} <= 1 at r0^2 W^2 = {a:e}", 1.0 + h / f),
        ));
    }
    let lambda = 2.0 * a * i1e(a) / f / log_arg;
    let scale = log_arg.powf(-1.0 / lambda);
    Ok(ShapeScale { lambda, scale })
}

/// Series of 1 − e^{−a}I₀(a) and 1 − 2e^{−a/2} + e^{−a}I₀(a), using
/// e^{−a}I₀(a) = Σ (½)ₖ/(k!)² (−2a)ᵏ.
fn small_argument_terms(a: f64) -> (f64, f64) {
    let mut u = 1.0;
    let mut v = 1.0;
    let mut f = 0.0;
    let mut h = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        u *= (kf - 0.5) / (kf * kf) * (-2.0 * a);
        v *= -0.5 * a / kf;
        f -= u;
        if k >= 2 {
            h += u - 2.0 * v;
        }
        if u.abs() < 1e-18 * f.abs() && v.abs() < 1e-18 * h.abs() {
            break;
        }
    }
    (f, h)
}

/// Shaping function λ(W).
pub fn shaping_lambda(w: f64, r0: f64) -> Result<f64> {
    Ok(shape_and_scale(r0 * r0 * w * w)?.lambda)
}

/// Scaling function R(W).
pub fn scaling_r(w: f64, r0: f64) -> Result<f64> {
    Ok(shape_and_scale(r0 * r0 * w * w)?.scale)
}

/// 4r₀²/W_eff²(φ), i.e. the Lambert-W value that defines the effective
/// spot radius. Evaluated in log space so large r₀/Wᵢ do not overflow.
fn effective_argument(phi: f64, w1: f64, w2: f64, r0: f64) -> Result<f64> {
    let (s, c) = phi.sin_cos();
    let r02 = r0 * r0;
    let log_arg = (4.0 * r02 / (w1 * w2)).ln()
        + r02 / (w1 * w1) * (1.0 + 2.0 * c * c)
        + r02 / (w2 * w2) * (1.0 + 2.0 * s * s);
    lambert_w0_of_exp(log_arg)
}

/// Effective squared spot radius W_eff²(φ), m².
pub fn effective_radius_sq(phi: f64, w1: f64, w2: f64, r0: f64) -> Result<f64> {
    check_positive(w1, w2, r0)?;
    Ok(4.0 * r0 * r0 / effective_argument(phi, w1, w2, r0)?)
}

/// Maximal transmissivity T₀, attained for a centred beam.
pub fn max_transmissivity(w1: f64, w2: f64, r0: f64) -> Result<f64> {
    check_positive(w1, w2, r0)?;
    let r02 = r0 * r0;
    let b = (r02 * (1.0 / (w1 * w1) - 1.0 / (w2 * w2))).abs();
    let c = r02 * (1.0 / (w1 * w1) + 1.0 / (w2 * w2));
    // 1 − I₀(b)e^{−c}, kept accurate when the product is close to 1.
    let circular_part = -(b - c + i0e(b).ln()).exp_m1();

    let d = 1.0 / w1 - 1.0 / w2;
    let elliptic_part = if d.abs() < 1e-9 / w1 {
        0.0
    } else {
        let a = r02 * d * d;
        let ss = shape_and_scale(a)?;
        let ratio = (w1 + w2) * (w1 + w2) / (w1 * w1 - w2 * w2).abs() / ss.scale;
        2.0 * (-(-0.5 * a).exp_m1()) * (-ratio.powf(ss.lambda)).exp()
    };
    Ok((circular_part - elliptic_part).clamp(0.0, 1.0))
}

/// Transmissivity of one beam realization through an aperture of radius r₀.
pub fn transmissivity(sample: &BeamSample, r0: f64) -> Result<f64> {
    let (w1, w2) = sample.semi_axes();
    transmissivity_of(sample.x, sample.y, w1, w2, sample.phi, r0)
}

/// Transmissivity for explicit semi-axes.
pub fn transmissivity_of(x: f64, y: f64, w1: f64, w2: f64, phi: f64, r0: f64) -> Result<f64> {
    let t0 = max_transmissivity(w1, w2, r0)?;
    let offset = x.hypot(y);
    if offset == 0.0 {
        return Ok(t0);
    }
    let rel_angle = phi - y.atan2(x);
    let a = effective_argument(rel_angle, w1, w2, r0)?;
    let ss = shape_and_scale(a)?;
    let exponent = (offset / (r0 * ss.scale)).powf(ss.lambda);
    Ok(t0 * (-exponent).exp())
}

fn check_positive(w1: f64, w2: f64, r0: f64) -> Result<()> {
    for (name, value) in [("W1", w1), ("W2", w2), ("r0", r0)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "beam and aperture radii must be positive",
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    const R0: f64 = 0.04;

    #[test]
    fn shaping_reference_values() {
        // 30-digit references from tests/oracle/reference_values.py
        assert!(rel(shaping_lambda(50.0, R0).unwrap(), 2.312_896_075_706_476_8) < 1e-12);
        assert!(rel(scaling_r(50.0, R0).unwrap(), 1.113_611_466_078_763_1) < 1e-12);
        let w = |a: f64| a.sqrt() / R0;
        let cases = [
            (1e-3, 2.000_000_000_010_416_7, 44.726_950_301_290_757),
            (0.3, 2.000_279_104_691_525_4, 2.681_351_559_302_607_2),
            (300.0, 19.719_218_621_133_375, 1.017_052_842_316_375),
        ];
        for (a, lam, r) in cases {
            assert!(rel(shaping_lambda(w(a), R0).unwrap(), lam) < 1e-11, "a = {a}");
            assert!(rel(scaling_r(w(a), R0).unwrap(), r) < 1e-11, "a = {a}");
        }
    }

    #[test]
    fn small_argument_limit() {
        let l6 = shaping_lambda(1e-3 / R0, R0).unwrap();
        let l8 = shaping_lambda(1e-4 / R0, R0).unwrap();
        assert!((l6 - l8).abs() < 1e-4);
        assert!((l8 - 2.0).abs() < 1e-9);
        assert_eq!(shape_and_scale(0.0).unwrap().lambda, 2.0);
    }

    #[test]
    fn series_and_direct_branches_agree() {
        for a in [0.45, 0.5, 0.55] {
            let (f, h) = small_argument_terms(a);
            let s0 = i0e(a);
            assert!(rel(f, 1.0 - s0) < 1e-13);
            assert!(rel(h, 1.0 - 2.0 * (-0.5 * a).exp() + s0) < 1e-11);
        }
    }

    #[test]
    fn shaping_is_even() {
        for w in [0.3, 7.0, 55.0] {
            assert_eq!(shaping_lambda(w, R0).unwrap(), shaping_lambda(-w, R0).unwrap());
            assert_eq!(scaling_r(w, R0).unwrap(), scaling_r(-w, R0).unwrap());
        }
    }

    #[test]
    fn effective_radius_circular_and_periodic() {
        let w = 0.025;
        for phi in [0.0, 0.3, 1.2, 2.9] {
            assert!(rel(effective_radius_sq(phi, w, w, R0).unwrap(), w * w) < 1e-13);
        }
        let a = effective_radius_sq(0.7, 0.02, 0.03, R0).unwrap();
        let b = effective_radius_sq(0.7 + PI, 0.02, 0.03, R0).unwrap();
        assert!(rel(a, b) < 1e-13);
        assert!(rel(a, 5.410_082_060_645_289_5e-4) < 1e-12);
    }

    #[test]
    fn max_transmissivity_values() {
        let w = 0.03;
        let want = 1.0 - (-2.0 * R0 * R0 / (w * w)).exp();
        assert!(rel(max_transmissivity(w, w, R0).unwrap(), want) < 1e-14);
        assert!(rel(max_transmissivity(R0 / 2.0, R0 / 2.0, R0).unwrap(), 1.0 - (-8.0f64).exp()) < 1e-14);
        assert!((max_transmissivity(R0 / 2.0, R0 / 2.0, R0).unwrap() - 0.999_664_5).abs() < 1e-7);
        let t = max_transmissivity(0.02, 0.05, R0).unwrap();
        assert!(rel(t, 0.872_788_820_552_122_9) < 1e-12);
        assert!(rel(max_transmissivity(0.3, 0.2, R0).unwrap(), 0.051_823_944_285_633_22) < 1e-11);
        // Nearly circular: the elliptic correction must vanish smoothly.
        let near = max_transmissivity(0.03, 0.03 * (1.0 + 1e-7), R0).unwrap();
        assert!(rel(near, want) < 1e-6);
    }

    #[test]
    fn centred_beam_gets_max() {
        let s = BeamSample {
            x: 0.0,
            y: 0.0,
            theta1: 0.4,
            theta2: -0.2,
            phi: 1.0,
            waist: 0.02,
        };
        let (w1, w2) = s.semi_axes();
        assert_eq!(
            transmissivity(&s, R0).unwrap(),
            max_transmissivity(w1, w2, R0).unwrap()
        );
    }

    #[test]
    fn circular_beam_isotropic_and_monotone() {
        let w = 0.03;
        let d = 0.05;
        let base = transmissivity(&BeamSample::circular(d, 0.0, w), R0).unwrap();
        for ang in [0.4f64, 1.9, 3.3, 5.0] {
            let s = BeamSample::circular(d * ang.cos(), d * ang.sin(), w);
            assert!(rel(transmissivity(&s, R0).unwrap(), base) < 1e-12);
        }
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let d = 5.0 * R0 * k as f64 / 199.0;
            let t = transmissivity(&BeamSample::circular(d, 0.0, w), R0).unwrap();
            assert!(t <= prev);
            prev = t;
        }
    }

    #[test]
    fn circular_reduction_formula() {
        let w = 0.035;
        let ss = shape_and_scale(R0 * R0 * 4.0 / (w * w)).unwrap();
        let t0 = max_transmissivity(w, w, R0).unwrap();
        for d in [0.01, 0.04, 0.09] {
            let want = t0 * (-(d / (R0 * ss.scale)).powf(ss.lambda)).exp();
            let got = transmissivity(&BeamSample::circular(0.6 * d, 0.8 * d, w), R0).unwrap();
            assert!(rel(got, want) < 1e-12, "d = {d}");
        }
    }
}

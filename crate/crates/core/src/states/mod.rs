//! Source states: the two-mode squeezed vacuum and its photon-subtracted
//! (T-PS) and photon-added (T-PA) descendants.
//!
//! T-PS is realized by adding photons to mode A of the TMSV, which yields
//! the photon-subtracted state with the higher photon-addition success
//! probability. Both engineered schemes therefore herald with P_{A,N}.

mod fock;

pub use fock::{
    beam_splitter_amplitude, default_cutoff, fock_ket, heralded_state, oracle_cm_from_fock,
    oracle_covariance, FockTwoModeState, HeraldOutcome, HeraldSetup,
};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::CovarianceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "tmsv", alias = "TMSV")]
    Tmsv,
    #[serde(rename = "t-ps", alias = "T-PS")]
    PhotonSubtracted,
    #[serde(rename = "t-pa", alias = "T-PA")]
    PhotonAdded,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Tmsv, Scheme::PhotonSubtracted, Scheme::PhotonAdded];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Tmsv => "TMSV",
            Scheme::PhotonSubtracted => "T-PS",
            Scheme::PhotonAdded => "T-PA",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tmsv" => Ok(Scheme::Tmsv),
            "t-ps" | "tps" | "pss" => Ok(Scheme::PhotonSubtracted),
            "t-pa" | "tpa" | "pas" => Ok(Scheme::PhotonAdded),
            _ => Err(Error::config("scheme", format!("unknown scheme `{s}`"))),
        }
    }
}

/// Source preparation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pub scheme: Scheme,
    /// Mean photon number α² of the initial TMSV.
    pub alpha2: f64,
    /// Beam-splitter transmissivity T_S.
    pub t_s: f64,
    /// Photons added or subtracted.
    pub photons: u32,
    /// Multiplier on the heralding probability (1 = ideal Fock sources and
    /// detectors).
    pub herald_efficiency: f64,
}

impl SourceParams {
    pub fn new(scheme: Scheme, alpha2: f64, t_s: f64, photons: u32) -> Result<Self> {
        let p = Self {
            scheme,
            alpha2,
            t_s,
            photons: if scheme == Scheme::Tmsv { 0 } else { photons },
            herald_efficiency: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn tmsv(alpha2: f64) -> Result<Self> {
        Self::new(Scheme::Tmsv, alpha2, 1.0, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha2 >= 0.0 && self.alpha2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha2",
                value: self.alpha2,
                reason: "mean photon number must be non-negative",
            });
        }
        if !(self.t_s > 0.0 && self.t_s <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "t_s",
                value: self.t_s,
                reason: "beam-splitter transmissivity must lie in (0, 1]",
            });
        }
        if self.scheme == Scheme::Tmsv && self.photons != 0 {
            return Err(Error::InvalidParameter {
                name: "photons",
                value: self.photons as f64,
                reason: "TMSV has no photon addition or subtraction",
            });
        }
        if !(self.herald_efficiency > 0.0 && self.herald_efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "herald_efficiency",
                value: self.herald_efficiency,
                reason: "must lie in (0, 1]",
            });
        }
        Ok(())
    }
}

/// Two-mode covariance matrix of the form [[x·I, z·σ_z], [z·σ_z, y·I]],
/// x for mode A and y for mode B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeCm {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl TwoModeCm {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// xy − z², whose square is the determinant.
    pub fn reduced_determinant(&self) -> f64 {
        self.x * self.y - self.z * self.z
    }

    pub fn is_physical(&self) -> bool {
        self.x >= 1.0 - 1e-9 && self.y >= 1.0 - 1e-9 && self.reduced_determinant() >= 1.0 - 1e-9
    }

    pub fn to_covariance(&self) -> CovarianceMatrix {
        let Self { x, y, z } = *self;
        #[rustfmt::skip]
        let data = [
            x, 0.0, z, 0.0,
            0.0, x, 0.0, -z,
            z, 0.0, y, 0.0,
            0.0, -z, 0.0, y,
        ];
        CovarianceMatrix::new(DMatrix::from_row_slice(4, 4, &data))
            .expect("two-mode standard form is symmetric")
    }

    /// Two-mode symplectic eigenvalues ½[√((x+y)² − 4z²) ± (y − x)],
    /// larger first.
    pub fn symplectic_eigenvalues(&self) -> [f64; 2] {
        let Self { x, y, z } = *self;
        let root = ((x + y) * (x + y) - 4.0 * z * z).max(0.0).sqrt();
        let a = 0.5 * (root + (y - x));
        let b = 0.5 * (root - (y - x));
        if a >= b {
            [a, b]
        } else {
            [b, a]
        }
    }
}

pub fn tmsv_cm(alpha2: f64) -> TwoModeCm {
    let v = 1.0 + 2.0 * alpha2;
    TwoModeCm::new(v, v, 2.0 * (alpha2 * alpha2 + alpha2).sqrt())
}

/// Squeezing of the TMSV in dB, with sinh²r = α².
pub fn squeezing_db(alpha2: f64) -> f64 {
    let r = alpha2.sqrt().asinh();
    -10.0 * (-2.0 * r).exp().log10()
}

/// P_{S,N}: probability of detecting N photons in the reflected port.
pub fn subtraction_probability(alpha2: f64, t_s: f64, photons: u32) -> f64 {
    let denom = 1.0 + alpha2 - alpha2 * t_s;
    (alpha2 * (1.0 - t_s)).powi(photons as i32) / denom.powi(photons as i32 + 1)
}

/// P_{A,N}: probability of detecting vacuum after injecting N photons.
pub fn addition_probability(alpha2: f64, t_s: f64, photons: u32) -> f64 {
    let denom = 1.0 + alpha2 - alpha2 * t_s;
    let p = ((alpha2 + 1.0) * (1.0 - t_s)).powi(photons as i32) / denom.powi(photons as i32 + 1);
    if p > 1.0 {
        log::warn!("P_A,N = {p} exceeds 1 at alpha2 = {alpha2}, T_S = {t_s}, N = {photons}");
    }
    p
}

/// Effective TMSV transmissivity T = α²T_S/(1 + α²).
fn effective_t(alpha2: f64, t_s: f64) -> f64 {
    alpha2 * t_s / (1.0 + alpha2)
}

/// Photon-subtracted state: larger variance x on mode A.
pub fn pss_cm(alpha2: f64, t_s: f64, photons: u32) -> TwoModeCm {
    let t = effective_t(alpha2, t_s);
    let n = photons as f64;
    let one_minus = 1.0 - t;
    TwoModeCm::new(
        1.0 + 2.0 * (n + t) / one_minus,
        1.0 + 2.0 * (n + 1.0) * t / one_minus,
        2.0 * t.sqrt() * (n + 1.0) / one_minus,
    )
}

/// Photon-added state: the PSS with the mode variances swapped.
pub fn pas_cm(alpha2: f64, t_s: f64, photons: u32) -> TwoModeCm {
    let s = pss_cm(alpha2, t_s, photons);
    TwoModeCm::new(s.y, s.x, s.z)
}

/// Covariance matrix of the state Alice prepares.
pub fn source_cm(params: &SourceParams) -> TwoModeCm {
    match params.scheme {
        Scheme::Tmsv => tmsv_cm(params.alpha2),
        Scheme::PhotonSubtracted => pss_cm(params.alpha2, params.t_s, params.photons),
        Scheme::PhotonAdded => pas_cm(params.alpha2, params.t_s, params.photons),
    }
}

/// Heralding probability P_N: 1 for TMSV, P_{A,N} for both engineered
/// schemes, scaled by the herald efficiency.
pub fn success_probability(params: &SourceParams) -> f64 {
    let p = match params.scheme {
        Scheme::Tmsv => 1.0,
        Scheme::PhotonSubtracted | Scheme::PhotonAdded => {
            addition_probability(params.alpha2, params.t_s, params.photons)
        }
    };
    p * params.herald_efficiency
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tmsv_values() {
        assert_eq!(tmsv_cm(0.0), TwoModeCm::new(1.0, 1.0, 0.0));
        let c = tmsv_cm(20.0);
        assert_eq!(c.x, 41.0);
        assert_eq!(c.y, 41.0);
        assert!((c.z - 2.0 * 420f64.sqrt()).abs() < 1e-12);
        for a in [0.3, 2.0, 17.0, 80.0] {
            assert!((tmsv_cm(a).reduced_determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn squeezing() {
        assert_eq!(squeezing_db(0.0), 0.0);
        // α² ≈ 10 corresponds to about 16 dB.
        assert!((squeezing_db(10.0) - 16.0).abs() < 0.5);
        assert!(squeezing_db(11.0) > squeezing_db(10.0));
    }

    #[test]
    fn probabilities() {
        assert_eq!(subtraction_probability(3.0, 1.0, 2), 0.0);
        assert_eq!(addition_probability(3.0, 1.0, 2), 0.0);
        assert!((subtraction_probability(1.0, 0.5, 1) - 0.5 / 2.25).abs() < 1e-15);
        let ratio = addition_probability(1.0, 0.6, 2) / subtraction_probability(1.0, 0.6, 2);
        assert!((ratio - 4.0).abs() < 1e-12);
        let total: f64 = (0..=60).map(|n| subtraction_probability(5.0, 0.7, n)).sum();
        assert!((1.0 - 1e-10..=1.0 + 1e-12).contains(&total));
    }

    #[test]
    fn pss_reduces_to_tmsv_without_photons() {
        let c = pss_cm(4.0, 0.8, 0);
        assert!((c.reduced_determinant() - 1.0).abs() < 1e-12);
        let t = effective_t(4.0, 0.8);
        let eff = tmsv_cm(t / (1.0 - t));
        assert!((c.x - eff.x).abs() < 1e-12 && (c.z - eff.z).abs() < 1e-12);
        assert_eq!(pas_cm(4.0, 0.8, 0), pss_cm(4.0, 0.8, 0));
    }

    #[test]
    fn pss_determinant_is_odd_square() {
        for n in 0..=5u32 {
            for k in 0..20 {
                let t_s = 0.05 + 0.045 * k as f64;
                let c = pss_cm(3.0, t_s, n);
                let want = 2.0 * n as f64 + 1.0;
                assert!((c.reduced_determinant() - want).abs() < 1e-9 * want, "N = {n}");
            }
        }
    }

    #[test]
    fn pas_swaps_variances() {
        for n in 1..=3 {
            let s = pss_cm(5.0, 0.7, n);
            let a = pas_cm(5.0, 0.7, n);
            assert!(a.y > s.y);
            assert!((s.x - s.y - 2.0 * n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn tmsv_forces_zero_photons() {
        let p = SourceParams::new(Scheme::Tmsv, 2.0, 0.7, 3).unwrap();
        assert_eq!(p.photons, 0);
        assert!(SourceParams::new(Scheme::PhotonAdded, -1.0, 0.7, 1).is_err());
        assert!(SourceParams::new(Scheme::PhotonAdded, 1.0, 0.0, 1).is_err());
        assert_eq!(success_probability(&SourceParams::tmsv(3.0).unwrap()), 1.0);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("T-PS".parse::<Scheme>().unwrap(), Scheme::PhotonSubtracted);
        assert_eq!("tmsv".parse::<Scheme>().unwrap(), Scheme::Tmsv);
        assert!("nope".parse::<Scheme>().is_err());
    }

    #[test]
    fn closed_form_eigenvalues_of_pure_states() {
        let [a, b] = tmsv_cm(6.0).symplectic_eigenvalues();
        assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }
}

//! Turbulence statistics: Hufnagel–Valley C_n² profile → Rytov variance →
//! scintillation index → moments of the elliptic-beam parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Uplink,
    Downlink,
}

impl Link {
    /// Saturation coefficient ζ of the scintillation index.
    pub fn zeta(self) -> f64 {
        match self {
            Link::Uplink => 0.56,
            Link::Downlink => 1.11,
        }
    }
}

/// Physical description of a vertical optical link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbulenceScenario {
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Beam waist W₀, m.
    pub beam_waist: f64,
    /// Receiver aperture radius r₀, m.
    pub aperture_radius: f64,
    /// Propagation distance L, m.
    pub distance: f64,
    /// Ground-station altitude h₀, m.
    pub ground_altitude: f64,
    /// r.m.s. wind speed v, m/s.
    pub wind_speed: f64,
    /// Nominal C_n²(0), m^(−2/3).
    pub cn2_ground: f64,
    pub link: Link,
}

impl Default for TurbulenceScenario {
    fn default() -> Self {
        Self {
            wavelength: 809e-9,
            beam_waist: 0.02,
            aperture_radius: 0.04,
            distance: 20e3,
            ground_altitude: 0.0,
            wind_speed: 21.0,
            cn2_ground: 1.7e-14,
            link: Link::Downlink,
        }
    }
}

impl TurbulenceScenario {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("beam_waist", self.beam_waist),
            ("aperture_radius", self.aperture_radius),
            ("distance", self.distance),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        for (name, value) in [
            ("ground_altitude", self.ground_altitude),
            ("wind_speed", self.wind_speed),
            ("cn2_ground", self.cn2_ground),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be non-negative and finite",
                });
            }
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Ω = k·W₀²/(2L).
    pub fn omega(&self) -> f64 {
        self.wavenumber() * self.beam_waist * self.beam_waist / (2.0 * self.distance)
    }

    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }
}

/// Moments of {x, y, θ₁, θ₂}. θ₁ and θ₂ share mean and variance; x and y
/// share the centroid variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamStatistics {
    pub mean_theta: f64,
    pub var_theta: f64,
    pub cov_theta: f64,
    /// ⟨Δx²⟩ = ⟨Δy²⟩, m².
    pub var_centroid: f64,
    pub sigma_i2: f64,
    pub omega: f64,
    /// Rytov variance when the statistics came from the C_n² profile.
    pub sigma_r2: Option<f64>,
}

impl BeamStatistics {
    pub fn validate(&self) -> Result<()> {
        if !(self.var_theta >= 0.0) || !(self.var_centroid >= 0.0) || !(self.sigma_i2 >= 0.0) {
            return Err(Error::numerical(
                "BeamStatistics",
                format!("negative variance in {self:?}"),
            ));
        }
        if self.cov_theta.abs() > self.var_theta {
            return Err(Error::InvalidCovariance {
                var: self.var_theta,
                cov: self.cov_theta,
            });
        }
        Ok(())
    }
}

/// Hufnagel–Valley refractive-index structure constant at altitude `h` (m).
pub fn cn2_profile(h: f64, scenario: &TurbulenceScenario) -> f64 {
    let wind = scenario.wind_speed / 27.0;
    let scaled = h * 1e-5;
    0.00594 * wind * wind * scaled.powi(10) * (-h / 1000.0).exp()
        + 2.7e-16 * (-h / 1500.0).exp()
        + scenario.cn2_ground * (-h / 100.0).exp()
}

/// σ_R² = 2.25·k^{7/6}·∫_{h₀}^{h₀+L} C_n²(h)(h − h₀)^{5/6} dh.
pub fn rytov_variance(scenario: &TurbulenceScenario) -> Result<f64> {
    rytov_variance_with(scenario, |h| cn2_profile(h, scenario))
}

/// Rytov variance for an arbitrary structure-constant profile.
pub fn rytov_variance_with<F: Fn(f64) -> f64>(
    scenario: &TurbulenceScenario,
    cn2: F,
) -> Result<f64> {
    let h0 = scenario.ground_altitude;
    let top = h0 + scenario.distance;
    let mut breaks = vec![h0];
    for knee in [h0 + 1000.0, h0 + 20_000.0] {
        if knee < top {
            breaks.push(knee);
        }
    }
    breaks.push(top);
    let integral = quadrature::integrate(
        |h| cn2(h) * (h - h0).max(0.0).powf(5.0 / 6.0),
        &breaks,
        1e-8,
    )?;
    Ok((2.25 * scenario.wavenumber().powf(7.0 / 6.0) * integral).max(0.0))
}

/// Scintillation index from the Rytov variance.
pub fn scintillation_index(sigma_r2: f64, link: Link) -> f64 {
    if sigma_r2 <= 0.0 {
        return 0.0;
    }
    // σ_R^{12/5} with σ_R the square root of the Rytov variance.
    let s125 = sigma_r2.powf(6.0 / 5.0);
    let first = 0.49 * sigma_r2 / (1.0 + link.zeta() * s125).powf(7.0 / 6.0);
    let second = 0.51 * sigma_r2 / (1.0 + 0.69 * s125).powf(5.0 / 6.0);
    (first + second).exp_m1()
}

/// Beam-parameter moments for a given scintillation index.
pub fn beam_statistics(scenario: &TurbulenceScenario, sigma_i2: f64) -> Result<BeamStatistics> {
    scenario.validate()?;
    if !(sigma_i2 >= 0.0 && sigma_i2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma_i2",
            value: sigma_i2,
            reason: "scintillation index must be non-negative",
        });
    }
    let omega = scenario.omega();
    let s = sigma_i2 * omega.powf(5.0 / 6.0);
    let b = 1.0 + 2.96 * s;
    let b2 = b * b;
    let stats = BeamStatistics {
        mean_theta: (b2 / (omega * omega * (b2 + 1.2 * s).sqrt())).ln(),
        var_theta: (1.2 * s / b2).ln_1p(),
        cov_theta: (-0.8 * s / b2).ln_1p(),
        var_centroid: 0.33
            * scenario.beam_waist
            * scenario.beam_waist
            * sigma_i2
            * omega.powf(-7.0 / 6.0),
        sigma_i2,
        omega,
        sigma_r2: None,
    };
    stats.validate()?;
    Ok(stats)
}

/// Full chain: profile → σ_R² → σ_I² → moments.
pub fn beam_statistics_from_profile(scenario: &TurbulenceScenario) -> Result<BeamStatistics> {
    let sigma_r2 = rytov_variance(scenario)?;
    let sigma_i2 = scintillation_index(sigma_r2, scenario.link);
    let mut stats = beam_statistics(scenario, sigma_i2)?;
    stats.sigma_r2 = Some(sigma_r2);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn profile_at_ground_and_far_above() {
        let sc = TurbulenceScenario::default();
        assert!(rel(cn2_profile(0.0, &sc), 2.7e-16 + 1.7e-14) < 1e-15);
        assert!(cn2_profile(1e7, &sc) < 1e-300);
        // 30-digit reference
        assert!(rel(cn2_profile(1000.0, &sc), 1.393_944_341_638_966_8e-16) < 1e-13);
    }

    #[test]
    fn rytov_constant_profile_is_analytic() {
        let sc = TurbulenceScenario::default();
        let c = 3e-15;
        let got = rytov_variance_with(&sc, |_| c).unwrap();
        let k: f64 = sc.wavenumber();
        let want = 2.25 * k.powf(7.0 / 6.0) * c * (6.0 / 11.0) * sc.distance.powf(11.0 / 6.0);
        assert!(rel(got, want) < 1e-8);
    }

    #[test]
    fn rytov_vanishes_with_distance() {
        let sc = TurbulenceScenario::default().with_distance(1e-9);
        assert!(rytov_variance(&sc).unwrap() < 1e-20);
    }

    #[test]
    fn rytov_reference_value() {
        let got = rytov_variance(&TurbulenceScenario::default()).unwrap();
        assert!(rel(got, 0.132_689_383_297_840_15) < 1e-8);
    }

    #[test]
    fn scintillation_values() {
        assert_eq!(scintillation_index(0.0, Link::Uplink), 0.0);
        assert!(rel(scintillation_index(1.0, Link::Uplink), 0.860_825_243_726_887_1) < 1e-14);
        assert!(rel(scintillation_index(1.0, Link::Downlink), 0.706_438_495_919_241_9) < 1e-14);
        assert!(rel(scintillation_index(2.0, Link::Uplink), 1.306_276_231_122_799_8) < 1e-14);
        assert!(rel(scintillation_index(2.0, Link::Downlink), 0.985_212_621_163_563_4) < 1e-14);
        for link in [Link::Uplink, Link::Downlink] {
            assert!(scintillation_index(2.0, link) > scintillation_index(1.0, link));
        }
    }

    #[test]
    fn statistics_without_scintillation() {
        let sc = TurbulenceScenario::default();
        let st = beam_statistics(&sc, 0.0).unwrap();
        let omega = sc.omega();
        assert!((st.mean_theta - (1.0 / (omega * omega)).ln()).abs() < 1e-14);
        assert_eq!(st.var_theta, 0.0);
        assert_eq!(st.cov_theta, 0.0);
        assert_eq!(st.var_centroid, 0.0);
    }

    #[test]
    fn statistics_reference_values() {
        // Ω = 1 requires L = k·W₀²/2.
        let mut sc = TurbulenceScenario::default();
        sc.distance = sc.wavenumber() * sc.beam_waist * sc.beam_waist / 2.0;
        let st = beam_statistics(&sc, 0.5).unwrap();
        assert!((st.omega - 1.0).abs() < 1e-14);
        assert!(rel(st.mean_theta, 0.861_716_239_159_813_0) < 1e-13);
        assert!(rel(st.var_theta, 0.093_084_642_034_155_56) < 1e-13);
        assert!(rel(st.cov_theta, -0.067_247_702_746_678_76) < 1e-13);
        assert!(rel(st.var_centroid, 0.000_066) < 1e-13);
    }

    #[test]
    fn centroid_variance_scales_with_waist_squared() {
        // Keep Ω fixed while doubling W₀ by quadrupling L.
        let sc = TurbulenceScenario::default();
        let mut wide = sc;
        wide.beam_waist *= 2.0;
        wide.distance *= 4.0;
        let a = beam_statistics(&sc, 0.7).unwrap();
        let b = beam_statistics(&wide, 0.7).unwrap();
        assert!(rel(b.var_centroid, 4.0 * a.var_centroid) < 1e-12);
        assert!(rel(b.mean_theta, a.mean_theta) < 1e-12);
    }

    #[test]
    fn invalid_covariance_is_reported() {
        let st = BeamStatistics {
            mean_theta: 0.0,
            var_theta: 0.1,
            cov_theta: -0.2,
            var_centroid: 0.0,
            sigma_i2: 1.0,
            omega: 1.0,
            sigma_r2: None,
        };
        assert!(matches!(st.validate(), Err(Error::InvalidCovariance { .. })));
    }
}

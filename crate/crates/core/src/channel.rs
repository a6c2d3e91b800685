//! Monte Carlo sampler for the fading Earth–satellite channel.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atmosphere::{
    beam_statistics, beam_statistics_from_profile, BeamStatistics, TurbulenceScenario,
};
use crate::beam::{transmissivity, transmissivity_of, BeamSample};
use crate::error::{Error, Result};
use crate::rng::{pairwise_sum, sample_stream};

/// Number of samples used by default for fading averages (2²⁰).
pub const DEFAULT_SAMPLES: usize = 1 << 20;

pub const HISTOGRAM_BINS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelModel {
    /// Beam wandering, broadening and deformation.
    Full,
    /// Centroid wandering of a circular beam with r₀/W fixed.
    WanderingOnly { fixed_ratio: f64 },
}

impl ChannelModel {
    pub fn wandering_only() -> Self {
        ChannelModel::WanderingOnly { fixed_ratio: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::WanderingOnly { fixed_ratio } if !(fixed_ratio > 0.0) => {
                Err(Error::InvalidParameter {
                    name: "fixed_ratio",
                    value: fixed_ratio,
                    reason: "r0/W must be positive",
                })
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Full => "full",
            ChannelModel::WanderingOnly { .. } => "wandering-only",
        }
    }
}

/// Draws one beam realization: x, y i.i.d. N(0, ⟨Δx²⟩); (θ₁, θ₂) bivariate
/// normal; φ uniform on [0, π).
pub fn sample_beam<R: Rng + ?Sized>(
    stats: &BeamStatistics,
    scenario: &TurbulenceScenario,
    rng: &mut R,
) -> Result<BeamSample> {
    stats.validate()?;
    let sd_centroid = stats.var_centroid.sqrt();
    let x = sd_centroid * rng.sample::<f64, _>(StandardNormal);
    let y = sd_centroid * rng.sample::<f64, _>(StandardNormal);
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let (theta1, theta2) = if stats.var_theta > 0.0 {
        let sd = stats.var_theta.sqrt();
        let rho = stats.cov_theta / stats.var_theta;
        (
            stats.mean_theta + sd * z1,
            stats.mean_theta + sd * (rho * z1 + (1.0 - rho * rho).max(0.0).sqrt() * z2),
        )
    } else {
        (stats.mean_theta, stats.mean_theta)
    };
    let phi = std::f64::consts::PI * rng.gen::<f64>();
    Ok(BeamSample {
        x,
        y,
        theta1,
        theta2,
        phi,
        waist: scenario.beam_waist,
    })
}

/// An immutable set of transmissivity samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissivityEnsemble {
    samples: Vec<f64>,
    seed: u64,
    n_flagged: usize,
    mean_t: f64,
}

impl TransmissivityEnsemble {
    /// Wraps precomputed samples. Values must lie in [0, 1].
    pub fn from_samples(samples: Vec<f64>, seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Some(&bad) = samples.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidParameter {
                name: "transmissivity sample",
                value: bad,
                reason: "must lie in [0, 1]",
            });
        }
        let mean_t = pairwise_sum(&samples) / samples.len() as f64;
        Ok(Self {
            samples,
            seed,
            n_flagged: 0,
            mean_t,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// Draws excluded because the transmittance formula was undefined.
    pub fn n_flagged(&self) -> usize {
        self.n_flagged
    }

    pub fn mean_t(&self) -> f64 {
        self.mean_t
    }

    pub fn mean_attenuation_db(&self) -> f64 {
        attenuation_db(self.mean_t)
    }

    pub fn max_t(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_t(&self) -> f64 {
        self.samples.iter().copied().fold(1.0, f64::min)
    }
}

/// −10·log₁₀(T).
pub fn attenuation_db(t: f64) -> f64 {
    -10.0 * t.log10()
}

/// 10^(−dB/10).
pub fn transmissivity_from_db(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Draws `n_samples` transmissivities. Sample `i` uses the random stream
/// keyed by `(seed, i)`, so the result is identical for any thread count.
pub fn sample_ensemble(
    stats: &BeamStatistics,
    scenario: &TurbulenceScenario,
    model: ChannelModel,
    n_samples: usize,
    seed: u64,
) -> Result<TransmissivityEnsemble> {
    if n_samples == 0 {
        return Err(Error::EmptyEnsemble);
    }
    stats.validate()?;
    scenario.validate()?;
    model.validate()?;
    let r0 = scenario.aperture_radius;

    let draws: Vec<Result<Option<f64>>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(seed, i);
            let t = match model {
                ChannelModel::Full => {
                    let beam = sample_beam(stats, scenario, &mut rng)?;
                    transmissivity(&beam, r0)
                }
                ChannelModel::WanderingOnly { fixed_ratio } => {
                    let sd = stats.var_centroid.sqrt();
                    let x = sd * rng.sample::<f64, _>(StandardNormal);
                    let y = sd * rng.sample::<f64, _>(StandardNormal);
                    let w = r0 / fixed_ratio;
                    transmissivity_of(x, y, w, w, 0.0, r0)
                }
            };
            match t {
                Ok(t) => Ok(Some(t)),
                Err(Error::Numerical { context, detail }) => {
                    log::debug!("sample {i} flagged in {context}: {detail}");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut samples = Vec::with_capacity(n_samples);
    let mut n_flagged = 0;
    for d in draws {
        match d? {
            Some(t) => samples.push(t),
            None => n_flagged += 1,
        }
    }
    if n_flagged > 0 {
        log::warn!("{n_flagged} of {n_samples} channel samples flagged and excluded");
    }
    let mut ens = TransmissivityEnsemble::from_samples(samples, seed)?;
    ens.n_flagged = n_flagged;
    Ok(ens)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStatistics {
    pub mean_t: f64,
    pub mean_attenuation_db: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Mean, dB attenuation and a 200-bin histogram on [0, 1].
pub fn ensemble_statistics(ens: &TransmissivityEnsemble) -> Result<EnsembleStatistics> {
    if ens.samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let width = 1.0 / HISTOGRAM_BINS as f64;
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for &t in &ens.samples {
        let bin = ((t / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[bin] += 1;
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: k as f64 * width,
            hi: (k + 1) as f64 * width,
            count,
        })
        .collect();
    Ok(EnsembleStatistics {
        mean_t: ens.mean_t,
        mean_attenuation_db: ens.mean_attenuation_db(),
        histogram,
    })
}

/// Which scenario parameter is varied to reach a target mean attenuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationKnob {
    /// Vary σ_I² directly at the scenario's distance.
    ScintillationIndex,
    /// Vary L, with σ_I² following from the C_n² profile.
    Distance,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub scenario: TurbulenceScenario,
    pub stats: BeamStatistics,
    pub ensemble: TransmissivityEnsemble,
}

/// Beam statistics for `scenario` at knob value `value`.
pub fn statistics_for_knob(
    scenario: &TurbulenceScenario,
    knob: CalibrationKnob,
    value: f64,
) -> Result<(TurbulenceScenario, BeamStatistics)> {
    match knob {
        CalibrationKnob::ScintillationIndex => Ok((*scenario, beam_statistics(scenario, value)?)),
        CalibrationKnob::Distance => {
            let sc = scenario.with_distance(value);
            Ok((sc, beam_statistics_from_profile(&sc)?))
        }
    }
}

/// Finds the knob value whose ensemble mean attenuation is `target_db`.
///
/// Log-scale bisection on a 2¹⁴-sample ensemble with common random numbers
/// brackets the value; regula falsi on the full `n_samples` ensemble then
/// pins it to within 0.01 dB, since heavy-tailed ensembles can shift the
/// mean by a dB or more between the two sizes.
pub fn calibrate(
    scenario: &TurbulenceScenario,
    model: ChannelModel,
    knob: CalibrationKnob,
    target_db: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Calibration> {
    const PROBE_SAMPLES: usize = 1 << 14;
    let bounds = match knob {
        CalibrationKnob::ScintillationIndex => (1e-6_f64, 1e4_f64),
        CalibrationKnob::Distance => (1.0_f64, 1e8_f64),
    };
    let (mut lo, mut hi) = bounds;
    let probe = |v: f64| -> Result<f64> {
        let (sc, st) = statistics_for_knob(scenario, knob, v)?;
        Ok(sample_ensemble(&st, &sc, model, PROBE_SAMPLES, seed)?.mean_attenuation_db())
    };
    let (db_lo, db_hi) = (probe(lo)?, probe(hi)?);
    if !(db_lo <= target_db && target_db <= db_hi) {
        return Err(Error::numerical(
            "channel.calibrate",
            format!(
                "target {target_db} dB outside reachable range [{db_lo:.3}, {db_hi:.3}] dB"
            ),
        ));
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if probe(mid)? < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    let draw = |v: f64| -> Result<Calibration> {
        let (sc, st) = statistics_for_knob(scenario, knob, v)?;
        let ensemble = sample_ensemble(&st, &sc, model, n_samples, seed)?;
        Ok(Calibration {
            scenario: sc,
            stats: st,
            ensemble,
        })
    };
    let mid = (lo * hi).sqrt();
    let mut best = draw(mid)?;
    if n_samples <= PROBE_SAMPLES {
        return Ok(best);
    }
    // Illinois regula falsi in (ln knob, dB), on a widened bracket.
    const TOL_DB: f64 = 0.01;
    let miss = |c: &Calibration| c.ensemble.mean_attenuation_db() - target_db;
    let mut f_best = miss(&best);
    let (mut a, mut b) = ((mid / 4.0).max(bounds.0), (mid * 4.0).min(bounds.1));
    let (mut fa, mut fb) = (miss(&draw(a)?), miss(&draw(b)?));
    if fa > 0.0 || fb < 0.0 {
        return Ok(best);
    }
    let (mut side_a, mut side_b) = (0u32, 0u32);
    for _ in 0..16 {
        if f_best.abs() < TOL_DB {
            break;
        }
        let (la, lb) = (a.ln(), b.ln());
        let wa = if side_b >= 2 { 0.5 } else { 1.0 };
        let wb = if side_a >= 2 { 0.5 } else { 1.0 };
        let (fa_w, fb_w) = (fa * wa, fb * wb);
        let u = (la * fb_w - lb * fa_w) / (fb_w - fa_w);
        let v = u.exp();
        let cand = draw(v)?;
        let fc = miss(&cand);
        if fc < 0.0 {
            a = v;
            fa = fc;
            side_a += 1;
            side_b = 0;
        } else {
            b = v;
            fb = fc;
            side_b += 1;
            side_a = 0;
        }
        if fc.abs() < f_best.abs() {
            best = cand;
            f_best = fc;
        }
    }
    Ok(best)
}

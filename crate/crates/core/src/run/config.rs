//! TOML run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::atmosphere::TurbulenceScenario;
use crate::channel::{CalibrationKnob, ChannelModel, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::keyrate::NoiseParams;
use crate::optimize::{SearchDomain, DEFAULT_KNOTS};
use crate::states::Scheme;

/// Sample count used by quick runs (2¹⁶).
pub const QUICK_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Key rate at fixed (α², T_S) over a fixed-attenuation sweep.
    FixedRate,
    /// Jointly optimized (α², T_S) over a fixed-attenuation sweep.
    OptimalFixed,
    /// Fading-averaged key rate at fixed (α², T_S).
    Fading,
    /// Parameters optimized for the mean transmissivity, fading average.
    OptimizeMean,
    /// Parameters optimized per channel sample.
    OptimizePerSample,
    /// Histogram of the transmissivity ensemble.
    TransmissivityPdf,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::FixedRate,
        Mode::OptimalFixed,
        Mode::Fading,
        Mode::OptimizeMean,
        Mode::OptimizePerSample,
        Mode::TransmissivityPdf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::FixedRate => "fixed-rate",
            Mode::OptimalFixed => "optimal-fixed",
            Mode::Fading => "fading",
            Mode::OptimizeMean => "optimize-mean",
            Mode::OptimizePerSample => "optimize-per-sample",
            Mode::TransmissivityPdf => "transmissivity-pdf",
        }
    }

    pub fn uses_ensembles(self) -> bool {
        !matches!(self, Mode::FixedRate | Mode::OptimalFixed)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("mode", format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Full,
    WanderingOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub model: ModelKind,
    /// r₀/W of the wandering-only model.
    pub fixed_ratio: f64,
    pub scenario: TurbulenceScenario,
    /// Explicit scintillation indices at the scenario distance. When absent,
    /// each sweep attenuation is reached by calibrating `knob`.
    pub sigma_i2: Option<Vec<f64>>,
    pub knob: CalibrationKnob,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Full,
            fixed_ratio: 2.0,
            scenario: TurbulenceScenario::default(),
            sigma_i2: None,
            knob: CalibrationKnob::ScintillationIndex,
        }
    }
}

impl ChannelConfig {
    pub fn model(&self) -> ChannelModel {
        match self.model {
            ModelKind::Full => ChannelModel::Full,
            ModelKind::WanderingOnly => ChannelModel::WanderingOnly {
                fixed_ratio: self.fixed_ratio,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub alpha2: Vec<f64>,
    pub t_s: Vec<f64>,
    pub noise: NoiseParams,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            alpha2: vec![5.0, 20.0],
            t_s: vec![0.7],
            noise: NoiseParams::default(),
        }
    }
}

/// Attenuation sweep in dB: an explicit list, or start/stop/step with the
/// stop value included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub values: Option<Vec<f64>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 35.0,
            step: 1.0,
            values: None,
        }
    }
}

impl SweepConfig {
    pub fn attenuations(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + self.step * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub knots: usize,
    pub domain: SearchDomain,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            knots: DEFAULT_KNOTS,
            domain: SearchDomain::default(),
        }
    }
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn default_n_list() -> Vec<u32> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Required: runs never fall back to a clock-derived seed.
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// Worker threads; 0 lets the thread pool decide.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<u32>,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

impl RunConfig {
    /// Built-in configuration for a mode, mirroring the figure it
    /// reproduces.
    pub fn preset(mode: Mode) -> Self {
        let mut cfg = RunConfig {
            mode,
            seed: 1,
            n_samples: DEFAULT_SAMPLES,
            workers: 0,
            output_dir: default_output_dir(),
            schemes: default_schemes(),
            n_list: default_n_list(),
            protocol: ProtocolConfig::default(),
            sweep: SweepConfig::default(),
            channel: ChannelConfig::default(),
            optimizer: OptimizerConfig::default(),
        };
        match mode {
            Mode::FixedRate => {}
            Mode::OptimalFixed => {
                cfg.n_list = vec![1, 2, 3];
                cfg.sweep = SweepConfig {
                    start: 2.5,
                    stop: 40.0,
                    step: 2.5,
                    values: None,
                };
            }
            Mode::Fading | Mode::OptimizeMean | Mode::OptimizePerSample => {
                cfg.protocol.alpha2 = vec![20.0];
                cfg.sweep = SweepConfig {
                    start: 15.0,
                    stop: 35.0,
                    step: 5.0,
                    values: None,
                };
            }
            Mode::TransmissivityPdf => {
                cfg.sweep.values = Some(vec![25.0]);
            }
        }
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configuration serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, msg: &str| Err(Error::config(path, msg));
        if self.schemes.is_empty() {
            return fail("schemes", "at least one scheme is required");
        }
        if self.n_list.is_empty() {
            return fail("n_list", "at least one photon number is required");
        }
        if self.n_list.iter().any(|&n| n > 5) {
            return fail("n_list", "photon numbers above 5 are not supported");
        }
        if self.n_samples == 0 {
            return fail("n_samples", "must be positive");
        }
        let needs_source = matches!(self.mode, Mode::FixedRate | Mode::Fading);
        if needs_source {
            if self.protocol.alpha2.is_empty() {
                return fail("protocol.alpha2", "at least one value is required");
            }
            if self.protocol.alpha2.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
                return fail("protocol.alpha2", "values must be non-negative");
            }
            if self.protocol.t_s.is_empty() {
                return fail("protocol.t_s", "at least one value is required");
            }
            if self.protocol.t_s.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
                return fail("protocol.t_s", "values must lie in (0, 1]");
            }
        }
        self.protocol
            .noise
            .validate()
            .map_err(|e| Error::config("protocol.noise", e.to_string()))?;
        self.optimizer
            .domain
            .validate()
            .map_err(|e| Error::config("optimizer.domain", e.to_string()))?;
        if self.optimizer.knots < 2 {
            return fail("optimizer.knots", "need at least two knots");
        }
        let from_sigma = self.mode.uses_ensembles() && self.channel.sigma_i2.is_some();
        if let Some(s) = &self.channel.sigma_i2 {
            if s.is_empty() || s.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return fail("channel.sigma_i2", "need a nonempty list of non-negative values");
            }
        }
        if !from_sigma {
            let sweep = self.sweep.attenuations();
            if sweep.is_empty() {
                return fail("sweep", "attenuation sweep is empty");
            }
            if self.sweep.values.is_none() && !(self.sweep.step > 0.0) {
                return fail("sweep.step", "must be positive");
            }
            if sweep.iter().any(|&db| !(db.is_finite() && db >= 0.0)) {
                return fail("sweep", "attenuations must be finite and non-negative");
            }
            if self.mode == Mode::OptimalFixed && sweep.iter().any(|&db| db <= 0.0) {
                return fail("sweep", "optimization needs attenuation above 0 dB");
            }
        }
        self.channel
            .scenario
            .validate()
            .map_err(|e| Error::config("channel.scenario", e.to_string()))?;
        self.channel
            .model()
            .validate()
            .map_err(|e| Error::config("channel.fixed_ratio", e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::from_toml_str("mode = \"fixed-rate\"\nseed = 3\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.n_samples, DEFAULT_SAMPLES);
        assert_eq!(cfg.sweep.attenuations().len(), 36);
        assert_eq!(cfg.schemes, Scheme::ALL.to_vec());
    }

    #[test]
    fn seed_is_required() {
        let err = RunConfig::from_toml_str("mode = \"fixed-rate\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn errors_carry_field_paths() {
        let text = "mode = \"fading\"\nseed = 1\n[channel.scenario]\nwavelenght = 1e-6\n";
        match RunConfig::from_toml_str(text).unwrap_err() {
            Error::Config { path, .. } => assert!(path.starts_with("channel.scenario"), "{path}"),
            e => panic!("unexpected {e}"),
        }
        let text = "mode = \"fixed-rate\"\nseed = 1\n[protocol]\nt_s = [1.5]\n";
        match RunConfig::from_toml_str(text).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "protocol.t_s"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn presets_round_trip() {
        for mode in Mode::ALL {
            let cfg = RunConfig::preset(mode);
            cfg.validate().unwrap();
            let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(mode.name().parse::<Mode>().unwrap(), mode);
        }
    }

    #[test]
    fn sweep_includes_stop() {
        let s = SweepConfig {
            start: 0.0,
            stop: 1.0,
            step: 0.1,
            values: None,
        };
        let v = s.attenuations();
        assert_eq!(v.len(), 11);
        assert!((v[10] - 1.0).abs() < 1e-12);
    }
}

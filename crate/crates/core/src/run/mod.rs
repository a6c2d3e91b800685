//! Figure-reproduction runs: evaluates a [`RunConfig`], writes one CSV and a
//! JSON manifest. Output bytes depend only on the configuration, never on
//! the worker count.

mod config;

pub use config::{
    ChannelConfig, Mode, ModelKind, OptimizerConfig, ProtocolConfig, RunConfig, SweepConfig,
    QUICK_SAMPLES,
};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::atmosphere::beam_statistics;
use crate::channel::{
    calibrate, ensemble_statistics, sample_ensemble, transmissivity_from_db,
    TransmissivityEnsemble,
};
use crate::error::{Error, Result};
use crate::keyrate::{
    average_key_rate, average_repeaterless_bound, key_rate, repeaterless_bound, ProtocolParams,
};
use crate::optimize::Optimizer;
use crate::states::{Scheme, SourceParams};

/// Slack allowed when checking rates against the repeaterless bound.
const RB_SLACK: f64 = 1e-9;

pub const RATE_HEADER: [&str; 10] = [
    "attenuation_db",
    "scheme",
    "N",
    "alpha2",
    "T_S",
    "rate",
    "rb",
    "success_prob",
    "n_samples",
    "seed",
];

pub const HISTOGRAM_HEADER: [&str; 7] = [
    "attenuation_db",
    "bin_lo",
    "bin_hi",
    "count",
    "density",
    "n_samples",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub attenuation_db: f64,
    pub scheme: Scheme,
    pub photons: u32,
    pub alpha2: f64,
    pub t_s: f64,
    pub rate: f64,
    /// Repeaterless bound at the row's transmissivity (ensemble mean of
    /// the bound for fading rows).
    pub rb: f64,
    pub success_prob: f64,
    /// 0 for fixed-attenuation rows.
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub attenuation_db: f64,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
    /// Probability density: count / (n · width).
    pub density: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Rates(Vec<RateRow>),
    Histogram(Vec<HistogramRow>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Rates(r) => r.len(),
            Table::Histogram(h) => h.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rates(&self) -> Option<&[RateRow]> {
        match self {
            Table::Rates(r) => Some(r),
            Table::Histogram(_) => None,
        }
    }

    pub fn histogram(&self) -> Option<&[HistogramRow]> {
        match self {
            Table::Histogram(h) => Some(h),
            Table::Rates(_) => None,
        }
    }

    fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        match self {
            Table::Rates(rows) => {
                w.write_record(RATE_HEADER).map_err(csv_err)?;
                for r in rows {
                    w.write_record([
                        num(r.attenuation_db),
                        r.scheme.label().to_string(),
                        r.photons.to_string(),
                        num(r.alpha2),
                        num(r.t_s),
                        num(r.rate),
                        num(r.rb),
                        num(r.success_prob),
                        r.n_samples.to_string(),
                        r.seed.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            Table::Histogram(rows) => {
                w.write_record(HISTOGRAM_HEADER).map_err(csv_err)?;
                for r in rows {
                    w.write_record([
                        num(r.attenuation_db),
                        num(r.bin_lo),
                        num(r.bin_hi),
                        r.count.to_string(),
                        num(r.density),
                        r.n_samples.to_string(),
                        r.seed.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// (scheme, N) pairs requested by the config; TMSV appears once with N = 0.
fn scheme_photons(cfg: &RunConfig) -> Vec<(Scheme, u32)> {
    let mut out = Vec::new();
    for &scheme in &cfg.schemes {
        if scheme == Scheme::Tmsv {
            out.push((scheme, 0));
        } else {
            out.extend(cfg.n_list.iter().map(|&n| (scheme, n)));
        }
    }
    out
}

/// Source settings for the fixed-parameter modes; TMSV ignores T_S.
fn sources(cfg: &RunConfig, scheme: Scheme, photons: u32) -> Result<Vec<SourceParams>> {
    let t_s: &[f64] = if scheme == Scheme::Tmsv {
        &[1.0]
    } else {
        &cfg.protocol.t_s
    };
    let mut out = Vec::new();
    for &alpha2 in &cfg.protocol.alpha2 {
        for &t in t_s {
            out.push(SourceParams::new(scheme, alpha2, t, photons)?);
        }
    }
    Ok(out)
}

fn check_bound(rate: f64, rb: f64, db: f64, scheme: Scheme) -> Result<()> {
    if rate > rb + RB_SLACK {
        return Err(Error::numerical(
            "run.repeaterless_check",
            format!("{scheme} rate {rate:e} exceeds the repeaterless bound {rb:e} at {db} dB"),
        ));
    }
    Ok(())
}

fn fixed_bound(t: f64) -> Result<f64> {
    if t >= 1.0 {
        Ok(f64::INFINITY)
    } else {
        repeaterless_bound(t)
    }
}

/// Transmissivity ensembles for the fading modes: one per explicit σ_I²,
/// or one per sweep attenuation found by calibration.
pub fn ensembles(cfg: &RunConfig) -> Result<Vec<TransmissivityEnsemble>> {
    let ch = &cfg.channel;
    let model = ch.model();
    match &ch.sigma_i2 {
        Some(list) => list
            .iter()
            .map(|&s| {
                let stats = beam_statistics(&ch.scenario, s)?;
                sample_ensemble(&stats, &ch.scenario, model, cfg.n_samples, cfg.seed)
            })
            .collect(),
        None => cfg
            .sweep
            .attenuations()
            .iter()
            .map(|&db| {
                calibrate(&ch.scenario, model, ch.knob, db, cfg.n_samples, cfg.seed)
                    .map(|c| c.ensemble)
            })
            .collect(),
    }
}

fn fixed_rows(cfg: &RunConfig) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    let noise = cfg.protocol.noise;
    let optimizer = Optimizer::new(noise)
        .with_domain(cfg.optimizer.domain)
        .with_knots(cfg.optimizer.knots);
    for db in cfg.sweep.attenuations() {
        let t = transmissivity_from_db(db);
        let rb = fixed_bound(t)?;
        for (scheme, photons) in scheme_photons(cfg) {
            let results: Vec<(SourceParams, f64, f64)> = match cfg.mode {
                Mode::FixedRate => sources(cfg, scheme, photons)?
                    .into_iter()
                    .map(|src| {
                        let r = key_rate(&ProtocolParams::new(src, noise)?, t)?;
                        Ok((src, r.rate, r.success_prob))
                    })
                    .collect::<Result<_>>()?,
                _ => {
                    let r = optimizer.fixed(scheme, photons, t)?;
                    vec![(r.source()?, r.best_rate, r.success_prob)]
                }
            };
            for (src, rate, success_prob) in results {
                check_bound(rate, rb, db, scheme)?;
                rows.push(RateRow {
                    attenuation_db: db,
                    scheme,
                    photons: src.photons,
                    alpha2: src.alpha2,
                    t_s: src.t_s,
                    rate,
                    rb,
                    success_prob,
                    n_samples: 0,
                    seed: cfg.seed,
                });
            }
        }
    }
    Ok(rows)
}

fn fading_rows(cfg: &RunConfig, ensembles: &[TransmissivityEnsemble]) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    let noise = cfg.protocol.noise;
    let optimizer = Optimizer::new(noise)
        .with_domain(cfg.optimizer.domain)
        .with_knots(cfg.optimizer.knots);
    for ens in ensembles {
        let db = ens.mean_attenuation_db();
        let rb = average_repeaterless_bound(ens)?.bound;
        for (scheme, photons) in scheme_photons(cfg) {
            let results: Vec<(SourceParams, f64, f64)> = match cfg.mode {
                Mode::Fading => sources(cfg, scheme, photons)?
                    .into_iter()
                    .map(|src| {
                        let r = average_key_rate(&ProtocolParams::new(src, noise)?, ens)?;
                        Ok((src, r.rate, r.success_prob))
                    })
                    .collect::<Result<_>>()?,
                Mode::OptimizeMean => {
                    let r = optimizer.mean_based(scheme, photons, ens)?;
                    vec![(r.source()?, r.best_rate, r.success_prob)]
                }
                _ => {
                    let r = optimizer.per_sample(scheme, photons, ens)?;
                    vec![(r.source()?, r.best_rate, r.success_prob)]
                }
            };
            for (src, rate, success_prob) in results {
                check_bound(rate, rb, db, scheme)?;
                rows.push(RateRow {
                    attenuation_db: db,
                    scheme,
                    photons: src.photons,
                    alpha2: src.alpha2,
                    t_s: src.t_s,
                    rate,
                    rb,
                    success_prob,
                    n_samples: ens.n_samples(),
                    seed: cfg.seed,
                });
            }
        }
    }
    Ok(rows)
}

fn histogram_rows(ensembles: &[TransmissivityEnsemble]) -> Result<Vec<HistogramRow>> {
    let mut rows = Vec::new();
    for ens in ensembles {
        let stats = ensemble_statistics(ens)?;
        let n = ens.n_samples();
        for bin in stats.histogram {
            rows.push(HistogramRow {
                attenuation_db: stats.mean_attenuation_db,
                bin_lo: bin.lo,
                bin_hi: bin.hi,
                count: bin.count,
                density: bin.count as f64 / (n as f64 * (bin.hi - bin.lo)),
                n_samples: n,
                seed: ens.seed(),
            });
        }
    }
    Ok(rows)
}

fn compute_inner(cfg: &RunConfig) -> Result<Table> {
    match cfg.mode {
        Mode::FixedRate | Mode::OptimalFixed => fixed_rows(cfg).map(Table::Rates),
        Mode::TransmissivityPdf => histogram_rows(&ensembles(cfg)?).map(Table::Histogram),
        _ => fading_rows(cfg, &ensembles(cfg)?).map(Table::Rates),
    }
}

/// Evaluates the configuration on a pool of `cfg.workers` threads.
pub fn compute(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| compute_inner(cfg))
}

/// SHA-256 of the canonical TOML form of the configuration. The output
/// directory and worker count are blanked first since neither changes the
/// numbers written.
pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical = RunConfig {
        output_dir: PathBuf::new(),
        workers: 0,
        ..cfg.clone()
    };
    let digest = Sha256::digest(canonical.to_toml_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub mode: Mode,
    pub package: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub n_samples: usize,
    pub workers: usize,
    pub rows: usize,
    pub csv: String,
    pub runtime_seconds: f64,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub table: Table,
    pub manifest: Manifest,
}

/// Writes `contents` through a temporary file so a failed run never
/// leaves a truncated output behind.
fn write_atomic(path: &Path, write: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    let result = fs::File::create(&tmp)
        .map_err(Error::from)
        .and_then(|mut f| {
            write(&mut f)?;
            f.sync_all()?;
            Ok(())
        })
        .and_then(|()| fs::rename(&tmp, path).map_err(Error::from));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Runs the configuration and writes `<mode>.csv` and
/// `<mode>.manifest.json` into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let table = compute(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join(format!("{}.csv", cfg.mode));
    let manifest_path = cfg.output_dir.join(format!("{}.manifest.json", cfg.mode));
    write_atomic(&csv_path, |f| table.write_csv(f))?;
    let manifest = Manifest {
        mode: cfg.mode,
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_hash(cfg),
        seed: cfg.seed,
        n_samples: cfg.n_samples,
        workers: cfg.workers,
        rows: table.len(),
        csv: csv_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        runtime_seconds: started.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    write_atomic(&manifest_path, |f| {
        serde_json::to_writer_pretty(&mut *f, &manifest)
            .map_err(|e| Error::Io(std::io::Error::other(e)))
    })?;
    log::info!(
        "{} rows written to {} in {:.2} s",
        table.len(),
        csv_path.display(),
        manifest.runtime_seconds
    );
    Ok(RunOutput {
        csv_path,
        manifest_path,
        table,
        manifest,
    })
}

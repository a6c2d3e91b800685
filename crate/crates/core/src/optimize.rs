//! Joint optimization of the source parameters (α², T_S) under three
//! deployment modes: a known fixed transmissivity, the anticipated mean of
//! a fading channel, and per-sample feedback of the instantaneous value.
//!
//! Each fixed-transmissivity search scans a log-spaced coarse grid and then
//! refines the best cell with a Nelder–Mead simplex in (log₁₀ α², T_S).

use std::sync::atomic::{AtomicUsize, Ordering};

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::TransmissivityEnsemble;
use crate::error::{Error, Result};
use crate::keyrate::{average_key_rate, NoiseParams, ProtocolParams, RateEvaluator};
use crate::rng::pairwise_sum;
use crate::states::{Scheme, SourceParams};

/// Number of transmissivity knots in the per-sample lookup table.
pub const DEFAULT_KNOTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub alpha2_min: f64,
    pub alpha2_max: f64,
    pub t_s_min: f64,
    pub t_s_max: f64,
    /// Points per axis of the coarse grid.
    pub grid: usize,
    pub max_iters: u64,
    /// Simplex stops once the spread of its rates falls below this
    /// fraction of the best rate.
    pub rel_tol: f64,
}

impl Default for SearchDomain {
    fn default() -> Self {
        Self {
            alpha2_min: 0.01,
            alpha2_max: 100.0,
            t_s_min: 0.01,
            t_s_max: 0.999,
            grid: 64,
            max_iters: 200,
            rel_tol: 1e-6,
        }
    }
}

impl SearchDomain {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha2_min > 0.0 && self.alpha2_max > self.alpha2_min) {
            return Err(Error::InvalidParameter {
                name: "alpha2_min",
                value: self.alpha2_min,
                reason: "alpha2 range must be positive and nonempty",
            });
        }
        if !(self.t_s_min > 0.0 && self.t_s_max < 1.0 && self.t_s_max > self.t_s_min) {
            return Err(Error::InvalidParameter {
                name: "t_s_min",
                value: self.t_s_min,
                reason: "T_S range must be a nonempty subset of (0, 1)",
            });
        }
        if self.grid < 2 {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: self.grid as f64,
                reason: "need at least two grid points per axis",
            });
        }
        Ok(())
    }

    fn log_bounds(&self) -> (f64, f64) {
        (self.alpha2_min.log10(), self.alpha2_max.log10())
    }

    fn project(&self, u: f64, t_s: f64) -> (f64, f64) {
        let (lo, hi) = self.log_bounds();
        (u.clamp(lo, hi), t_s.clamp(self.t_s_min, self.t_s_max))
    }

    fn log_axis(&self, i: usize) -> f64 {
        let (lo, hi) = self.log_bounds();
        lo + (hi - lo) * i as f64 / (self.grid - 1) as f64
    }

    fn t_s_axis(&self, j: usize) -> f64 {
        self.t_s_min + (self.t_s_max - self.t_s_min) * j as f64 / (self.grid - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizationMode {
    Fixed,
    MeanBased,
    PerSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub scheme: Scheme,
    pub photons: u32,
    pub best_alpha2: f64,
    /// 1 for TMSV, which has no splitter.
    pub best_t_s: f64,
    /// Clamped rate: fixed-channel rate, or fading average for the
    /// mean-based and per-sample modes.
    pub best_rate: f64,
    /// Unclamped counterpart of `best_rate`.
    pub best_raw_rate: f64,
    pub success_prob: f64,
    pub mode: OptimizationMode,
    pub domain: SearchDomain,
    pub evaluations: usize,
    /// Set when no point of the domain yields a positive rate.
    pub zero_rate: bool,
}

impl OptimizationResult {
    pub fn source(&self) -> Result<SourceParams> {
        SourceParams::new(self.scheme, self.best_alpha2, self.best_t_s, self.photons)
    }
}

struct RateProblem<'a> {
    scheme: Scheme,
    photons: u32,
    t_e: f64,
    noise: &'a NoiseParams,
    domain: &'a SearchDomain,
    evaluations: AtomicUsize,
}

impl RateProblem<'_> {
    fn source(&self, u: f64, t_s: f64) -> Result<SourceParams> {
        let (u, t_s) = self.domain.project(u, t_s);
        let t_s = if self.scheme == Scheme::Tmsv { 1.0 } else { t_s };
        SourceParams::new(self.scheme, 10f64.powf(u), t_s, self.photons)
    }

    fn raw_rate(&self, u: f64, t_s: f64) -> Result<f64> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let params = ProtocolParams::new(self.source(u, t_s)?, *self.noise)?;
        Ok(RateEvaluator::new(&params)?.at(self.t_e)?.raw_rate)
    }

    fn split(&self, p: &[f64]) -> (f64, f64) {
        match p {
            [u] => (*u, 1.0),
            [u, t_s] => (*u, *t_s),
            _ => unreachable!("simplex dimension is 1 or 2"),
        }
    }
}

/// Negated raw rate, the quantity the simplex minimizes.
struct NegatedRate<'a, 'b>(&'a RateProblem<'b>);

impl CostFunction for NegatedRate<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let (u, t_s) = self.0.split(p);
        self.0
            .raw_rate(u, t_s)
            .map(|r| -r)
            .map_err(|e| argmin::core::Error::msg(e.to_string()))
    }
}

/// Optimizer configuration shared by the three deployment modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimizer {
    pub noise: NoiseParams,
    pub domain: SearchDomain,
    pub knots: usize,
}

impl Optimizer {
    pub fn new(noise: NoiseParams) -> Self {
        Self {
            noise,
            domain: SearchDomain::default(),
            knots: DEFAULT_KNOTS,
        }
    }

    pub fn with_domain(mut self, domain: SearchDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_knots(mut self, knots: usize) -> Self {
        self.knots = knots;
        self
    }

    fn check(&self, t_e: f64) -> Result<()> {
        self.noise.validate()?;
        self.domain.validate()?;
        if !(t_e > 0.0 && t_e < 1.0) {
            return Err(Error::Domain {
                function: "optimize_fixed",
                value: t_e,
                constraint: "0 < T_E < 1",
            });
        }
        Ok(())
    }

    fn problem(&self, scheme: Scheme, photons: u32, t_e: f64) -> RateProblem<'_> {
        RateProblem {
            scheme,
            photons: if scheme == Scheme::Tmsv { 0 } else { photons },
            t_e,
            noise: &self.noise,
            domain: &self.domain,
            evaluations: AtomicUsize::new(0),
        }
    }

    /// Best (α², T_S) at a fixed transmissivity.
    pub fn fixed(&self, scheme: Scheme, photons: u32, t_e: f64) -> Result<OptimizationResult> {
        self.check(t_e)?;
        let problem = self.problem(scheme, photons, t_e);
        let d = &self.domain;
        let columns = if scheme == Scheme::Tmsv { 1 } else { d.grid };
        let cells: Vec<(usize, usize)> = (0..d.grid)
            .flat_map(|i| (0..columns).map(move |j| (i, j)))
            .collect();
        let rates: Vec<f64> = cells
            .par_iter()
            .map(|&(i, j)| problem.raw_rate(d.log_axis(i), d.t_s_axis(j)))
            .collect::<Result<_>>()?;
        // First maximum in grid order keeps ties deterministic.
        let mut best = 0;
        for (k, &r) in rates.iter().enumerate() {
            if r > rates[best] {
                best = k;
            }
        }
        let (i, j) = cells[best];
        let step_u = d.log_axis(1) - d.log_axis(0);
        let step_t = d.t_s_axis(1) - d.t_s_axis(0);
        self.refine_from(problem, scheme, (d.log_axis(i), d.t_s_axis(j)), (step_u, step_t))
    }

    /// Simplex refinement started at `start = (α², T_S)` without the grid.
    pub fn refine(
        &self,
        scheme: Scheme,
        photons: u32,
        t_e: f64,
        start: (f64, f64),
    ) -> Result<OptimizationResult> {
        self.check(t_e)?;
        let problem = self.problem(scheme, photons, t_e);
        let d = &self.domain;
        let step_u = (d.log_axis(1) - d.log_axis(0)) * 0.5;
        let step_t = (d.t_s_axis(1) - d.t_s_axis(0)) * 0.5;
        let start = d.project(start.0.log10(), start.1);
        self.refine_from(problem, scheme, start, (step_u, step_t))
    }

    fn refine_from(
        &self,
        problem: RateProblem<'_>,
        scheme: Scheme,
        start: (f64, f64),
        step: (f64, f64),
    ) -> Result<OptimizationResult> {
        let d = &self.domain;
        let (lo, hi) = d.log_bounds();
        // Offsets point into the domain so the initial simplex is feasible.
        let inward = |x: f64, s: f64, lo: f64, hi: f64| if x + s <= hi { x + s } else { (x - s).max(lo) };
        let simplex = if scheme == Scheme::Tmsv {
            vec![vec![start.0], vec![inward(start.0, step.0, lo, hi)]]
        } else {
            vec![
                vec![start.0, start.1],
                vec![inward(start.0, step.0, lo, hi), start.1],
                vec![start.0, inward(start.1, step.1, d.t_s_min, d.t_s_max)],
            ]
        };
        let start_rate = problem.raw_rate(start.0, start.1)?;
        let tol = d.rel_tol * start_rate.abs().max(f64::MIN_POSITIVE);
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(tol)
            .map_err(|e| Error::numerical("optimize.simplex", e.to_string()))?;
        let outcome = Executor::new(NegatedRate(&problem), solver)
            .configure(|s| s.max_iters(d.max_iters))
            .run()
            .map_err(|e| Error::numerical("optimize.simplex", e.to_string()))?;
        let (mut u, mut t_s) = start;
        if let Some(p) = outcome.state().best_param.as_ref() {
            let cand = problem.split(p);
            if problem.raw_rate(cand.0, cand.1)? >= start_rate {
                (u, t_s) = cand;
            }
        }
        let source = problem.source(u, t_s)?;
        let eval = RateEvaluator::new(&ProtocolParams::new(source, self.noise)?)?;
        let result = eval.at(problem.t_e)?;
        Ok(OptimizationResult {
            scheme,
            photons: source.photons,
            best_alpha2: source.alpha2,
            best_t_s: source.t_s,
            best_rate: result.rate,
            best_raw_rate: result.raw_rate,
            success_prob: result.success_prob,
            mode: OptimizationMode::Fixed,
            domain: *d,
            evaluations: problem.evaluations.load(Ordering::Relaxed) + 1,
            zero_rate: result.rate <= 0.0,
        })
    }

    /// Parameters optimized for the ensemble mean transmissivity, scored by
    /// the fading-averaged rate.
    pub fn mean_based(
        &self,
        scheme: Scheme,
        photons: u32,
        ensemble: &TransmissivityEnsemble,
    ) -> Result<OptimizationResult> {
        let fixed = self.fixed(scheme, photons, ensemble.mean_t())?;
        let params = ProtocolParams::new(fixed.source()?, self.noise)?;
        let avg = average_key_rate(&params, ensemble)?;
        Ok(OptimizationResult {
            best_rate: avg.rate,
            best_raw_rate: avg.raw_rate,
            mode: OptimizationMode::MeanBased,
            evaluations: fixed.evaluations + ensemble.n_samples(),
            zero_rate: avg.rate <= 0.0,
            ..fixed
        })
    }

    /// Per-sample feedback: every sample uses parameters tuned to its own
    /// transmissivity, looked up from a table of fixed-channel optima at
    /// log-spaced knots.
    ///
    /// A sample between two knots takes the better of the two knot optima
    /// and the mean-based optimum, each evaluated exactly at its own T.
    /// Reported parameters are those of the knot nearest the mean.
    pub fn per_sample(
        &self,
        scheme: Scheme,
        photons: u32,
        ensemble: &TransmissivityEnsemble,
    ) -> Result<OptimizationResult> {
        if self.knots < 2 {
            return Err(Error::InvalidParameter {
                name: "knots",
                value: self.knots as f64,
                reason: "need at least two table knots",
            });
        }
        let mean = self.fixed(scheme, photons, ensemble.mean_t())?;
        let t_lo = ensemble.min_t().max(1e-8);
        let t_hi = ensemble.max_t().min(1.0 - 1e-9);
        let knots: Vec<f64> = if t_hi <= t_lo * (1.0 + 1e-12) {
            vec![ensemble.mean_t()]
        } else {
            let (a, b) = (t_lo.ln(), t_hi.ln());
            (0..self.knots)
                .map(|k| (a + (b - a) * k as f64 / (self.knots - 1) as f64).exp())
                .collect()
        };
        let table: Vec<OptimizationResult> = knots
            .par_iter()
            .map(|&t| self.fixed(scheme, photons, t))
            .collect::<Result<_>>()?;
        let evaluators: Vec<RateEvaluator> = table
            .iter()
            .chain(std::iter::once(&mean))
            .map(|r| RateEvaluator::new(&ProtocolParams::new(r.source()?, self.noise)?))
            .collect::<Result<_>>()?;
        let mean_eval = evaluators[table.len()];
        let log_knots: Vec<f64> = knots.iter().map(|t| t.ln()).collect();

        let per_sample: Vec<(f64, f64)> = ensemble
            .samples()
            .par_iter()
            .map(|&t| {
                let k = bracket(&log_knots, t.max(f64::MIN_POSITIVE).ln());
                let mut best = mean_eval.at(t)?;
                for idx in [k, (k + 1).min(knots.len() - 1)] {
                    let r = evaluators[idx].at(t)?;
                    if r.raw_rate > best.raw_rate {
                        best = r;
                    }
                }
                Ok((best.rate, best.raw_rate))
            })
            .collect::<Result<_>>()?;
        let n = per_sample.len() as f64;
        let rates: Vec<f64> = per_sample.iter().map(|p| p.0).collect();
        let raws: Vec<f64> = per_sample.iter().map(|p| p.1).collect();
        let rate = pairwise_sum(&rates) / n;

        let log_mean = ensemble.mean_t().ln();
        let nearest = (0..knots.len())
            .min_by(|&a, &b| {
                (log_knots[a] - log_mean)
                    .abs()
                    .total_cmp(&(log_knots[b] - log_mean).abs())
            })
            .unwrap_or(0);
        let report = &table[nearest];
        let evaluations =
            mean.evaluations + table.iter().map(|r| r.evaluations).sum::<usize>() + 3 * rates.len();
        Ok(OptimizationResult {
            best_rate: rate,
            best_raw_rate: pairwise_sum(&raws) / n,
            mode: OptimizationMode::PerSample,
            evaluations,
            zero_rate: rate <= 0.0,
            ..report.clone()
        })
    }
}

/// Index k with knots[k] ≤ x < knots[k+1], clamped to the table.
fn bracket(knots: &[f64], x: f64) -> usize {
    match knots.partition_point(|&k| k <= x) {
        0 => 0,
        p => (p - 1).min(knots.len().saturating_sub(1)),
    }
}

pub fn optimize_fixed(
    scheme: Scheme,
    photons: u32,
    t_e: f64,
    noise: &NoiseParams,
) -> Result<OptimizationResult> {
    Optimizer::new(*noise).fixed(scheme, photons, t_e)
}

pub fn optimize_mean_based(
    scheme: Scheme,
    photons: u32,
    ensemble: &TransmissivityEnsemble,
    noise: &NoiseParams,
) -> Result<OptimizationResult> {
    Optimizer::new(*noise).mean_based(scheme, photons, ensemble)
}

pub fn optimize_per_sample(
    scheme: Scheme,
    photons: u32,
    ensemble: &TransmissivityEnsemble,
    noise: &NoiseParams,
) -> Result<OptimizationResult> {
    Optimizer::new(*noise).per_sample(scheme, photons, ensemble)
}

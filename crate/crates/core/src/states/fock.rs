//! Truncated Fock-basis representations of the source states and a
//! brute-force beam-splitter simulation used to cross-check the closed-form
//! covariance matrices and heralding probabilities.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{Scheme, SourceParams, TwoModeCm};
use crate::error::{Error, Result};
use crate::specfun::CovarianceMatrix;

const TAIL_LIMIT: f64 = 1e-10;

/// Two-mode pure state with real amplitudes c(n_A, n_B).
#[derive(Debug, Clone, PartialEq)]
pub struct FockTwoModeState {
    coefficients: BTreeMap<(usize, usize), f64>,
    cutoff: usize,
    tail_bound: f64,
}

impl FockTwoModeState {
    pub fn vacuum() -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert((0, 0), 1.0);
        Self {
            coefficients,
            cutoff: 0,
            tail_bound: 0.0,
        }
    }

    pub fn coefficients(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.coefficients
    }

    pub fn coefficient(&self, n_a: usize, n_b: usize) -> f64 {
        self.coefficients.get(&(n_a, n_b)).copied().unwrap_or(0.0)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Upper bound on the relative weight dropped by the truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sq(&self) -> f64 {
        self.coefficients.values().map(|c| c * c).sum()
    }

    /// Mean photon numbers (⟨n_A⟩, ⟨n_B⟩).
    pub fn mean_photons(&self) -> (f64, f64) {
        self.coefficients
            .iter()
            .fold((0.0, 0.0), |(a, b), (&(i, j), c)| {
                (a + c * c * i as f64, b + c * c * j as f64)
            })
    }
}

/// Cutoff n with (α²/(1+α²))ⁿ < 1e-12, doubled when photons are added or
/// subtracted.
pub fn default_cutoff(alpha2: f64, photons: u32) -> usize {
    let q = alpha2 / (1.0 + alpha2);
    let base = if q <= 0.0 {
        1
    } else {
        ((1e-12f64).ln() / q.ln()).ceil() as usize
    };
    let n = base.max(8);
    if photons > 0 {
        2 * n
    } else {
        n
    }
}

/// Fock ket of the source state, truncated at TMSV index `n_max`.
///
/// TMSV: c(n, n). T-PS is built by adding N photons to mode A, giving
/// support on (m + N, m); T-PA adds them to mode B, giving (m, m + N). The
/// (−1)^N global phase is dropped.
pub fn fock_ket(params: &SourceParams, n_max: usize) -> Result<FockTwoModeState> {
    params.validate()?;
    let n = params.photons as usize;
    let t_s = if params.scheme == Scheme::Tmsv { 1.0 } else { params.t_s };
    if n > 0 && t_s >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "t_s",
            value: t_s,
            reason: "no photons can be added through a unit-transmissivity splitter",
        });
    }
    let q = params.alpha2 / (1.0 + params.alpha2);
    let ratio = q * t_s;

    // Squared amplitudes a_m² r²_{m+N,N} via their ratio recurrence.
    let mut terms = Vec::with_capacity(n_max + 1);
    let mut term = (1.0 - t_s).powi(n as i32) / (1.0 + params.alpha2);
    terms.push(term);
    for m in 1..=n_max {
        term *= ratio * (m + n) as f64 / m as f64;
        terms.push(term);
    }
    let norm: f64 = terms.iter().sum();

    let rho = ratio * (n_max + n + 1) as f64 / (n_max + 1) as f64;
    let tail = if ratio == 0.0 {
        0.0
    } else if rho < 1.0 {
        term * rho / (1.0 - rho) / norm
    } else {
        f64::INFINITY
    };
    if tail > TAIL_LIMIT {
        return Err(Error::CutoffTooSmall { cutoff: n_max, tail });
    }

    let coefficients = terms
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(m, &t)| {
            let key = match params.scheme {
                Scheme::Tmsv => (m, m),
                Scheme::PhotonSubtracted => (m + n, m),
                Scheme::PhotonAdded => (m, m + n),
            };
            (key, (t / norm).sqrt())
        })
        .collect();
    Ok(FockTwoModeState {
        coefficients,
        cutoff: n_max,
        tail_bound: tail,
    })
}

/// Full 4×4 covariance matrix from ladder-operator moments of the ket.
pub fn oracle_covariance(state: &FockTwoModeState) -> Result<CovarianceMatrix> {
    if state.tail_bound > TAIL_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff: state.cutoff,
            tail: state.tail_bound,
        });
    }
    let c = |i: usize, j: usize| state.coefficient(i, j);
    let (mut na, mut nb) = (0.0, 0.0);
    let (mut a2, mut b2, mut ab, mut ab_dag) = (0.0, 0.0, 0.0, 0.0);
    for (&(i, j), &v) in &state.coefficients {
        let (fi, fj) = (i as f64, j as f64);
        na += v * v * fi;
        nb += v * v * fj;
        if i >= 2 {
            a2 += c(i - 2, j) * v * (fi * (fi - 1.0)).sqrt();
        }
        if j >= 2 {
            b2 += c(i, j - 2) * v * (fj * (fj - 1.0)).sqrt();
        }
        if i >= 1 && j >= 1 {
            ab += c(i - 1, j - 1) * v * (fi * fj).sqrt();
        }
        if i >= 1 {
            ab_dag += c(i - 1, j + 1) * v * (fi * (fj + 1.0)).sqrt();
        }
    }
    let vq_a = 2.0 * a2 + 2.0 * na + 1.0;
    let vp_a = -2.0 * a2 + 2.0 * na + 1.0;
    let vq_b = 2.0 * b2 + 2.0 * nb + 1.0;
    let vp_b = -2.0 * b2 + 2.0 * nb + 1.0;
    let cqq = 2.0 * ab + 2.0 * ab_dag;
    let cpp = -2.0 * ab + 2.0 * ab_dag;
    #[rustfmt::skip]
    let data = [
        vq_a, 0.0, cqq, 0.0,
        0.0, vp_a, 0.0, cpp,
        cqq, 0.0, vq_b, 0.0,
        0.0, cpp, 0.0, vp_b,
    ];
    CovarianceMatrix::new(DMatrix::from_row_slice(4, 4, &data))
}

/// Reads (x, y, z) off the oracle covariance matrix.
pub fn oracle_cm_from_fock(state: &FockTwoModeState) -> Result<TwoModeCm> {
    let m = oracle_covariance(state)?.into_matrix();
    Ok(TwoModeCm::new(m[(0, 0)], m[(2, 2)], m[(0, 2)]))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    for k in 1..=n {
        table.push(table[k - 1] + (k as f64).ln());
    }
    table
}

/// base^(exp/2) in the log domain, with 0⁰ = 1.
fn ln_sqrt_pow(base: f64, exp: usize) -> f64 {
    if exp == 0 {
        0.0
    } else {
        0.5 * exp as f64 * base.ln()
    }
}

/// ⟨p, q| U(t) |m, k⟩ for a beam splitter with
/// a₁† → √t a₁† + √(1−t) a₂† and a₂† → −√(1−t) a₁† + √t a₂†.
pub fn beam_splitter_amplitude(m: usize, k: usize, p: usize, q: usize, t: f64) -> f64 {
    if m + k != p + q {
        return 0.0;
    }
    let lf = ln_factorials(m + k);
    let r = 1.0 - t;
    let ln_norm = 0.5 * (lf[p] + lf[q] - lf[m] - lf[k]);
    let mut total = 0.0;
    for i in p.saturating_sub(k)..=m.min(p) {
        let j = p - i;
        let t_exp = i + k - j;
        let r_exp = m - i + j;
        if (t_exp > 0 && t <= 0.0) || (r_exp > 0 && r <= 0.0) {
            continue;
        }
        let ln_binom = lf[m] - lf[i] - lf[m - i] + lf[k] - lf[j] - lf[k - j];
        let mag = (ln_binom + ln_sqrt_pow(t, t_exp) + ln_sqrt_pow(r, r_exp) + ln_norm).exp();
        total += if j.is_multiple_of(2) { mag } else { -mag };
    }
    total
}

/// Heralding arrangements simulated by [`heralded_state`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeraldSetup {
    /// Vacuum ancilla on mode B, herald N photons in the ancilla output.
    SubtractFromB,
    /// |N⟩ ancilla on mode B, herald vacuum in the ancilla output.
    AddToB,
    /// |N⟩ ancilla on mode A, herald vacuum in the ancilla output.
    AddToA,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldOutcome {
    pub probability: f64,
    pub state: FockTwoModeState,
}

/// Brute-force heralding on a TMSV truncated at `n_max`: every Fock term is
/// sent through the beam splitter and projected on the heralding outcome.
pub fn heralded_state(
    alpha2: f64,
    t_s: f64,
    setup: HeraldSetup,
    photons: u32,
    n_max: usize,
) -> Result<HeraldOutcome> {
    if !(alpha2 >= 0.0 && t_s > 0.0 && t_s <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha2/t_s",
            value: if alpha2 >= 0.0 { t_s } else { alpha2 },
            reason: "need alpha2 >= 0 and 0 < t_s <= 1",
        });
    }
    let n = photons as usize;
    let q = alpha2 / (1.0 + alpha2);
    let mut amplitudes = BTreeMap::new();
    for k in 0..=n_max {
        let a_k = ((1.0 - q) * q.powi(k as i32)).sqrt();
        if a_k == 0.0 {
            continue;
        }
        let (key, amp) = match setup {
            HeraldSetup::SubtractFromB => {
                if k < n {
                    continue;
                }
                ((k, k - n), beam_splitter_amplitude(k, 0, k - n, n, t_s))
            }
            HeraldSetup::AddToB => ((k, k + n), beam_splitter_amplitude(k, n, k + n, 0, t_s)),
            HeraldSetup::AddToA => ((k + n, k), beam_splitter_amplitude(k, n, k + n, 0, t_s)),
        };
        let c = a_k * amp;
        if c != 0.0 {
            amplitudes.insert(key, c);
        }
    }
    let probability: f64 = amplitudes.values().map(|c| c * c).sum();
    if probability <= 0.0 {
        return Err(Error::numerical(
            "states.heralded_state",
            "heralding outcome has zero probability",
        ));
    }
    // Input weight beyond the truncation bounds the missing heralded weight.
    let tail = q.powi(n_max as i32 + 1) / probability;
    if tail > TAIL_LIMIT {
        return Err(Error::CutoffTooSmall { cutoff: n_max, tail });
    }
    // Drop the global sign so amplitudes match fock_ket.
    let sign = amplitudes.values().next().map_or(1.0, |c: &f64| c.signum());
    let norm = probability.sqrt();
    for c in amplitudes.values_mut() {
        *c *= sign / norm;
    }
    Ok(HeraldOutcome {
        probability,
        state: FockTwoModeState {
            coefficients: amplitudes,
            cutoff: n_max,
            tail_bound: tail,
        },
    })
}

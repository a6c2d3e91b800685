//! Secret key rate of the entanglement-based protocol with reverse
//! reconciliation: channel and detector evolution of the covariance
//! matrix, mutual information, Holevo bound and fading averages.

use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::TransmissivityEnsemble;
use crate::error::{Error, Result};
use crate::rng::pairwise_sum;
use crate::specfun::{
    condition_on_homodyne, g_function, symplectic_eigenvalues, CovarianceMatrix, Quadrature,
};
use crate::states::{source_cm, success_probability, SourceParams, TwoModeCm};

/// Eigenvalues this close below 1 are rounding noise on a pure mode.
const EIGEN_CLAMP: f64 = 1e-6;

/// Hardware and post-processing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    /// Excess noise ε at the channel input, vacuum units.
    pub epsilon: f64,
    /// Detector thermal noise ν.
    pub nu: f64,
    /// Detector efficiency η_d.
    pub eta_d: f64,
    /// Reconciliation efficiency η_r.
    pub eta_r: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            nu: 1.1,
            eta_d: 0.68,
            eta_r: 0.95,
        }
    }
}

impl NoiseParams {
    /// Lossless, noiseless detection with perfect reconciliation.
    pub fn ideal() -> Self {
        Self {
            epsilon: 0.0,
            nu: 1.0,
            eta_d: 1.0,
            eta_r: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon, "excess noise must be non-negative");
        }
        if !(self.nu >= 1.0 && self.nu.is_finite()) {
            return bad("nu", self.nu, "detector noise must be at least vacuum");
        }
        if !(self.eta_d > 0.0 && self.eta_d <= 1.0) {
            return bad("eta_d", self.eta_d, "detector efficiency must lie in (0, 1]");
        }
        if !(self.eta_r > 0.0 && self.eta_r <= 1.0) {
            return bad("eta_r", self.eta_r, "reconciliation efficiency must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub source: SourceParams,
    pub noise: NoiseParams,
}

impl ProtocolParams {
    pub fn new(source: SourceParams, noise: NoiseParams) -> Result<Self> {
        source.validate()?;
        noise.validate()?;
        Ok(Self { source, noise })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateResult {
    /// max(0, raw_rate), bits per pulse.
    pub rate: f64,
    /// P_N (η_r I − χ) before clamping.
    pub raw_rate: f64,
    pub mutual_info: f64,
    pub holevo: f64,
    pub success_prob: f64,
    /// λ₁, λ₂ of γ_AB₂ followed by λ₃..λ₅ of γ_AGH|B₃.
    pub sympl_eigs: [f64; 5],
}

/// Ensemble means of the per-sample quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingKeyRate {
    /// Mean of the clamped per-sample rates.
    pub rate: f64,
    /// Mean of the unclamped rates.
    pub raw_rate: f64,
    pub mutual_info: f64,
    pub holevo: f64,
    pub success_prob: f64,
    pub n_samples: usize,
}

/// γ_AB₁ → γ_AB₂ through a lossy channel with input excess noise.
pub fn evolve_channel(gamma: TwoModeCm, t_e: f64, epsilon: f64) -> TwoModeCm {
    TwoModeCm::new(
        gamma.x,
        t_e * (gamma.y + epsilon) + (1.0 - t_e),
        t_e.sqrt() * gamma.z,
    )
}

/// Entries of γ_AGHB₃ shared by the dense and block-diagonal routes.
struct DetectorBlocks {
    x: f64,
    v_g: f64,
    nu: f64,
    c_ag: f64,
    c_gh: f64,
    /// A, G, H correlations with B₃.
    s: [f64; 3],
    y2: f64,
}

impl DetectorBlocks {
    fn new(ab2: &TwoModeCm, eta_d: f64, nu: f64) -> Self {
        let (x, y1, z1) = (ab2.x, ab2.y, ab2.z);
        let loss = 1.0 - eta_d;
        let thermal = (nu * nu - 1.0).max(0.0);
        Self {
            x,
            v_g: eta_d * nu + loss * y1,
            nu,
            c_ag: -loss.sqrt() * z1,
            c_gh: (eta_d * thermal).sqrt(),
            s: [
                eta_d.sqrt() * z1,
                (loss * eta_d).sqrt() * (nu - y1),
                (loss * thermal).sqrt(),
            ],
            y2: eta_d * y1 + loss * nu,
        }
    }

    /// x-x and p-p blocks of γ_AGH|B₃. All blocks are diagonal in (x, p),
    /// so the conditional state splits into two 3×3 matrices.
    fn conditional_blocks(&self) -> (Matrix3<f64>, Matrix3<f64>) {
        let Self {
            x,
            v_g,
            nu,
            c_ag,
            c_gh,
            s,
            y2,
        } = *self;
        let mut xx = Matrix3::new(x, c_ag, 0.0, c_ag, v_g, c_gh, 0.0, c_gh, nu);
        for i in 0..3 {
            for j in 0..3 {
                xx[(i, j)] -= s[i] * s[j] / y2;
            }
        }
        let pp = Matrix3::new(x, -c_ag, 0.0, -c_ag, v_g, -c_gh, 0.0, -c_gh, nu);
        (xx, pp)
    }

    fn dense(&self) -> DMatrix<f64> {
        let Self {
            x,
            v_g,
            nu,
            c_ag,
            c_gh,
            s,
            y2,
        } = *self;
        let mut m = DMatrix::zeros(8, 8);
        let mut block = |a: usize, b: usize, xx: f64, pp: f64| {
            m[(2 * a, 2 * b)] = xx;
            m[(2 * a + 1, 2 * b + 1)] = pp;
            m[(2 * b, 2 * a)] = xx;
            m[(2 * b + 1, 2 * a + 1)] = pp;
        };
        // Modes: 0 = A, 1 = G, 2 = H, 3 = B₃. σ_z blocks flip the p-p sign.
        block(0, 0, x, x);
        block(1, 1, v_g, v_g);
        block(2, 2, nu, nu);
        block(3, 3, y2, y2);
        block(0, 1, c_ag, -c_ag);
        block(1, 2, c_gh, -c_gh);
        block(0, 3, s[0], -s[0]);
        // G and B₃ are outputs of the same splitter fed by B₂ and one mode
        // of the noise TMSV; their correlation is proportional to I.
        block(1, 3, s[1], s[1]);
        block(2, 3, s[2], -s[2]);
        m
    }
}

/// 8×8 covariance matrix of modes (A, G, H, B₃) after the imperfect
/// homodyne detector, modelled as a beam splitter of transmissivity η_d
/// mixing B₂ with one half of a TMSV of variance ν.
pub fn detector_cm(gamma_ab2: &TwoModeCm, eta_d: f64, nu: f64) -> Result<CovarianceMatrix> {
    let cm = CovarianceMatrix::new(DetectorBlocks::new(gamma_ab2, eta_d, nu).dense())?;
    let eigs = symplectic_eigenvalues(&cm)?;
    if let Some(&min) = eigs.last() {
        if min < 1.0 - EIGEN_CLAMP {
            return Err(Error::Unphysical {
                context: "keyrate.detector_cm",
                eigenvalue: min,
            });
        }
    }
    Ok(cm)
}

fn noise_constant(t_e: f64, noise: &NoiseParams) -> f64 {
    noise.eta_d * ((1.0 - t_e) + t_e * noise.epsilon) + (1.0 - noise.eta_d) * noise.nu
}

/// I(A:B₃) in closed form from the source-state entries.
pub fn mutual_information(gamma: &TwoModeCm, t_e: f64, noise: &NoiseParams) -> Result<f64> {
    let TwoModeCm { x, y, z } = *gamma;
    let c = noise_constant(t_e, noise);
    let eta_t = noise.eta_d * t_e;
    let arg = 1.0 - eta_t * z * z / (eta_t * x * y + c * x);
    if !(arg > 0.0) {
        return Err(Error::Unphysical {
            context: "keyrate.mutual_information",
            eigenvalue: arg,
        });
    }
    Ok(-0.5 * arg.log2())
}

/// I(A:B₃) = ½ log₂(V_A / V_A|B₃) with the conditional variance taken from
/// the detector covariance matrix.
pub fn mutual_information_conditional(
    gamma: &TwoModeCm,
    t_e: f64,
    noise: &NoiseParams,
) -> Result<f64> {
    let ab2 = evolve_channel(*gamma, t_e, noise.epsilon);
    let full = detector_cm(&ab2, noise.eta_d, noise.nu)?;
    let cond = condition_on_homodyne(&full, 3, Quadrature::X)?;
    let v_a = full.matrix()[(0, 0)];
    let v_cond = cond.matrix()[(0, 0)];
    if !(v_cond > 0.0) {
        return Err(Error::Unphysical {
            context: "keyrate.mutual_information_conditional",
            eigenvalue: v_cond,
        });
    }
    Ok(0.5 * (v_a / v_cond).log2())
}

fn clamp_eigenvalue(v: f64, context: &'static str) -> Result<f64> {
    if v.is_nan() || v < 1.0 - EIGEN_CLAMP {
        Err(Error::Unphysical {
            context,
            eigenvalue: v,
        })
    } else {
        Ok(v.max(1.0))
    }
}

fn descending3(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// λ₃..λ₅ of γ_AGH|B₃ as √eig(X P). With X = L_x L_xᵀ and P = L_p L_pᵀ these
/// are the singular values of L_pᵀ L_x.
fn conditional_eigenvalues(blocks: &DetectorBlocks) -> Result<[f64; 3]> {
    let (xx, pp) = blocks.conditional_blocks();
    match (xx.cholesky(), pp.cholesky()) {
        (Some(x), Some(p)) => {
            let sv = (p.l().transpose() * x.l()).singular_values();
            Ok(descending3([sv[0], sv[1], sv[2]]))
        }
        _ => conditional_eigenvalues_general_from(blocks),
    }
}

fn conditional_eigenvalues_general_from(blocks: &DetectorBlocks) -> Result<[f64; 3]> {
    let full = CovarianceMatrix::new(blocks.dense())?;
    let cond = condition_on_homodyne(&full, 3, Quadrature::X)?;
    let ev = symplectic_eigenvalues(&cond)?;
    Ok([ev[0], ev[1], ev[2]])
}

/// λ₃..λ₅ through the dense 8×8 matrix, homodyne conditioning and the
/// general symplectic spectrum. Slower; kept as an independent route.
pub fn conditional_eigenvalues_general(
    gamma: &TwoModeCm,
    t_e: f64,
    noise: &NoiseParams,
) -> Result<[f64; 3]> {
    let ab2 = evolve_channel(*gamma, t_e, noise.epsilon);
    conditional_eigenvalues_general_from(&DetectorBlocks::new(&ab2, noise.eta_d, noise.nu))
}

fn holevo_with_eigs(gamma: &TwoModeCm, t_e: f64, noise: &NoiseParams) -> Result<(f64, [f64; 5])> {
    let ab2 = evolve_channel(*gamma, t_e, noise.epsilon);
    let [l1, l2] = ab2.symplectic_eigenvalues();
    let blocks = DetectorBlocks::new(&ab2, noise.eta_d, noise.nu);
    let [l3, l4, l5] = conditional_eigenvalues(&blocks)?;
    let ctx = "keyrate.holevo_bound";
    let eigs = [
        clamp_eigenvalue(l1, ctx)?,
        clamp_eigenvalue(l2, ctx)?,
        clamp_eigenvalue(l3, ctx)?,
        clamp_eigenvalue(l4, ctx)?,
        clamp_eigenvalue(l5, ctx)?,
    ];
    let mut chi = 0.0;
    for (k, &l) in eigs.iter().enumerate() {
        let g = g_function(l)?;
        chi += if k < 2 { g } else { -g };
    }
    Ok((chi, eigs))
}

/// χ(E:B₃) = S(E) − S(E|B₃) from λ₁..λ₅.
pub fn holevo_bound(gamma: &TwoModeCm, t_e: f64, noise: &NoiseParams) -> Result<f64> {
    holevo_with_eigs(gamma, t_e, noise).map(|(chi, _)| chi)
}

/// Source covariance matrix and heralding probability, reusable across
/// many channel transmissivities.
#[derive(Debug, Clone, Copy)]
pub struct RateEvaluator {
    source: TwoModeCm,
    success_prob: f64,
    noise: NoiseParams,
}

impl RateEvaluator {
    pub fn new(params: &ProtocolParams) -> Result<Self> {
        params.source.validate()?;
        params.noise.validate()?;
        Ok(Self {
            source: source_cm(&params.source),
            success_prob: success_probability(&params.source),
            noise: params.noise,
        })
    }

    pub fn source_cm(&self) -> TwoModeCm {
        self.source
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    pub fn at(&self, t_e: f64) -> Result<KeyRateResult> {
        if !(0.0..=1.0).contains(&t_e) {
            return Err(Error::Domain {
                function: "key_rate",
                value: t_e,
                constraint: "0 <= T_E <= 1",
            });
        }
        let mutual_info = mutual_information(&self.source, t_e, &self.noise)?;
        let (holevo, sympl_eigs) = holevo_with_eigs(&self.source, t_e, &self.noise)?;
        let raw_rate = self.success_prob * (self.noise.eta_r * mutual_info - holevo);
        Ok(KeyRateResult {
            rate: raw_rate.max(0.0),
            raw_rate,
            mutual_info,
            holevo,
            success_prob: self.success_prob,
            sympl_eigs,
        })
    }
}

/// Key rate K = P_N [η_r I(A:B₃) − χ(E:B₃)] at a fixed transmissivity.
pub fn key_rate(params: &ProtocolParams, t_e: f64) -> Result<KeyRateResult> {
    RateEvaluator::new(params)?.at(t_e)
}

/// Monte Carlo fading average of the key rate over an ensemble.
pub fn average_key_rate(
    params: &ProtocolParams,
    ensemble: &TransmissivityEnsemble,
) -> Result<FadingKeyRate> {
    let eval = RateEvaluator::new(params)?;
    let results: Vec<KeyRateResult> = ensemble
        .samples()
        .par_iter()
        .map(|&t| eval.at(t))
        .collect::<Result<_>>()?;
    let n = results.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mean = |f: fn(&KeyRateResult) -> f64| {
        let v: Vec<f64> = results.iter().map(f).collect();
        pairwise_sum(&v) / n as f64
    };
    Ok(FadingKeyRate {
        rate: mean(|r| r.rate),
        raw_rate: mean(|r| r.raw_rate),
        mutual_info: mean(|r| r.mutual_info),
        holevo: mean(|r| r.holevo),
        success_prob: eval.success_prob,
        n_samples: n,
    })
}

/// PLOB repeaterless bound −log₂(1 − T).
pub fn repeaterless_bound(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain {
            function: "repeaterless_bound",
            value: t,
            constraint: "0 <= T < 1",
        });
    }
    Ok(-(-t).ln_1p() / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageBound {
    pub bound: f64,
    /// Samples with T ≥ 1 − 1e-15, for which the bound diverges.
    pub n_skipped: usize,
}

/// Monte Carlo mean of the repeaterless bound over an ensemble.
pub fn average_repeaterless_bound(ensemble: &TransmissivityEnsemble) -> Result<AverageBound> {
    let values: Vec<f64> = ensemble
        .samples()
        .iter()
        .filter(|&&t| t < 1.0 - 1e-15)
        .map(|&t| repeaterless_bound(t))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(AverageBound {
        bound: pairwise_sum(&values) / values.len() as f64,
        n_skipped: ensemble.n_samples() - values.len(),
    })
}

//! Covariance matrices of Gaussian states in (x₁,p₁,…,xₙ,pₙ) ordering with
//! vacuum variance 1.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PAIRING_TOL: f64 = 1e-8;
const PHYSICAL_FLOOR: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

impl CovarianceMatrix {
    /// Wraps a 2n×2n matrix, checking shape and symmetry.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::numerical(
                "CovarianceMatrix::new",
                format!("expected a nonempty 2n x 2n matrix, got {r} x {c}"),
            ));
        }
        let scale = entries.amax().max(1.0);
        for i in 0..r {
            for j in (i + 1)..r {
                if (entries[(i, j)] - entries[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::numerical(
                        "CovarianceMatrix::new",
                        format!("not symmetric at ({i}, {j})"),
                    ));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            entries: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    /// Block-diagonal direct sum γ ⊕ other.
    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let (a, b) = (self.entries.nrows(), other.entries.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.entries);
        m.view_mut((a, a), (b, b)).copy_from(&other.entries);
        CovarianceMatrix { entries: m }
    }

    /// S γ Sᵀ for a (symplectic) transformation S.
    pub fn transform(&self, s: &DMatrix<f64>) -> Result<CovarianceMatrix> {
        let m = s * &self.entries * s.transpose();
        let sym = (&m + m.transpose()) * 0.5;
        CovarianceMatrix::new(sym)
    }

    /// True when every symplectic eigenvalue is at least 1 − 1e-9.
    pub fn is_physical(&self) -> bool {
        symplectic_eigenvalues(self)
            .map(|ev| ev.iter().all(|&v| v >= PHYSICAL_FLOOR))
            .unwrap_or(false)
    }
}

/// Standard symplectic form Ω = ⊕ [[0, 1], [−1, 0]].
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues, sorted descending.
///
/// The eigenvalues of iΩγ are ±ν_k. With the Cholesky factor γ = LLᵀ,
/// B = LᵀΩL is antisymmetric and similar to Ωγ, so the ν_k are the singular
/// values of B and appear in equal pairs. Both factorizations are backward
/// stable, which matters for strongly squeezed inputs. Pairs that disagree
/// by more than 1e-8 (relative to the largest entry) reject the input.
pub fn symplectic_eigenvalues(gamma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = gamma.modes();
    let scale = gamma.matrix().amax().max(1.0);
    let l = gamma.matrix().clone().cholesky().ok_or_else(|| {
        Error::numerical(
            "symplectic_eigenvalues",
            "covariance matrix is not positive definite",
        )
    })?;
    let l = l.l();
    let b = l.transpose() * symplectic_form(n) * &l;
    let singular = b.singular_values();

    let mut nus: Vec<f64> = singular.iter().copied().collect();
    nus.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(n);
    for pair in nus.chunks(2) {
        if (pair[0] - pair[1]).abs() > PAIRING_TOL * scale {
            return Err(Error::numerical(
                "symplectic_eigenvalues",
                format!("unpaired eigenvalues ±i: {} vs {}", pair[0], pair[1]),
            ));
        }
        out.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(out)
}

/// Conditional covariance of the remaining modes after an ideal homodyne
/// measurement of `quadrature` on `measured_mode`.
///
/// γ_rest − σ·(ΠVΠ)⁺·σᵀ, with Π projecting on the measured quadrature.
pub fn condition_on_homodyne(
    gamma: &CovarianceMatrix,
    measured_mode: usize,
    quadrature: Quadrature,
) -> Result<CovarianceMatrix> {
    let n = gamma.modes();
    if n < 2 || measured_mode >= n {
        return Err(Error::numerical(
            "condition_on_homodyne",
            format!("cannot measure mode {measured_mode} of a {n}-mode state"),
        ));
    }
    let g = gamma.matrix();
    let q = 2 * measured_mode
        + match quadrature {
            Quadrature::X => 0,
            Quadrature::P => 1,
        };
    let variance = g[(q, q)];
    if variance <= 1e-12 {
        return Err(Error::DegenerateMeasurement { variance });
    }

    let keep: Vec<usize> = (0..2 * n)
        .filter(|&i| i / 2 != measured_mode)
        .collect();
    let dim = keep.len();
    let mut out = DMatrix::zeros(dim, dim);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[(a, b)] = g[(i, j)] - g[(i, q)] * g[(j, q)] / variance;
        }
    }
    CovarianceMatrix::new(out)
}

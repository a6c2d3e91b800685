use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("{function}: argument {value} outside domain ({constraint})")]
    Domain {
        function: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A numerical routine failed to converge or produced inconsistent output.
    #[error("numerical failure in {context}: {detail}")]
    Numerical {
        context: &'static str,
        detail: String,
    },

    /// The θ₁/θ₂ covariance from the turbulence statistics is not a valid
    /// joint-Gaussian covariance.
    #[error("invalid beam-parameter covariance: |cov| = {cov} exceeds var = {var}")]
    InvalidCovariance { var: f64, cov: f64 },

    /// A covariance matrix violates the uncertainty principle.
    #[error("unphysical covariance matrix in {context}: symplectic eigenvalue {eigenvalue}")]
    Unphysical {
        context: &'static str,
        eigenvalue: f64,
    },

    #[error("degenerate homodyne measurement: measured variance {variance}")]
    DegenerateMeasurement { variance: f64 },

    #[error("Fock cutoff {cutoff} too small: neglected tail weight {tail:e} exceeds 1e-10")]
    CutoffTooSmall { cutoff: usize, tail: f64 },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Configuration error, tagged with the offending field path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

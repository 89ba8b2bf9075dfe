use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading a config and writing a spectrum.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("balance equation has {count} sign changes on the scan grid (expected exactly one): {diagnostic}")]
    MultipleRoots { count: usize, diagnostic: String },

    #[error("the linearized S-subsystem is unstable at N = {inversion} (max Re eigenvalue {growth_rate})")]
    Unstable { inversion: f64, growth_rate: f64 },

    #[error("FWHM undefined for split spectrum: {0}")]
    SplitSpectrum(String),

    #[error("no splitting regime: Nc = {n_c} >= N0 = {n0}")]
    NoSplitting { n_c: f64, n0: f64 },

    #[error("quadrature did not converge after {panels} panels (estimated error {error:e}, value {value:e})")]
    Quadrature {
        panels: usize,
        error: f64,
        value: f64,
    },

    #[error("root search did not converge: {0}")]
    Convergence(String),

    #[error("Monte-Carlo: {0}")]
    MonteCarlo(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 = configuration, 3 = solver, 4 = physics domain (pole, no root).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Config(_) | Error::Json(_) | Error::Io(_) => 2,
            Error::Quadrature { .. } | Error::Convergence(_) | Error::MonteCarlo(_) => 3,
            Error::Pole(_)
            | Error::NoRoot(_)
            | Error::MultipleRoots { .. }
            | Error::Unstable { .. }
            | Error::SplitSpectrum(_)
            | Error::NoSplitting { .. } => 4,
        }
    }
}

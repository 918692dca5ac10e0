use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported spin quantum number {0} (supported: 1/2, 1, 3/2)")]
    UnsupportedSpin(f64),

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("separation {distance:.3} Å is below the {cutoff} Å point-dipole cutoff")]
    BelowCutoff { distance: f64, cutoff: f64 },

    #[error("unsupported pulse in sequence `{sequence}`: {reason}")]
    UnsupportedPulse { sequence: String, reason: String },

    #[error("Hilbert space dimension {dim} exceeds the limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("resonance denominator 2·f_l + a_par = {0:.3e} Hz is too close to zero")]
    NearZeroDenominator(f64),

    #[error("fit is unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("undersampled oscillation: {0}")]
    Undersampled(String),

    #[error("data decays resolvably (best-fit chi2 {chi2:.3} exceeds the critical value {critical:.3}); use fit_stretched_exp")]
    ResolvableDecay { chi2: f64, critical: f64 },

    #[error("too few dwell segments: found {found}, need at least {required}; {hint}")]
    TooFewJumps {
        found: usize,
        required: usize,
        hint: String,
    },

    #[error("numerical quality failure: {0}")]
    Numerical(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

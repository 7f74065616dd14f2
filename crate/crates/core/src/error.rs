use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("field contains a non-finite value at site {index}")]
    NonFinite { index: usize },

    #[error("Hermitian symmetry violated: residual {residual:e} exceeds tolerance {tolerance:e}")]
    SymmetryViolation { residual: f64, tolerance: f64 },

    #[error("helical basis is undefined at the zero wavevector")]
    ZeroWavevector,

    #[error("negative power s = {s} applied to a field with a nonzero mean mode")]
    NegativePowerAtZeroMode { s: f64 },

    #[error("wavevector {k:?} is not representable on the dealiased lattice (limit {limit:?})")]
    UnrepresentableWavevector { k: [i64; 3], limit: [i64; 3] },

    #[error("stream function must be constant along x3 (max deviation {deviation:e})")]
    NotConstantAlongX3 { deviation: f64 },

    #[error("cutoff radius {radius} must lie in (0, {max})")]
    InvalidRadius { radius: f64, max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("blow-up detected at t = {t} (step {step}): {reason}")]
    BlowupDetected { t: f64, step: u64, reason: String },

    #[error("fields are identical to working precision")]
    IdenticalFields,

    #[error("diagnostic series is not uniformly spaced at record {index}")]
    NonUniformSeries { index: usize },

    #[error("diagnostic series is empty")]
    EmptySeries,

    #[error("two routes for {quantity} disagree: {a:e} vs {b:e}")]
    RouteMismatch { quantity: &'static str, a: f64, b: f64 },

    #[error("{path}: bad magic {found:?} at byte 0")]
    BadMagic { path: PathBuf, found: [u8; 4] },

    #[error("{path}: unsupported version {found} at byte 4")]
    VersionMismatch { path: PathBuf, found: u32 },

    #[error("{path}: unknown layout tag {found} at byte 8")]
    BadLayout { path: PathBuf, found: u8 },

    #[error("{path}: truncated file, expected {expected} bytes, found {actual}")]
    TruncatedFile { path: PathBuf, expected: u64, actual: u64 },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("tabulated profile must be nonnegative and strictly positive near the origin")]
    NonpositiveProfile,
    #[error("malformed kernel table: {0}")]
    Table(String),
    #[error("kernel has infinite support")]
    InfiniteSupport,
    #[error("kernel has infinite mass")]
    InfiniteMass,
    #[error("kernel must be normalized first")]
    NotNormalized,
    #[error("horizon {delta} is outside the range allowed for {mode} rescaling")]
    HorizonRange { delta: f64, mode: &'static str },
    #[error("kernel profile vanishes at radius {0}")]
    VanishingProfile(f64),
    #[error("integral does not converge: {0}")]
    Divergent(String),
    #[error("unsupported spatial dimension {0} (expected 1 or 2)")]
    Dimension(usize),
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("node count {nodes} exceeds the cap {cap}")]
    MemoryBudget { nodes: usize, cap: usize },
    #[error("analytic-only kernel cannot be discretized on a grid")]
    AnalyticOnly,
    #[error("kernel support {support} exceeds the grid padding {padding}")]
    PaddingExceeded { support: f64, padding: f64 },
    #[error("field does not vanish on the padding ring (max |u| = {0})")]
    PaddingNotZero(f64),
    #[error("symbol of Q is near zero at frequency {xi} (value {value}); supply a floor")]
    SymbolNearZero { xi: f64, value: f64 },
    #[error("field shape mismatch: {0}")]
    Shape(String),
    #[error("coefficient is not elliptic: min eigenvalue {0}")]
    Ellipticity(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("zero field")]
    ZeroField,
    #[error("requested {requested} eigenpairs but only {available} degrees of freedom")]
    TooManyEigenpairs { requested: usize, available: usize },
    #[error("invalid sweep configuration: {0}")]
    Sweep(String),
    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("nonpositive error value {0} in rate estimate")]
    NonpositiveError(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

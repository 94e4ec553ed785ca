use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {coords:?} is outside the open unit ball (squared norm {norm_sq})")]
    OutsideBall { coords: Vec<f64>, norm_sq: f64 },

    #[error("coordinates must be finite, got {0:?}")]
    NonFinite(Vec<f64>),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("arccosh argument {0} is below 1")]
    ArccoshDomain(f64),

    #[error("invalid projection (c = {c}, l = {l}): need c < 1 and l > 0")]
    InvalidProjection { c: f64, l: f64 },

    #[error("degenerate projection: denominator {0} is not positive")]
    DegenerateProjection(f64),

    #[error("degenerate bisector: the two points coincide")]
    DegenerateBisector,

    #[error("invalid subset generator {indices:?} for {n} sites")]
    InvalidSubset { indices: Vec<usize>, n: usize },

    #[error("clip radius must satisfy 0 < l <= 1, got {0}")]
    InvalidClipRadius(f64),

    #[error("order k = {k} is out of range for {n} sites")]
    InvalidOrder { k: usize, n: usize },

    #[error("C({n}, {k}) subset generators exceed the limit of {limit}")]
    TooManySubsets { n: usize, k: usize, limit: u64 },

    #[error("at least one site is required")]
    NoSites,

    #[error("sites {first} and {second} coincide")]
    DuplicateSite { first: usize, second: usize },

    #[error("site {index}: {source}")]
    Site {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("point ({x}, {y}) is outside the clip disk of radius {radius}")]
    OutsideClipDisk { x: f64, y: f64, radius: f64 },

    #[error("point ({x}, {y}) is not covered by any cell")]
    Uncovered { x: f64, y: f64 },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("function `{id}` requires parameter `{param}`")]
    MissingParameter { id: String, param: &'static str },

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("not a density: {0}")]
    NotADensity(String),

    #[error("points are not strictly ascending at index {0}")]
    Unordered(usize),

    #[error("input is not concave at knot {0}")]
    NotConcave(usize),

    #[error("singular boundary system at s = {s} (determinant {det:e})")]
    SingularBoundarySystem { s: f64, det: f64 },

    #[error("Hellinger distance undefined: nonpositive value {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },

    #[error("c1 undefined: derivative vanishes at t = {0}")]
    VanishingDerivative(f64),

    #[error("no replications")]
    NoReplications,

    #[error("missing variance component `{0}` for the requested regime")]
    MissingVariance(&'static str),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            value,
            range: range.into(),
        }
    }
}

/// Bandwidth must lie in `(0, 1/2)`.
pub(crate) fn check_bandwidth(b: f64) -> Result<()> {
    if b > 0.0 && b < 0.5 {
        Ok(())
    } else {
        Err(Error::out_of_range("b", b, "(0, 1/2)"))
    }
}

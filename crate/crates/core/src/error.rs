use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the formula or constructor.
    #[error("{name} = {value} is outside the domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },

    /// A formula has a pole at the requested point.
    #[error("{name} has a pole at {at}")]
    Pole { name: &'static str, at: f64 },

    /// A sample size does not fit in an exactly representable integer.
    #[error("sample size overflow while computing {0}")]
    Overflow(&'static str),

    /// A sample source produced a non-finite value.
    #[error("non-finite draw {value} from source {source_name}")]
    NonFiniteDraw { source_name: String, value: f64 },

    /// The plan handed to a kernel was built for another estimator or accuracy.
    #[error("plan mismatch: {0}")]
    PlanMismatch(String),

    /// Median requested for an empty or even-length slice.
    #[error("median needs an odd, non-empty input (got {0} values)")]
    MedianLength(usize),

    /// A distribution or configuration string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain<T: num_traits::ToPrimitive>(name: &'static str, value: T, domain: &'static str) -> Self {
        Error::Domain { name, value: value.to_f64().unwrap_or(f64::NAN), domain }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

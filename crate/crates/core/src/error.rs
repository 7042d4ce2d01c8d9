use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no resilient-to-fragile transition on the scan grid: entire range {0}")]
    NoTransition(&'static str),

    #[error("several resilient-to-fragile transitions on the scan grid: {0:?}")]
    MultipleTransitions(Vec<(f64, f64)>),

    #[error("desired sourcing has no interior peak in the correlation")]
    NoInteriorPeak,

    #[error("planner state cap of {cap} states exceeded")]
    StateCapExceeded { cap: usize },

    #[error("diversification level overflowed u64")]
    DiversificationOverflow,

    #[error("network would need {basal} basal firms (limit {limit})")]
    NetworkTooLarge { basal: u128, limit: u64 },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}

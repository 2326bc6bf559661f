use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} must lie in {domain}, got {value}")]
    Domain {
        what: &'static str,
        domain: &'static str,
        value: String,
    },

    #[error("{what}: size {n} exceeds the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error(
        "coupling horizon would exceed hard cap {cap} before the tail bound fell below {epsilon}"
    )]
    HorizonCap { cap: u64, epsilon: f64 },

    #[error("arc {index} is degenerate: its limiting variance constant is zero")]
    DegenerateArc { index: usize },

    #[error("samples must be sorted in nondecreasing order")]
    Unsorted,
}

impl Error {
    pub(crate) fn domain(what: &'static str, domain: &'static str, value: impl ToString) -> Self {
        Error::Domain {
            what,
            domain,
            value: value.to_string(),
        }
    }
}

use alloc::string::String;

/// Errors raised by model construction, table building, and integration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate ground state: h = {h} is within 1e-12 of the level crossing h_{m} = {critical}")]
    DegenerateGroundState { h: f64, m: usize, critical: f64 },

    #[error("f-table for N = {n_sites}, m = {m} needs about {estimate} bytes, above the cap of {cap} bytes")]
    Resource {
        n_sites: usize,
        m: usize,
        estimate: u64,
        cap: u64,
    },

    #[error("integration failed: norm drift {drift:e} exceeds tolerance {tolerance:e}")]
    IntegrationFailure { drift: f64, tolerance: f64 },

    #[error("no f-table loaded for lower sector size m = {0}")]
    MissingTable(usize),

    #[error("dense oracle is limited to N <= {max}, got N = {n_sites}")]
    OracleSize { n_sites: usize, max: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Declared and evaluated shapes of a model disagree.
    #[error("model definition: {0}")]
    ModelDefinition(String),

    /// A model map returned a non-finite value.
    #[error("non-finite output from `{map}` at point {point:?}")]
    Evaluation { map: &'static str, point: Vec<f64> },

    /// A grid or buffer would exceed its configured size cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A simulated state became non-finite.
    #[error("divergence at node {node} (t = {time})")]
    Divergence { node: usize, time: f64 },

    /// An operation was requested on inputs where it is undefined.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Every Monte Carlo path in a cell diverged.
    #[error("all {n_paths} paths diverged")]
    AllDiverged { n_paths: u64 },
}

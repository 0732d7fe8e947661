use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its domain (zero-length clock, probability
    /// outside `[0, 1]`, zero trials, and so on).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two trains (or bit strings) that must share a length do not.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// An operation that needs at least one operand received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Orthogonal construction is impossible because the per-slot
    /// assignment probabilities exceed one.
    #[error("orthogonal set infeasible: k * p = {product} > 1 (k = {k}, p = {p})")]
    InfeasibleOrthogonal { k: usize, p: f64, product: f64 },

    /// A component id outside the constructed set.
    #[error("unknown component id {id}: set has {count} components")]
    UnknownComponent { id: usize, count: usize },

    /// Detection window larger than the trains being examined.
    #[error("detection window {window} exceeds train length {len}")]
    WindowTooLarge { window: usize, len: usize },

    /// A neuron input names a signal that is not in scope.
    #[error("unresolved signal reference: {0}")]
    UnresolvedReference(String),

    /// A circuit port was not bound to a train.
    #[error("unbound input port: {0}")]
    UnboundPort(String),

    /// A neuron violates the threshold-unit invariants.
    #[error("invalid neuron: {0}")]
    InvalidNeuron(String),

    /// A circuit description is malformed (duplicate ids, forward
    /// references, missing output).
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    /// Malformed textual input (train files, bit strings).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("partition order {0} is too small: at least 9 cells (order 2) are required")]
    InvalidOrder(u32),
    #[error("cell count {0} is not a power of 3 with at least 9 cells")]
    InvalidCellCount(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("depth {depth} out of range for a hierarchy of {levels} levels")]
    Depth { depth: usize, levels: usize },
    #[error("distance must be positive, got {0}")]
    DegenerateGeometry(f64),
    #[error("a monopolized pilot has no interferers and an unbounded rate")]
    Monopoly,
    #[error("invalid pilot length {length} for {users} users on {cells} cells")]
    InvalidLength { length: u64, users: u64, cells: u64 },
    #[error("shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("pilot assignment vector {0:?} is not valid")]
    InvalidVector(Vec<u64>),
    #[error("group mismatch: vector serves {got} users, context expects {expected}")]
    GroupMismatch { expected: u64, got: u64 },
    #[error("{0}")]
    Domain(String),
    #[error("instance too large for exhaustive search: {0}")]
    Size(String),
}

//! Sparse tensor contraction in compressed-sparse-fiber (CSF) form, plus a
//! deterministic cycle-level simulator of an accelerator that executes the
//! contraction as fiber-pair dot-product jobs on Sparse Dot Product Engines.
//!
//! The crate is organized around the dataflow of a contraction:
//!
//! - [`shape`] / [`csf`]: dense and CSF tensor representations and conversions.
//! - [`random`]: seeded, platform-independent random tensor generation.
//! - [`oracle`]: reference contraction implementations used as ground truth.
//! - [`jobgen`]: decomposition of a contraction into fiber-pair jobs.
//! - [`sdpe`]: the per-engine state machine (fiber loaders, intersection & MAC,
//!   result queue).
//! - [`memory`]: the tensor memory model (bandwidth-limited reads, result
//!   region writes).
//! - [`engine`]: the top-level cycle-stepped simulation loop and statistics.
//! - [`io`]: the `csft-v1` JSON interchange format.
//! - [`sweep`]: preset experiment grids used by the CLI.
//!
//! The simulator is functionally exact: its exported result is bit-identical
//! to [`oracle::contract_csf_reference`] because every accumulation happens in
//! increasing contraction-index order on both paths.

pub mod csf;
pub mod engine;
pub mod io;
pub mod jobgen;
pub mod memory;
pub mod oracle;
pub mod random;
pub mod sdpe;
pub mod shape;
pub mod sweep;

pub use csf::{CsfTensor, Entry};
pub use engine::{simulate, EngineConfig, SimStats};
pub use jobgen::{Job, JobPlan};
pub use memory::MemoryConfig;
pub use oracle::ContractionSpec;
pub use random::DensityConfig;
pub use shape::{DenseTensor, Shape};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tensors must have at least one mode")]
    EmptyShape,
    #[error("mode lengths must be >= 1")]
    ZeroModeLength,
    #[error("tensor volume overflows the address space")]
    VolumeOverflow,
    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("value count {got} does not match shape volume {want}")]
    ValueCountMismatch { got: usize, want: usize },
    #[error("contraction-mode lengths differ: {a} vs {b}")]
    ContractionLengthMismatch { a: usize, b: usize },
    #[error("density {0} outside (0, 1]")]
    DensityOutOfRange(f64),
    #[error("requested nnz {nnz} exceeds volume {volume}")]
    NnzExceedsVolume { nnz: usize, volume: usize },
    #[error("fiber {fiber} out of range ({count} fibers)")]
    FiberOutOfRange { fiber: usize, count: usize },
    #[error("job {job} out of range ({count} jobs)")]
    JobOutOfRange { job: usize, count: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid csft-v1 document: {0}")]
    Format(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

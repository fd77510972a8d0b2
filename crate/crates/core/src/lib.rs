//! Compressive KV-cache engine for streaming token sequences.
//!
//! The pipeline ingests per-frame patch features, prunes temporally redundant
//! tokens by inter-frame cosine similarity, packs survivors into fixed-size
//! blocks, projects them into per-layer multi-head keys/values, and manages a
//! tiered cache: a bounded hot window of recent blocks plus a cold store of
//! serialized full KV. Each evicted block is summarized by a frozen GRU into a
//! compact retrieval key. At question time, consensus top-K retrieval picks
//! cold blocks to rehydrate, and a position-aware attention pass runs over the
//! combined retrieved + local context.
//!
//! All numeric state is `f64` in memory; file formats are 32-bit.
//! Data-parallel inner loops use rayon when the `parallel` feature (default)
//! is enabled and fall back to sequential iteration otherwise. Parallel and
//! sequential paths are bitwise identical: parallelism is only ever applied
//! across independent units (rows, blocks, layers, seeds), never inside a
//! floating-point reduction.

pub mod attend;
pub mod backbone;
pub mod cache;
pub mod dtd;
pub mod gcm;
pub mod harness;
pub mod numerics;
pub mod packer;
pub mod report;
pub mod retrieval;
pub mod seeded;
pub mod stream_io;

use thiserror::Error;

/// Errors surfaced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was attempted against inconsistent internal state.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A block id was requested that the cold store does not hold.
    #[error("block {0} not found in cold store")]
    BlockNotFound(u64),

    /// A serialized record failed validation on load.
    #[error("corrupt record: {0}")]
    Corrupt(String),

    /// A cold-store write could not complete; the eviction was aborted.
    #[error("cold store write failed: {0}")]
    ColdWrite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }
}

//! Disk-resident approximate nearest neighbor search with a graph-first layout.
//!
//! The crate builds and serves proximity-graph indexes that keep product-quantized
//! vectors plus a planned set of adjacency lists in memory while exact vectors and
//! the graph itself live in block-aligned files on disk. Queries run a two-stage
//! traversal: a search stage over approximate distances that reads 4KB node blocks
//! (each block carries a node's vector, its adjacency list, and replicated
//! adjacency lists of its closest neighbors), and a refinement stage that re-ranks
//! the top candidates with exact distances.
//!
//! Module map:
//! - [`vecio`]: dataset ingestion, sampling, exact ground truth, recall.
//! - [`pq`]: product quantization and compression-ratio selection.
//! - [`graph`]: proximity graph construction and in-memory greedy search.
//! - [`layout`]: block-aligned disk formats (graph-replicated and flat).
//! - [`planner`]: memory cache planning and the cache/IO cost model.
//! - [`engine`]: query execution over the disk layouts, sync or pipelined IO.
//! - [`bench`]: artifact building, benchmark sweeps, and report analysis.

pub mod bench;
pub mod distance;
pub mod engine;
pub mod error;
pub mod graph;
pub mod layout;
pub mod planner;
pub mod pq;
pub mod vecio;

pub use error::{Error, Result};

//! Entropy-based bipartite null models, statistically validated projections,
//! community detection and core-periphery scores, with a reporting pipeline
//! for categorized social-interaction logs.

pub mod bicm;
pub mod community;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod projection;
pub mod report;
pub mod scores;
pub mod synth;

pub use error::{Error, Result};

//! Mining exact background knowledge from tabular data and computing
//! knowledge-assisted abductive and contrastive explanations for decision
//! lists and boosted tree ensembles.

mod bitset;
pub mod domain;
pub mod error;
pub mod explain;
pub mod ingest;
pub mod miner;
pub mod models;
pub mod oracle;
pub mod samples;

pub use error::{Error, Result};

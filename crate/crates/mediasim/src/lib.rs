//! Content-similarity analysis of news outlet tweet corpora.
//!
//! The library covers the full measurement chain: corpus ingestion and
//! normalization, three outlet-similarity metrics (tf-idf vocabulary,
//! keyword-based daily topics, minhash story co-occurrence), similarity-graph
//! partitioning (greedy modularity agglomeration and normalized cut), and
//! agreement scoring of the resulting partitions against an ownership
//! ground truth.

pub mod corpus;
pub mod dsu;
pub mod error;
pub mod evalx;
pub mod graphpart;
pub mod matrix;
pub mod ownership;
pub mod partition;
pub mod simhash;
pub mod simtopic;
pub mod simvocab;

pub use error::{Error, Result};
pub use matrix::SimilarityMatrix;
pub use partition::Partition;

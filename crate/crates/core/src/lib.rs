//! Two-level book genre classification over blurbs and reader reviews.
//!
//! Reviews are first filtered against the blurb in embedding space. Blurbs and
//! the surviving reviews then become two heterogeneous document–token graphs.
//! A Level-1 model fuses one GCN path per graph into a fiction/non-fiction
//! decision, which routes each book to one of two Level-2 multi-label models
//! that add a label co-occurrence network over the branch's genres.

pub mod checkpoint;
pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod hierarchy;
pub mod labelgraph;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod review_filter;
pub mod sparse;
pub mod synthetic;
pub mod tape;
pub mod textgraph;
pub mod training;

pub use error::{Error, Result};

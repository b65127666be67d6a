//! Factuality and objectivity signals for ad hoc retrieval.
//!
//! The crate covers the whole pipeline: text processing (sentences,
//! tokens, POS tags, chunks), relational fact extraction and factual
//! density, a lexicon- and pattern-driven objectivity detector, a
//! Dirichlet query-likelihood baseline, score-combination reranking,
//! TREC-style evaluation, and the binned signal/relevance analysis.

pub mod bins;
pub mod corpus;
pub mod error;
pub mod facts;
pub mod factuality;
pub mod learn;
pub mod metrics;
pub mod rerank;
pub mod retrieval;
pub mod stats;
pub mod subjectivity;
pub mod text;

pub use error::{Error, Result};

//! Readers and writers for every on-disk format the toolkit consumes or
//! produces: TREC text collections, topics, qrels, run files, spam
//! percentiles, signal files and labeled training documents.

mod html;
mod run;
mod signals;
mod spam;
mod store;
mod topics;
mod trectext;

use serde::{Deserialize, Serialize};

pub use html::strip_tags;
pub use run::{by_query, parse_run, validate_run, write_run, RunEntry};
pub use signals::{parse_signals, write_signals, DocSignals};
pub use spam::{parse_spam_scores, SpamRule, SpamScores};
pub use store::{read_labeled_docs, read_records, write_records, Keyed};
pub use topics::{parse_qrels, parse_queries, Qrel, Qrels, Query};
pub use trectext::{decode_text, parse_trectext, write_trectext};

/// Provenance class of a collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Curated,
    Uncurated,
    #[default]
    Unknown,
}

/// Text encoding a document was decoded from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    #[default]
    Utf8,
    Latin1,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub source: Source,
    #[serde(default)]
    pub encoding: Encoding,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            text: text.into(),
            source: Source::Unknown,
            encoding: Encoding::Utf8,
        }
    }

    /// Empty documents are kept but flagged.
    pub fn is_empty(&self) -> bool {
        self.text.trim().is_empty()
    }
}

impl Keyed for Document {
    fn key(&self) -> &str {
        &self.doc_id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// A training document with a binary class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDoc {
    #[serde(flatten)]
    pub doc: Document,
    pub label: Label,
}

impl Keyed for LabeledDoc {
    fn key(&self) -> &str {
        &self.doc.doc_id
    }
}

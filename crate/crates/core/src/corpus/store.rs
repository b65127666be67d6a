//! Line-delimited JSON record store keyed by document id.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::LabeledDoc;
use crate::error::{Error, Result};

/// Records stored in the line-delimited store expose a unique key.
pub trait Keyed {
    fn key(&self) -> &str;
}

/// Writes one JSON object per line. Duplicate keys are rejected.
pub fn write_records<T: Serialize + Keyed, W: Write>(records: &[T], mut out: W) -> Result<()> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.key()) {
            return Err(Error::DuplicateId(r.key().to_string()));
        }
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<T: DeserializeOwned + Keyed, R: BufRead>(input: R) -> Result<Vec<T>> {
    let mut out: Vec<T> = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| Error::line(n + 1, e.to_string()))?;
        if !seen.insert(rec.key().to_string()) {
            return Err(Error::DuplicateId(rec.key().to_string()));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Reads labeled training documents:
/// `{"doc_id": .., "text": .., "label": "positive" | "negative"}` per line.
pub fn read_labeled_docs<R: BufRead>(input: R) -> Result<Vec<LabeledDoc>> {
    read_records(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Label};

    #[test]
    fn roundtrip_documents() {
        let docs = vec![Document::new("a", "line one\nline \"two\""), Document::new("b", "")];
        let mut buf = Vec::new();
        write_records(&docs, &mut buf).unwrap();
        let back: Vec<Document> = read_records(buf.as_slice()).unwrap();
        assert_eq!(back, docs);
    }

    #[test]
    fn duplicate_keys_rejected() {
        let docs = vec![Document::new("a", "x"), Document::new("a", "y")];
        assert!(write_records(&docs, Vec::new()).is_err());
        let text = "{\"doc_id\":\"a\",\"text\":\"x\"}\n{\"doc_id\":\"a\",\"text\":\"y\"}\n";
        assert!(read_records::<Document, _>(text.as_bytes()).is_err());
    }

    #[test]
    fn labeled_docs() {
        let text = "{\"doc_id\":\"p1\",\"text\":\"Poe was born in Boston.\",\"label\":\"positive\"}\n\
                    {\"doc_id\":\"n1\",\"text\":\"meh\",\"label\":\"negative\"}\n";
        let docs = read_labeled_docs(text.as_bytes()).unwrap();
        assert_eq!(docs[0].label, Label::Positive);
        assert_eq!(docs[1].doc.doc_id, "n1");
        let bad = "{\"doc_id\":\"x\",\"text\":\"t\",\"label\":\"maybe\"}";
        assert!(matches!(
            read_labeled_docs(bad.as_bytes()),
            Err(Error::Line { line: 1, .. })
        ));
    }
}

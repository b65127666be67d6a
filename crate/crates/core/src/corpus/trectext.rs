use std::collections::HashSet;

use super::{Document, Encoding};
use crate::error::{Error, Result};

/// Decodes bytes as UTF-8, falling back to Latin-1.
pub fn decode_text(bytes: &[u8]) -> (String, Encoding) {
    match std::str::from_utf8(bytes) {
        Ok(s) => (s.to_string(), Encoding::Utf8),
        Err(_) => (bytes.iter().map(|&b| b as char).collect(), Encoding::Latin1),
    }
}

fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if from > hay.len() {
        return None;
    }
    hay[from..]
        .windows(needle.len())
        .position(|w| w.eq_ignore_ascii_case(needle))
        .map(|p| p + from)
}

/// Parses a TREC-style SGML collection (`<DOC><DOCNO>..</DOCNO><TEXT>..</TEXT></DOC>`).
///
/// Every `<TEXT>` element in a block is concatenated (newline separated).
/// Each block is decoded independently so that mixed-encoding files load.
pub fn parse_trectext(bytes: &[u8]) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    let mut pos = 0;
    while let Some(start) = find(bytes, b"<DOC>", pos) {
        let body_start = start + 5;
        let end = find(bytes, b"</DOC>", body_start).ok_or_else(|| Error::Offset {
            offset: start,
            msg: "unterminated <DOC> block".into(),
        })?;
        if let Some(nested) = find(&bytes[..end], b"<DOC>", body_start) {
            return Err(Error::Offset {
                offset: start,
                msg: format!("<DOC> block not closed before next <DOC> at offset {nested}"),
            });
        }
        let block = &bytes[body_start..end];
        let (raw, encoding) = decode_text(block);
        let doc_id = element(&raw, "DOCNO")
            .ok_or_else(|| Error::Offset {
                offset: start,
                msg: "missing or unterminated <DOCNO>".into(),
            })?
            .trim()
            .to_string();
        if doc_id.is_empty() {
            return Err(Error::Offset {
                offset: start,
                msg: "empty <DOCNO>".into(),
            });
        }
        if !seen.insert(doc_id.clone()) {
            return Err(Error::DuplicateId(doc_id));
        }
        let text = elements(&raw, "TEXT").join("\n");
        if text.trim().is_empty() {
            log::warn!("document {doc_id} has empty text");
        }
        docs.push(Document {
            doc_id,
            text,
            source: Default::default(),
            encoding,
        });
        pos = end + 6;
    }
    Ok(docs)
}

fn element<'a>(block: &'a str, tag: &str) -> Option<&'a str> {
    elements(block, tag).into_iter().next()
}

fn elements<'a>(block: &'a str, tag: &str) -> Vec<&'a str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let upper = block.to_ascii_uppercase();
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(s) = upper[pos..].find(&open) {
        let from = pos + s + open.len();
        match upper[from..].find(&close) {
            Some(e) => {
                out.push(&block[from..from + e]);
                pos = from + e + close.len();
            }
            None => break,
        }
    }
    out
}

/// Writes documents in the same SGML layout `parse_trectext` reads.
pub fn write_trectext(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str("<DOC>\n<DOCNO>");
        out.push_str(&d.doc_id);
        out.push_str("</DOCNO>\n<TEXT>\n");
        out.push_str(&d.text);
        out.push_str("\n</TEXT>\n</DOC>\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_block() {
        let docs = parse_trectext(b"<DOC><DOCNO>d1</DOCNO><TEXT>hello</TEXT></DOC>").unwrap();
        assert_eq!(docs, vec![Document::new("d1", "hello")]);
    }

    #[test]
    fn empty_stream() {
        assert!(parse_trectext(b"").unwrap().is_empty());
    }

    #[test]
    fn duplicate_docno() {
        let input = b"<DOC><DOCNO>d1</DOCNO><TEXT>a</TEXT></DOC>\n<DOC><DOCNO> d1 </DOCNO><TEXT>b</TEXT></DOC>";
        match parse_trectext(input) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "d1"),
            other => panic!("expected duplicate id error, got {other:?}"),
        }
    }

    #[test]
    fn unterminated_block_reports_offset() {
        let input = b"<DOC><DOCNO>d1</DOCNO><TEXT>a</TEXT></DOC>\n<DOC><DOCNO>d2</DOCNO>";
        match parse_trectext(input) {
            Err(Error::Offset { offset, .. }) => assert_eq!(offset, 43),
            other => panic!("expected offset error, got {other:?}"),
        }
    }

    #[test]
    fn multiple_text_elements_are_concatenated() {
        let input = b"<DOC>\n<DOCNO>FT911-1</DOCNO>\n<HEADLINE>x</HEADLINE>\n<TEXT>one</TEXT><TEXT>two</TEXT></DOC>";
        let docs = parse_trectext(input).unwrap();
        assert_eq!(docs[0].text, "one\ntwo");
    }

    #[test]
    fn latin1_fallback() {
        let mut input = b"<DOC><DOCNO>d1</DOCNO><TEXT>caf".to_vec();
        input.push(0xe9);
        input.extend_from_slice(b"</TEXT></DOC>");
        let docs = parse_trectext(&input).unwrap();
        assert_eq!(docs[0].text, "caf\u{e9}");
        assert_eq!(docs[0].encoding, Encoding::Latin1);
    }

    #[test]
    fn write_then_parse() {
        let docs = vec![Document::new("a", "x y"), Document::new("b", "")];
        let parsed = parse_trectext(write_trectext(&docs).as_bytes()).unwrap();
        let texts: Vec<_> = parsed.iter().map(|d| d.text.trim()).collect();
        assert_eq!(texts, ["x y", ""]);
    }
}

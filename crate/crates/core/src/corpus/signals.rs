use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Query-independent quality signals of one document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DocSignals {
    pub doc_id: String,
    pub p_fct: Option<f64>,
    pub p_obj: Option<f64>,
    pub spam_percentile: Option<u8>,
}

impl DocSignals {
    pub fn new(doc_id: impl Into<String>, p_fct: Option<f64>, p_obj: Option<f64>) -> Self {
        DocSignals {
            doc_id: doc_id.into(),
            p_fct,
            p_obj,
            spam_percentile: None,
        }
    }
}

fn parse_prob(field: &str, line: usize) -> Result<Option<f64>> {
    if field == "-" {
        return Ok(None);
    }
    let p: f64 = field
        .parse()
        .map_err(|_| Error::line(line, format!("bad probability `{field}`")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::line(line, format!("probability {p} outside [0, 1]")));
    }
    Ok(Some(p))
}

/// Parses `doc_id<TAB>p_fct<TAB>p_obj` lines; `-` marks an absent value.
pub fn parse_signals(input: &str) -> Result<Vec<DocSignals>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::line(
                n + 1,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        if !seen.insert(cols[0]) {
            return Err(Error::DuplicateId(cols[0].to_string()));
        }
        out.push(DocSignals::new(
            cols[0],
            parse_prob(cols[1].trim(), n + 1)?,
            parse_prob(cols[2].trim(), n + 1)?,
        ));
    }
    Ok(out)
}

pub fn write_signals(signals: &[DocSignals]) -> String {
    let fmt = |p: Option<f64>| p.map_or_else(|| "-".to_string(), |v| v.to_string());
    let mut out = String::new();
    for s in signals {
        writeln!(out, "{}\t{}\t{}", s.doc_id, fmt(s.p_fct), fmt(s.p_obj)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn absent_values() {
        let s = parse_signals("d1\t0.25\t-\nd2\t-\t1").unwrap();
        assert_eq!(s[0], DocSignals::new("d1", Some(0.25), None));
        assert_eq!(s[1], DocSignals::new("d2", None, Some(1.0)));
    }

    #[test]
    fn out_of_range_probability() {
        assert!(matches!(
            parse_signals("d1\t1.5\t0"),
            Err(Error::Line { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn roundtrip(vals in prop::collection::vec(
            (prop::option::of(0.0f64..=1.0), prop::option::of(0.0f64..=1.0)), 0..30)) {
            let sigs: Vec<DocSignals> = vals
                .into_iter()
                .enumerate()
                .map(|(i, (f, o))| DocSignals::new(format!("d{i}"), f, o))
                .collect();
            prop_assert_eq!(parse_signals(&write_signals(&sigs)).unwrap(), sigs);
        }
    }
}

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of a retrieval run. `score` is the baseline score in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub query_id: String,
    pub doc_id: String,
    pub rank: usize,
    pub score: f64,
    pub tag: String,
}

impl RunEntry {
    pub fn new(
        query_id: impl Into<String>,
        doc_id: impl Into<String>,
        rank: usize,
        score: f64,
        tag: impl Into<String>,
    ) -> Self {
        RunEntry {
            query_id: query_id.into(),
            doc_id: doc_id.into(),
            rank,
            score,
            tag: tag.into(),
        }
    }
}

/// Groups entries by query in first-appearance order, each group sorted by rank.
pub fn by_query(run: &[RunEntry]) -> IndexMap<&str, Vec<&RunEntry>> {
    let mut groups: IndexMap<&str, Vec<&RunEntry>> = IndexMap::new();
    for e in run {
        groups.entry(e.query_id.as_str()).or_default().push(e);
    }
    for entries in groups.values_mut() {
        entries.sort_by_key(|e| e.rank);
    }
    groups
}

/// Checks that every query has ranks `1..=n` without gaps or repeats and
/// that scores never increase with rank.
pub fn validate_run(run: &[RunEntry]) -> Result<()> {
    let mut gaps = Vec::new();
    let mut inversions = Vec::new();
    for (qid, entries) in by_query(run) {
        if entries.iter().enumerate().any(|(i, e)| e.rank != i + 1) {
            gaps.push(qid.to_string());
            continue;
        }
        if entries.windows(2).any(|w| w[1].score > w[0].score) {
            inversions.push(qid.to_string());
        }
    }
    if !gaps.is_empty() {
        return Err(Error::RunValidation {
            queries: gaps,
            msg: "ranks must run 1..n without gaps".into(),
        });
    }
    if !inversions.is_empty() {
        return Err(Error::RunValidation {
            queries: inversions,
            msg: "scores must be non-increasing with rank".into(),
        });
    }
    Ok(())
}

/// Parses `qid Q0 docid rank score tag` lines and validates the result.
pub fn parse_run(input: &str) -> Result<Vec<RunEntry>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(Error::line(
                n + 1,
                format!("expected 6 columns, found {}", cols.len()),
            ));
        }
        let rank: usize = cols[3]
            .parse()
            .map_err(|_| Error::line(n + 1, format!("bad rank `{}`", cols[3])))?;
        let score: f64 = cols[4]
            .parse()
            .map_err(|_| Error::line(n + 1, format!("bad score `{}`", cols[4])))?;
        if !score.is_finite() {
            return Err(Error::line(n + 1, "score must be finite"));
        }
        out.push(RunEntry::new(cols[0], cols[2], rank, score, cols[5]));
    }
    validate_run(&out)?;
    Ok(out)
}

/// Formats a run, six decimal places per score.
pub fn write_run(run: &[RunEntry]) -> Result<String> {
    validate_run(run)?;
    let mut out = String::new();
    for e in run {
        writeln!(
            out,
            "{} Q0 {} {} {:.6} {}",
            e.query_id, e.doc_id, e.rank, e.score, e.tag
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn line_format() {
        let e = RunEntry::new("301", "d1", 1, -2.5, "DIR");
        assert_eq!(write_run(&[e]).unwrap(), "301 Q0 d1 1 -2.500000 DIR\n");
    }

    #[test]
    fn rank_gap_is_rejected() {
        let run = vec![
            RunEntry::new("301", "d1", 1, -1.0, "t"),
            RunEntry::new("301", "d2", 3, -2.0, "t"),
        ];
        match validate_run(&run) {
            Err(Error::RunValidation { queries, .. }) => assert_eq!(queries, ["301"]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_run("301 Q0 d1 1 -1 t\n301 Q0 d2 3 -2 t").is_err());
    }

    #[test]
    fn score_inversion_is_rejected() {
        let run = vec![
            RunEntry::new("7", "d1", 1, -3.0, "t"),
            RunEntry::new("7", "d2", 2, -2.0, "t"),
        ];
        assert!(matches!(
            write_run(&run),
            Err(Error::RunValidation { ref queries, .. }) if queries == &["7"]
        ));
    }

    #[test]
    fn two_entry_roundtrip() {
        let run = vec![
            RunEntry::new("301", "d1", 1, -2.5, "DIR"),
            RunEntry::new("301", "d2", 2, -3.25, "DIR"),
        ];
        assert_eq!(parse_run(&write_run(&run).unwrap()).unwrap(), run);
    }

    fn arb_run() -> impl Strategy<Value = Vec<RunEntry>> {
        prop::collection::vec(
            (1usize..5, prop::collection::vec(-50_000_000i64..0, 1..20)),
            1..6,
        )
        .prop_map(|queries| {
            let mut run = Vec::new();
            for (q, (_, mut micros)) in queries.into_iter().enumerate() {
                micros.sort_unstable_by(|a, b| b.cmp(a));
                for (i, m) in micros.into_iter().enumerate() {
                    run.push(RunEntry::new(
                        format!("q{q}"),
                        format!("doc-{q}-{i}"),
                        i + 1,
                        m as f64 / 1e6,
                        "tag",
                    ));
                }
            }
            run
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_write(run in arb_run()) {
            let text = write_run(&run).unwrap();
            prop_assert_eq!(parse_run(&text).unwrap(), run);
        }
    }
}

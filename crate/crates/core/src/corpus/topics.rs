use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: String,
    pub text: String,
}

/// One relevance judgment. Grades above zero are relevant; zero and
/// negative grades are judged non-relevant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qrel {
    pub query_id: String,
    pub doc_id: String,
    pub grade: i32,
}

impl Qrel {
    pub fn is_relevant(&self) -> bool {
        self.grade > 0
    }
}

/// Parses topics as `query_id<whitespace>text` lines. Blank lines and
/// `#` comments are skipped.
pub fn parse_queries(input: &str) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, text) = line
            .split_once(|c: char| c.is_whitespace())
            .ok_or_else(|| Error::line(n + 1, "query line needs an id and text"))?;
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::line(n + 1, format!("query {id} has empty text")));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateId(id.to_string()));
        }
        out.push(Query {
            query_id: id.to_string(),
            text: text.to_string(),
        });
    }
    Ok(out)
}

/// Parses `qid 0 docid grade` lines.
pub fn parse_qrels(input: &str) -> Result<Vec<Qrel>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::line(
                n + 1,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        }
        let grade: i32 = cols[3]
            .parse()
            .map_err(|_| Error::line(n + 1, format!("grade `{}` is not an integer", cols[3])))?;
        if !seen.insert((cols[0].to_string(), cols[2].to_string())) {
            return Err(Error::line(
                n + 1,
                format!("duplicate judgment for ({}, {})", cols[0], cols[2]),
            ));
        }
        out.push(Qrel {
            query_id: cols[0].to_string(),
            doc_id: cols[2].to_string(),
            grade,
        });
    }
    Ok(out)
}

/// Judgments indexed by query, then document.
#[derive(Debug, Clone, Default)]
pub struct Qrels {
    by_query: BTreeMap<String, HashMap<String, i32>>,
}

impl Qrels {
    pub fn new(qrels: &[Qrel]) -> Self {
        let mut by_query: BTreeMap<String, HashMap<String, i32>> = BTreeMap::new();
        for q in qrels {
            by_query
                .entry(q.query_id.clone())
                .or_default()
                .insert(q.doc_id.clone(), q.grade);
        }
        Qrels { by_query }
    }

    pub fn judgments(&self, query_id: &str) -> Option<&HashMap<String, i32>> {
        self.by_query.get(query_id)
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<i32> {
        self.by_query.get(query_id)?.get(doc_id).copied()
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.grade(query_id, doc_id).is_some_and(|g| g > 0)
    }

    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.by_query
            .get(query_id)
            .map_or(0, |j| j.values().filter(|&&g| g > 0).count())
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.by_query.keys().map(String::as_str)
    }

    /// Documents judged relevant for at least one query.
    pub fn relevant_docs(&self) -> std::collections::BTreeSet<&str> {
        self.by_query
            .values()
            .flat_map(|j| j.iter().filter(|(_, &g)| g > 0).map(|(d, _)| d.as_str()))
            .collect()
    }
}

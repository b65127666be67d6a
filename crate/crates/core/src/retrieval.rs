//! Inverted index and Dirichlet-smoothed query-likelihood retrieval.
//!
//! Terms are lowercased tokens with punctuation-only tokens dropped; there
//! is no stemming and no stopword list.
//!
//! Binary index layout, all integers little-endian:
//!
//! ```text
//! magic "FXIX" | version u32 = 1
//! num_docs u32 | per doc: id_len u32, id bytes, length u32
//! num_terms u32 | per term (sorted): len u32, bytes, cf u64,
//!                 num_postings u32, per posting: doc u32, tf u32
//! ```

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Qrels, Query, RunEntry};
use crate::error::{Error, Result};
use crate::learn::shuffled_folds;
use crate::metrics::{cmp_query_ids, cv_select, evaluate_query, Metric, NdcgConfig};
use crate::text::tokenize;

const MAGIC: &[u8; 4] = b"FXIX";
const VERSION: u32 = 1;

pub fn analyze_terms(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !t.is_punct())
        .map(|t| t.surface.to_lowercase())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Index {
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    collection_freq: HashMap<String, u64>,
    total_tokens: u64,
}

impl Index {
    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn num_terms(&self) -> usize {
        self.postings.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn doc_id(&self, i: usize) -> &str {
        &self.doc_ids[i]
    }

    pub fn doc_len(&self, i: usize) -> u32 {
        self.doc_lengths[i]
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn cf(&self, term: &str) -> u64 {
        self.collection_freq.get(term).copied().unwrap_or(0)
    }

    /// `(internal doc id, term frequency)` pairs in doc order.
    pub fn postings(&self, term: &str) -> &[(u32, u32)] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn tf(&self, term: &str, doc: usize) -> u32 {
        let p = self.postings(term);
        p.binary_search_by_key(&(doc as u32), |&(d, _)| d).map_or(0, |i| p[i].1)
    }

    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == doc_id)
    }

    fn check(&self) -> Result<()> {
        let sum: u64 = self.doc_lengths.iter().map(|&l| l as u64).sum();
        if sum != self.total_tokens {
            return Err(Error::invalid("document lengths do not add up to the collection size"));
        }
        for (term, list) in &self.postings {
            let cf: u64 = list.iter().map(|&(_, tf)| tf as u64).sum();
            if list.iter().any(|&(d, tf)| tf == 0 || d as usize >= self.doc_ids.len()) || cf != self.cf(term) {
                return Err(Error::invalid(format!("inconsistent postings for `{term}`")));
            }
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.doc_ids.len() as u32)?;
        for (id, len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            write_str(&mut w, id)?;
            w.write_u32::<LittleEndian>(*len)?;
        }
        w.write_u32::<LittleEndian>(self.postings.len() as u32)?;
        for (term, list) in &self.postings {
            write_str(&mut w, term)?;
            w.write_u64::<LittleEndian>(self.cf(term))?;
            w.write_u32::<LittleEndian>(list.len() as u32)?;
            for &(d, tf) in list {
                w.write_u32::<LittleEndian>(d)?;
                w.write_u32::<LittleEndian>(tf)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Index> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Model("not an index file".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Model(format!("unsupported index version {version}")));
        }
        let mut index = Index::default();
        let n = r.read_u32::<LittleEndian>()?;
        for _ in 0..n {
            index.doc_ids.push(read_str(&mut r)?);
            let len = r.read_u32::<LittleEndian>()?;
            index.doc_lengths.push(len);
            index.total_tokens += len as u64;
        }
        let terms = r.read_u32::<LittleEndian>()?;
        for _ in 0..terms {
            let term = read_str(&mut r)?;
            let cf = r.read_u64::<LittleEndian>()?;
            let count = r.read_u32::<LittleEndian>()?;
            let mut list = Vec::with_capacity(count as usize);
            for _ in 0..count {
                list.push((r.read_u32::<LittleEndian>()?, r.read_u32::<LittleEndian>()?));
            }
            index.collection_freq.insert(term.clone(), cf);
            index.postings.insert(term, list);
        }
        index.check()?;
        Ok(index)
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::Model("index string is not UTF-8".into()))
}

/// Builds the index; documents are analyzed in parallel and merged in order.
pub fn build_index(docs: &[Document]) -> Result<Index> {
    if docs.is_empty() {
        return Err(Error::invalid("cannot index an empty collection"));
    }
    let analyzed: Vec<(usize, BTreeMap<String, u32>)> = docs
        .par_iter()
        .map(|d| {
            let terms = analyze_terms(&d.text);
            let mut counts = BTreeMap::new();
            for t in &terms {
                *counts.entry(t.clone()).or_insert(0) += 1;
            }
            (terms.len(), counts)
        })
        .collect();
    let mut index = Index::default();
    for (i, (doc, (len, counts))) in docs.iter().zip(analyzed).enumerate() {
        index.doc_ids.push(doc.doc_id.clone());
        index.doc_lengths.push(len as u32);
        index.total_tokens += len as u64;
        for (term, tf) in counts {
            *index.collection_freq.entry(term.clone()).or_insert(0) += tf as u64;
            index.postings.entry(term).or_default().push((i as u32, tf));
        }
    }
    Ok(index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalParams {
    pub mu: f64,
    pub k_top: usize,
    pub tag: String,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        RetrievalParams { mu: 2500.0, k_top: 1000, tag: "DIR".into() }
    }
}

impl RetrievalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be positive, got {}", self.mu)));
        }
        if self.k_top == 0 {
            return Err(Error::invalid("k_top must be at least 1"));
        }
        Ok(())
    }
}

/// `log((tf + mu * cf / |C|) / (|d| + mu))`.
pub fn dirichlet_term(tf: u32, doc_len: u32, cf: u64, total: u64, mu: f64) -> f64 {
    ((tf as f64 + mu * cf as f64 / total as f64) / (doc_len as f64 + mu)).ln()
}

fn score_terms(terms: &[String], doc: usize, index: &Index, mu: f64) -> f64 {
    terms
        .iter()
        .filter(|t| index.cf(t) > 0)
        .map(|t| dirichlet_term(index.tf(t, doc), index.doc_len(doc), index.cf(t), index.total_tokens, mu))
        .sum()
}

/// Query log-likelihood of a document; terms unseen in the collection are
/// skipped.
pub fn dirichlet_score(query: &str, doc_id: &str, index: &Index, mu: f64) -> Result<f64> {
    let doc = index
        .doc_index(doc_id)
        .ok_or_else(|| Error::invalid(format!("document `{doc_id}` is not indexed")))?;
    Ok(score_terms(&analyze_terms(query), doc, index, mu))
}

/// Top documents by query likelihood among those containing at least one
/// query term, ties broken by doc id.
pub fn retrieve_topk(query: &Query, index: &Index, params: &RetrievalParams) -> Result<Vec<RunEntry>> {
    params.validate()?;
    let terms = analyze_terms(&query.text);
    let mut candidates: Vec<usize> = terms
        .iter()
        .flat_map(|t| index.postings(t).iter().map(|&(d, _)| d as usize))
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    if candidates.is_empty() {
        log::warn!("query {} matches no indexed term", query.query_id);
    }
    let mut scored: Vec<(f64, usize)> = candidates
        .into_iter()
        .map(|d| (score_terms(&terms, d, index, params.mu), d))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| index.doc_id(a.1).cmp(index.doc_id(b.1))));
    Ok(scored
        .into_iter()
        .take(params.k_top)
        .enumerate()
        .map(|(rank, (score, d))| RunEntry {
            query_id: query.query_id.clone(),
            doc_id: index.doc_id(d).to_string(),
            rank: rank + 1,
            score,
            tag: params.tag.clone(),
        })
        .collect())
}

/// Runs every query in parallel and concatenates the results in query order.
pub fn search(queries: &[Query], index: &Index, params: &RetrievalParams) -> Result<Vec<RunEntry>> {
    let runs: Vec<Vec<RunEntry>> = queries
        .par_iter()
        .map(|q| retrieve_topk(q, index, params))
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().flatten().collect())
}

/// Smoothing values searched when μ is tuned by cross-validation.
pub const MU_GRID: [f64; 10] = [100.0, 500.0, 800.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 8000.0, 10000.0];

/// Cross-validation settings for tuning μ.
#[derive(Debug, Clone, PartialEq)]
pub struct MuTuning {
    pub grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub target: Metric,
    pub ndcg: NdcgConfig,
}

impl Default for MuTuning {
    fn default() -> Self {
        MuTuning {
            grid: MU_GRID.to_vec(),
            folds: 5,
            seed: 42,
            target: Metric::Map,
            ndcg: NdcgConfig::default(),
        }
    }
}

/// μ chosen for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuFold {
    pub fold: usize,
    pub mu: f64,
    pub train_metric: f64,
    pub test_metric: f64,
    pub test_queries: Vec<String>,
}

/// A baseline run in which each query is retrieved with the μ chosen on
/// the other folds.
#[derive(Debug, Clone)]
pub struct TunedRun {
    pub folds: Vec<MuFold>,
    pub run: Vec<RunEntry>,
}

/// Tunes μ per query fold. Query folds come from a seeded shuffle of the
/// query ids in numeric order.
pub fn tune_mu_cv(
    queries: &[Query],
    index: &Index,
    params: &RetrievalParams,
    qrels: &Qrels,
    tuning: &MuTuning,
) -> Result<TunedRun> {
    let MuTuning { grid, folds, seed, target, ndcg } = tuning;
    let (folds, seed, target) = (*folds, *seed, *target);
    if grid.is_empty() {
        return Err(Error::invalid("empty μ grid"));
    }
    let mut order: Vec<&Query> = queries.iter().collect();
    order.sort_by(|a, b| cmp_query_ids(&a.query_id, &b.query_id));
    if folds < 2 || folds > order.len() {
        return Err(Error::invalid(format!(
            "cannot split {} queries into {folds} folds",
            order.len()
        )));
    }
    let empty = HashMap::new();
    let table: Vec<Vec<(Vec<RunEntry>, Option<f64>)>> = grid
        .par_iter()
        .map(|&mu| {
            let p = RetrievalParams { mu, ..params.clone() };
            p.validate()?;
            order
                .iter()
                .map(|q| {
                    let entries = retrieve_topk(q, index, &p)?;
                    let ranked: Vec<&str> = entries.iter().map(|e| e.doc_id.as_str()).collect();
                    let j = qrels.judgments(&q.query_id).unwrap_or(&empty);
                    let m = evaluate_query(&q.query_id, &ranked, j, ndcg).map(|e| e.get(target));
                    Ok((entries, m))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let scores: Vec<Vec<Option<f64>>> = table.iter().map(|row| row.iter().map(|c| c.1).collect()).collect();
    let choices = cv_select(&scores, &shuffled_folds(order.len(), folds, seed), folds);

    let mut chosen = vec![0; order.len()];
    for c in &choices {
        for &q in &c.test {
            chosen[q] = c.best;
        }
    }
    let position: HashMap<&str, usize> = order.iter().enumerate().map(|(i, q)| (q.query_id.as_str(), i)).collect();
    let run = queries
        .iter()
        .flat_map(|q| {
            let i = position[q.query_id.as_str()];
            table[chosen[i]][i].0.iter().cloned()
        })
        .collect();
    let folds = choices
        .into_iter()
        .map(|c| MuFold {
            fold: c.fold,
            mu: grid[c.best],
            train_metric: c.train_metric,
            test_metric: c.test_metric,
            test_queries: c.test.iter().map(|&q| order[q].query_id.clone()).collect(),
        })
        .collect();
    Ok(TunedRun { folds, run })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts.iter().enumerate().map(|(i, t)| Document::new(format!("d{i}"), *t)).collect()
    }

    #[test]
    fn counts() {
        let idx = build_index(&docs(&["a b", "b b"])).unwrap();
        assert_eq!(idx.cf("a"), 1);
        assert_eq!(idx.cf("b"), 3);
        assert_eq!(idx.total_tokens(), 4);
        assert_eq!(idx.postings("b"), &[(0, 1), (1, 2)]);
        assert!(build_index(&[]).is_err());
    }

    #[test]
    fn lowercases_and_drops_punctuation() {
        let idx = build_index(&docs(&["The cat, THE hat."])).unwrap();
        assert_eq!(idx.cf("the"), 2);
        assert_eq!(idx.total_tokens(), 4);
        assert_eq!(idx.cf(","), 0);
    }

    #[test]
    fn single_term_value() {
        let v = dirichlet_term(2, 10, 1, 100, 100.0);
        assert!((v - (3.0f64 / 110.0).ln()).abs() < 1e-15);
        let v = dirichlet_term(3, 7, 5, 1000, 1e-9);
        assert!((v - (3.0f64 / 7.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn ranking_basics() {
        let idx = build_index(&docs(&["apple pie", "banana bread", "apple apple", "apple pie"])).unwrap();
        let q = Query { query_id: "1".into(), text: "apple".into() };
        let p = RetrievalParams { mu: 10.0, k_top: 10, tag: "DIR".into() };
        let run = retrieve_topk(&q, &idx, &p).unwrap();
        let ids: Vec<&str> = run.iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(ids, ["d2", "d0", "d3"]);
        assert_eq!(run[1].score, run[2].score);
        let one = retrieve_topk(&q, &idx, &RetrievalParams { k_top: 1, ..p.clone() }).unwrap();
        assert_eq!(one.len(), 1);
        let unknown = Query { query_id: "2".into(), text: "zebra".into() };
        assert!(retrieve_topk(&unknown, &idx, &p).unwrap().is_empty());
        assert_eq!(dirichlet_score("apple zebra", "d0", &idx, 10.0).unwrap(), run[1].score);
    }

    #[test]
    fn binary_roundtrip() {
        let idx = build_index(&docs(&["a b c", "b c d", "élan vital"])).unwrap();
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        assert_eq!(Index::read_from(&buf[..]).unwrap(), idx);
        buf[4] = 9;
        assert!(Index::read_from(&buf[..]).is_err());
    }
}

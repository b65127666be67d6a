//! Per-query effectiveness metrics following trec_eval conventions, plus
//! run-level aggregation and comparison reports.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{by_query, Qrels, RunEntry};
use crate::error::{Error, Result};
use crate::stats::{paired_t_test, TTest};

type Judgments = HashMap<String, i32>;

fn relevant(j: &Judgments, doc: &str) -> bool {
    j.get(doc).is_some_and(|&g| g > 0)
}

fn num_relevant(j: &Judgments) -> usize {
    j.values().filter(|&&g| g > 0).count()
}

/// Mean of precision at each relevant rank, over all relevant documents.
/// `None` when the query has no relevant documents.
pub fn average_precision(ranked: &[&str], j: &Judgments) -> Option<f64> {
    let r = num_relevant(j);
    if r == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, doc) in ranked.iter().enumerate() {
        if relevant(j, doc) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NdcgConfig {
    /// Cutoff; `None` evaluates the whole run.
    pub depth: Option<usize>,
    /// Use `2^g - 1` instead of the raw grade as gain.
    pub exponential_gain: bool,
}

impl NdcgConfig {
    fn gain(&self, grade: i32) -> f64 {
        let g = grade.max(0) as f64;
        if self.exponential_gain {
            g.exp2() - 1.0
        } else {
            g
        }
    }
}

fn discount(k: usize) -> f64 {
    ((k + 2) as f64).log2()
}

/// `None` when the ideal gain is zero.
pub fn ndcg(ranked: &[&str], j: &Judgments, cfg: &NdcgConfig) -> Option<f64> {
    let depth = cfg.depth.unwrap_or(usize::MAX);
    let mut ideal: Vec<f64> = j.values().map(|&g| cfg.gain(g)).filter(|&g| g > 0.0).collect();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg: f64 = ideal.iter().take(depth).enumerate().map(|(k, g)| g / discount(k)).sum();
    if idcg == 0.0 {
        return None;
    }
    let dcg: f64 = ranked
        .iter()
        .take(depth)
        .enumerate()
        .map(|(k, d)| cfg.gain(j.get(*d).copied().unwrap_or(0)) / discount(k))
        .sum();
    Some(dcg / idcg)
}

/// Binary preference over judged documents only. Each retrieved relevant
/// document loses `min(n, R) / min(R, N)` for the `n` judged non-relevant
/// documents above it. With no judged non-relevant documents this is the
/// fraction of relevant documents retrieved.
pub fn bpref(ranked: &[&str], j: &Judgments) -> Option<f64> {
    let r = num_relevant(j);
    if r == 0 {
        return None;
    }
    let n = j.len() - r;
    let mut nonrel_above = 0usize;
    let mut sum = 0.0;
    for doc in ranked {
        match j.get(*doc) {
            Some(&g) if g > 0 => {
                sum += if nonrel_above == 0 {
                    1.0
                } else {
                    1.0 - nonrel_above.min(r) as f64 / r.min(n) as f64
                };
            }
            Some(_) => nonrel_above += 1,
            None => {}
        }
    }
    Some(sum / r as f64)
}

pub fn precision_at(ranked: &[&str], j: &Judgments, k: usize) -> f64 {
    ranked.iter().take(k).filter(|d| relevant(j, d)).count() as f64 / k as f64
}

pub fn p_at_10(ranked: &[&str], j: &Judgments) -> f64 {
    precision_at(ranked, j, 10)
}

pub fn reciprocal_rank(ranked: &[&str], j: &Judgments) -> f64 {
    ranked
        .iter()
        .position(|d| relevant(j, d))
        .map_or(0.0, |k| 1.0 / (k + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Map,
    Ndcg,
    Bpref,
    P10,
    Mrr,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Map, Metric::Ndcg, Metric::Bpref, Metric::P10, Metric::Mrr];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Map => "MAP",
            Metric::Ndcg => "NDCG",
            Metric::Bpref => "BPREF",
            Metric::P10 => "P@10",
            Metric::Mrr => "MRR",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "map" | "ap" => Ok(Metric::Map),
            "ndcg" => Ok(Metric::Ndcg),
            "bpref" => Ok(Metric::Bpref),
            "p10" | "p@10" => Ok(Metric::P10),
            "mrr" | "rr" => Ok(Metric::Mrr),
            other => Err(Error::invalid(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    pub query_id: String,
    pub ap: f64,
    pub ndcg: f64,
    pub bpref: f64,
    pub p10: f64,
    pub rr: f64,
}

impl QueryEval {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Map => self.ap,
            Metric::Ndcg => self.ndcg,
            Metric::Bpref => self.bpref,
            Metric::P10 => self.p10,
            Metric::Mrr => self.rr,
        }
    }
}

/// All metrics for one query; `None` when it has no relevant documents.
pub fn evaluate_query(query_id: &str, ranked: &[&str], j: &Judgments, cfg: &NdcgConfig) -> Option<QueryEval> {
    Some(QueryEval {
        query_id: query_id.to_string(),
        ap: average_precision(ranked, j)?,
        ndcg: ndcg(ranked, j, cfg)?,
        bpref: bpref(ranked, j)?,
        p10: p_at_10(ranked, j),
        rr: reciprocal_rank(ranked, j),
    })
}

/// Orders numeric query ids numerically and everything else lexically.
pub fn cmp_query_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunEval {
    pub per_query: Vec<QueryEval>,
    /// Run queries without relevant judgments.
    pub excluded: Vec<String>,
}

impl RunEval {
    pub fn mean(&self, m: Metric) -> f64 {
        if self.per_query.is_empty() {
            return 0.0;
        }
        self.per_query.iter().map(|q| q.get(m)).sum::<f64>() / self.per_query.len() as f64
    }

    pub fn query(&self, query_id: &str) -> Option<&QueryEval> {
        self.per_query.iter().find(|q| q.query_id == query_id)
    }
}

/// Evaluates every query of the run that has relevant judgments.
pub fn evaluate_run(run: &[RunEntry], qrels: &Qrels, cfg: &NdcgConfig) -> RunEval {
    let empty = Judgments::new();
    let mut out = RunEval::default();
    for (qid, entries) in by_query(run) {
        let ranked: Vec<&str> = entries.iter().map(|e| e.doc_id.as_str()).collect();
        let j = qrels.judgments(qid).unwrap_or(&empty);
        match evaluate_query(qid, &ranked, j, cfg) {
            Some(e) => out.per_query.push(e),
            None => {
                log::warn!("query {qid} has no relevant judgments; excluded from the means");
                out.excluded.push(qid.to_string());
            }
        }
    }
    out.per_query.sort_by(|a, b| cmp_query_ids(&a.query_id, &b.query_id));
    out.excluded.sort_by(|a, b| cmp_query_ids(a, b));
    out
}

/// Per-query metrics as CSV, one block of rows per named run.
pub fn per_query_csv(runs: &[(&str, &RunEval)]) -> String {
    let mut out = String::from("run,query_id,ap,ndcg,bpref,p10,rr\n");
    for (name, eval) in runs {
        for q in &eval.per_query {
            writeln!(out, "{name},{},{:.6},{:.6},{:.6},{:.6},{:.6}", q.query_id, q.ap, q.ndcg, q.bpref, q.p10, q.rr)
                .unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: Metric,
    pub baseline: f64,
    pub value: f64,
    pub delta_pct: Option<f64>,
    pub p_value: f64,
    pub significant: bool,
}

/// Compares a run against the baseline on the queries both evaluate.
pub fn compare(baseline: &RunEval, run: &RunEval) -> Result<Vec<Comparison>> {
    let shared: Vec<(&QueryEval, &QueryEval)> = baseline
        .per_query
        .iter()
        .filter_map(|b| run.query(&b.query_id).map(|r| (b, r)))
        .collect();
    if shared.len() != baseline.per_query.len() || shared.len() != run.per_query.len() {
        log::warn!("runs evaluate different queries; comparing the {} shared ones", shared.len());
    }
    Metric::ALL
        .iter()
        .map(|&m| {
            let a: Vec<f64> = shared.iter().map(|(_, r)| r.get(m)).collect();
            let b: Vec<f64> = shared.iter().map(|(b, _)| b.get(m)).collect();
            let n = shared.len().max(1) as f64;
            let base = b.iter().sum::<f64>() / n;
            let value = a.iter().sum::<f64>() / n;
            let test: TTest = paired_t_test(&a, &b)?;
            Ok(Comparison {
                metric: m,
                baseline: base,
                value,
                delta_pct: (base != 0.0).then(|| (value - base) / base * 100.0),
                p_value: test.p,
                significant: test.significant,
            })
        })
        .collect()
}

/// Aggregate table: one row per run, each metric followed by its percentage
/// difference from the baseline; `‡` marks a significant difference.
pub fn aggregate_table(baseline_name: &str, baseline: &RunEval, runs: &[(&str, &RunEval)]) -> Result<String> {
    let mut out = String::new();
    let header: Vec<String> = Metric::ALL.iter().map(|m| format!("{m}\t±%")).collect();
    writeln!(out, "run\t{}", header.join("\t")).unwrap();
    let cells: Vec<String> = Metric::ALL.iter().map(|&m| format!("{:.4}\t", baseline.mean(m))).collect();
    writeln!(out, "{baseline_name}\t{}", cells.join("\t")).unwrap();
    for (name, eval) in runs {
        let cmp = compare(baseline, eval)?;
        let cells: Vec<String> = cmp
            .iter()
            .map(|c| {
                let mark = if c.significant { "‡" } else { "" };
                let delta = c.delta_pct.map_or("n/a".to_string(), |d| format!("{d:+.2}"));
                format!("{:.4}{mark}\t{delta}", c.value)
            })
            .collect();
        writeln!(out, "{name}\t{}", cells.join("\t")).unwrap();
    }
    Ok(out)
}

/// Means keyed by metric name, for manifests.
pub fn summary(eval: &RunEval) -> BTreeMap<String, f64> {
    Metric::ALL.iter().map(|&m| (m.name().to_string(), eval.mean(m))).collect()
}

/// One fold of a cross-validated grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldChoice {
    pub fold: usize,
    /// Index of the chosen grid point.
    pub best: usize,
    pub train_metric: f64,
    pub test_metric: f64,
    /// Positions of the fold's test queries.
    pub test: Vec<usize>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> f64 {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// For each fold, picks the grid point whose mean score over the other
/// folds' queries is highest (ties to the earlier point) and scores it on
/// the fold. `scores[g][q]` is query `q`'s metric under grid point `g`,
/// `None` for queries without relevant judgments; `assignment[q]` is the
/// query's fold.
pub fn cv_select(scores: &[Vec<Option<f64>>], assignment: &[usize], folds: usize) -> Vec<FoldChoice> {
    (0..folds)
        .map(|fold| {
            let test: Vec<usize> = (0..assignment.len()).filter(|&q| assignment[q] == fold).collect();
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (g, row) in scores.iter().enumerate() {
                let m = mean_defined(row.iter().enumerate().filter(|(q, _)| assignment[*q] != fold).map(|(_, v)| *v));
                if m > best.0 {
                    best = (m, g);
                }
            }
            FoldChoice {
                fold,
                best: best.1,
                train_metric: best.0,
                test_metric: mean_defined(test.iter().map(|&q| scores[best.1][q])),
                test,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn judg(pairs: &[(&str, i32)]) -> Judgments {
        pairs.iter().map(|(d, g)| (d.to_string(), *g)).collect()
    }

    #[test]
    fn ap_cases() {
        let j = judg(&[("a", 1), ("b", 1)]);
        assert_eq!(average_precision(&["a", "b", "c"], &j), Some(1.0));
        let j = judg(&[("b", 1)]);
        assert_eq!(average_precision(&["a", "b"], &j), Some(0.5));
        assert_eq!(average_precision(&["a"], &judg(&[("a", 0)])), None);
    }

    #[test]
    fn ndcg_cases() {
        let cfg = NdcgConfig::default();
        let j = judg(&[("b", 1)]);
        let v = ndcg(&["a", "b"], &j, &cfg).unwrap();
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((v - 0.6309).abs() < 1e-4);
        let j = judg(&[("a", 2), ("b", 1), ("c", 1)]);
        assert_eq!(ndcg(&["a", "b", "c"], &j, &cfg), Some(1.0));
        assert_eq!(ndcg(&["a", "c", "b"], &j, &cfg), Some(1.0));
        let exp = NdcgConfig { depth: Some(1), exponential_gain: true };
        assert_eq!(ndcg(&["b", "a"], &j, &exp), Some(1.0 / 3.0));
    }

    #[test]
    fn bpref_cases() {
        let j = judg(&[("r", 1), ("n", 0)]);
        assert_eq!(bpref(&["r", "n"], &j), Some(1.0));
        assert_eq!(bpref(&["n", "r"], &j), Some(0.0));
        assert_eq!(bpref(&["u", "n", "u2", "r"], &j), bpref(&["n", "r"], &j));
        let j = judg(&[("r", 1), ("s", 1)]);
        assert_eq!(bpref(&["r"], &j), Some(0.5));
    }

    #[test]
    fn precision_and_rr() {
        let j = judg(&[("a", 1), ("c", 1), ("e", 1)]);
        let ranked = ["a", "b", "c", "d", "e"];
        assert_eq!(p_at_10(&ranked, &j), 0.3);
        assert_eq!(reciprocal_rank(&ranked, &j), 1.0);
        assert_eq!(reciprocal_rank(&["x"], &j), 0.0);
        assert_eq!(p_at_10(&["x"], &j), 0.0);
    }

    #[test]
    fn query_order() {
        let mut ids = vec!["10", "9", "b", "a", "100"];
        ids.sort_by(|a, b| cmp_query_ids(a, b));
        assert_eq!(ids, ["9", "10", "100", "a", "b"]);
    }
}

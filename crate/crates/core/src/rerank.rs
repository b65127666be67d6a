//! Score combination of baseline log scores with document quality signals.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{by_query, DocSignals, Qrels, RunEntry};
use crate::error::{Error, Result};
use crate::learn::shuffled_folds;
use crate::metrics::{cmp_query_ids, cv_select, evaluate_query, Metric, NdcgConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Factuality,
    Objectivity,
}

impl SignalKind {
    pub fn of(self, s: &DocSignals) -> Option<f64> {
        match self {
            SignalKind::Factuality => s.p_fct,
            SignalKind::Objectivity => s.p_obj,
        }
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factuality" | "fct" => Ok(SignalKind::Factuality),
            "objectivity" | "obj" => Ok(SignalKind::Objectivity),
            other => Err(Error::invalid(format!("unknown signal `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Satu,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Linear => "linear",
            Method::Satu => "satu",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Method::Linear),
            "satu" => Ok(Method::Satu),
            other => Err(Error::invalid(format!("unknown rerank method `{other}`"))),
        }
    }
}

/// What to do with a run document that has no signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    #[default]
    Strict,
    Lenient,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(MissingPolicy::Strict),
            "lenient" => Ok(MissingPolicy::Lenient),
            other => Err(Error::invalid(format!("unknown missing-signal policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RerankParams {
    pub method: Method,
    pub alpha: f64,
    pub w: f64,
    pub k: f64,
    /// Signals are floored here before taking the log.
    pub epsilon_floor: f64,
    /// Saturation denominators closer to zero than this are singular.
    pub singular_epsilon: f64,
    pub missing: MissingPolicy,
}

impl Default for RerankParams {
    fn default() -> Self {
        RerankParams {
            method: Method::Linear,
            alpha: 1.0,
            w: 0.0,
            k: 1.0,
            epsilon_floor: 1e-4,
            singular_epsilon: 1e-6,
            missing: MissingPolicy::Strict,
        }
    }
}

impl RerankParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.epsilon_floor > 0.0 && self.epsilon_floor < 1.0) {
            return Err(Error::invalid(format!("epsilon_floor {} outside (0, 1)", self.epsilon_floor)));
        }
        if !(self.w.is_finite() && self.k.is_finite() && self.singular_epsilon >= 0.0) {
            return Err(Error::invalid("w, k and singular_epsilon must be finite"));
        }
        Ok(())
    }

    /// The swept parameter of the configured method.
    pub fn value(&self) -> f64 {
        match self.method {
            Method::Linear => self.alpha,
            Method::Satu => self.w,
        }
    }

    pub fn with_value(mut self, v: f64) -> Self {
        match self.method {
            Method::Linear => self.alpha = v,
            Method::Satu => self.w = v,
        }
        self
    }
}

pub type SignalMap = HashMap<String, DocSignals>;

pub fn signal_map(signals: &[DocSignals]) -> SignalMap {
    signals.iter().map(|s| (s.doc_id.clone(), s.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `(query, doc)` pairs scored with the floor because the signal was absent.
    pub missing: Vec<(String, String)>,
    /// `(query, doc)` pairs passed through because the saturation term was singular.
    pub singular: Vec<(String, String)>,
}

impl Diagnostics {
    fn extend(&mut self, other: Diagnostics) {
        self.missing.extend(other.missing);
        self.singular.extend(other.singular);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reranked {
    pub run: Vec<RunEntry>,
    pub diagnostics: Diagnostics,
}

pub fn linear_score(log_s: f64, p: f64, alpha: f64, floor: f64) -> f64 {
    log_s * alpha + p.max(floor).ln() * (1.0 - alpha)
}

/// `None` when `k + log p` is within `singular` of zero.
pub fn satu_score(log_s: f64, p: f64, w: f64, k: f64, floor: f64, singular: f64) -> Option<f64> {
    let lp = p.max(floor).ln();
    let den = k + lp;
    (den.abs() > singular || (singular == 0.0 && den != 0.0)).then(|| log_s + w * lp / den)
}

fn rerank_query(
    qid: &str,
    entries: &[&RunEntry],
    signals: &SignalMap,
    kind: SignalKind,
    params: &RerankParams,
) -> Result<(Vec<RunEntry>, Diagnostics)> {
    let mut diag = Diagnostics::default();
    let mut scored = Vec::with_capacity(entries.len());
    for e in entries {
        let p = match signals.get(&e.doc_id).and_then(|s| kind.of(s)) {
            Some(p) => p,
            None => match params.missing {
                MissingPolicy::Strict => return Err(Error::MissingSignal(e.doc_id.clone())),
                MissingPolicy::Lenient => {
                    diag.missing.push((qid.to_string(), e.doc_id.clone()));
                    params.epsilon_floor
                }
            },
        };
        let score = match params.method {
            Method::Linear => linear_score(e.score, p, params.alpha, params.epsilon_floor),
            Method::Satu => {
                match satu_score(e.score, p, params.w, params.k, params.epsilon_floor, params.singular_epsilon) {
                    Some(s) => s,
                    None => {
                        diag.singular.push((qid.to_string(), e.doc_id.clone()));
                        e.score
                    }
                }
            }
        };
        scored.push((score, *e));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.rank.cmp(&b.1.rank)));
    let run = scored
        .into_iter()
        .enumerate()
        .map(|(i, (score, e))| RunEntry { rank: i + 1, score, ..e.clone() })
        .collect();
    Ok((run, diag))
}

/// Reranks every query of the run with the configured method.
pub fn rerank(run: &[RunEntry], signals: &SignalMap, kind: SignalKind, params: &RerankParams) -> Result<Reranked> {
    params.validate()?;
    let groups: Vec<(&str, Vec<&RunEntry>)> = by_query(run).into_iter().collect();
    let parts: Vec<(Vec<RunEntry>, Diagnostics)> = groups
        .par_iter()
        .map(|(qid, entries)| rerank_query(qid, entries, signals, kind, params))
        .collect::<Result<_>>()?;
    let mut out = Reranked { run: Vec::with_capacity(run.len()), diagnostics: Diagnostics::default() };
    for (entries, diag) in parts {
        out.run.extend(entries);
        out.diagnostics.extend(diag);
    }
    if !out.diagnostics.missing.is_empty() {
        log::warn!("{} run documents had no signal; floored", out.diagnostics.missing.len());
    }
    if !out.diagnostics.singular.is_empty() {
        log::warn!("{} documents hit a singular saturation term; left unadjusted", out.diagnostics.singular.len());
    }
    Ok(out)
}

pub fn rerank_linear(
    run: &[RunEntry],
    signals: &SignalMap,
    kind: SignalKind,
    alpha: f64,
    params: &RerankParams,
) -> Result<Reranked> {
    rerank(run, signals, kind, &RerankParams { method: Method::Linear, alpha, ..*params })
}

pub fn rerank_satu(
    run: &[RunEntry],
    signals: &SignalMap,
    kind: SignalKind,
    w: f64,
    k: f64,
    params: &RerankParams,
) -> Result<Reranked> {
    rerank(run, signals, kind, &RerankParams { method: Method::Satu, w, k, ..*params })
}

/// Keeps the entries ranked `n` or better in every query.
pub fn truncate_top(run: &[RunEntry], n: usize) -> Result<Vec<RunEntry>> {
    if n == 0 {
        return Err(Error::invalid("truncation depth must be at least 1"));
    }
    Ok(run.iter().filter(|e| e.rank <= n).cloned().collect())
}

/// `start, start + step, ..., end` computed without accumulated error.
pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}

pub fn alpha_grid() -> Vec<f64> {
    grid(0.5, 1.0, 0.05)
}

pub fn w_grid() -> Vec<f64> {
    grid(0.5, 3.5, 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub params: RerankParams,
    pub grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub target: Metric,
    pub ndcg: NdcgConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub best: f64,
    pub train_metric: f64,
    pub test_metric: f64,
    pub test_queries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub folds: Vec<FoldResult>,
    /// Mean of the target metric over the test folds.
    pub mean_test_metric: f64,
    /// Each query reranked with the parameter chosen for its fold.
    pub run: Vec<RunEntry>,
    pub diagnostics: Diagnostics,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Cross-validated grid search over the method's parameter.
pub fn sweep_cv(
    run: &[RunEntry],
    signals: &SignalMap,
    kind: SignalKind,
    qrels: &Qrels,
    config: &SweepConfig,
) -> Result<SweepResult> {
    if config.grid.is_empty() {
        return Err(Error::invalid("parameter grid is empty"));
    }
    let mut grid = config.grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let groups = by_query(run);
    let mut qids: Vec<&str> = groups.keys().copied().collect();
    qids.sort_by(|a, b| cmp_query_ids(a, b));
    if qids.len() < config.folds || config.folds < 2 {
        return Err(Error::invalid(format!(
            "{} queries cannot be split into {} folds",
            qids.len(),
            config.folds
        )));
    }
    let assignment = shuffled_folds(qids.len(), config.folds, config.seed);
    let empty = HashMap::new();

    // Per grid point: each query's reranking and its target metric, if defined.
    type Cell = (Vec<RunEntry>, Diagnostics, Option<f64>);
    let table: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&v| {
            let params = config.params.with_value(v);
            params.validate()?;
            qids.iter()
                .map(|&q| {
                    let (entries, diag) = rerank_query(q, &groups[q], signals, kind, &params)?;
                    let ranked: Vec<&str> = entries.iter().map(|e| e.doc_id.as_str()).collect();
                    let j = qrels.judgments(q).unwrap_or(&empty);
                    let m = evaluate_query(q, &ranked, j, &config.ndcg).map(|e| e.get(config.target));
                    Ok((entries, diag, m))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let scores: Vec<Vec<Option<f64>>> = table.iter().map(|row| row.iter().map(|c| c.2).collect()).collect();
    let choices = cv_select(&scores, &assignment, config.folds);

    let mut chosen: HashMap<&str, usize> = HashMap::new();
    for c in &choices {
        for &q in &c.test {
            chosen.insert(qids[q], c.best);
        }
    }
    let position: HashMap<&str, usize> = qids.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let mut out_run = Vec::with_capacity(run.len());
    let mut diagnostics = Diagnostics::default();
    for q in groups.keys() {
        let (entries, diag, _) = &table[chosen[q]][position[q]];
        out_run.extend(entries.iter().cloned());
        diagnostics.extend(diag.clone());
    }
    let folds: Vec<FoldResult> = choices
        .into_iter()
        .map(|c| FoldResult {
            fold: c.fold,
            best: grid[c.best],
            train_metric: c.train_metric,
            test_metric: c.test_metric,
            test_queries: c.test.iter().map(|&q| qids[q].to_string()).collect(),
        })
        .collect();
    Ok(SweepResult {
        mean_test_metric: mean(folds.iter().map(|f| f.test_metric)),
        folds,
        run: out_run,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Qrel;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn run_of(qid: &str, scores: &[f64]) -> Vec<RunEntry> {
        scores
            .iter()
            .enumerate()
            .map(|(i, &s)| RunEntry::new(qid, format!("{qid}-d{i}"), i + 1, s, "DIR"))
            .collect()
    }

    fn signals_for(run: &[RunEntry], ps: &[f64]) -> SignalMap {
        signal_map(
            &run.iter()
                .zip(ps)
                .map(|(e, &p)| DocSignals::new(e.doc_id.clone(), Some(p), Some(p)))
                .collect::<Vec<_>>(),
        )
    }

    fn order(run: &[RunEntry]) -> Vec<&str> {
        run.iter().map(|e| e.doc_id.as_str()).collect()
    }

    #[test]
    fn formulas() {
        assert!((linear_score(-2.0, E.powf(-1.0), 0.75, 1e-4) - (-1.75)).abs() < 1e-12);
        let s = satu_score(-2.0, E.powf(-0.5), 2.0, 1.0, 1e-4, 1e-6).unwrap();
        assert!((s - (-4.0)).abs() < 1e-12);
        assert_eq!(satu_score(-3.0, 1.0, 2.0, 1.0, 1e-4, 1e-6), Some(-3.0));
        assert_eq!(satu_score(-3.0, E.powf(-1.0), 2.0, 1.0, 1e-4, 1e-6), None);
        assert_eq!(linear_score(0.0, 0.0, 0.0, 1e-4), 1e-4f64.ln());
    }

    #[test]
    fn three_doc_oracle() {
        let run = run_of("1", &[-1.0, -1.5, -2.0]);
        let ps = [0.1, 0.9, 0.5];
        let sig = signals_for(&run, &ps);
        let out = rerank_linear(&run, &sig, SignalKind::Factuality, 0.5, &RerankParams::default()).unwrap();
        let mut expected: Vec<(f64, &str)> =
            run.iter().zip(ps).map(|(e, p)| (0.5 * e.score + 0.5 * p.ln(), e.doc_id.as_str())).collect();
        expected.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        assert_eq!(order(&out.run), expected.iter().map(|e| e.1).collect::<Vec<_>>());
        assert_eq!(out.run.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn missing_signals() {
        let run = run_of("1", &[-1.0, -2.0]);
        let sig = signals_for(&run[..1], &[0.5]);
        let strict = RerankParams::default();
        assert!(matches!(
            rerank_linear(&run, &sig, SignalKind::Factuality, 0.5, &strict),
            Err(Error::MissingSignal(_))
        ));
        let lenient = RerankParams { missing: MissingPolicy::Lenient, ..strict };
        let out = rerank_linear(&run, &sig, SignalKind::Factuality, 0.5, &lenient).unwrap();
        assert_eq!(out.diagnostics.missing, [("1".to_string(), "1-d1".to_string())]);
    }

    #[test]
    fn singular_passthrough() {
        let run = run_of("1", &[-1.0, -2.0]);
        let sig = signals_for(&run, &[E.powf(-1.0), 0.9]);
        let out = rerank_satu(&run, &sig, SignalKind::Factuality, 1.0, 1.0, &RerankParams::default()).unwrap();
        assert_eq!(out.diagnostics.singular.len(), 1);
        assert_eq!(out.run.iter().find(|e| e.doc_id == "1-d0").unwrap().score, -1.0);
    }

    #[test]
    fn truncation() {
        let run = run_of("1", &vec![-1.0; 1500]);
        assert_eq!(truncate_top(&run, 1000).unwrap().len(), 1000);
        assert_eq!(truncate_top(&run[..500], 1000).unwrap().len(), 500);
        assert!(truncate_top(&run, 0).is_err());
    }

    #[test]
    fn grids() {
        let a = alpha_grid();
        assert_eq!(a.len(), 11);
        assert_eq!(a[0], 0.5);
        assert_eq!(a[10], 1.0);
        assert_eq!(a[3], 0.65);
        assert_eq!(w_grid(), [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]);
    }

    fn sweep_fixture() -> (Vec<RunEntry>, SignalMap, Qrels) {
        let mut run = Vec::new();
        let mut qrels = Vec::new();
        let mut sigs = Vec::new();
        for q in 1..=10 {
            let qid = q.to_string();
            for d in 0..8 {
                let doc = format!("{q}-{d}");
                run.push(RunEntry::new(&qid, &doc, d + 1, -(d as f64) * 0.1, "DIR"));
                let rel = (d + q) % 4 == 0;
                qrels.push(Qrel { query_id: qid.clone(), doc_id: doc.clone(), grade: rel as i32 });
                let p = if rel { 1.0 } else { 0.0 };
                sigs.push(DocSignals::new(doc, Some(p), Some(0.5)));
            }
        }
        (run, signal_map(&sigs), Qrels::new(&qrels))
    }

    fn sweep_config(grid: Vec<f64>) -> SweepConfig {
        SweepConfig {
            params: RerankParams::default(),
            grid,
            folds: 5,
            seed: 7,
            target: Metric::Map,
            ndcg: NdcgConfig::default(),
        }
    }

    #[test]
    fn informative_signal_picks_alpha_below_one() {
        let (run, sig, qrels) = sweep_fixture();
        let r = sweep_cv(&run, &sig, SignalKind::Factuality, &qrels, &sweep_config(alpha_grid())).unwrap();
        assert!(r.folds.iter().all(|f| f.best < 1.0));
        assert_eq!(r.mean_test_metric, 1.0);
        let mut all: Vec<&String> = r.folds.iter().flat_map(|f| &f.test_queries).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 10);
        assert_eq!(r.folds.iter().map(|f| f.test_queries.len()).sum::<usize>(), 10);
    }

    #[test]
    fn degenerate_grid_is_plain_evaluation() {
        let (run, sig, qrels) = sweep_fixture();
        let r = sweep_cv(&run, &sig, SignalKind::Objectivity, &qrels, &sweep_config(vec![0.8])).unwrap();
        let plain = rerank_linear(&run, &sig, SignalKind::Objectivity, 0.8, &RerankParams::default()).unwrap();
        assert_eq!(r.run, plain.run);
        let cfg = sweep_config(vec![]);
        assert!(sweep_cv(&run, &sig, SignalKind::Objectivity, &qrels, &cfg).is_err());
        let few: Vec<RunEntry> = run.iter().filter(|e| ["1", "2", "3"].contains(&e.query_id.as_str())).cloned().collect();
        assert!(sweep_cv(&few, &sig, SignalKind::Objectivity, &qrels, &sweep_config(vec![0.8])).is_err());
    }

    proptest! {
        #[test]
        fn identities_and_conservation(scores in proptest::collection::vec(-20.0f64..0.0, 1..30),
                                       ps in proptest::collection::vec(0.0f64..=1.0, 30)) {
            let mut scores = scores;
            scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let run = run_of("q", &scores);
            let sig = signals_for(&run, &ps);
            let p = RerankParams::default();
            let lin = rerank_linear(&run, &sig, SignalKind::Factuality, 1.0, &p).unwrap();
            prop_assert_eq!(order(&lin.run), order(&run));
            let sat = rerank_satu(&run, &sig, SignalKind::Factuality, 0.0, 1.0, &p).unwrap();
            prop_assert_eq!(order(&sat.run), order(&run));
            let mixed = rerank_linear(&run, &sig, SignalKind::Factuality, 0.3, &p).unwrap();
            let mut a = order(&mixed.run);
            let mut b = order(&run);
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn raising_a_signal_never_lowers_rank(scores in proptest::collection::vec(-20.0f64..0.0, 2..20),
                                              ps in proptest::collection::vec(0.0f64..=1.0, 20),
                                              pick in 0usize..20, bump in 0.0f64..1.0, alpha in 0.0f64..1.0) {
            let mut scores = scores;
            scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let run = run_of("q", &scores);
            let i = pick % run.len();
            let before = signals_for(&run, &ps);
            let mut raised = ps.clone();
            raised[i] = (raised[i] + bump).min(1.0);
            let after = signals_for(&run, &raised);
            let p = RerankParams::default();
            let rank_of = |sig: &SignalMap| {
                let r = rerank_linear(&run, sig, SignalKind::Factuality, alpha, &p).unwrap();
                r.run.iter().find(|e| e.doc_id == run[i].doc_id).unwrap().rank
            };
            prop_assert!(rank_of(&after) <= rank_of(&before));
        }
    }
}

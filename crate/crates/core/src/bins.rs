//! Equal-count binning of signal probabilities, per-bin relevance, rank
//! correlation and spam cross-analysis.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Qrels, SpamRule, SpamScores};
use crate::error::{Error, Result};
use crate::stats::t_two_sided;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub n: usize,
    pub range: f64,
    pub s: f64,
    pub m: usize,
    pub bin_size: usize,
    /// Constant data; a single bin was used.
    pub degenerate: bool,
}

/// `round(R / (3.49 s) * N^(1/3))`, halves rounded up, clamped to `[1, N]`.
pub fn scott_from_stats(range: f64, s: f64, n: usize) -> BinningSpec {
    let (m, degenerate) = if s > 0.0 && n > 0 {
        let raw = range / (3.49 * s) * (n as f64).cbrt();
        (((raw + 0.5).floor() as usize).clamp(1, n.max(1)), false)
    } else {
        (1, true)
    };
    BinningSpec { n, range, s, m, bin_size: n / m, degenerate }
}

/// Bin count for the values by Scott's rule with the sample standard
/// deviation.
pub fn scott_bin_count(values: &[f64]) -> Result<BinningSpec> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("binning needs at least two values"));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spec = scott_from_stats(max - min, var.sqrt(), n);
    if spec.degenerate {
        log::warn!("all {n} values are equal; using a single bin");
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub index: usize,
    pub members: Vec<String>,
    pub mean_signal: f64,
    pub freq: usize,
    pub p_rel: Option<f64>,
}

/// Sorts documents by signal (ties by doc id) and cuts `m - 1` bins of
/// `bin_size`; the last bin takes the remainder.
pub fn make_bins(signals: &[(String, f64)], spec: &BinningSpec) -> Result<Vec<Bin>> {
    if signals.len() != spec.n {
        return Err(Error::invalid(format!(
            "binning spec is for {} documents, got {}",
            spec.n,
            signals.len()
        )));
    }
    if spec.m == 0 || spec.bin_size == 0 || (spec.m - 1) * spec.bin_size >= spec.n.max(1) {
        return Err(Error::invalid(format!("cannot cut {} documents into {} bins", spec.n, spec.m)));
    }
    let mut sorted: Vec<&(String, f64)> = signals.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let mut bins = Vec::with_capacity(spec.m);
    for i in 0..spec.m {
        let start = i * spec.bin_size;
        let end = if i + 1 == spec.m { sorted.len() } else { start + spec.bin_size };
        let slice = &sorted[start..end];
        bins.push(Bin {
            index: i,
            members: slice.iter().map(|(d, _)| d.clone()).collect(),
            mean_signal: slice.iter().map(|(_, v)| v).sum::<f64>() / slice.len() as f64,
            freq: slice.len(),
            p_rel: None,
        });
    }
    Ok(bins)
}

/// Fills `p_rel` with the share of all relevant documents falling in each bin.
pub fn bin_relevance(bins: &mut [Bin], qrels: &Qrels) -> Result<()> {
    let relevant = qrels.relevant_docs();
    if relevant.is_empty() {
        return Err(Error::invalid("qrels contain no relevant documents"));
    }
    let total = relevant.len() as f64;
    let mut binned = 0;
    for bin in bins.iter_mut() {
        let hits = bin.members.iter().filter(|d| relevant.contains(d.as_str())).count();
        binned += hits;
        bin.p_rel = Some(hits as f64 / total);
    }
    if binned < relevant.len() {
        log::warn!("{} relevant documents carry no signal", relevant.len() - binned);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Average ranks, 1-based.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho with a t-distribution p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("series differ in length: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid("rank correlation needs at least three pairs"));
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::Undefined("rank correlation of a constant series".into()))?;
    let p_value = if rho.abs() == 1.0 {
        0.0
    } else {
        let t = rho * ((n - 2) as f64 / (1.0 - rho * rho)).sqrt();
        t_two_sided(t, (n - 2) as f64)
    };
    Ok(Correlation { rho, p_value, n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamBin {
    pub index: usize,
    pub mean_signal: f64,
    pub mean_percentile: Option<f64>,
    pub covered: usize,
    pub spam: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamAnalysis {
    pub rule: SpamRule,
    pub bins: Vec<SpamBin>,
    /// Binned documents without a spam score.
    pub missing: usize,
    /// Fraction of covered documents that are spam under the rule.
    pub spam_fraction: f64,
    /// `None` when the correlation is undefined.
    pub correlation: Option<Correlation>,
}

pub fn spam_cross_analysis(bins: &[Bin], spam: &SpamScores, rule: SpamRule) -> Result<SpamAnalysis> {
    let mut out = SpamAnalysis { rule, bins: Vec::new(), missing: 0, spam_fraction: 0.0, correlation: None };
    let (mut covered_total, mut spam_total) = (0usize, 0usize);
    for bin in bins {
        let scores: Vec<u8> = bin.members.iter().filter_map(|d| spam.get(d)).collect();
        out.missing += bin.members.len() - scores.len();
        let spam_count = scores.iter().filter(|&&p| rule.is_spam(p)).count();
        covered_total += scores.len();
        spam_total += spam_count;
        out.bins.push(SpamBin {
            index: bin.index,
            mean_signal: bin.mean_signal,
            mean_percentile: (!scores.is_empty())
                .then(|| scores.iter().map(|&p| p as f64).sum::<f64>() / scores.len() as f64),
            covered: scores.len(),
            spam: spam_count,
        });
    }
    if covered_total == 0 {
        return Err(Error::invalid("no binned document has a spam score"));
    }
    if out.missing > 0 {
        log::warn!("{} binned documents have no spam score and were excluded", out.missing);
    }
    out.spam_fraction = spam_total as f64 / covered_total as f64;
    let (x, y): (Vec<f64>, Vec<f64>) = out
        .bins
        .iter()
        .filter_map(|b| b.mean_percentile.map(|p| (b.mean_signal, p)))
        .unzip();
    out.correlation = match spearman(&x, &y) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("spam correlation undefined: {e}");
            None
        }
    };
    Ok(out)
}

/// Column headers of the plot files.
pub const FREQUENCY: &str = "frequency";
pub const RELEVANCE: &str = "p(relevance)";
pub const SPAM_RANK: &str = "spam rank";

/// Axis label of a signal, e.g. `p(factuality)`.
pub fn signal_axis(name: &str) -> String {
    format!("p({name})")
}

/// `signal,frequency` rows, one per bin.
pub fn distribution_csv(bins: &[Bin], signal: &str) -> String {
    let mut out = format!("{},{FREQUENCY}\n", signal_axis(signal));
    for b in bins {
        writeln!(out, "{},{}", b.mean_signal, b.freq).unwrap();
    }
    out
}

/// `p(relevance),signal` rows, one per bin.
pub fn relevance_csv(bins: &[Bin], signal: &str) -> Result<String> {
    let mut out = format!("{RELEVANCE},{}\n", signal_axis(signal));
    for b in bins {
        let p = b.p_rel.ok_or_else(|| Error::invalid("bin relevance not computed"))?;
        writeln!(out, "{p},{}", b.mean_signal).unwrap();
    }
    Ok(out)
}

/// `signal,spam rank` rows for bins with spam coverage.
pub fn spam_csv(analysis: &SpamAnalysis, signal: &str) -> String {
    let mut out = format!("{},{SPAM_RANK}\n", signal_axis(signal));
    for b in &analysis.bins {
        if let Some(p) = b.mean_percentile {
            writeln!(out, "{},{p}", b.mean_signal).unwrap();
        }
    }
    out
}

/// Header and numeric rows of a plot file.
pub fn parse_plot_csv(input: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_reader(input.as_bytes());
    let headers = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| Error::line(i + 2, format!("not a number: `{v}`"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((headers, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub index: usize,
    pub freq: usize,
    pub mean_signal: f64,
    pub p_rel: Option<f64>,
}

/// Provenance of one bin analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisManifest {
    pub signal: String,
    pub spec: BinningSpec,
    pub rounding: String,
    pub bins: Vec<BinSummary>,
    pub relevance_correlation: Option<Correlation>,
    pub spam_rule: Option<SpamRule>,
    pub spam_threshold: Option<u8>,
    pub spam_missing: Option<usize>,
    pub spam_fraction: Option<f64>,
    pub spam_correlation: Option<Correlation>,
}

impl AnalysisManifest {
    pub fn new(signal: &str, spec: &BinningSpec, bins: &[Bin]) -> Self {
        let x: Vec<f64> = bins.iter().map(|b| b.mean_signal).collect();
        let y: Vec<f64> = bins.iter().filter_map(|b| b.p_rel).collect();
        AnalysisManifest {
            signal: signal.to_string(),
            spec: *spec,
            rounding: "half_up".into(),
            bins: bins
                .iter()
                .map(|b| BinSummary { index: b.index, freq: b.freq, mean_signal: b.mean_signal, p_rel: b.p_rel })
                .collect(),
            relevance_correlation: (y.len() == x.len()).then(|| spearman(&x, &y).ok()).flatten(),
            spam_rule: None,
            spam_threshold: None,
            spam_missing: None,
            spam_fraction: None,
            spam_correlation: None,
        }
    }

    pub fn with_spam(mut self, spam: &SpamAnalysis) -> Self {
        self.spam_rule = Some(spam.rule);
        self.spam_threshold = Some(SpamRule::THRESHOLD);
        self.spam_missing = Some(spam.missing);
        self.spam_fraction = Some(spam.spam_fraction);
        self.spam_correlation = spam.correlation;
        self
    }
}

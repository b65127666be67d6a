//! Seeded acquisition of subjective nouns from extraction patterns.
//!
//! Patterns are scored by RlogF against the growing lexicon and the best
//! unused one joins the pattern pool each iteration. Nouns extracted by the
//! pool are scored by AvgLog over every pattern that extracts them, and the
//! best few unseen ones are promoted.

use std::collections::{BTreeMap, BTreeSet};

use super::patterns::{PatternInstance, PatternKey};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub per_iteration: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { iterations: 400, per_iteration: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Promotion {
    pub noun: String,
    pub iteration: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BootstrapResult {
    pub promoted: Vec<Promotion>,
    pub pool: Vec<PatternKey>,
    pub iterations_run: usize,
    pub stopped_early: bool,
}

impl BootstrapResult {
    pub fn nouns(&self) -> Vec<&str> {
        self.promoted.iter().map(|p| p.noun.as_str()).collect()
    }
}

pub(crate) fn rlogf(members: usize, total: usize) -> f64 {
    if members == 0 {
        return f64::NEG_INFINITY;
    }
    members as f64 / total as f64 * (members as f64).log2()
}

pub fn bootstrap<S: AsRef<str>>(
    seeds: &[S],
    sentences: &[Vec<PatternInstance>],
    config: &BootstrapConfig,
) -> Result<BootstrapResult> {
    if seeds.is_empty() {
        return Err(Error::invalid("bootstrapping needs at least one seed noun"));
    }
    if config.per_iteration == 0 {
        return Err(Error::invalid("per_iteration must be at least 1"));
    }
    let mut extractions: BTreeMap<&PatternKey, BTreeSet<&str>> = BTreeMap::new();
    let mut patterns_of: BTreeMap<&str, BTreeSet<&PatternKey>> = BTreeMap::new();
    for inst in sentences.iter().flatten() {
        if let Some(head) = inst.head.as_deref() {
            extractions.entry(&inst.key).or_default().insert(head);
            patterns_of.entry(head).or_default().insert(&inst.key);
        }
    }
    let mut lexicon: BTreeSet<String> = seeds.iter().map(|s| s.as_ref().to_lowercase()).collect();
    let mut pool: BTreeSet<&PatternKey> = BTreeSet::new();
    let mut result = BootstrapResult::default();
    let members = |key: &PatternKey, lexicon: &BTreeSet<String>| {
        extractions[key].iter().filter(|n| lexicon.contains(**n)).count()
    };

    for iteration in 1..=config.iterations {
        let best = extractions
            .iter()
            .filter(|(k, _)| !pool.contains(*k))
            .map(|(k, ext)| (rlogf(members(k, &lexicon), ext.len()), *k))
            .filter(|(score, _)| score.is_finite())
            .fold(None::<(f64, &PatternKey)>, |best, cand| match best {
                Some(b) if b.0 >= cand.0 => Some(b),
                _ => Some(cand),
            });
        let grew = best.is_some();
        if let Some((_, key)) = best {
            pool.insert(key);
            result.pool.push(key.clone());
        }
        result.iterations_run = iteration;
        let candidates: BTreeSet<&str> = pool
            .iter()
            .flat_map(|k| extractions[*k].iter().copied())
            .filter(|n| !lexicon.contains(*n))
            .collect();
        if candidates.is_empty() {
            if grew {
                continue;
            }
            result.iterations_run = iteration - 1;
            result.stopped_early = true;
            log::info!("bootstrapping ran out of candidates after {} iterations", iteration - 1);
            break;
        }
        let mut scored: Vec<(f64, &str)> = candidates
            .into_iter()
            .map(|n| {
                let pats = &patterns_of[n];
                let sum: f64 = pats.iter().map(|k| ((members(k, &lexicon) + 1) as f64).log2()).sum();
                (sum / pats.len() as f64, n)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        for (score, noun) in scored.into_iter().take(config.per_iteration) {
            lexicon.insert(noun.to_string());
            result.promoted.push(Promotion { noun: noun.to_string(), iteration, score });
        }
    }
    Ok(result)
}

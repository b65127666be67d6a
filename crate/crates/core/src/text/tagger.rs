//! Greedy averaged-perceptron part-of-speech tagger.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tag::PosTag;
use super::token::Token;
use crate::error::{Error, Result};

const N_TAGS: usize = 45;
const HEADER: &str = "factir-tagger 1";
const START: [&str; 2] = ["-START-", "-START2-"];
const END: [&str; 2] = ["-END-", "-END2-"];
const DICT_MIN_FREQ: usize = 20;
const DICT_MIN_PURITY: f64 = 0.97;

/// A gold sentence: `(word, tag)` pairs.
pub type TaggedSentence = Vec<(String, PosTag)>;

/// Parses a gold corpus: one sentence per line, whitespace separated `token/TAG` pairs.
pub fn parse_gold_corpus(input: &str) -> Result<Vec<TaggedSentence>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut sent = Vec::new();
        for pair in line.split_whitespace() {
            let (word, tag) = pair
                .rsplit_once('/')
                .ok_or_else(|| Error::line(n + 1, format!("`{pair}` is not token/TAG")))?;
            if word.is_empty() {
                return Err(Error::line(n + 1, format!("empty token in `{pair}`")));
            }
            let tag: PosTag = tag
                .parse()
                .map_err(|e: Error| Error::line(n + 1, e.to_string()))?;
            sent.push((word.to_string(), tag));
        }
        out.push(sent);
    }
    Ok(out)
}

fn normalize(word: &str) -> String {
    if word.contains('-') && !word.starts_with('-') {
        "!HYPHEN".to_string()
    } else if word.len() == 4 && word.chars().all(|c| c.is_ascii_digit()) {
        "!YEAR".to_string()
    } else if word.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        "!DIGITS".to_string()
    } else {
        word.to_lowercase()
    }
}

fn suffix(word: &str, n: usize) -> &str {
    let start = word.char_indices().rev().nth(n - 1).map_or(0, |(i, _)| i);
    &word[start..]
}

fn shape(word: &str) -> &'static str {
    let first_upper = word.chars().next().is_some_and(char::is_uppercase);
    let all_upper = word.chars().all(|c| !c.is_lowercase());
    match (first_upper, all_upper) {
        (true, true) => "XX",
        (true, false) => "Xx",
        _ => "x",
    }
}

fn features(i: usize, word: &str, context: &[String], prev: &str, prev2: &str) -> Vec<String> {
    // `context` is padded with two start and two end symbols.
    let i = i + 2;
    let w = &context[i];
    vec![
        "bias".to_string(),
        format!("i suffix {}", suffix(w, 3)),
        format!("i pref1 {}", w.chars().next().unwrap_or(' ')),
        format!("i shape {}", shape(word)),
        format!("i-1 tag {prev}"),
        format!("i-2 tag {prev2}"),
        format!("i tag+i-2 tag {prev} {prev2}"),
        format!("i word {w}"),
        format!("i-1 tag+i word {prev} {w}"),
        format!("i-1 word {}", context[i - 1]),
        format!("i-1 suffix {}", suffix(&context[i - 1], 3)),
        format!("i-2 word {}", context[i - 2]),
        format!("i+1 word {}", context[i + 1]),
        format!("i+1 suffix {}", suffix(&context[i + 1], 3)),
        format!("i+2 word {}", context[i + 2]),
    ]
}

fn padded_context<S: AsRef<str>>(words: &[S]) -> Vec<String> {
    START
        .iter()
        .map(|s| s.to_string())
        .chain(words.iter().map(|w| normalize(w.as_ref())))
        .chain(END.iter().map(|s| s.to_string()))
        .collect()
}

#[derive(Clone)]
struct TrainWeights {
    weight: [f64; N_TAGS],
    total: [f64; N_TAGS],
    stamp: [u64; N_TAGS],
}

impl Default for TrainWeights {
    fn default() -> Self {
        TrainWeights {
            weight: [0.0; N_TAGS],
            total: [0.0; N_TAGS],
            stamp: [0; N_TAGS],
        }
    }
}

/// A trained tagger. Immutable once trained; share freely across threads.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tagger {
    weights: HashMap<String, Vec<f64>>,
    tagdict: HashMap<String, PosTag>,
    most_frequent: HashMap<String, PosTag>,
    default_tag: Option<PosTag>,
    epochs: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TaggerConfig {
    pub epochs: usize,
    pub seed: u64,
    pub heldout_fraction: f64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            epochs: 5,
            seed: 13,
            heldout_fraction: 0.1,
        }
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Trains on a seeded 90/10 split and reports held-out token accuracy.
pub fn train_tagger(corpus: &[TaggedSentence], config: &TaggerConfig) -> Result<(Tagger, f64)> {
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::invalid("empty tagger training corpus"));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let n_held = if corpus.len() < 2 {
        0
    } else {
        ((corpus.len() as f64 * config.heldout_fraction).round() as usize).clamp(1, corpus.len() - 1)
    };
    let (held_idx, train_idx) = order.split_at(n_held);
    let train: Vec<&TaggedSentence> = train_idx.iter().map(|&i| &corpus[i]).collect();
    let model = Tagger::fit(&train, config.epochs, config.seed);
    let held: Vec<&TaggedSentence> = if held_idx.is_empty() {
        log::warn!("corpus too small for a held-out split; reporting training accuracy");
        train.clone()
    } else {
        held_idx.iter().map(|&i| &corpus[i]).collect()
    };
    Ok((model.clone(), model.accuracy(&held)))
}

impl Tagger {
    pub fn is_trained(&self) -> bool {
        self.default_tag.is_some()
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    /// Fits on every given sentence. With zero epochs the model is the
    /// per-word most-frequent-tag baseline.
    pub fn fit(corpus: &[&TaggedSentence], epochs: usize, seed: u64) -> Tagger {
        let mut counts: HashMap<&str, HashMap<PosTag, usize>> = HashMap::new();
        let mut tag_totals = [0usize; N_TAGS];
        for sent in corpus {
            for (w, t) in sent.iter() {
                *counts.entry(w.as_str()).or_default().entry(*t).or_default() += 1;
                tag_totals[t.index()] += 1;
            }
        }
        let default_tag = PosTag::ALL[argmax(&tag_totals.map(|c| c as f64))];
        let mut most_frequent = HashMap::new();
        let mut tagdict = HashMap::new();
        for (w, tags) in &counts {
            let (&best, &n) = tags
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .unwrap();
            let total: usize = tags.values().sum();
            most_frequent.insert(w.to_string(), best);
            if total >= DICT_MIN_FREQ && n as f64 / total as f64 >= DICT_MIN_PURITY {
                tagdict.insert(w.to_string(), best);
            }
        }

        let mut weights: HashMap<String, TrainWeights> = HashMap::new();
        let mut clock: u64 = 0;
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..epochs {
            for &si in &order {
                let sent = corpus[si];
                let words: Vec<&str> = sent.iter().map(|(w, _)| w.as_str()).collect();
                let context = padded_context(&words);
                let (mut prev, mut prev2) = (START[0].to_string(), START[1].to_string());
                for (i, (word, gold)) in sent.iter().enumerate() {
                    let guess = match tagdict.get(word.as_str()) {
                        Some(&t) => t,
                        None => {
                            let feats = features(i, word, &context, &prev, &prev2);
                            let mut scores = [0.0; N_TAGS];
                            for f in &feats {
                                if let Some(fw) = weights.get(f) {
                                    for (s, w) in scores.iter_mut().zip(fw.weight.iter()) {
                                        *s += w;
                                    }
                                }
                            }
                            let guess = PosTag::ALL[argmax(&scores)];
                            clock += 1;
                            if guess != *gold {
                                for f in feats {
                                    let fw = weights.entry(f).or_default();
                                    for (class, delta) in [(gold.index(), 1.0), (guess.index(), -1.0)] {
                                        fw.total[class] += (clock - fw.stamp[class]) as f64 * fw.weight[class];
                                        fw.stamp[class] = clock;
                                        fw.weight[class] += delta;
                                    }
                                }
                            }
                            guess
                        }
                    };
                    prev2 = std::mem::replace(&mut prev, guess.as_str().to_string());
                }
            }
            order.shuffle(&mut rng);
        }

        let mut averaged = HashMap::new();
        if clock > 0 {
            for (f, mut fw) in weights {
                let avg: Vec<f64> = (0..N_TAGS)
                    .map(|c| {
                        fw.total[c] += (clock - fw.stamp[c]) as f64 * fw.weight[c];
                        fw.total[c] / clock as f64
                    })
                    .collect();
                if avg.iter().any(|&v| v != 0.0) {
                    averaged.insert(f, avg);
                }
            }
        }
        Tagger {
            weights: averaged,
            tagdict,
            most_frequent,
            default_tag: Some(default_tag),
            epochs,
        }
    }

    /// Tags a word sequence. Every word receives exactly one tag.
    pub fn tag_words<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<PosTag>> {
        let default = self
            .default_tag
            .ok_or_else(|| Error::Model("tagger has not been trained".into()))?;
        if self.epochs == 0 {
            return Ok(words
                .iter()
                .map(|w| *self.most_frequent.get(w.as_ref()).unwrap_or(&default))
                .collect());
        }
        let context = padded_context(words);
        let mut tags = Vec::with_capacity(words.len());
        let (mut prev, mut prev2) = (START[0].to_string(), START[1].to_string());
        for (i, word) in words.iter().enumerate() {
            let word = word.as_ref();
            let tag = match self.tagdict.get(word) {
                Some(&t) => t,
                None => {
                    let mut scores = [0.0; N_TAGS];
                    let mut fired = false;
                    for f in features(i, word, &context, &prev, &prev2) {
                        if let Some(w) = self.weights.get(&f) {
                            fired = true;
                            for (s, v) in scores.iter_mut().zip(w) {
                                *s += v;
                            }
                        }
                    }
                    if fired {
                        PosTag::ALL[argmax(&scores)]
                    } else {
                        default
                    }
                }
            };
            tags.push(tag);
            prev2 = std::mem::replace(&mut prev, tag.as_str().to_string());
        }
        Ok(tags)
    }

    /// Fills `pos` on every token.
    pub fn tag(&self, tokens: &mut [Token]) -> Result<()> {
        let words: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
        let tags = self.tag_words(&words)?;
        for (t, tag) in tokens.iter_mut().zip(tags) {
            t.pos = Some(tag);
        }
        Ok(())
    }

    /// Token accuracy over gold sentences.
    pub fn accuracy(&self, gold: &[&TaggedSentence]) -> f64 {
        let (mut right, mut total) = (0usize, 0usize);
        for sent in gold {
            let words: Vec<&str> = sent.iter().map(|(w, _)| w.as_str()).collect();
            let predicted = self.tag_words(&words).expect("trained model");
            right += predicted.iter().zip(sent.iter()).filter(|(p, (_, g))| *p == g).count();
            total += sent.len();
        }
        if total == 0 {
            0.0
        } else {
            right as f64 / total as f64
        }
    }

    /// Serializes to the flat, line-oriented model format.
    pub fn to_model_string(&self) -> Result<String> {
        let default = self
            .default_tag
            .ok_or_else(|| Error::Model("tagger has not been trained".into()))?;
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "epochs\t{}", self.epochs).unwrap();
        writeln!(out, "default\t{default}").unwrap();
        let mut mft: Vec<_> = self.most_frequent.iter().collect();
        mft.sort();
        for (w, t) in mft {
            writeln!(out, "mft\t{w}\t{t}").unwrap();
        }
        let mut dict: Vec<_> = self.tagdict.iter().collect();
        dict.sort();
        for (w, t) in dict {
            writeln!(out, "dict\t{w}\t{t}").unwrap();
        }
        let mut feats: Vec<_> = self.weights.keys().collect();
        feats.sort();
        for f in feats {
            for (c, &v) in self.weights[f].iter().enumerate() {
                if v != 0.0 {
                    writeln!(out, "w\t{f}\t{}\t{v}", PosTag::ALL[c]).unwrap();
                }
            }
        }
        Ok(out)
    }

    pub fn from_model_string(input: &str) -> Result<Tagger> {
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == HEADER => {}
            _ => return Err(Error::Model(format!("missing `{HEADER}` header"))),
        }
        let mut model = Tagger::default();
        for (n, line) in lines {
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = || Error::line(n + 1, format!("malformed tagger line `{line}`"));
            let tag_at = |i: usize| -> Result<PosTag> { cols.get(i).ok_or_else(bad)?.parse() };
            match cols[0] {
                "epochs" => model.epochs = cols.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?,
                "default" => model.default_tag = Some(tag_at(1)?),
                "mft" | "dict" if cols.len() == 3 => {
                    let map = if cols[0] == "mft" { &mut model.most_frequent } else { &mut model.tagdict };
                    map.insert(cols[1].to_string(), tag_at(2)?);
                }
                "w" if cols.len() == 4 => {
                    let v: f64 = cols[3].parse().map_err(|_| bad())?;
                    let c = tag_at(2)?.index();
                    model
                        .weights
                        .entry(cols[1].to_string())
                        .or_insert_with(|| vec![0.0; N_TAGS])[c] = v;
                }
                "" => {}
                _ => return Err(bad()),
            }
        }
        if model.default_tag.is_none() {
            return Err(Error::Model("tagger file has no default tag".into()));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PosTag::*;

    fn tiny_corpus() -> Vec<TaggedSentence> {
        let lines = "Poe/NNP was/VBD born/VBN in/IN Boston/NNP ./.\n\
                     The/DT poet/NN was/VBD born/VBN in/IN Richmond/NNP ./.\n\
                     Smith/NNP was/VBD elected/VBN in/IN Denver/NNP ./.\n\
                     the/DT river/NN runs/VBZ through/IN the/DT city/NN ./.\n\
                     Chen/NNP moved/VBD to/TO Paris/NNP ./.";
        parse_gold_corpus(lines).unwrap()
    }

    #[test]
    fn gold_parsing() {
        let c = parse_gold_corpus("a/DT b/NN\n\n1/2/CD").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1], vec![("1/2".to_string(), CD)]);
        assert!(matches!(parse_gold_corpus("a/DT b"), Err(Error::Line { line: 1, .. })));
        assert!(parse_gold_corpus("a/QQ").is_err());
    }

    #[test]
    fn fits_tiny_fixture() {
        let corpus = tiny_corpus();
        let refs: Vec<&TaggedSentence> = corpus.iter().collect();
        let model = Tagger::fit(&refs, 8, 1);
        assert_eq!(model.tag_words(&["Poe", "was", "born", "in", "Boston"]).unwrap(), [NNP, VBD, VBN, IN, NNP]);
        assert_eq!(model.tag_words(&["the"]).unwrap(), [DT]);
        assert_eq!(model.tag_words(&["zzxzz"]).unwrap().len(), 1);
    }

    #[test]
    fn untrained_model_errors() {
        let mut toks = vec![Token::new("x", (0, 1))];
        assert!(Tagger::default().tag(&mut toks).is_err());
    }

    #[test]
    fn zero_epochs_is_most_frequent_tag() {
        let corpus = parse_gold_corpus("a/DT run/NN\nrun/VB a/DT run/NN\nx/NN").unwrap();
        let refs: Vec<&TaggedSentence> = corpus.iter().collect();
        let model = Tagger::fit(&refs, 0, 0);
        assert_eq!(model.tag_words(&["run", "a", "unknown"]).unwrap(), [NN, DT, NN]);
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(train_tagger(&[], &TaggerConfig::default()).is_err());
    }

    #[test]
    fn deterministic_and_persistent() {
        let corpus = tiny_corpus();
        let cfg = TaggerConfig { epochs: 4, seed: 9, heldout_fraction: 0.2 };
        let (a, acc_a) = train_tagger(&corpus, &cfg).unwrap();
        let (b, acc_b) = train_tagger(&corpus, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(acc_a, acc_b);
        let text = a.to_model_string().unwrap();
        assert_eq!(text, b.to_model_string().unwrap());
        let back = Tagger::from_model_string(&text).unwrap();
        assert_eq!(back, a);
        assert!(Tagger::from_model_string("nope").is_err());
    }
}

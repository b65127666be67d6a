//! Relational fact extraction over POS tags and factual density.
//!
//! A relation phrase is a maximal match of `V | V P | V W* P` where
//! `V = verb+ particle? adverb?`, `W` is a noun, adjective, adverb,
//! pronoun or determiner and `P` a preposition, particle or infinitival
//! `to`. Adjacent matches merge. The first argument is the nearest noun
//! phrase chunk to the left of the relation, the second the nearest to
//! the right. A corpus-wide lexical constraint then drops relations seen
//! with too few distinct argument pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::text::{AnalyzedSentence, ChunkKind, PosTag, Token};

/// A relational tuple. `token_ranges` are inclusive token indices within
/// the sentence; `spans` are byte ranges into the document text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub arg1: String,
    pub relation: String,
    pub arg2: String,
    pub sentence_index: usize,
    pub spans: [(usize, usize); 3],
    pub token_ranges: [(usize, usize); 3],
}

impl Fact {
    /// Normalized relation string used by the lexical constraint and as a
    /// classifier feature.
    pub fn normalized_relation(&self, tokens: &[Token]) -> String {
        let (a, b) = self.token_ranges[1];
        normalize_relation(&tokens[a..=b])
    }
}

fn is_verbal(t: PosTag) -> bool {
    t == PosTag::MD || t.is_verb()
}

fn is_w(t: PosTag) -> bool {
    t.is_noun() || t.is_adjective() || t.is_adverb() || t.is_pronoun() || t == PosTag::DT
}

fn is_p(t: PosTag) -> bool {
    matches!(t, PosTag::IN | PosTag::RP | PosTag::TO)
}

/// Relation phrase spans (inclusive token ranges) in a tag sequence.
pub fn relation_spans(tags: &[PosTag]) -> Vec<(usize, usize)> {
    let n = tags.len();
    let mut raw: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if !is_verbal(tags[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < n && is_verbal(tags[j]) {
            j += 1;
        }
        if j < n && tags[j] == PosTag::RP {
            j += 1;
        }
        if j < n && tags[j].is_adverb() {
            j += 1;
        }
        let mut end = j;
        let mut k = j;
        while k < n && is_w(tags[k]) {
            k += 1;
        }
        if k < n && is_p(tags[k]) {
            end = k + 1;
        }
        raw.push((i, end - 1));
        i = end;
    }
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(raw.len());
    for span in raw {
        match merged.last_mut() {
            Some(last) if last.1 + 1 == span.0 => last.1 = span.1,
            _ => merged.push(span),
        }
    }
    merged
}

const AUXILIARIES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "'s", "'re", "'m", "have", "has",
    "had", "having", "'ve", "'d", "do", "does", "did", "will", "would", "shall", "should", "can",
    "could", "may", "might", "must", "'ll", "ca", "wo",
];

fn stem(word: &str) -> String {
    let len = word.chars().count();
    if len > 4 && word.ends_with("ies") {
        format!("{}y", &word[..word.len() - 3])
    } else if len > 5 && word.ends_with("ing") {
        word[..word.len() - 3].to_string()
    } else if len > 4 && (word.ends_with("ed") || word.ends_with("es")) {
        word[..word.len() - 2].to_string()
    } else if (len > 4 && word.ends_with('e')) || (len > 3 && word.ends_with('s') && !word.ends_with("ss")) {
        word[..word.len() - 1].to_string()
    } else {
        word.to_string()
    }
}

/// Lowercases the phrase and suffix-strips every non-auxiliary verb.
pub fn normalize_relation(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| {
            let lower = t.surface.to_lowercase();
            if t.pos.is_some_and(PosTag::is_verb) && !AUXILIARIES.contains(&lower.as_str()) {
                stem(&lower)
            } else {
                lower
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// First extraction pass: every pattern-passing tuple of one sentence.
pub fn candidate_facts(sentence: &AnalyzedSentence, source: &str) -> Vec<Fact> {
    let tokens = sentence.tokens();
    let tags = sentence.tags();
    let nps: Vec<(usize, usize)> = sentence
        .chunks
        .iter()
        .filter(|c| c.kind == ChunkKind::Np)
        .map(|c| (c.first, c.last))
        .collect();
    let span_of = |(a, b): (usize, usize)| (tokens[a].span.0, tokens[b].span.1);
    let mut facts = Vec::new();
    for rel in relation_spans(&tags) {
        let left = nps.iter().rev().find(|np| np.1 < rel.0);
        let right = nps.iter().find(|np| np.0 > rel.1);
        if let (Some(&l), Some(&r)) = (left, right) {
            let spans = [span_of(l), span_of(rel), span_of(r)];
            facts.push(Fact {
                arg1: source[spans[0].0..spans[0].1].to_string(),
                relation: source[spans[1].0..spans[1].1].to_string(),
                arg2: source[spans[2].0..spans[2].1].to_string(),
                sentence_index: sentence.sentence.index,
                spans,
                token_ranges: [l, rel, r],
            });
        }
    }
    facts
}

/// Corpus-wide table of distinct argument pairs seen with each normalized relation.
#[derive(Debug, Clone, Default)]
pub struct RelationTable {
    pairs: BTreeMap<String, BTreeSet<(String, String)>>,
}

impl RelationTable {
    pub fn add(&mut self, normalized: &str, fact: &Fact) {
        self.pairs
            .entry(normalized.to_string())
            .or_default()
            .insert((fact.arg1.to_lowercase(), fact.arg2.to_lowercase()));
    }

    pub fn merge(&mut self, other: RelationTable) {
        for (rel, pairs) in other.pairs {
            self.pairs.entry(rel).or_default().extend(pairs);
        }
    }

    pub fn distinct_pairs(&self, normalized: &str) -> usize {
        self.pairs.get(normalized).map_or(0, BTreeSet::len)
    }
}

/// Keeps relations seen with at least `min_pairs` distinct argument pairs.
#[derive(Debug, Clone, Default)]
pub struct LexicalConstraint {
    pub table: RelationTable,
    pub min_pairs: usize,
}

impl LexicalConstraint {
    /// A constraint that accepts everything.
    pub fn none() -> Self {
        LexicalConstraint::default()
    }

    pub fn accepts(&self, normalized: &str) -> bool {
        self.min_pairs == 0 || self.table.distinct_pairs(normalized) >= self.min_pairs
    }
}

/// Extracts facts from one sentence and filters them through the constraint.
pub fn extract_relations(
    sentence: &AnalyzedSentence,
    source: &str,
    constraint: &LexicalConstraint,
) -> Vec<Fact> {
    candidate_facts(sentence, source)
        .into_iter()
        .filter(|f| constraint.accepts(&f.normalized_relation(sentence.tokens())))
        .collect()
}

/// A document's text with its analyzed sentences.
#[derive(Debug, Clone)]
pub struct AnalyzedDoc {
    pub doc_id: String,
    pub text: String,
    pub sentences: Vec<AnalyzedSentence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FactStats {
    pub word_count: usize,
    pub fact_count: usize,
    pub density: f64,
}

impl FactStats {
    pub fn new(word_count: usize, fact_count: usize) -> Self {
        FactStats {
            word_count,
            fact_count,
            density: fact_count as f64 / word_count.max(1) as f64,
        }
    }
}

/// Word count excludes punctuation-only tokens.
pub fn fact_stats(sentences: &[AnalyzedSentence], facts: &[Fact]) -> FactStats {
    let words = sentences
        .iter()
        .flat_map(|s| s.tokens())
        .filter(|t| !t.is_punct())
        .count();
    FactStats::new(words, facts.len())
}

/// Facts of one document after both passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocFacts {
    pub doc_id: String,
    pub facts: Vec<Fact>,
    /// Normalized relation of each fact, parallel to `facts`.
    pub relations: Vec<String>,
    pub stats: FactStats,
}

/// Runs both extraction passes over a collection.
pub fn extract_corpus(docs: &[AnalyzedDoc], min_pairs: usize) -> Vec<DocFacts> {
    use rayon::prelude::*;

    let first_pass: Vec<Vec<(Fact, String)>> = docs
        .par_iter()
        .map(|d| {
            d.sentences
                .iter()
                .flat_map(|s| {
                    candidate_facts(s, &d.text)
                        .into_iter()
                        .map(|f| {
                            let n = f.normalized_relation(s.tokens());
                            (f, n)
                        })
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let mut table = RelationTable::default();
    for (f, n) in first_pass.iter().flatten() {
        table.add(n, f);
    }
    let constraint = LexicalConstraint { table, min_pairs };
    docs.iter()
        .zip(first_pass)
        .map(|(d, candidates)| {
            let (facts, relations): (Vec<Fact>, Vec<String>) = candidates
                .into_iter()
                .filter(|(_, n)| constraint.accepts(n))
                .unzip();
            let stats = fact_stats(&d.sentences, &facts);
            DocFacts {
                doc_id: d.doc_id.clone(),
                facts,
                relations,
                stats,
            }
        })
        .collect()
}

fn clean(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `doc_id<TAB>arg1<TAB>relation<TAB>arg2` lines.
pub fn facts_tsv(docs: &[DocFacts]) -> String {
    let mut out = String::new();
    for d in docs {
        for f in &d.facts {
            writeln!(out, "{}\t{}\t{}\t{}", d.doc_id, clean(&f.arg1), clean(&f.relation), clean(&f.arg2)).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::from_tagged;
    use PosTag::*;

    fn sent(words: &[(&str, PosTag)]) -> (String, AnalyzedSentence) {
        let owned: Vec<(String, PosTag)> = words.iter().map(|(w, t)| (w.to_string(), *t)).collect();
        from_tagged(&owned)
    }

    fn triples(words: &[(&str, PosTag)]) -> Vec<(String, String, String)> {
        let (text, s) = sent(words);
        candidate_facts(&s, &text)
            .into_iter()
            .map(|f| (f.arg1, f.relation, f.arg2))
            .collect()
    }

    fn t(a: &str, b: &str, c: &str) -> (String, String, String) {
        (a.into(), b.into(), c.into())
    }

    #[test]
    fn poe_example() {
        let words = [("Poe", NNP), ("was", VBD), ("born", VBN), ("in", IN), ("Boston", NNP)];
        assert_eq!(triples(&words), [t("Poe", "was born in", "Boston")]);
    }

    #[test]
    fn verbless_sentence() {
        assert!(triples(&[("Boston", NNP), (".", Period)]).is_empty());
    }

    #[test]
    fn w_star_p_and_merge() {
        let words = [("Smith", NNP), ("made", VBD), ("a", DT), ("deal", NN), ("with", IN), ("Jones", NNP)];
        assert_eq!(triples(&words), [t("Smith", "made a deal with", "Jones")]);
        let words = [("Chen", NNP), ("wanted", VBD), ("to", TO), ("visit", VB), ("Paris", NNP)];
        assert_eq!(triples(&words), [t("Chen", "wanted to visit", "Paris")]);
    }

    #[test]
    fn v_only_when_no_preposition_follows() {
        let words = [("Boston", NNP), ("is", VBZ), ("a", DT), ("large", JJ), ("city", NN), (".", Period)];
        assert_eq!(triples(&words), [t("Boston", "is", "a large city")]);
    }

    #[test]
    fn missing_argument_yields_nothing() {
        assert!(triples(&[("was", VBD), ("born", VBN), ("in", IN), ("Boston", NNP)]).is_empty());
        assert!(triples(&[("Poe", NNP), ("was", VBD), ("born", VBN)]).is_empty());
    }

    #[test]
    fn normalization_strips_suffixes_but_not_auxiliaries() {
        let (_, s) = sent(&[("was", VBD), ("Approved", VBN), ("by", IN)]);
        assert_eq!(normalize_relation(s.tokens()), "was approv by");
        let (_, s) = sent(&[("approves", VBZ)]);
        assert_eq!(normalize_relation(s.tokens()), "approv");
        let (_, s) = sent(&[("approving", VBG)]);
        assert_eq!(normalize_relation(s.tokens()), "approv");
    }

    #[test]
    fn lexical_constraint_filters() {
        let (text, s) = sent(&[("Poe", NNP), ("was", VBD), ("born", VBN), ("in", IN), ("Boston", NNP)]);
        let facts = candidate_facts(&s, &text);
        let mut table = RelationTable::default();
        table.add("was born in", &facts[0]);
        let one = LexicalConstraint { table: table.clone(), min_pairs: 1 };
        let two = LexicalConstraint { table, min_pairs: 2 };
        assert_eq!(extract_relations(&s, &text, &one).len(), 1);
        assert!(extract_relations(&s, &text, &two).is_empty());
    }

    #[test]
    fn stats() {
        assert_eq!(FactStats::new(50, 2).density, 0.04);
        assert_eq!(FactStats::new(0, 0).density, 0.0);
    }
}

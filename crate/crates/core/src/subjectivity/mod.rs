//! Sentence subjectivity and document objectivity.

mod bootstrap;
mod model;
mod patterns;

pub use bootstrap::{bootstrap, BootstrapConfig, BootstrapResult, Promotion};
pub use model::{
    sentence_features, train_objectivity_classifier, ObjectivityClassifier, ObjectivityConfig, ObjectivityModel,
};
pub use patterns::{
    learn_patterns, match_templates, parse_patterns, write_patterns, PatternInstance, PatternKey, PatternSet,
    PatternThresholds, RankedPattern, Template,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{AnalyzedSentence, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    StrongSubjective,
    WeakSubjective,
    Objective,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::StrongSubjective => "strong_subjective",
            Strength::WeakSubjective => "weak_subjective",
            Strength::Objective => "objective",
        }
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong_subjective" => Ok(Strength::StrongSubjective),
            "weak_subjective" => Ok(Strength::WeakSubjective),
            "objective" => Ok(Strength::Objective),
            other => Err(Error::invalid(format!("unknown strength `{other}`"))),
        }
    }
}

/// Lowercased terms with one strength each.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Strength>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<Strength> {
        self.entries.get(&term.to_lowercase()).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.get(term).is_some()
    }

    /// Inserts a term, returning the strength it replaced.
    pub fn insert(&mut self, term: &str, strength: Strength) -> Option<Strength> {
        self.entries.insert(term.to_lowercase(), strength)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Strength)> {
        self.entries.iter().map(|(t, s)| (t.as_str(), *s))
    }

    /// Adds annotated terms; an annotation overrides an existing entry.
    pub fn merge(&mut self, additions: &[(String, Strength)]) -> usize {
        let mut added = 0;
        for (term, strength) in additions {
            match self.insert(term, *strength) {
                None => added += 1,
                Some(old) if old != *strength => {
                    log::warn!("annotation changes `{term}` from {old} to {strength}");
                }
                Some(_) => {}
            }
        }
        added
    }
}

/// Reads `term<TAB>strength` lines. Blank lines and `#` comments are skipped.
pub fn parse_lexicon(input: &str) -> Result<Lexicon> {
    let mut lexicon = Lexicon::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [term, strength] = cols[..] else {
            return Err(Error::line(n + 1, format!("expected 2 columns, found {}", cols.len())));
        };
        let strength: Strength = strength.parse().map_err(|e: Error| Error::line(n + 1, e.to_string()))?;
        if let Some(old) = lexicon.insert(term, strength) {
            if old != strength {
                return Err(Error::line(n + 1, format!("`{term}` listed as both {old} and {strength}")));
            }
        }
    }
    Ok(lexicon)
}

pub fn write_lexicon(lexicon: &Lexicon) -> String {
    lexicon.iter().map(|(t, s)| format!("{t}\t{s}\n")).collect()
}

/// Candidate file for human annotation: one term per row, label left blank.
pub fn write_candidates<S: AsRef<str>>(terms: &[S]) -> String {
    terms.iter().map(|t| format!("{}\t\n", t.as_ref())).collect()
}

/// Reads an annotated candidate file. Rows without a label are skipped.
pub fn parse_annotations(input: &str) -> Result<Vec<(String, Strength)>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        match cols[..] {
            [] => {}
            [term] => log::warn!("row {}: `{term}` has no label, skipped", n + 1),
            [term, label] => {
                let strength = label
                    .parse()
                    .map_err(|_| Error::line(n + 1, format!("unknown label `{label}` for `{term}`")))?;
                out.push((term.to_lowercase(), strength));
            }
            _ => return Err(Error::line(n + 1, format!("expected at most 2 columns, found {}", cols.len()))),
        }
    }
    Ok(out)
}

/// Merges a human-edited candidate file into the lexicon.
pub fn annotate_roundtrip(annotated: &str, lexicon: &mut Lexicon) -> Result<Vec<(String, Strength)>> {
    let additions = parse_annotations(annotated)?;
    lexicon.merge(&additions);
    Ok(additions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceLabel {
    Subjective,
    Objective,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TermCounts {
    pub strong: usize,
    pub weak: usize,
    pub objective: usize,
}

pub fn term_counts(tokens: &[Token], lexicon: &Lexicon) -> TermCounts {
    let mut counts = TermCounts::default();
    for tok in tokens {
        match lexicon.get(&tok.surface) {
            Some(Strength::StrongSubjective) => counts.strong += 1,
            Some(Strength::WeakSubjective) => counts.weak += 1,
            Some(Strength::Objective) => counts.objective += 1,
            None => {}
        }
    }
    counts
}

/// Subjective with two or more strong terms; objective with no strong
/// terms and at most two weak ones.
pub fn label_from_counts(strong: usize, weak: usize) -> SentenceLabel {
    if strong >= 2 {
        SentenceLabel::Subjective
    } else if strong == 0 && weak <= 2 {
        SentenceLabel::Objective
    } else {
        SentenceLabel::Unknown
    }
}

pub fn classify_sentence(tokens: &[Token], lexicon: &Lexicon) -> SentenceLabel {
    let c = term_counts(tokens, lexicon);
    label_from_counts(c.strong, c.weak)
}

/// Decides whether a sentence is objective.
pub trait SentenceClassifier {
    fn is_objective(&self, sentence: &AnalyzedSentence) -> bool;
}

/// The lexicon rule used directly; unknown sentences are not objective.
pub struct RuleClassifier<'a>(pub &'a Lexicon);

impl SentenceClassifier for RuleClassifier<'_> {
    fn is_objective(&self, sentence: &AnalyzedSentence) -> bool {
        classify_sentence(sentence.tokens(), self.0) == SentenceLabel::Objective
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocObjectivity {
    pub p_obj: f64,
    pub objective: usize,
    pub sentences: usize,
    pub degenerate: bool,
}

/// Fraction of a document's sentences classified objective.
pub fn doc_objectivity(sentences: &[AnalyzedSentence], classifier: &dyn SentenceClassifier) -> DocObjectivity {
    let objective = sentences.iter().filter(|s| classifier.is_objective(s)).count();
    let n = sentences.len();
    DocObjectivity {
        p_obj: if n == 0 { 0.0 } else { objective as f64 / n as f64 },
        objective,
        sentences: n,
        degenerate: n == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    fn lexicon() -> Lexicon {
        parse_lexicon("outrage\tstrong_subjective\ndisgust\tstrong_subjective\nnice\tweak_subjective\ntable\tobjective\n")
            .unwrap()
    }

    #[test]
    fn rule_table() {
        let lx = lexicon();
        assert_eq!(classify_sentence(&tokenize("Outrage and disgust ."), &lx), SentenceLabel::Subjective);
        assert_eq!(classify_sentence(&tokenize("A nice table ."), &lx), SentenceLabel::Objective);
        assert_eq!(classify_sentence(&tokenize("Pure outrage ."), &lx), SentenceLabel::Unknown);
        assert_eq!(label_from_counts(0, 3), SentenceLabel::Unknown);
        assert_eq!(label_from_counts(0, 2), SentenceLabel::Objective);
    }

    #[test]
    fn lexicon_errors() {
        assert!(parse_lexicon("a\tbogus\n").is_err());
        assert!(parse_lexicon("a\tobjective\nA\tweak_subjective\n").is_err());
        assert!(parse_lexicon("a objective extra\n").is_err());
        let lx = lexicon();
        assert_eq!(parse_lexicon(&write_lexicon(&lx)).unwrap(), lx);
    }

    #[test]
    fn annotations() {
        let mut lx = Lexicon::new();
        let added = annotate_roundtrip("outrage\tstrong_subjective\ntable objective\nblank\t\n", &mut lx).unwrap();
        assert_eq!(added.len(), 2);
        assert_eq!(lx.get("table"), Some(Strength::Objective));
        assert!(!lx.contains("blank"));
        match parse_annotations("ok\tobjective\nfoo bogus\n") {
            Err(Error::Line { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(write_candidates(&["x", "y"]), "x\t\ny\t\n");
    }

    #[test]
    fn objectivity_ratio() {
        use crate::text::{from_tagged, PosTag};
        let lx = lexicon();
        let mk = |w: &str| from_tagged(&[(w.to_string(), PosTag::NN)]).1;
        let docs = vec![mk("table"), mk("table"), mk("table"), {
            let (_, s) = from_tagged(&[("outrage".into(), PosTag::NN), ("disgust".into(), PosTag::NN)]);
            s
        }];
        let r = doc_objectivity(&docs, &RuleClassifier(&lx));
        assert_eq!(r.p_obj, 0.75);
        assert_eq!(doc_objectivity(&docs[..3], &RuleClassifier(&lx)).p_obj, 1.0);
        let empty = doc_objectivity(&[], &RuleClassifier(&lx));
        assert!(empty.degenerate);
        assert_eq!(empty.p_obj, 0.0);
    }

    proptest! {
        #[test]
        fn rules_exclusive_and_order_free(words in proptest::collection::vec(0usize..5, 0..12), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let vocab = ["outrage", "disgust", "nice", "table", "plain"];
            let text: Vec<&str> = words.iter().map(|&i| vocab[i]).collect();
            let lx = lexicon();
            let label = classify_sentence(&tokenize(&text.join(" ")), &lx);
            let c = term_counts(&tokenize(&text.join(" ")), &lx);
            prop_assert!(!(c.strong >= 2 && c.strong == 0 && c.weak <= 2));
            let mut shuffled = text.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(classify_sentence(&tokenize(&shuffled.join(" ")), &lx), label);
        }
    }
}

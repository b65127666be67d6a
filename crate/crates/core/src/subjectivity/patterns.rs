//! Syntactic extraction-pattern templates over chunked sentences.
//!
//! Roles are shallow: the subject is the NP right before a VP, the direct
//! object is the NP right after it, a passive VP is a be-form followed by a
//! past participle, and an infinitive is a base-form VP right after `to`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SentenceLabel;
use crate::error::{Error, Result};
use crate::text::{AnalyzedSentence, Chunk, ChunkKind, PosTag, Token};

macro_rules! templates {
    ($($variant:ident => $id:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Template {
            $($variant,)*
        }

        impl Template {
            pub const ALL: [Template; 13] = [$(Template::$variant,)*];

            pub fn id(self) -> &'static str {
                match self {
                    $(Template::$variant => $id,)*
                }
            }
        }

        impl FromStr for Template {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($id => Ok(Template::$variant),)*
                    other => Err(Error::invalid(format!("unknown template `{other}`"))),
                }
            }
        }
    };
}

templates! {
    SubjPassiveVerb => "subj_passive_verb",
    SubjActiveVerb => "subj_active_verb",
    SubjActiveVerbDobj => "subj_active_verb_dobj",
    SubjVerbInfinitive => "subj_verb_infinitive",
    SubjAuxNoun => "subj_aux_noun",
    ActiveVerbDobj => "active_verb_dobj",
    InfinitiveDobj => "infinitive_dobj",
    VerbInfinitiveDobj => "verb_infinitive_dobj",
    NounAuxDobj => "noun_aux_dobj",
    NounPrepNp => "noun_prep_np",
    ActiveVerbPrepNp => "active_verb_prep_np",
    PassiveVerbPrepNp => "passive_verb_prep_np",
    InfinitivePrepNp => "infinitive_prep_np",
}

impl Template {
    /// Which slot the template extracts.
    pub fn slot(self) -> &'static str {
        use Template::*;
        match self {
            SubjPassiveVerb | SubjActiveVerb | SubjActiveVerbDobj | SubjVerbInfinitive | SubjAuxNoun => "subj",
            ActiveVerbDobj | InfinitiveDobj | VerbInfinitiveDobj | NounAuxDobj => "dobj",
            NounPrepNp | ActiveVerbPrepNp | PassiveVerbPrepNp | InfinitivePrepNp => "np",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A lexicalized template.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternKey {
    pub template: Template,
    pub anchor: String,
}

impl PatternKey {
    pub fn new(template: Template, anchor: impl Into<String>) -> Self {
        PatternKey { template, anchor: anchor.into() }
    }
}

impl fmt::Display for PatternKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = self.template.slot();
        let infinitive = matches!(self.template, Template::InfinitiveDobj | Template::InfinitivePrepNp);
        let lead = if infinitive { "to " } else { "" };
        if slot == "subj" {
            write!(f, "[subj] {}", self.anchor)
        } else {
            write!(f, "{lead}{} [{slot}]", self.anchor)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternInstance {
    pub key: PatternKey,
    /// Lowercased text of the extracted noun phrase.
    pub extracted: String,
    /// Lowercased head noun of the extraction, absent for pronouns.
    pub head: Option<String>,
}

const BE: [&str; 8] = ["be", "am", "is", "are", "was", "were", "been", "being"];
const AUX: [&str; 8] = ["has", "have", "had", "having", "do", "does", "did", "'s"];

fn lower(tok: &Token) -> String {
    tok.surface.to_lowercase()
}

fn is_aux_token(tok: &Token) -> bool {
    let w = tok.surface.to_lowercase();
    tok.tag() == PosTag::MD || BE.contains(&w.as_str()) || AUX.contains(&w.as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Voice {
    Passive,
    Active,
    AuxOnly,
}

struct Vp {
    chunk: usize,
    voice: Voice,
    infinitive: bool,
    main: String,
}

fn vp_info(tokens: &[Token], chunks: &[Chunk], c: usize) -> Vp {
    let ch = chunks[c];
    let words = &tokens[ch.first..=ch.last];
    let last = &words[words.len() - 1];
    let voice = if words.iter().all(is_aux_token) {
        Voice::AuxOnly
    } else if last.tag() == PosTag::VBN
        && words[..words.len() - 1]
            .iter()
            .any(|t| BE.contains(&t.surface.to_lowercase().as_str()))
    {
        Voice::Passive
    } else {
        Voice::Active
    };
    let infinitive = ch.first > 0 && tokens[ch.first - 1].tag() == PosTag::TO && tokens[ch.first].tag() == PosTag::VB;
    Vp { chunk: c, voice, infinitive, main: lower(last) }
}

fn np_text(tokens: &[Token], ch: Chunk) -> String {
    tokens[ch.first..=ch.last].iter().map(lower).collect::<Vec<_>>().join(" ")
}

fn np_head(tokens: &[Token], ch: Chunk) -> Option<String> {
    let last = &tokens[ch.last];
    last.tag().is_noun().then(|| lower(last))
}

/// Index of the single-preposition chunk at `c`, if it is one.
fn prep_at(tokens: &[Token], chunks: &[Chunk], c: usize) -> Option<String> {
    let ch = chunks.get(c)?;
    (ch.kind == ChunkKind::Other && ch.len() == 1 && matches!(tokens[ch.first].tag(), PosTag::IN | PosTag::TO))
        .then(|| lower(&tokens[ch.first]))
}

fn is_np(chunks: &[Chunk], c: usize) -> bool {
    chunks.get(c).is_some_and(|ch| ch.kind == ChunkKind::Np)
}

/// Instantiates every template that matches the sentence.
pub fn match_templates(sentence: &AnalyzedSentence) -> Vec<PatternInstance> {
    let tokens = sentence.tokens();
    let chunks = &sentence.chunks;
    let mut out = Vec::new();
    let mut emit = |template: Template, anchor: String, np: Chunk| {
        out.push(PatternInstance {
            key: PatternKey::new(template, anchor),
            extracted: np_text(tokens, np),
            head: np_head(tokens, np),
        });
    };
    let vps: Vec<Vp> = (0..chunks.len())
        .filter(|&c| chunks[c].kind == ChunkKind::Vp)
        .map(|c| vp_info(tokens, chunks, c))
        .collect();
    let vp_at = |c: usize| vps.iter().find(|v| v.chunk == c);
    for vp in &vps {
        let c = vp.chunk;
        let subj = (c > 0 && is_np(chunks, c - 1)).then(|| chunks[c - 1]);
        let dobj = is_np(chunks, c + 1).then(|| chunks[c + 1]);
        // `to` followed by an infinitive VP right after this one.
        let inf = prep_at(tokens, chunks, c + 1)
            .filter(|p| p == "to")
            .and_then(|_| vp_at(c + 2))
            .filter(|v| v.infinitive);
        let prep = prep_at(tokens, chunks, c + 1).filter(|_| is_np(chunks, c + 2));

        if let Some(s) = subj {
            match vp.voice {
                Voice::Passive => emit(Template::SubjPassiveVerb, vp.main.clone(), s),
                Voice::Active => {
                    emit(Template::SubjActiveVerb, vp.main.clone(), s);
                    if let Some(d) = dobj {
                        if let Some(h) = np_head(tokens, d) {
                            emit(Template::SubjActiveVerbDobj, format!("{} {h}", vp.main), s);
                        }
                    }
                }
                Voice::AuxOnly => {
                    if let Some(d) = dobj {
                        if let Some(h) = np_head(tokens, d) {
                            emit(Template::SubjAuxNoun, format!("{} {h}", vp.main), s);
                        }
                        if let Some(h) = np_head(tokens, s) {
                            emit(Template::NounAuxDobj, format!("{h} {}", vp.main), d);
                        }
                    }
                }
            }
            if let Some(i) = inf {
                if vp.voice != Voice::AuxOnly {
                    emit(Template::SubjVerbInfinitive, format!("{} to {}", vp.main, i.main), s);
                }
            }
        }
        if let Some(d) = dobj {
            if vp.infinitive {
                emit(Template::InfinitiveDobj, vp.main.clone(), d);
            } else if vp.voice == Voice::Active {
                emit(Template::ActiveVerbDobj, vp.main.clone(), d);
            }
        }
        if let Some(i) = inf {
            if !vp.infinitive && vp.voice != Voice::AuxOnly && is_np(chunks, i.chunk + 1) {
                emit(
                    Template::VerbInfinitiveDobj,
                    format!("{} to {}", vp.main, i.main),
                    chunks[i.chunk + 1],
                );
            }
        }
        if let Some(p) = prep {
            let np = chunks[c + 2];
            let template = if vp.infinitive {
                Some(Template::InfinitivePrepNp)
            } else {
                match vp.voice {
                    Voice::Passive => Some(Template::PassiveVerbPrepNp),
                    Voice::Active => Some(Template::ActiveVerbPrepNp),
                    Voice::AuxOnly => None,
                }
            };
            if let Some(t) = template {
                emit(t, format!("{} {p}", vp.main), np);
            }
        }
    }
    for c in 0..chunks.len() {
        if is_np(chunks, c) && is_np(chunks, c + 2) {
            if let (Some(h), Some(p)) = (np_head(tokens, chunks[c]), prep_at(tokens, chunks, c + 1)) {
                emit(Template::NounPrepNp, format!("{h} {p}"), chunks[c + 2]);
            }
        }
    }
    out.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.extracted.cmp(&b.extracted)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPattern {
    pub key: PatternKey,
    pub freq: usize,
    pub p_subjective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternThresholds {
    pub min_freq: usize,
    pub min_prob: f64,
}

impl Default for PatternThresholds {
    fn default() -> Self {
        PatternThresholds { min_freq: 5, min_prob: 0.95 }
    }
}

/// Retained subjective and objective patterns, each sorted by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatternSet {
    pub subjective: Vec<RankedPattern>,
    pub objective: Vec<RankedPattern>,
}

impl PatternSet {
    pub fn is_subjective(&self, key: &PatternKey) -> bool {
        self.subjective.binary_search_by(|p| p.key.cmp(key)).is_ok()
    }

    pub fn is_objective(&self, key: &PatternKey) -> bool {
        self.objective.binary_search_by(|p| p.key.cmp(key)).is_ok()
    }

    /// Distinct subjective and objective patterns occurring in `instances`.
    pub fn count_matches(&self, instances: &[PatternInstance]) -> (usize, usize) {
        let keys: BTreeSet<&PatternKey> = instances.iter().map(|i| &i.key).collect();
        let subj = keys.iter().filter(|k| self.is_subjective(k)).count();
        let obj = keys.iter().filter(|k| self.is_objective(k)).count();
        (subj, obj)
    }
}

/// Counts every pattern over the labeled sentences and keeps those that are
/// frequent and strongly associated with one class. A pattern counts once
/// per sentence; unknown sentences are ignored.
pub fn learn_patterns(labeled: &[(Vec<PatternInstance>, SentenceLabel)], thresholds: &PatternThresholds) -> PatternSet {
    let mut counts: BTreeMap<&PatternKey, (usize, usize)> = BTreeMap::new();
    for (instances, label) in labeled {
        let subjective = match label {
            SentenceLabel::Subjective => true,
            SentenceLabel::Objective => false,
            SentenceLabel::Unknown => continue,
        };
        let keys: BTreeSet<&PatternKey> = instances.iter().map(|i| &i.key).collect();
        for key in keys {
            let e = counts.entry(key).or_default();
            e.0 += 1;
            e.1 += subjective as usize;
        }
    }
    let mut set = PatternSet::default();
    for (key, (freq, subj)) in counts {
        if freq < thresholds.min_freq {
            continue;
        }
        let p = subj as f64 / freq as f64;
        let ranked = RankedPattern { key: key.clone(), freq, p_subjective: p };
        if p >= thresholds.min_prob {
            set.subjective.push(ranked);
        } else if p <= 1.0 - thresholds.min_prob {
            set.objective.push(ranked);
        }
    }
    set
}

/// `template_id<TAB>anchor<TAB>freq<TAB>p_subjective`, subjective first.
pub fn write_patterns(set: &PatternSet) -> String {
    set.subjective
        .iter()
        .chain(&set.objective)
        .map(|p| format!("{}\t{}\t{}\t{}\n", p.key.template, p.key.anchor, p.freq, p.p_subjective))
        .collect()
}

/// Reads a pattern file; a pattern is subjective when `p_subjective > 0.5`.
pub fn parse_patterns(input: &str) -> Result<PatternSet> {
    let mut set = PatternSet::default();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [template, anchor, freq, p] = cols[..] else {
            return Err(Error::line(n + 1, format!("expected 4 columns, found {}", cols.len())));
        };
        let template: Template = template.parse().map_err(|e: Error| Error::line(n + 1, e.to_string()))?;
        if anchor.is_empty() {
            return Err(Error::line(n + 1, "empty anchor"));
        }
        let freq: usize = freq
            .parse()
            .ok()
            .filter(|&f| f >= 1)
            .ok_or_else(|| Error::line(n + 1, format!("bad frequency `{freq}`")))?;
        let p: f64 = p
            .parse()
            .ok()
            .filter(|p| (0.0..=1.0).contains(p))
            .ok_or_else(|| Error::line(n + 1, format!("bad probability `{p}`")))?;
        let ranked = RankedPattern { key: PatternKey::new(template, anchor), freq, p_subjective: p };
        if p > 0.5 {
            set.subjective.push(ranked);
        } else {
            set.objective.push(ranked);
        }
    }
    set.subjective.sort_by(|a, b| a.key.cmp(&b.key));
    set.objective.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::from_tagged;
    use PosTag::*;

    fn sent(words: &[(&str, PosTag)]) -> AnalyzedSentence {
        from_tagged(&words.iter().map(|(w, t)| (w.to_string(), *t)).collect::<Vec<_>>()).1
    }

    fn keys(s: &AnalyzedSentence) -> Vec<(String, String, String)> {
        match_templates(s)
            .into_iter()
            .map(|i| (i.key.template.id().to_string(), i.key.anchor, i.extracted))
            .collect()
    }

    fn has(s: &AnalyzedSentence, t: &str, anchor: &str, extracted: &str) -> bool {
        keys(s).contains(&(t.to_string(), anchor.to_string(), extracted.to_string()))
    }

    #[test]
    fn subject_active_verb() {
        let s = sent(&[("the", DT), ("senator", NN), ("complained", VBD)]);
        assert!(has(&s, "subj_active_verb", "complained", "the senator"));
        let inst = &match_templates(&s)[0];
        assert_eq!(inst.key.to_string(), "[subj] complained");
        assert_eq!(inst.head.as_deref(), Some("senator"));
    }

    #[test]
    fn infinitive_object() {
        let s = sent(&[("they", PRP), ("decided", VBD), ("to", TO), ("condemn", VB), ("the", DT), ("plan", NN)]);
        assert!(has(&s, "infinitive_dobj", "condemn", "the plan"));
        assert!(has(&s, "verb_infinitive_dobj", "decided to condemn", "the plan"));
        assert!(has(&s, "subj_verb_infinitive", "decided to condemn", "they"));
        assert!(!has(&s, "active_verb_dobj", "condemn", "the plan"));
        let k = PatternKey::new(Template::InfinitiveDobj, "condemn");
        assert_eq!(k.to_string(), "to condemn [dobj]");
    }

    #[test]
    fn verbless() {
        assert!(match_templates(&sent(&[("Boston", NNP), (".", Period)])).is_empty());
    }

    #[test]
    fn passive_and_prepositions() {
        let s = sent(&[("Poe", NNP), ("was", VBD), ("born", VBN), ("in", IN), ("Boston", NNP)]);
        assert!(has(&s, "subj_passive_verb", "born", "poe"));
        assert!(has(&s, "passive_verb_prep_np", "born in", "boston"));
        let s = sent(&[("the", DT), ("fact", NN), ("is", VBZ), ("a", DT), ("lie", NN)]);
        assert!(has(&s, "subj_aux_noun", "is lie", "the fact"));
        assert!(has(&s, "noun_aux_dobj", "fact is", "a lie"));
        let s = sent(&[("his", PRPS), ("opinion", NN), ("on", IN), ("taxes", NNS)]);
        assert!(has(&s, "noun_prep_np", "opinion on", "taxes"));
        let s = sent(&[("we", PRP), ("agree", VBP), ("with", IN), ("critics", NNS)]);
        assert!(has(&s, "active_verb_prep_np", "agree with", "critics"));
        let s = sent(&[("to", TO), ("resort", VB), ("to", TO), ("force", NN)]);
        assert!(has(&s, "infinitive_prep_np", "resort to", "force"));
        let s = sent(&[("she", PRP), ("endorsed", VBD), ("the", DT), ("bill", NN)]);
        assert!(has(&s, "subj_active_verb_dobj", "endorsed bill", "she"));
        assert!(has(&s, "active_verb_dobj", "endorsed", "the bill"));
    }

    #[test]
    fn every_template_reachable() {
        let sentences = [
            sent(&[("Poe", NNP), ("was", VBD), ("born", VBN), ("in", IN), ("Boston", NNP)]),
            sent(&[("the", DT), ("fact", NN), ("is", VBZ), ("a", DT), ("lie", NN)]),
            sent(&[("his", PRPS), ("opinion", NN), ("on", IN), ("taxes", NNS)]),
            sent(&[("we", PRP), ("agree", VBP), ("with", IN), ("critics", NNS)]),
            sent(&[("to", TO), ("resort", VB), ("to", TO), ("force", NN)]),
            sent(&[("she", PRP), ("endorsed", VBD), ("the", DT), ("bill", NN)]),
            sent(&[("they", PRP), ("decided", VBD), ("to", TO), ("condemn", VB), ("the", DT), ("plan", NN)]),
        ];
        let seen: BTreeSet<Template> =
            sentences.iter().flat_map(match_templates).map(|i| i.key.template).collect();
        assert_eq!(seen.len(), 13);
    }

    fn inst(template: Template, anchor: &str) -> PatternInstance {
        PatternInstance { key: PatternKey::new(template, anchor), extracted: "x".into(), head: None }
    }

    #[test]
    fn thresholds() {
        let mut labeled = Vec::new();
        for _ in 0..10 {
            labeled.push((vec![inst(Template::SubjActiveVerb, "complained")], SentenceLabel::Subjective));
        }
        for _ in 0..4 {
            labeled.push((vec![inst(Template::ActiveVerbDobj, "rare")], SentenceLabel::Objective));
        }
        for _ in 0..6 {
            labeled.push((vec![inst(Template::NounPrepNp, "table of")], SentenceLabel::Objective));
        }
        labeled.push((vec![inst(Template::NounPrepNp, "table of")], SentenceLabel::Unknown));
        let set = learn_patterns(&labeled, &PatternThresholds::default());
        assert_eq!(set.subjective.len(), 1);
        assert_eq!(set.subjective[0].p_subjective, 1.0);
        assert_eq!(set.subjective[0].freq, 10);
        assert_eq!(set.objective.len(), 1);
        assert_eq!(set.objective[0].key.anchor, "table of");
        assert_eq!(parse_patterns(&write_patterns(&set)).unwrap(), set);
        assert!(parse_patterns("bogus\ta\t1\t0.5\n").is_err());
    }
}

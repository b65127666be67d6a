use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use factir_core::facts::{extract_corpus, AnalyzedDoc};
use factir_core::factuality::{train, FactSummary, TrainConfig};
use factir_core::subjectivity::{parse_lexicon, sentence_features, train_objectivity_classifier, ObjectivityConfig, PatternSet};
use factir_core::text::{analyze, from_tagged, parse_gold_corpus, train_tagger, TaggerConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(rel: &str) -> String {
    fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)).unwrap()
}

fn shuffled(labels: &[bool], seed: u64) -> Vec<bool> {
    let mut out = labels.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

#[test]
fn factuality_separates_labeled_fixture() {
    let (tagger, _) = train_tagger(&parse_gold_corpus(&fixture("tagger/gold.txt")).unwrap(), &TaggerConfig::default()).unwrap();
    let labeled = factir_core::corpus::read_labeled_docs(BufReader::new(fixture("factuality/labeled.jsonl").as_bytes())).unwrap();
    let docs: Vec<AnalyzedDoc> = labeled
        .iter()
        .map(|l| AnalyzedDoc {
            doc_id: l.doc.doc_id.clone(),
            text: l.doc.text.clone(),
            sentences: analyze(&l.doc.doc_id, &l.doc.text, &tagger).unwrap(),
        })
        .collect();
    let summaries: Vec<FactSummary> = extract_corpus(&docs, 1).iter().map(FactSummary::from).collect();
    let labels: Vec<bool> = labeled.iter().map(|l| l.label.is_positive()).collect();
    for (s, &y) in summaries.iter().zip(&labels) {
        if y {
            assert!(s.density >= 0.05, "positive density {}", s.density);
        } else {
            assert!(s.density <= 0.01, "negative density {}", s.density);
        }
    }
    let model = train(&summaries, &labels, &TrainConfig::default()).unwrap();
    assert!(model.meta.cv_accuracy >= 0.95, "cv accuracy {}", model.meta.cv_accuracy);
    let noise = train(&summaries, &shuffled(&labels, 3), &TrainConfig::default()).unwrap();
    assert!((0.4..=0.6).contains(&noise.meta.cv_accuracy), "shuffled accuracy {}", noise.meta.cv_accuracy);
}

#[test]
fn objectivity_separates_strong_count_fixture() {
    let lexicon = parse_lexicon(&fixture("subjectivity/lexicon.tsv")).unwrap();
    let patterns = PatternSet::default();
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    for line in fixture("subjectivity/sentences.tsv").lines() {
        let (label, tagged) = line.split_once('\t').unwrap();
        let words = &parse_gold_corpus(tagged).unwrap()[0];
        let (_, sentence) = from_tagged(words);
        rows.push(sentence_features(&sentence, &lexicon, &patterns));
        labels.push(label == "objective");
    }
    assert_eq!(rows.len(), 200);
    let model = train_objectivity_classifier(&rows, &labels, &ObjectivityConfig::default()).unwrap();
    assert!(model.cv_accuracy >= 0.95, "cv accuracy {}", model.cv_accuracy);
    let noise = train_objectivity_classifier(&rows, &shuffled(&labels, 3), &ObjectivityConfig::default()).unwrap();
    assert!((0.4..=0.6).contains(&noise.cv_accuracy), "shuffled accuracy {}", noise.cv_accuracy);
}

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use factir_core::corpus::{parse_qrels, parse_run, Qrels, RunEntry};
use factir_core::metrics::{bpref, evaluate_run, Metric, NdcgConfig};

fn fixture(rel: &str) -> String {
    fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)).unwrap()
}

fn load() -> (Vec<RunEntry>, Qrels) {
    let run = parse_run(&fixture("metrics/run.txt")).unwrap();
    let qrels = Qrels::new(&parse_qrels(&fixture("metrics/qrels.txt")).unwrap());
    (run, qrels)
}

fn lg(x: f64) -> f64 {
    x.log2()
}

/// Reference values worked out by hand from the fixture's judgments.
fn expected() -> HashMap<&'static str, [f64; 5]> {
    let q1 = [
        (1.0 + 2.0 / 3.0 + 3.0 / 6.0) / 4.0,
        (1.0 + 1.0 / lg(4.0) + 1.0 / lg(7.0)) / (1.0 + 1.0 / lg(3.0) + 1.0 / lg(4.0) + 1.0 / lg(5.0)),
        (1.0 + (1.0 - 1.0 / 3.0) + 0.0) / 4.0,
        0.3,
        1.0,
    ];
    let q2 = [
        (1.0 / 2.0 + 2.0 / 5.0 + 3.0 / 9.0) / 3.0,
        (2.0 / lg(3.0) + 1.0 / lg(6.0) + 1.0 / lg(10.0)) / (2.0 + 1.0 / lg(3.0) + 1.0 / lg(4.0)),
        (1.0 - 1.0 / 2.0) / 3.0,
        0.3,
        0.5,
    ];
    let q3 = [0.25, 1.0 / lg(5.0), 0.0, 0.1, 0.25];
    HashMap::from([("1", q1), ("2", q2), ("3", q3)])
}

const ORDER: [Metric; 5] = [Metric::Map, Metric::Ndcg, Metric::Bpref, Metric::P10, Metric::Mrr];

#[test]
fn per_query_values_match_hand_computation() {
    let (run, qrels) = load();
    let eval = evaluate_run(&run, &qrels, &NdcgConfig::default());
    let expected = expected();
    assert_eq!(eval.per_query.len(), 3);
    for q in &eval.per_query {
        let want = expected[q.query_id.as_str()];
        for (m, w) in ORDER.iter().zip(want) {
            assert!((q.get(*m) - w).abs() < 1e-6, "query {} {m:?}: {} vs {w}", q.query_id, q.get(*m));
        }
    }
    for (i, m) in ORDER.iter().enumerate() {
        let mean = expected.values().map(|v| v[i]).sum::<f64>() / 3.0;
        assert!((eval.mean(*m) - mean).abs() < 1e-6, "{m:?}");
    }
}

#[test]
fn bpref_ignores_unjudged_insertions() {
    let (run, qrels) = load();
    for qid in ["1", "2", "3"] {
        let j = qrels.judgments(qid).unwrap();
        let ranked: Vec<&str> = run.iter().filter(|e| e.query_id == qid).map(|e| e.doc_id.as_str()).collect();
        let before = bpref(&ranked, j).unwrap();
        let padded: Vec<String> = ranked
            .iter()
            .enumerate()
            .flat_map(|(i, d)| [format!("unjudged-{i}"), d.to_string()])
            .collect();
        let padded: Vec<&str> = padded.iter().map(String::as_str).collect();
        assert_eq!(bpref(&padded, j).unwrap().to_bits(), before.to_bits(), "query {qid}");
    }
}

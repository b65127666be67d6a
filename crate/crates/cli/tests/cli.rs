use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/pipeline.toml")
}

fn factir(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factir"))
        .arg("--config")
        .arg(config())
        .arg("--set")
        .arg(format!("paths.out=\"{}\"", out.display()))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let o = Command::new(env!("CARGO_BIN_EXE_factir")).arg(flag).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{flag}");
    }
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(factir(tmp.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(factir(tmp.path(), &["--set", "retrieval.nope=1", "ingest"]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_factir"))
        .args(["--config", "/nonexistent/factir.toml", "ingest"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    for stage in ["ingest", "train-tagger", "index", "search", "truncate"] {
        assert!(factir(tmp.path(), &[stage]).status.success(), "{stage}");
    }
    let o = factir(tmp.path(), &["--set", "rerank.alpha=2.0", "--set", "paths.signals=\"collection/signals.tsv\"", "rerank"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("alpha"));
}

#[test]
fn missing_upstream_artifact_names_the_command() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(factir(tmp.path(), &["ingest"]).status.success());
    let o = factir(tmp.path(), &["extract-facts"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("factir train-tagger"), "{}", stderr(&o));
    let o = factir(tmp.path(), &["score"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_input_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.trectext");
    fs::write(&bad, "<DOC>\n<DOCNO> X </DOCNO>\n<TEXT>\nunterminated\n").unwrap();
    let o = factir(tmp.path(), &["--set", &format!("paths.corpus=\"{}\"", bad.display()), "ingest"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn rerank_is_idempotent_and_alpha_one_is_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let signals = ["--set", "paths.signals=\"collection/signals.tsv\""];
    for stage in ["ingest", "index", "search", "truncate"] {
        assert!(factir(tmp.path(), &[stage]).status.success(), "{stage}");
    }
    let mut args = signals.to_vec();
    args.push("rerank");
    assert!(factir(tmp.path(), &args).status.success());
    let run = tmp.path().join("rerank/factuality-linear.run");
    let first = fs::read(&run).unwrap();
    let manifest = fs::read(tmp.path().join("rerank/manifest.json")).unwrap();
    assert!(factir(tmp.path(), &args).status.success());
    assert_eq!(fs::read(&run).unwrap(), first);
    assert_eq!(fs::read(tmp.path().join("rerank/manifest.json")).unwrap(), manifest);
    assert_eq!(first, fs::read(tmp.path().join("truncate/baseline.run")).unwrap());
}

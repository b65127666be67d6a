//! One function per subcommand.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use factir_core::bins::{
    bin_relevance, distribution_csv, make_bins, relevance_csv, scott_bin_count, spam_cross_analysis, spam_csv,
    AnalysisManifest,
};
use factir_core::corpus::{
    parse_qrels, parse_queries, parse_run, parse_signals, parse_spam_scores, parse_trectext, read_labeled_docs,
    read_records, write_records, write_run, write_signals, DocSignals, Document, Keyed, Qrels, Query, RunEntry,
    SpamRule,
};
use factir_core::facts::{extract_corpus, facts_tsv, AnalyzedDoc};
use factir_core::factuality::{self, FactSummary, FactualityModel, TrainConfig};
use factir_core::learn::LogisticParams;
use factir_core::metrics::{aggregate_table, evaluate_run, per_query_csv, summary, Metric, NdcgConfig, RunEval};
use factir_core::rerank::{
    alpha_grid, rerank, signal_map, sweep_cv, w_grid, Method, MissingPolicy, RerankParams, SignalKind, SignalMap,
    SweepConfig,
};
use factir_core::retrieval::{build_index, search, tune_mu_cv, Index, MuTuning, RetrievalParams};
use factir_core::subjectivity::{
    annotate_roundtrip, bootstrap, classify_sentence, doc_objectivity, learn_patterns, match_templates,
    parse_lexicon, parse_patterns, sentence_features, train_objectivity_classifier, write_candidates,
    write_lexicon, write_patterns, BootstrapConfig, Lexicon, ObjectivityClassifier, ObjectivityConfig,
    ObjectivityModel, PatternSet, PatternThresholds, SentenceLabel,
};
use factir_core::text::{analyze, parse_gold_corpus, train_tagger, Tagger, TaggerConfig};

use crate::config::Loaded;
use crate::error::{CliError, Result};
use crate::workspace::{Stage, StageRun};

const DOCS: &str = "docs.jsonl";
const TAGGER: &str = "tagger.model";
const SUMMARIES: &str = "summaries.jsonl";
const FACTUALITY: &str = "factuality.model";
const CANDIDATES: &str = "candidates.tsv";
const LEXICON: &str = "lexicon.tsv";
const OBJECTIVITY: &str = "objectivity.model";
const PATTERNS: &str = "patterns.tsv";
const SIGNALS: &str = "signals.tsv";
const INDEX: &str = "index.fxix";
const BASELINE: &str = "baseline.run";

fn parse<T: std::str::FromStr<Err = factir_core::Error>>(what: &str, value: &str) -> Result<T> {
    value.parse().map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

fn jsonl<T: Serialize + Keyed>(records: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_records(records, &mut buf)?;
    Ok(buf)
}

fn load_docs(run: &mut StageRun) -> Result<Vec<Document>> {
    let bytes = run.artifact(Stage::Ingest, DOCS)?;
    Ok(read_records(BufReader::new(bytes.as_slice()))?)
}

fn load_tagger(run: &mut StageRun) -> Result<Tagger> {
    Ok(Tagger::from_model_string(&run.artifact_text(Stage::TrainTagger, TAGGER)?)?)
}

fn analyze_all<'d>(docs: impl IntoParallelIterator<Item = (&'d str, &'d str)>, tagger: &Tagger) -> Result<Vec<AnalyzedDoc>> {
    Ok(docs
        .into_par_iter()
        .map(|(id, text)| {
            Ok(AnalyzedDoc { doc_id: id.to_string(), text: text.to_string(), sentences: analyze(id, text, tagger)? })
        })
        .collect::<factir_core::Result<Vec<_>>>()?)
}

fn analyze_docs(docs: &[Document], tagger: &Tagger) -> Result<Vec<AnalyzedDoc>> {
    let pairs: Vec<(&str, &str)> = docs.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())).collect();
    analyze_all(pairs, tagger)
}

fn logistic(l2: f64, max_iters: usize, tol: f64) -> LogisticParams {
    LogisticParams { l2, max_iters, tol }
}

pub fn ingest(ctx: &Loaded) -> Result<()> {
    let mut run = StageRun::new(ctx, Stage::Ingest)?;
    let bytes = run.config_input("corpus", ctx.config.paths.corpus.as_deref())?;
    let docs = parse_trectext(&bytes)?;
    let empty = docs.iter().filter(|d| d.is_empty()).count();
    if empty > 0 {
        log::warn!("{empty} documents have no text");
    }
    run.write(DOCS, jsonl(&docs)?)?;
    run.write_json("report.json", &BTreeMap::from([("documents", docs.len()), ("empty", empty)]))?;
    run.finish(&())
}

pub fn train_tagger_cmd(ctx: &Loaded) -> Result<()> {
    let cfg = &ctx.config.tagger;
    let mut run = StageRun::new(ctx, Stage::TrainTagger)?;
    let gold = parse_gold_corpus(&run.config_text("tagger_gold", ctx.config.paths.tagger_gold.as_deref())?)?;
    let config = TaggerConfig { epochs: cfg.epochs, seed: cfg.seed, heldout_fraction: cfg.heldout_fraction };
    let (tagger, accuracy) = train_tagger(&gold, &config)?;
    log::info!("tagger held-out accuracy {accuracy:.4}");
    run.write(TAGGER, tagger.to_model_string()?)?;
    #[derive(Serialize)]
    struct Report {
        sentences: usize,
        tokens: usize,
        heldout_accuracy: f64,
    }
    let tokens = gold.iter().map(Vec::len).sum();
    run.write_json("report.json", &Report { sentences: gold.len(), tokens, heldout_accuracy: accuracy })?;
    run.finish(cfg)
}

/// Per-document fact summary as stored between stages.
#[derive(Debug, Serialize, Deserialize)]
struct SummaryRecord {
    doc_id: String,
    word_count: usize,
    fact_count: usize,
    density: f64,
    relations: Vec<String>,
}

impl Keyed for SummaryRecord {
    fn key(&self) -> &str {
        &self.doc_id
    }
}

impl From<&SummaryRecord> for FactSummary {
    fn from(r: &SummaryRecord) -> Self {
        FactSummary {
            word_count: r.word_count,
            fact_count: r.fact_count,
            density: r.density,
            relations: r.relations.iter().cloned().collect(),
        }
    }
}

pub fn extract_facts(ctx: &Loaded) -> Result<()> {
    let mut run = StageRun::new(ctx, Stage::ExtractFacts)?;
    let docs = load_docs(&mut run)?;
    let tagger = load_tagger(&mut run)?;
    let analyzed = analyze_docs(&docs, &tagger)?;
    let facts = extract_corpus(&analyzed, ctx.config.facts.min_pairs);
    let records: Vec<SummaryRecord> = facts
        .iter()
        .map(|d| {
            let s = FactSummary::from(d);
            SummaryRecord {
                doc_id: d.doc_id.clone(),
                word_count: s.word_count,
                fact_count: s.fact_count,
                density: s.density,
                relations: s.relations.into_iter().collect(),
            }
        })
        .collect();
    run.write("facts.tsv", facts_tsv(&facts))?;
    run.write(SUMMARIES, jsonl(&records)?)?;
    let total: usize = facts.iter().map(|d| d.stats.fact_count).sum();
    run.write_json("report.json", &BTreeMap::from([("documents", facts.len()), ("facts", total)]))?;
    run.finish(&ctx.config.facts)
}

pub fn train_factuality(ctx: &Loaded) -> Result<()> {
    let cfg = &ctx.config.factuality;
    let mut run = StageRun::new(ctx, Stage::TrainFactuality)?;
    let tagger = load_tagger(&mut run)?;
    let bytes = run.config_input("labeled", ctx.config.paths.labeled.as_deref())?;
    let labeled = read_labeled_docs(BufReader::new(bytes.as_slice()))?;
    let pairs: Vec<(&str, &str)> = labeled.iter().map(|l| (l.doc.doc_id.as_str(), l.doc.text.as_str())).collect();
    let analyzed = analyze_all(pairs, &tagger)?;
    let summaries: Vec<FactSummary> =
        extract_corpus(&analyzed, ctx.config.facts.min_pairs).iter().map(FactSummary::from).collect();
    let labels: Vec<bool> = labeled.iter().map(|l| l.label.is_positive()).collect();
    let config = TrainConfig {
        folds: cfg.folds,
        seed: cfg.seed,
        fraction: cfg.fraction,
        logistic: logistic(cfg.l2, cfg.max_iters, cfg.tol),
    };
    let model = factuality::train(&summaries, &labels, &config)?;
    log::info!("factuality cross-validated accuracy {:.4}", model.meta.cv_accuracy);
    run.write(FACTUALITY, model.to_model_string())?;
    run.write_json("report.json", &model.meta)?;
    run.finish(cfg)
}

fn read_seeds(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_lowercase).collect()
}

pub fn bootstrap_cmd(ctx: &Loaded) -> Result<()> {
    let cfg = &ctx.config.bootstrap;
    let mut run = StageRun::new(ctx, Stage::Bootstrap)?;
    let docs = load_docs(&mut run)?;
    let tagger = load_tagger(&mut run)?;
    let seeds = read_seeds(&run.config_text("seeds", ctx.config.paths.seeds.as_deref())?);
    let base = parse_lexicon(&run.config_text("lexicon", ctx.config.paths.lexicon.as_deref())?)?;
    let analyzed = analyze_docs(&docs, &tagger)?;
    let instances: Vec<_> = analyzed.iter().flat_map(|d| d.sentences.iter().map(match_templates)).collect();
    let result = bootstrap(&seeds, &instances, &BootstrapConfig { iterations: cfg.iterations, per_iteration: cfg.per_iteration })?;
    let mut promotions = String::from("iteration\tnoun\tscore\n");
    for p in &result.promoted {
        writeln!(promotions, "{}\t{}\t{:.6}", p.iteration, p.noun, p.score).unwrap();
    }
    let candidates: Vec<&str> = result.nouns().into_iter().filter(|n| !base.contains(n)).collect();
    run.write("promotions.tsv", promotions)?;
    run.write(CANDIDATES, write_candidates(&candidates))?;
    #[derive(Serialize)]
    struct Report {
        seeds: usize,
        promoted: usize,
        candidates: usize,
        pool: Vec<String>,
        iterations_run: usize,
        stopped_early: bool,
    }
    run.write_json(
        "report.json",
        &Report {
            seeds: seeds.len(),
            promoted: result.promoted.len(),
            candidates: candidates.len(),
            pool: result.pool.iter().map(ToString::to_string).collect(),
            iterations_run: result.iterations_run,
            stopped_early: result.stopped_early,
        },
    )?;
    run.finish(cfg)
}

pub fn annotate_merge(ctx: &Loaded) -> Result<()> {
    let mut run = StageRun::new(ctx, Stage::AnnotateMerge)?;
    let candidates = run.artifact_text(Stage::Bootstrap, CANDIDATES)?;
    let mut lexicon = parse_lexicon(&run.config_text("lexicon", ctx.config.paths.lexicon.as_deref())?)?;
    let base = lexicon.len();
    let annotated = match ctx.config.paths.annotations.as_deref() {
        Some(p) => run.config_text("annotations", Some(p))?,
        None => {
            log::warn!("paths.annotations is not set; merging the unannotated candidate file");
            candidates.clone()
        }
    };
    let listed: Vec<&str> = candidates.lines().filter_map(|l| l.split('\t').next()).collect();
    let additions = annotate_roundtrip(&annotated, &mut lexicon)?;
    let outside = additions.iter().filter(|(t, _)| !listed.contains(&t.as_str())).count();
    if outside > 0 {
        log::warn!("{outside} annotated terms were not bootstrap candidates");
    }
    run.write(LEXICON, write_lexicon(&lexicon))?;
    run.write_json(
        "report.json",
        &BTreeMap::from([("base", base), ("annotated", additions.len()), ("entries", lexicon.len())]),
    )?;
    run.finish(&())
}

fn load_lexicon(run: &mut StageRun) -> Result<Lexicon> {
    Ok(parse_lexicon(&run.artifact_text(Stage::AnnotateMerge, LEXICON)?)?)
}

pub fn train_objectivity(ctx: &Loaded) -> Result<()> {
    let cfg = &ctx.config.objectivity;
    let mut run = StageRun::new(ctx, Stage::TrainObjectivity)?;
    let docs = load_docs(&mut run)?;
    let tagger = load_tagger(&mut run)?;
    let lexicon = load_lexicon(&mut run)?;
    let analyzed = analyze_docs(&docs, &tagger)?;
    let sentences: Vec<_> = analyzed.iter().flat_map(|d| &d.sentences).collect();
    let labeled: Vec<_> = sentences
        .par_iter()
        .map(|s| (match_templates(s), classify_sentence(s.tokens(), &lexicon)))
        .collect();
    let t = &ctx.config.patterns;
    let patterns = learn_patterns(&labeled, &PatternThresholds { min_freq: t.min_freq, min_prob: t.min_prob });
    let (mut rows, mut objective) = (Vec::new(), Vec::new());
    for (s, (_, label)) in sentences.iter().zip(&labeled) {
        if *label != SentenceLabel::Unknown {
            rows.push(sentence_features(s, &lexicon, &patterns));
            objective.push(*label == SentenceLabel::Objective);
        }
    }
    let count = |l: SentenceLabel| labeled.iter().filter(|(_, x)| *x == l).count();
    let config = ObjectivityConfig { folds: cfg.folds, seed: cfg.seed, logistic: logistic(cfg.l2, cfg.max_iters, cfg.tol) };
    let model = train_objectivity_classifier(&rows, &objective, &config)?;
    log::info!("objectivity cross-validated accuracy {:.4}", model.cv_accuracy);
    run.write(OBJECTIVITY, model.to_model_string())?;
    run.write(PATTERNS, write_patterns(&patterns))?;
    #[derive(Serialize)]
    struct Report {
        sentences: usize,
        subjective: usize,
        objective: usize,
        unknown: usize,
        subjective_patterns: usize,
        objective_patterns: usize,
        cv_accuracy: f64,
        fold_accuracies: Vec<f64>,
    }
    run.write_json(
        "report.json",
        &Report {
            sentences: sentences.len(),
            subjective: count(SentenceLabel::Subjective),
            objective: count(SentenceLabel::Objective),
            unknown: count(SentenceLabel::Unknown),
            subjective_patterns: patterns.subjective.len(),
            objective_patterns: patterns.objective.len(),
            cv_accuracy: model.cv_accuracy,
            fold_accuracies: model.fold_accuracies.clone(),
        },
    )?;
    run.finish(&(cfg, t))
}

pub fn score(ctx: &Loaded) -> Result<()> {
    let mut run = StageRun::new(ctx, Stage::Score)?;
    let docs = load_docs(&mut run)?;
    let tagger = load_tagger(&mut run)?;
    let summaries: Vec<SummaryRecord> =
        read_records(BufReader::new(run.artifact(Stage::ExtractFacts, SUMMARIES)?.as_slice()))?;
    let fct = FactualityModel::from_model_string(&run.artifact_text(Stage::TrainFactuality, FACTUALITY)?)?;
    let lexicon = load_lexicon(&mut run)?;
    let obj = ObjectivityModel::from_model_string(&run.artifact_text(Stage::TrainObjectivity, OBJECTIVITY)?)?;
    let patterns: PatternSet = parse_patterns(&run.artifact_text(Stage::TrainObjectivity, PATTERNS)?)?;
    let by_id: HashMap<&str, &SummaryRecord> = summaries.iter().map(|s| (s.doc_id.as_str(), s)).collect();
    let analyzed = analyze_docs(&docs, &tagger)?;
    let classifier = ObjectivityClassifier { lexicon: &lexicon, patterns: &patterns, model: &obj };
    let scored: Vec<(DocSignals, bool)> = analyzed
        .par_iter()
        .map(|d| {
            let summary = by_id
                .get(d.doc_id.as_str())
                .ok_or_else(|| anyhow!("no fact summary for `{}`; rerun extract-facts", d.doc_id))?;
            let p_fct = fct.predict(&FactSummary::from(*summary));
            let o = doc_objectivity(&d.sentences, &classifier);
            Ok((DocSignals::new(d.doc_id.clone(), Some(p_fct), Some(o.p_obj)), o.degenerate))
        })
        .collect::<anyhow::Result<_>>()?;
    let degenerate = scored.iter().filter(|(_, d)| *d).count();
    let signals: Vec<DocSignals> = scored.into_iter().map(|(s, _)| s).collect();
    run.write(SIGNALS, write_signals(&signals))?;
    run.write_json("report.json", &BTreeMap::from([("documents", signals.len()), ("degenerate", degenerate)]))?;
    run.finish(&())
}

pub fn index(ctx: &Loaded) -> Result<()> {
    let mut run = StageRun::new(ctx, Stage::Index)?;
    let docs = load_docs(&mut run)?;
    let index = build_index(&docs)?;
    let mut buf = Vec::new();
    index.write_to(&mut buf)?;
    run.write(INDEX, buf)?;
    #[derive(Serialize)]
    struct Report {
        documents: usize,
        terms: usize,
        tokens: u64,
    }
    run.write_json(
        "report.json",
        &Report { documents: index.num_docs(), terms: index.num_terms(), tokens: index.total_tokens() },
    )?;
    run.finish(&())
}

fn load_queries(run: &mut StageRun) -> Result<Vec<Query>> {
    let ctx = run.ctx;
    Ok(parse_queries(&run.config_text("queries", ctx.config.paths.queries.as_deref())?)?)
}

fn load_qrels(run: &mut StageRun) -> Result<Qrels> {
    let ctx = run.ctx;
    Ok(Qrels::new(&parse_qrels(&run.config_text("qrels", ctx.config.paths.qrels.as_deref())?)?))
}

fn ndcg_config(ctx: &Loaded) -> NdcgConfig {
    NdcgConfig { depth: ctx.config.evaluate.ndcg_depth, exponential_gain: ctx.config.evaluate.exponential_gain }
}

pub fn search_cmd(ctx: &Loaded) -> Result<()> {
    let cfg = &ctx.config.retrieval;
    let mut run = StageRun::new(ctx, Stage::Search)?;
    let index = Index::read_from(run.artifact(Stage::Index, INDEX)?.as_slice())?;
    let queries = load_queries(&mut run)?;
    let params = RetrievalParams { mu: cfg.mu, k_top: cfg.k_top, tag: cfg.tag.clone() };
    let entries = if cfg.tune_mu {
        let qrels = load_qrels(&mut run)?;
        let tuning = MuTuning {
            grid: cfg.mu_grid.clone(),
            folds: cfg.folds,
            seed: cfg.seed,
            target: parse::<Metric>("retrieval.target", &cfg.target)?,
            ndcg: ndcg_config(ctx),
        };
        let tuned = tune_mu_cv(&queries, &index, &params, &qrels, &tuning)?;
        run.write_json("folds.json", &tuned.folds)?;
        tuned.run
    } else {
        search(&queries, &index, &params)?
    };
    run.write(BASELINE, write_run(&entries)?)?;
    run.finish(cfg)
}

pub fn truncate(ctx: &Loaded) -> Result<()> {
    let mut run = StageRun::new(ctx, Stage::Truncate)?;
    let baseline = parse_run(&run.artifact_text(Stage::Search, BASELINE)?)?;
    let cut = factir_core::rerank::truncate_top(&baseline, ctx.config.truncate.depth)?;
    run.write(BASELINE, write_run(&cut)?)?;
    run.finish(&ctx.config.truncate)
}

fn load_signals(run: &mut StageRun) -> Result<SignalMap> {
    let ctx = run.ctx;
    let text = match ctx.config.paths.signals.as_deref() {
        Some(p) => run.config_text("signals", Some(p))?,
        None => run.artifact_text(Stage::Score, SIGNALS)?,
    };
    Ok(signal_map(&parse_signals(&text)?))
}

fn rerank_params(ctx: &Loaded, method: Method) -> Result<RerankParams> {
    let r = &ctx.config.rerank;
    let params = RerankParams {
        method,
        alpha: r.alpha,
        w: r.w,
        k: r.k,
        epsilon_floor: r.epsilon_floor,
        singular_epsilon: r.singular_epsilon,
        missing: parse::<MissingPolicy>("rerank.missing", &r.missing)?,
    };
    params.validate().map_err(|e| CliError::Usage(format!("rerank: {e}")))?;
    Ok(params)
}

fn run_name(kind: SignalKind, method: Method) -> String {
    let signal = match kind {
        SignalKind::Factuality => "factuality",
        SignalKind::Objectivity => "objectivity",
    };
    format!("{signal}-{method}")
}

pub fn rerank_cmd(ctx: &Loaded) -> Result<()> {
    let r = &ctx.config.rerank;
    let kind = parse::<SignalKind>("rerank.signal", &r.signal)?;
    let params = rerank_params(ctx, parse("rerank.method", &r.method)?)?;
    let mut run = StageRun::new(ctx, Stage::Rerank)?;
    let baseline = parse_run(&run.artifact_text(Stage::Truncate, BASELINE)?)?;
    let signals = load_signals(&mut run)?;
    let out = rerank(&baseline, &signals, kind, &params)?;
    let name = run_name(kind, params.method);
    run.write(&format!("{name}.run"), write_run(&out.run)?)?;
    run.write_json(&format!("{name}.diagnostics.json"), &out.diagnostics)?;
    run.finish(r)
}

fn sweep_grid(ctx: &Loaded, method: Method) -> Vec<f64> {
    ctx.config.sweep.grid.clone().unwrap_or_else(|| match method {
        Method::Linear => alpha_grid(),
        Method::Satu => w_grid(),
    })
}

pub fn sweep(ctx: &Loaded) -> Result<()> {
    let s = &ctx.config.sweep;
    let target = parse::<Metric>("sweep.target", &s.target)?;
    let kinds: Vec<SignalKind> = s.signals.iter().map(|v| parse("sweep.signals", v)).collect::<Result<_>>()?;
    let methods: Vec<Method> = s.methods.iter().map(|v| parse("sweep.methods", v)).collect::<Result<_>>()?;
    let mut run = StageRun::new(ctx, Stage::Sweep)?;
    let baseline = parse_run(&run.artifact_text(Stage::Truncate, BASELINE)?)?;
    let signals = load_signals(&mut run)?;
    let qrels = load_qrels(&mut run)?;
    #[derive(Serialize)]
    struct Entry {
        grid: Vec<f64>,
        mean_test_metric: f64,
        folds: Vec<factir_core::rerank::FoldResult>,
        missing: usize,
        singular: usize,
    }
    let mut report = BTreeMap::new();
    for &kind in &kinds {
        for &method in &methods {
            let config = SweepConfig {
                params: rerank_params(ctx, method)?,
                grid: sweep_grid(ctx, method),
                folds: s.folds,
                seed: s.seed,
                target,
                ndcg: ndcg_config(ctx),
            };
            let result = sweep_cv(&baseline, &signals, kind, &qrels, &config)?;
            let name = run_name(kind, method);
            run.write(&format!("{name}.run"), write_run(&result.run)?)?;
            report.insert(
                name,
                Entry {
                    grid: config.grid,
                    mean_test_metric: result.mean_test_metric,
                    folds: result.folds,
                    missing: result.diagnostics.missing.len(),
                    singular: result.diagnostics.singular.len(),
                },
            );
        }
    }
    run.write_json("report.json", &report)?;
    run.finish(s)
}

pub fn evaluate(ctx: &Loaded) -> Result<()> {
    let mut run = StageRun::new(ctx, Stage::Evaluate)?;
    let qrels = load_qrels(&mut run)?;
    let ndcg = ndcg_config(ctx);
    let baseline = evaluate_run(&parse_run(&run.artifact_text(Stage::Truncate, BASELINE)?)?, &qrels, &ndcg);
    let mut evals: Vec<(String, RunEval)> = Vec::new();
    for stage in [Stage::Rerank, Stage::Sweep] {
        for file in run.optional_artifacts(stage, "run")? {
            let entries: Vec<RunEntry> = parse_run(&run.artifact_text(stage, &file)?)?;
            let name = format!("{}/{}", stage.command(), file.trim_end_matches(".run"));
            evals.push((name, evaluate_run(&entries, &qrels, &ndcg)));
        }
    }
    let mut all: Vec<(&str, &RunEval)> = vec![("baseline", &baseline)];
    all.extend(evals.iter().map(|(n, e)| (n.as_str(), e)));
    run.write("per_query.csv", per_query_csv(&all))?;
    run.write("summary.tsv", aggregate_table("baseline", &baseline, &all[1..])?)?;
    #[derive(Serialize)]
    struct RunReport {
        means: BTreeMap<String, f64>,
        queries: usize,
        excluded: Vec<String>,
    }
    let report: BTreeMap<&str, RunReport> = all
        .iter()
        .map(|(n, e)| {
            (*n, RunReport { means: summary(e), queries: e.per_query.len(), excluded: e.excluded.clone() })
        })
        .collect();
    run.write_json("report.json", &report)?;
    run.finish(&ctx.config.evaluate)
}

pub fn analyze_cmd(ctx: &Loaded) -> Result<()> {
    let a = &ctx.config.analysis;
    let rule = parse::<SpamRule>("analysis.spam_rule", &a.spam_rule)?;
    let kinds: Vec<(String, SignalKind)> = a
        .signals
        .iter()
        .map(|v| Ok((v.clone(), parse::<SignalKind>("analysis.signals", v)?)))
        .collect::<Result<_>>()?;
    let mut run = StageRun::new(ctx, Stage::Analyze)?;
    let signals = load_signals(&mut run)?;
    let qrels = load_qrels(&mut run)?;
    let spam = match ctx.config.paths.spam.as_deref() {
        Some(p) => Some(parse_spam_scores(&run.config_text("spam", Some(p))?)?),
        None => None,
    };
    let mut ordered: Vec<&DocSignals> = signals.values().collect();
    ordered.sort_by(|x, y| x.doc_id.cmp(&y.doc_id));
    let mut manifests = BTreeMap::new();
    for (name, kind) in kinds {
        let pairs: Vec<(String, f64)> =
            ordered.iter().filter_map(|s| kind.of(s).map(|v| (s.doc_id.clone(), v))).collect();
        let values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let spec = scott_bin_count(&values).with_context(|| format!("binning {name}"))?;
        let mut bins = make_bins(&pairs, &spec)?;
        bin_relevance(&mut bins, &qrels)?;
        run.write(&format!("{name}-distribution.csv"), distribution_csv(&bins, &name))?;
        run.write(&format!("{name}-relevance.csv"), relevance_csv(&bins, &name)?)?;
        let mut manifest = AnalysisManifest::new(&name, &spec, &bins);
        if let Some(spam) = &spam {
            let analysis = spam_cross_analysis(&bins, spam, rule)?;
            run.write(&format!("{name}-spam.csv"), spam_csv(&analysis, &name))?;
            manifest = manifest.with_spam(&analysis);
        }
        manifests.insert(name, manifest);
    }
    run.write_json("analysis.json", &manifests)?;
    run.finish(a)
}

/// Fails early with a usage error when a configured input is missing, so
/// that every referenced path is checked before any work starts.
pub fn check_paths(ctx: &Loaded) -> Result<()> {
    let p = &ctx.config.paths;
    let configured: [(&str, Option<&Path>); 10] = [
        ("corpus", p.corpus.as_deref()),
        ("queries", p.queries.as_deref()),
        ("qrels", p.qrels.as_deref()),
        ("tagger_gold", p.tagger_gold.as_deref()),
        ("labeled", p.labeled.as_deref()),
        ("lexicon", p.lexicon.as_deref()),
        ("seeds", p.seeds.as_deref()),
        ("annotations", p.annotations.as_deref()),
        ("spam", p.spam.as_deref()),
        ("signals", p.signals.as_deref()),
    ];
    for (key, path) in configured {
        if let Some(path) = path {
            let full = ctx.resolve(path);
            if !full.is_file() {
                return Err(CliError::Data(anyhow!("paths.{key}: {} does not exist", full.display())));
            }
        }
    }
    Ok(())
}

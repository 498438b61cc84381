//! One function per subcommand. Each returns its reports; extra artifacts
//! (curated corpus, split file, checkpoint) are written here.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use medsumm_core::curation::DEFAULT_CUE_TEMPLATE;
use medsumm_core::data::{corpus_to_string, parse_corpus};
use medsumm_core::embedding::parse_embeddings;
use medsumm_core::factual::{parse_annotations, Criterion};
use medsumm_core::fusion::{
    generate, load_toy_fixture, seeded_gradient_check, toy_task, train, FusionConfig, FusionModel, Sample, Vocab,
    GRADCHECK_TOLERANCE, TOY_LEARNING_RATE, TOY_STEPS,
};
use medsumm_core::{
    bleu, build_trie, corpus_cmi, dedup, embedding_score, factual_recall, filter_corpus, inject_visual_cue, meteor,
    mmfcm, omission_and_hallucination, postprocess_generation, rouge_l, rouge_n, tokenize, AmbiguityPolicy, Category,
    DatasetRecord, Lexicons, SymptomTaxonomy,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::report::{fmt_score, mean, Report, Table};
use crate::{CliError, CurateArgs, CmiArgs, EvalAutoArgs, EvalFactsArgs, FileConfig, FusionDemoArgs, KappaArgs, SplitArgs};

/// Settings shared by all subcommands after merging the command line with `--config`.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub percent: bool,
    pub out: PathBuf,
    pub file: FileConfig,
}

/// Reports plus the description of any failed built-in check.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub reports: Vec<Report>,
    pub check_failure: Option<String>,
}

impl From<Report> for Outcome {
    fn from(r: Report) -> Self {
        Outcome { reports: vec![r], check_failure: None }
    }
}

fn in_file(path: &Path) -> impl Fn(medsumm_core::Error) -> CliError + '_ {
    move |e| CliError::input(format!("{}: {e}", path.display()))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn write_artifact(ctx: &Context, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&ctx.out).map_err(|e| CliError::input(format!("cannot create {}: {e}", ctx.out.display())))?;
    let path = ctx.out.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn load_records(m: &mut RunManifest, path: &Path) -> Result<Vec<DatasetRecord>, CliError> {
    let text = m.read_input(path)?;
    parse_corpus(&text, None).map_err(in_file(path))
}

pub fn curate(ctx: &Context, a: &CurateArgs) -> Result<Outcome, CliError> {
    let taxonomy_path = a.taxonomy.clone().or_else(|| ctx.file.taxonomy.clone());
    let require_in = a.require_in.or(ctx.file.require_in).unwrap_or_default();
    let template = a.cue_template.clone().or_else(|| ctx.file.cue_template.clone()).unwrap_or_else(|| DEFAULT_CUE_TEMPLATE.to_string());
    let opts = json!({
        "corpus": path_str(&a.corpus),
        "taxonomy": taxonomy_path.as_deref().map(path_str),
        "require_in": require_in,
        "inject_cue": a.inject_cue,
        "cue_template": template,
    });
    let mut m = RunManifest::new("curate", &opts, None);
    let records = load_records(&mut m, &a.corpus)?;
    let taxonomy = match &taxonomy_path {
        Some(p) => SymptomTaxonomy::from_json(&m.read_input(p)?).map_err(in_file(p))?,
        None => SymptomTaxonomy::default_taxonomy(),
    };
    let trie = build_trie(&taxonomy)?;
    let read = records.len();
    let (deduped, removed) = dedup(records);
    let outcome = filter_corpus(&deduped, &trie, require_in);
    let mut kept = outcome.kept;
    let mut injected = 0;
    if a.inject_cue {
        for r in kept.iter_mut().filter(|r| r.image_ref.is_some() && r.disorder_phrase.is_some()) {
            let updated = inject_visual_cue(r, &template)?;
            injected += usize::from(updated != *r);
            *r = updated;
        }
    }
    let corpus_path = write_artifact(ctx, "curated.jsonl", &corpus_to_string(&kept)?)?;

    let mut stages = Table::new(["Stage", "Records"]);
    stages.row(["read".to_string(), read.to_string()]);
    stages.row(["duplicates removed".to_string(), removed.to_string()]);
    stages.row(["no symptom match".to_string(), (deduped.len() - kept.len()).to_string()]);
    stages.row(["kept".to_string(), kept.len().to_string()]);
    if a.inject_cue {
        stages.row(["visual cue added".to_string(), injected.to_string()]);
    }
    let mut hist = Table::new(["Category", "First match", "Mentions"]);
    let count = |h: &BTreeMap<Category, usize>, c| h.get(&c).copied().unwrap_or(0);
    for c in Category::ALL {
        hist.row([c.code().to_string(), count(&outcome.first_match_histogram, c).to_string(), count(&outcome.category_histogram, c).to_string()]);
    }
    let text = format!("{}\n{}", stages.render(), hist.render());
    let by_code = |h: &BTreeMap<Category, usize>| -> BTreeMap<String, usize> {
        Category::ALL.iter().map(|&c| (c.code().to_string(), count(h, c))).collect()
    };
    let body = json!({
        "read": read,
        "duplicates_removed": removed,
        "kept": kept.len(),
        "cue_injected": injected,
        "first_match_histogram": by_code(&outcome.first_match_histogram),
        "category_histogram": by_code(&outcome.category_histogram),
        "output": corpus_path.file_name().map(|n| n.to_string_lossy().to_string()),
    });
    Ok(Report::new("curate", &m, body, text).into())
}

pub const DEFAULT_RATIOS: [f64; 3] = [0.8, 0.05, 0.15];

pub fn split(ctx: &Context, a: &SplitArgs) -> Result<Outcome, CliError> {
    let ratios = match &a.ratios {
        Some(v) => <[f64; 3]>::try_from(v.as_slice()).map_err(|_| CliError::input("--ratios takes three values"))?,
        None => ctx.file.ratios.unwrap_or(DEFAULT_RATIOS),
    };
    let stratify = a.stratify || ctx.file.stratify.unwrap_or(false);
    let opts = json!({ "corpus": path_str(&a.corpus), "ratios": ratios, "stratify": stratify, "seed": ctx.seed });
    let mut m = RunManifest::new("split", &opts, Some(ctx.seed));
    let records = load_records(&mut m, &a.corpus)?;
    let s = medsumm_core::split(&records, ratios, ctx.seed, stratify)?;
    let mut file = serde_json::to_string_pretty(&s).expect("split serializes");
    file.push('\n');
    write_artifact(ctx, "split.json", &file)?;
    let (tr, va, te) = s.counts();
    let n = records.len();
    let mut t = Table::new(["Part", "Records", "Fraction"]);
    for (name, c) in [("train", tr), ("validation", va), ("test", te), ("total", n)] {
        let frac = if n == 0 { 0.0 } else { c as f64 / n as f64 };
        t.row([name.to_string(), c.to_string(), format!("{frac:.4}")]);
    }
    let body = json!({ "train": tr, "validation": va, "test": te, "total": n, "ratios": ratios, "stratified": stratify });
    Ok(Report::new("split", &m, body, t.render()).into())
}

/// Column order of the automatic-evaluation table.
pub const AUTO_COLUMNS: [&str; 9] = ["R1", "R2", "RL", "B1", "B2", "B3", "B4", "BERTScore", "METEOR"];

#[derive(Debug, Deserialize)]
struct Candidate {
    id: String,
    text: String,
}

fn parse_candidates(text: &str, path: &Path) -> Result<Vec<Candidate>, CliError> {
    let mut out: Vec<Candidate> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let c: Candidate = serde_json::from_str(line)
            .map_err(|e| CliError::input(format!("{} line {}: {e}", path.display(), idx + 1)))?;
        if let Some(first) = seen.insert(c.id.clone(), idx + 1) {
            return Err(CliError::input(format!("{}: duplicate id {:?} on lines {first} and {}", path.display(), c.id, idx + 1)));
        }
        out.push(c);
    }
    Ok(out)
}

pub fn eval_auto(ctx: &Context, a: &EvalAutoArgs) -> Result<Outcome, CliError> {
    let postprocess = !a.no_postprocess;
    let opts = json!({
        "candidates": path_str(&a.candidates),
        "references": path_str(&a.references),
        "candidate_embeddings": a.candidate_embeddings.as_deref().map(path_str),
        "reference_embeddings": a.reference_embeddings.as_deref().map(path_str),
        "postprocess": postprocess,
        "percent": ctx.percent,
    });
    let mut m = RunManifest::new("eval-auto", &opts, None);
    let candidates = parse_candidates(&m.read_input(&a.candidates)?, &a.candidates)?;
    let references: HashMap<String, String> =
        load_records(&mut m, &a.references)?.into_iter().map(|r| (r.id, r.golden_summary)).collect();
    let embeddings = match (&a.candidate_embeddings, &a.reference_embeddings) {
        (Some(c), Some(r)) => {
            let ce = parse_embeddings(&m.read_input(c)?).map_err(in_file(c))?;
            let re = parse_embeddings(&m.read_input(r)?).map_err(in_file(r))?;
            Some((ce, re))
        }
        _ => None,
    };
    let (matched, unmatched): (Vec<&Candidate>, Vec<&Candidate>) =
        candidates.iter().partition(|c| references.contains_key(&c.id));
    let scored: Vec<[Option<f64>; 9]> = matched
        .par_iter()
        .map(|c| -> Result<[Option<f64>; 9], CliError> {
            let text = if postprocess { postprocess_generation(&c.text) } else { c.text.clone() };
            let cand = tokenize(&text);
            let reference = tokenize(&references[&c.id]);
            let r1 = rouge_n(&cand, &reference, 1)?.f1;
            let r2 = rouge_n(&cand, &reference, 2)?.f1;
            let rl = rouge_l(&cand, &reference).f1;
            let b = bleu(&cand, &reference);
            let bert = match &embeddings {
                Some((ce, re)) => match (ce.get(&c.id), re.get(&c.id)) {
                    (Some(x), Some(y)) => Some(
                        embedding_score(x, y).map_err(|e| CliError::input(format!("embeddings of {:?}: {e}", c.id)))?.f1,
                    ),
                    _ => None,
                },
                None => None,
            };
            let met = meteor(&cand, &reference);
            Ok([Some(r1), Some(r2), Some(rl), Some(b.b1), Some(b.b2), Some(b.b3), Some(b.b4), bert, Some(met)])
        })
        .collect::<Result<_, _>>()?;
    let means: Vec<Option<f64>> = (0..9).map(|k| mean(scored.iter().filter_map(|s| s[k]))).collect();

    let mut t = Table::new(std::iter::once("ID").chain(AUTO_COLUMNS));
    for (c, s) in matched.iter().zip(&scored) {
        t.row(std::iter::once(c.id.clone()).chain(s.iter().map(|v| fmt_score(*v, ctx.percent))));
    }
    t.row(std::iter::once("Mean".to_string()).chain(means.iter().map(|v| fmt_score(*v, ctx.percent))));
    let mut text = t.render();
    let unmatched_ids: Vec<&str> = unmatched.iter().map(|c| c.id.as_str()).collect();
    if !unmatched_ids.is_empty() {
        text.push_str(&format!("\nunmatched ids excluded from means: {}\n", unmatched_ids.join(", ")));
    }
    let row_json = |s: &[Option<f64>]| -> serde_json::Map<String, serde_json::Value> {
        AUTO_COLUMNS.iter().zip(s).map(|(k, v)| (k.to_string(), json!(v))).collect()
    };
    let body = json!({
        "columns": AUTO_COLUMNS,
        "records": matched.iter().zip(&scored).map(|(c, s)| json!({ "id": c.id, "scores": row_json(s) })).collect::<Vec<_>>(),
        "mean": row_json(&means),
        "scored": matched.len(),
        "unmatched": unmatched_ids,
        "postprocessed": postprocess,
    });
    Ok(Report::new("eval-auto", &m, body, text).into())
}

/// Column order of the fact-based evaluation table.
pub const FACT_COLUMNS: [&str; 4] = ["Clinical-EvalScore", "Factual Recall", "Hallucination Rate", "MMFCM Score"];

#[derive(Default)]
struct ModelTotals {
    records: usize,
    clinical: Vec<f64>,
    recall: Vec<f64>,
    hallucination: Vec<f64>,
    mmfcm: Vec<f64>,
}

pub fn eval_facts(ctx: &Context, a: &EvalFactsArgs) -> Result<Outcome, CliError> {
    let opts = json!({ "annotations": path_str(&a.annotations), "percent": ctx.percent });
    let mut m = RunManifest::new("eval-facts", &opts, None);
    let records = parse_annotations(&m.read_input(&a.annotations)?).map_err(in_file(&a.annotations))?;
    if records.is_empty() {
        return Err(CliError::input(format!("{}: no annotation records", a.annotations.display())));
    }
    let mut order: Vec<String> = Vec::new();
    let mut totals: HashMap<String, ModelTotals> = HashMap::new();
    let mut errors: Vec<String> = Vec::new();
    for r in &records {
        let scores = r.annotation().and_then(|ann| {
            let (_, hallucination) = omission_and_hallucination(&ann)?;
            let mm = if r.unimodal { None } else { Some(mmfcm(&ann)?) };
            Ok((factual_recall(&ann)?, hallucination, mm))
        });
        let (recall, hallucination, mm) = match scores {
            Ok(s) => s,
            Err(e) => {
                errors.push(format!("{}: {e}", r.id));
                continue;
            }
        };
        if !totals.contains_key(&r.model) {
            order.push(r.model.clone());
        }
        let t = totals.entry(r.model.clone()).or_default();
        t.records += 1;
        t.recall.push(recall);
        t.hallucination.push(hallucination);
        t.mmfcm.extend(mm);
        if let Some(ratings) = r.ratings.get(&Criterion::ClinicalEval) {
            t.clinical.extend(ratings.iter().map(|x| f64::from(x.get())));
        }
    }
    let mut table = Table::new(std::iter::once("Model").chain(FACT_COLUMNS));
    let mut rows = Vec::new();
    for model in &order {
        let t = &totals[model];
        let values = [mean(t.clinical.iter().copied()), mean(t.recall.iter().copied()), mean(t.hallucination.iter().copied()), mean(t.mmfcm.iter().copied())];
        let clinical = values[0].map_or("NA".to_string(), |v| format!("{v:.2}"));
        table.row([model.clone(), clinical, fmt_score(values[1], ctx.percent), fmt_score(values[2], ctx.percent), fmt_score(values[3], ctx.percent)]);
        let cols: serde_json::Map<String, serde_json::Value> = FACT_COLUMNS.iter().zip(values).map(|(k, v)| (k.to_string(), json!(v))).collect();
        rows.push(json!({ "model": model, "records": t.records, "scores": cols }));
    }
    let mut text = table.render();
    if !errors.is_empty() {
        text.push_str(&format!("\n{} record(s) excluded:\n", errors.len()));
        for e in &errors {
            text.push_str(&format!("  {e}\n"));
        }
    }
    let body = json!({ "columns": FACT_COLUMNS, "models": rows, "excluded": errors });
    Ok(Report::new("eval-facts", &m, body, text).into())
}

pub fn cmi(ctx: &Context, a: &CmiArgs) -> Result<Outcome, CliError> {
    let lang1 = a.lexicon_lang1.clone().or_else(|| ctx.file.lexicon_lang1.clone()).ok_or_else(|| CliError::input("--lexicon-lang1 is required"))?;
    let lang2 = a.lexicon_lang2.clone().or_else(|| ctx.file.lexicon_lang2.clone()).ok_or_else(|| CliError::input("--lexicon-lang2 is required"))?;
    let policy: AmbiguityPolicy = a.ambiguity_policy.or(ctx.file.ambiguity_policy).unwrap_or_default();
    let opts = json!({
        "corpus": path_str(&a.corpus),
        "lexicon_lang1": path_str(&lang1),
        "lexicon_lang2": path_str(&lang2),
        "ambiguity_policy": policy,
    });
    let mut m = RunManifest::new("cmi", &opts, None);
    let records = load_records(&mut m, &a.corpus)?;
    let words = |p: &Path, m: &mut RunManifest| -> Result<Vec<String>, CliError> {
        Ok(m.read_input(p)?.lines().filter(|l| !l.trim_start().starts_with('#')).map(str::to_string).collect())
    };
    let lexicons = Lexicons::new(words(&lang1, &mut m)?, words(&lang2, &mut m)?)?;
    let seqs: Vec<_> = records.par_iter().map(|r| tokenize(&r.query_codemixed)).collect();
    let result = corpus_cmi(&seqs, &lexicons, policy)?;
    let mut t = Table::new(["Statistic", "Value"]);
    t.row(["records".to_string(), records.len().to_string()]);
    t.row(["scored".to_string(), (records.len() - result.skipped).to_string()]);
    t.row(["skipped (no tokens)".to_string(), result.skipped.to_string()]);
    t.row(["mean CMI".to_string(), format!("{:.2}", result.mean_cmi)]);
    let per_record: Vec<_> = records.iter().zip(&result.per_record).map(|(r, v)| json!({ "id": r.id, "cmi": v })).collect();
    let body = json!({ "mean_cmi": result.mean_cmi, "skipped": result.skipped, "records": per_record, "ambiguity_policy": policy });
    Ok(Report::new("cmi", &m, body, t.render()).into())
}

pub fn kappa(_ctx: &Context, a: &KappaArgs) -> Result<Outcome, CliError> {
    let opts = json!({ "labels": path_str(&a.labels) });
    let mut m = RunManifest::new("kappa", &opts, None);
    let raw: Vec<Vec<serde_json::Value>> = serde_json::from_str(&m.read_input(&a.labels)?)
        .map_err(|e| CliError::input(format!("{}: expected an array of label arrays: {e}", a.labels.display())))?;
    if raw.len() < 2 {
        return Err(CliError::input("kappa needs label lists from at least two annotators"));
    }
    let lists: Vec<Vec<String>> = raw.iter().map(|l| l.iter().map(|v| v.to_string()).collect()).collect();
    let mut t = Table::new(["Pair", "Kappa"]);
    let mut pairs = Vec::new();
    for i in 0..lists.len() {
        for j in i + 1..lists.len() {
            let k = medsumm_core::cohen_kappa(&lists[i], &lists[j])
                .map_err(|e| CliError::input(format!("annotators {} and {}: {e}", i + 1, j + 1)))?;
            t.row([format!("{} vs {}", i + 1, j + 1), format!("{k:.4}")]);
            pairs.push(json!({ "a": i + 1, "b": j + 1, "kappa": k }));
        }
    }
    let mean_kappa = medsumm_core::multi_annotator_kappa(&lists)?;
    t.row(["Mean".to_string(), format!("{mean_kappa:.4}")]);
    let body = json!({ "annotators": lists.len(), "items": lists[0].len(), "pairs": pairs, "mean_kappa": mean_kappa });
    Ok(Report::new("kappa", &m, body, t.render()).into())
}

#[derive(Serialize)]
struct DemoOptions {
    steps: usize,
    learning_rate: f64,
    fixture: Option<String>,
    config: FusionConfig,
}

pub const LOSS_RATIO_LIMIT: f64 = 0.5;

pub fn fusion_demo(ctx: &Context, a: &FusionDemoArgs) -> Result<Outcome, CliError> {
    let steps = a.steps.or(ctx.file.steps).unwrap_or(TOY_STEPS);
    let learning_rate = a.learning_rate.or(ctx.file.learning_rate).unwrap_or(TOY_LEARNING_RATE);
    let config = FusionConfig { seed: ctx.seed, ..FusionConfig::toy() };
    let opts = DemoOptions { steps, learning_rate, fixture: a.fixture.as_deref().map(path_str), config: config.clone() };
    let mut m = RunManifest::new("fusion-demo", &opts, Some(ctx.seed));
    let examples = match &a.fixture {
        Some(p) => {
            m.read_input(p)?;
            load_toy_fixture(p).map_err(in_file(p))?
        }
        None => toy_task(ctx.seed, config.vision_dim)?,
    };
    if examples.is_empty() {
        return Err(CliError::input("toy fixture has no examples"));
    }
    let vocab = Vocab::toy();
    let batch: Vec<Sample> = examples.iter().map(|e| e.to_sample(vocab.eos(), true)).collect::<Result<_, _>>()?;
    let mut model = FusionModel::new(config)?;
    let training = train(&mut model, &batch, steps, learning_rate)?;
    let grad = seeded_gradient_check(ctx.seed)?;
    let sample = generate(&model, &vocab, Some(&examples[0].vision), &examples[0].prompt, 20)?;
    if let Some(p) = &a.checkpoint {
        model.save(p).map_err(in_file(p))?;
    }

    let ratio = training.loss_ratio();
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let ratio_ok = ratio < LOSS_RATIO_LIMIT;
    let grad_ok = grad.max_relative_error < GRADCHECK_TOLERANCE;
    let mut text = String::new();
    text.push_str(&format!("steps: {steps}, learning rate: {learning_rate}, samples: {}\n", batch.len()));
    text.push_str(&format!("initial loss: {:.6}\n", training.initial_loss));
    text.push_str(&format!("final loss: {:.6}\n", training.final_loss));
    text.push_str(&format!("loss ratio: {ratio:.4} ({} < {LOSS_RATIO_LIMIT})\n", verdict(ratio_ok)));
    text.push_str(&format!("frozen base unchanged: {}\n", verdict(training.frozen_unchanged)));
    text.push_str(&format!(
        "gradient check: {} (max relative error {:.3e} over {} scalars)\n",
        verdict(grad_ok),
        grad.max_relative_error,
        grad.checked
    ));
    text.push_str(&format!("sample generation: {}\n", sample.raw));
    let body = json!({
        "steps": steps,
        "learning_rate": learning_rate,
        "initial_loss": training.initial_loss,
        "final_loss": training.final_loss,
        "loss_ratio": ratio,
        "loss_ratio_pass": ratio_ok,
        "frozen_unchanged": training.frozen_unchanged,
        "gradient_check": grad,
        "gradient_check_pass": grad_ok,
        "sample": sample,
    });
    let report = Report::new("fusion-demo", &m, body, text);
    let mut failures = Vec::new();
    if !ratio_ok {
        failures.push(format!("loss ratio {ratio:.4} is not below {LOSS_RATIO_LIMIT}"));
    }
    if !training.frozen_unchanged {
        failures.push("frozen tensors changed during training".to_string());
    }
    if !grad_ok {
        failures.push(format!("gradient check max relative error {:.3e}", grad.max_relative_error));
    }
    Ok(Outcome { reports: vec![report], check_failure: (!failures.is_empty()).then(|| failures.join("; ")) })
}


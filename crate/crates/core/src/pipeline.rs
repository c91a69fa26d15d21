//! Pipeline stages behind the CLI subcommands. Every stage reads its inputs
//! from the run directory (or an explicit replay file) and rewrites its
//! outputs in full, so re-running with unchanged inputs changes no bytes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::corpus::{load_multiged, summarize, CorpusSummary, SentenceRecord};
use crate::error::{Error, Result};
use crate::gateway::{
    generate_batch, load_corrections, write_corrections, ChatClient, Correction, CorrectionCache, RetryPolicy,
};
use crate::grammar::{correctness_score, LanguageToolClient};
use crate::language::Language;
use crate::metrics::{
    drift_score, evaluate_cell, gleu_score, length_diff_score, levenshtein_score, preservation_f1, read_cells_csv,
    write_cells_csv, write_score_cache, CellKey, CellResult, LanguageProbabilities, Metric, MetricVector, ScorerClient,
    SentenceScores,
};
use crate::prompts::{PromptCatalog, PromptId};
use crate::ranking::{macro_vectors, rank_all, two_step_global_rank, RankingSet};
use crate::report::{
    default_rules, emit_tables, render_tables, write_files, language_support_verdict, load_rules, pattern_counts, prompt_cells,
    prompt_selection_table, read_metric_table, stability_report, PatternRule, ReportInputs,
};

pub const CORRECTIONS_FILE: &str = "corrections.jsonl";
pub const CACHE_FILE: &str = "cache/corrections.jsonl";
pub const SCORES_FILE: &str = "scores.csv";
pub const CELLS_FILE: &str = "cells.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance written next to every stage's outputs. Holds no timestamps so
/// identical runs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub generation_config_hash: String,
    #[serde(default)]
    pub checker_version: Option<String>,
    #[serde(default)]
    pub checker_expected_version: Option<String>,
    #[serde(default)]
    pub scorer_versions: BTreeMap<String, String>,
    #[serde(default)]
    pub corpus_hashes: BTreeMap<String, String>,
    #[serde(default)]
    pub corrections_hash: Option<String>,
    #[serde(default)]
    pub stages: BTreeSet<String>,
}

impl Manifest {
    pub fn load_or_default(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(dir.join(MANIFEST_FILE), json)?;
        Ok(())
    }

    fn stamp(&mut self, cfg: &RunConfig, stage: &str) {
        let mut hashed = cfg.clone();
        hashed.out_dir = PathBuf::new();
        self.config_hash = hashed.hash();
        self.generation_config_hash = cfg.generation.params.hash();
        self.checker_expected_version = cfg.checker.version.clone();
        self.stages.insert(stage.to_string());
    }

    pub fn stamp_lines(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("config hash".into(), self.config_hash.clone());
        out.insert(
            "checker version".into(),
            self.checker_version.clone().unwrap_or_else(|| "n/a".into()),
        );
        let scorer = if self.scorer_versions.is_empty() {
            "n/a".to_string()
        } else {
            self.scorer_versions
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        out.insert("scorer versions".into(), scorer);
        out
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

pub fn load_corpus(cfg: &RunConfig) -> Result<BTreeMap<Language, Vec<SentenceRecord>>> {
    let mut out = BTreeMap::new();
    for &lang in &cfg.languages {
        let path = cfg
            .corpus
            .files
            .get(&lang)
            .ok_or_else(|| Error::Config(format!("no corpus file configured for {lang}")))?;
        out.insert(lang, load_multiged(path, lang, &cfg.corpus.labels)?);
    }
    Ok(out)
}

fn corpus_hashes(cfg: &RunConfig) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for lang in &cfg.languages {
        if let Some(p) = cfg.corpus.files.get(lang) {
            out.insert(lang.code().to_string(), sha256_file(p)?);
        }
    }
    Ok(out)
}

pub fn catalog(cfg: &RunConfig) -> Result<PromptCatalog> {
    let mut c = match &cfg.prompt_dir {
        Some(dir) => PromptCatalog::load_dir(dir)?,
        None => PromptCatalog::builtin(),
    };
    c.retain_languages(&cfg.languages);
    Ok(c)
}

pub fn rules(cfg: &RunConfig) -> Result<Vec<PatternRule>> {
    match &cfg.pattern_rules {
        Some(p) => load_rules(p),
        None => Ok(default_rules()),
    }
}

pub fn run_summarize(cfg: &RunConfig) -> Result<CorpusSummary> {
    let corpus = load_corpus(cfg)?;
    let summary = summarize(&corpus, cfg.corpus.stddev)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("corpus_summary.csv"), summary.to_csv()?)?;
    std::fs::write(cfg.out_dir.join("corpus_summary.txt"), summary.to_aligned_table())?;
    let mut m = Manifest::load_or_default(&cfg.out_dir)?;
    m.stamp(cfg, "summarize");
    m.corpus_hashes = corpus_hashes(cfg)?;
    m.save(&cfg.out_dir)?;
    Ok(summary)
}

fn sort_corrections(corrections: &mut [Correction]) {
    use crate::metrics::sentence_order;
    corrections.sort_by(|a, b| {
        (&a.model_id, a.prompt_id, a.language)
            .cmp(&(&b.model_id, b.prompt_id, b.language))
            .then_with(|| sentence_order(&a.sentence_id).cmp(&sentence_order(&b.sentence_id)))
    });
}

/// Queries every configured model for every (prompt, sentence). Successful
/// corrections are written even when some requests fail; the stage then
/// reports the failures as an error.
pub fn run_generate(cfg: &RunConfig) -> Result<Vec<Correction>> {
    if cfg.models.is_empty() {
        return Err(Error::Config("no models configured".into()));
    }
    let corpus = load_corpus(cfg)?;
    let catalog = catalog(cfg)?;
    let cache = CorrectionCache::open(&cfg.out_dir.join(CACHE_FILE))?;
    let gen = &cfg.generation;
    let retry = RetryPolicy {
        attempts: gen.retries.max(1),
        initial_backoff: Duration::from_millis(gen.backoff_ms),
    };
    let mut all = Vec::new();
    let mut failures = Vec::new();
    for model in &cfg.models {
        let client = ChatClient::new(
            &cfg.endpoint_for(model)?,
            model.served_name(),
            cfg.api_key.clone(),
            Duration::from_secs(gen.timeout_secs),
        )?
        .with_retry(retry);
        for &prompt in &cfg.prompts {
            for (&lang, sentences) in &corpus {
                let template = catalog.get(prompt, lang)?;
                let jobs: Vec<_> = sentences.iter().map(|s| (s, template)).collect();
                let results = generate_batch(&jobs, &model.id, &client, &gen.params, Some(&cache), gen.concurrency)?;
                for r in results {
                    match r {
                        Ok(c) => all.push(c),
                        Err(e) => failures.push(e.to_string()),
                    }
                }
            }
        }
    }
    sort_corrections(&mut all);
    std::fs::create_dir_all(&cfg.out_dir)?;
    write_corrections(File::create(cfg.out_dir.join(CORRECTIONS_FILE))?, &all)?;
    let mut m = Manifest::load_or_default(&cfg.out_dir)?;
    m.stamp(cfg, "generate");
    m.corpus_hashes = corpus_hashes(cfg)?;
    m.save(&cfg.out_dir)?;
    if !failures.is_empty() {
        for f in failures.iter().take(10) {
            log::error!("{f}");
        }
        return Err(Error::Generation {
            sentence_id: "(several)".into(),
            message: format!("{} requests failed; successful outputs were kept", failures.len()),
        });
    }
    Ok(all)
}

/// Resolves the corrections file for downstream stages.
pub fn corrections_path(cfg: &RunConfig, offline: Option<&Path>) -> Result<PathBuf> {
    if let Some(p) = offline {
        return Ok(p.to_path_buf());
    }
    let p = cfg.out_dir.join(CORRECTIONS_FILE);
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::MissingArtifact { path: p, stage: "generate" })
    }
}

/// Corrections restricted to the configured models, prompts and languages.
pub fn select_corrections(cfg: &RunConfig, corrections: Vec<Correction>) -> Vec<Correction> {
    let models: BTreeSet<&str> = cfg.models.iter().map(|m| m.id.as_str()).collect();
    corrections
        .into_iter()
        .filter(|c| {
            (models.is_empty() || models.contains(c.model_id.as_str()))
                && cfg.prompts.contains(&c.prompt_id)
                && cfg.languages.contains(&c.language)
        })
        .collect()
}

/// External scoring services. Either may be absent; the metrics they
/// provide are then missing.
#[derive(Default)]
pub struct Scorers {
    pub checker: Option<LanguageToolClient>,
    pub scorer: Option<ScorerClient>,
    pub checker_concurrency: usize,
}

impl Scorers {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let checker = match &cfg.checker.url {
            Some(url) => Some(
                LanguageToolClient::new(url, Duration::from_secs(cfg.checker.timeout_secs))?
                    .with_codes(&cfg.checker.languages),
            ),
            None => None,
        };
        let scorer = match &cfg.scorer.url {
            Some(url) => Some(
                ScorerClient::new(url, Duration::from_secs(cfg.scorer.timeout_secs))?
                    .with_batch_cap(cfg.scorer.batch_size)
                    .with_rescale(cfg.scorer.rescale_with_baseline),
            ),
            None => None,
        };
        Ok(Self {
            checker,
            scorer,
            checker_concurrency: cfg.checker.concurrency.max(1),
        })
    }
}

pub struct ScoreSet {
    pub sentences: BTreeMap<CellKey, Vec<SentenceScores>>,
    pub cells: BTreeMap<CellKey, CellResult>,
}

fn checker_scores(
    scorers: &Scorers,
    texts: &BTreeSet<(Language, &str)>,
) -> Result<HashMap<(Language, String), f64>> {
    let Some(checker) = &scorers.checker else {
        log::warn!("no checker configured; LT scores will be missing");
        return Ok(HashMap::new());
    };
    let items: Vec<(Language, &str)> = texts.iter().copied().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scorers.checker_concurrency)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Option<f64>> = pool.install(|| {
        items
            .par_iter()
            .map(|&(lang, text)| match checker.check(text, lang) {
                Ok(r) => Some(correctness_score(&r)),
                Err(e) => {
                    log::warn!("{e}");
                    None
                }
            })
            .collect()
    });
    Ok(items
        .into_iter()
        .zip(results)
        .filter_map(|((l, t), r)| r.map(|v| ((l, t.to_string()), v)))
        .collect())
}

type SemanticMap = HashMap<(String, String), [f64; 3]>;

fn semantic_scores(scorers: &Scorers, pairs: &BTreeSet<(&str, &str)>) -> SemanticMap {
    let Some(scorer) = &scorers.scorer else {
        log::warn!("no scorer configured; semantic scores will be missing");
        return HashMap::new();
    };
    let items: Vec<(&str, &str)> = pairs.iter().copied().collect();
    match scorer.semantic_scores_batch(&items) {
        Ok(scores) => items
            .into_iter()
            .zip(scores)
            .map(|((s, o), sc)| ((s.to_string(), o.to_string()), [sc.bertscore, sc.sbert, sc.bleurt]))
            .collect(),
        Err(e) => {
            log::warn!("semantic scoring failed, metrics left missing: {e}");
            HashMap::new()
        }
    }
}

fn lid_probabilities(scorers: &Scorers, texts: &BTreeSet<&str>) -> HashMap<String, LanguageProbabilities> {
    let Some(scorer) = &scorers.scorer else {
        return HashMap::new();
    };
    let items: Vec<String> = texts.iter().map(|t| t.to_string()).collect();
    match scorer.lid(&items, &Language::ALL) {
        Ok(probs) => items.into_iter().zip(probs).collect(),
        Err(e) => {
            log::warn!("language identification failed, drift left missing: {e}");
            HashMap::new()
        }
    }
}

/// Scores every correction and aggregates the cells. Every cell must cover
/// its language's full corpus slice.
pub fn score_corrections(
    corpus: &BTreeMap<Language, Vec<SentenceRecord>>,
    corrections: &[Correction],
    scorers: &Scorers,
) -> Result<ScoreSet> {
    let by_id: HashMap<&str, &SentenceRecord> = corpus
        .values()
        .flatten()
        .map(|s| (s.id.as_str(), s))
        .collect();
    let mut groups: BTreeMap<CellKey, Vec<(&Correction, &SentenceRecord)>> = BTreeMap::new();
    for c in corrections {
        let record = by_id
            .get(c.sentence_id.as_str())
            .ok_or_else(|| Error::Config(format!("correction for unknown sentence `{}`", c.sentence_id)))?;
        if record.language != c.language {
            return Err(Error::Config(format!(
                "correction for {} is labelled {} but the sentence is {}",
                c.sentence_id, c.language, record.language
            )));
        }
        groups
            .entry(CellKey::new(c.model_id.clone(), c.prompt_id, c.language))
            .or_default()
            .push((c, record));
    }
    for (key, pairs) in &groups {
        let expected = corpus.get(&key.language).map_or(0, Vec::len);
        if pairs.len() != expected {
            return Err(Error::CoverageMismatch(format!(
                "{}/{}/{} covers {} of {} sentences",
                key.model_id,
                key.prompt_id,
                key.language,
                pairs.len(),
                expected
            )));
        }
    }

    let lt_texts: BTreeSet<(Language, &str)> = corrections.iter().map(|c| (c.language, c.output_text.as_str())).collect();
    let lt = checker_scores(scorers, &lt_texts)?;
    let pairs: BTreeSet<(&str, &str)> = groups
        .values()
        .flatten()
        .map(|(c, r)| (r.text.as_str(), c.output_text.as_str()))
        .collect();
    let semantic = semantic_scores(scorers, &pairs);
    let lid_texts: BTreeSet<&str> = pairs.iter().flat_map(|&(s, o)| [s, o]).collect();
    let lid = lid_probabilities(scorers, &lid_texts);

    let mut sentences = BTreeMap::new();
    let mut cells = BTreeMap::new();
    for (key, pairs) in &groups {
        let scores: Vec<SentenceScores> = pairs
            .par_iter()
            .map(|(c, r)| {
                let (src, out, lang) = (r.text.as_str(), c.output_text.as_str(), r.language);
                let mut v = MetricVector::default();
                v.set(Metric::Lt, lt.get(&(lang, out.to_string())).copied());
                if let Some(s) = semantic.get(&(src.to_string(), out.to_string())) {
                    v.set(Metric::Bertscore, Some(s[0]));
                    v.set(Metric::Sbert, Some(s[1]));
                    v.set(Metric::Bleurt, Some(s[2]));
                }
                v.set(Metric::Levenshtein, Some(levenshtein_score(src, out)));
                v.set(Metric::LengthDiff, Some(length_diff_score(src, out, lang)));
                v.set(Metric::Gleu, Some(gleu_score(src, out, lang)));
                if let (Some(p_in), Some(p_out)) = (lid.get(src), lid.get(out)) {
                    v.set(Metric::Drift, drift_score(p_in, p_out, lang).ok());
                }
                SentenceScores {
                    sentence_id: r.id.clone(),
                    metrics: v,
                }
            })
            .collect();
        let preservation = preservation_f1(pairs.iter().copied());
        cells.insert(key.clone(), evaluate_cell(&scores, preservation));
        sentences.insert(key.clone(), scores);
    }
    Ok(ScoreSet { sentences, cells })
}

/// Scores a corrections file into `out_dir` (score cache, cells, manifest).
pub fn run_score_into(cfg: &RunConfig, corrections_file: &Path, out_dir: &Path) -> Result<ScoreSet> {
    let corpus = load_corpus(cfg)?;
    let known: BTreeSet<String> = corpus.values().flatten().map(|s| s.id.clone()).collect();
    let corrections = select_corrections(cfg, load_corrections(corrections_file, Some(&known))?);
    if corrections.is_empty() {
        return Err(Error::Empty(format!("no corrections selected from {}", corrections_file.display())));
    }
    let scorers = Scorers::from_config(cfg)?;
    let set = score_corrections(&corpus, &corrections, &scorers)?;

    std::fs::create_dir_all(out_dir)?;
    write_score_cache(File::create(out_dir.join(SCORES_FILE))?, &set.sentences)?;
    write_cells_csv(File::create(out_dir.join(CELLS_FILE))?, &set.cells)?;

    let mut m = Manifest::load_or_default(out_dir)?;
    m.stamp(cfg, "score");
    m.corpus_hashes = corpus_hashes(cfg)?;
    m.corrections_hash = Some(sha256_file(corrections_file)?);
    if let Some(checker) = &scorers.checker {
        m.checker_version = checker.server_version().map(String::from);
        if let (Some(seen), Some(want)) = (&m.checker_version, &cfg.checker.version) {
            if seen != want {
                log::warn!("checker reports version {seen}, config pins {want}");
            }
        }
    }
    if let Some(scorer) = &scorers.scorer {
        match scorer.health() {
            Ok(h) => m.scorer_versions = h.model_versions,
            Err(e) => log::warn!("scorer health unavailable: {e}"),
        }
    }
    m.save(out_dir)?;
    for (key, cell) in &set.cells {
        for (metric, cov) in cell.incomplete_metrics() {
            log::warn!(
                "{}/{}/{}: {metric} coverage {:.3}",
                key.model_id,
                key.prompt_id,
                key.language,
                cov.ratio()
            );
        }
    }
    Ok(set)
}

pub fn run_score(cfg: &RunConfig, offline: Option<&Path>) -> Result<ScoreSet> {
    let path = corrections_path(cfg, offline)?;
    run_score_into(cfg, &path, &cfg.out_dir)
}

pub fn load_cells(dir: &Path) -> Result<BTreeMap<CellKey, CellResult>> {
    let path = dir.join(CELLS_FILE);
    if !path.exists() {
        return Err(Error::MissingArtifact { path, stage: "score" });
    }
    read_cells_csv(File::open(path)?)
}

/// Vectors of the ranking prompt, per language and model.
pub fn ranking_vectors(
    cfg: &RunConfig,
    cells: &BTreeMap<CellKey, CellResult>,
) -> BTreeMap<Language, BTreeMap<String, MetricVector>> {
    let models: BTreeSet<&str> = cfg.models.iter().map(|m| m.id.as_str()).collect();
    let mut out: BTreeMap<Language, BTreeMap<String, MetricVector>> = BTreeMap::new();
    for (key, cell) in cells {
        if key.prompt_id == cfg.ranking.prompt
            && cfg.languages.contains(&key.language)
            && (models.is_empty() || models.contains(key.model_id.as_str()))
        {
            out.entry(key.language).or_default().insert(key.model_id.clone(), cell.vector);
        }
    }
    out
}

pub fn rank_cells(cfg: &RunConfig, cells: &BTreeMap<CellKey, CellResult>) -> Result<RankingSet> {
    let vectors = ranking_vectors(cfg, cells);
    if vectors.is_empty() {
        return Err(Error::Empty(format!("no cells for ranking prompt {}", cfg.ranking.prompt)));
    }
    rank_all(&vectors, cfg.ranking.aggregate, cfg.ranking.precision)
}

pub fn run_rank(cfg: &RunConfig) -> Result<RankingSet> {
    let cells = load_cells(&cfg.out_dir)?;
    let rankings = rank_cells(cfg, &cells)?;
    let inputs = ReportInputs {
        rankings: Some(&rankings),
        ..Default::default()
    };
    write_rank_files(&cfg.out_dir, &inputs)?;
    let mut m = Manifest::load_or_default(&cfg.out_dir)?;
    m.stamp(cfg, "rank");
    m.save(&cfg.out_dir)?;
    Ok(rankings)
}

fn write_rank_files(out_dir: &Path, inputs: &ReportInputs) -> Result<()> {
    let files = render_tables(inputs)?
        .into_iter()
        .filter(|(name, _)| name.starts_with("ranks_") || name == "global_ranking.csv")
        .collect();
    write_files(out_dir, files)?;
    Ok(())
}

/// Ranks a hand-authored `model,<metrics...>` table and writes
/// `ranks_table.csv`.
pub fn run_rank_table(cfg: &RunConfig, table: &Path) -> Result<crate::ranking::TwoStepResult> {
    let vectors = read_metric_table(File::open(table)?)?;
    let result = two_step_global_rank("table", &vectors, cfg.ranking.precision)?;
    let set = RankingSet {
        per_language: BTreeMap::new(),
        overall: result.clone(),
        aggregate: cfg.ranking.aggregate,
    };
    let inputs = ReportInputs {
        rankings: Some(&set),
        ..Default::default()
    };
    let files = render_tables(&inputs)?
        .into_iter()
        .filter(|(name, _)| name == "ranks_overall.csv")
        .map(|(_, content)| ("ranks_table.csv".to_string(), content))
        .collect();
    write_files(&cfg.out_dir, files)?;
    Ok(result)
}

/// All report tables from the scored cells, plus pattern counts when a
/// corrections file is available.
pub fn run_report(cfg: &RunConfig, offline: Option<&Path>) -> Result<Vec<PathBuf>> {
    let cells = load_cells(&cfg.out_dir)?;
    let per_language = ranking_vectors(cfg, &cells);
    let rankings = rank_cells(cfg, &cells)?;
    let languages: Vec<Language> = per_language.keys().copied().collect();
    let macro_scores = macro_vectors(&per_language, &languages)?;

    let pcells = prompt_cells(&cells);
    let selection = if cfg.prompts.len() == PromptId::ALL.len() {
        match prompt_selection_table(&pcells, cfg.ranking.precision) {
            Ok(s) => Some(s),
            Err(e) => {
                log::warn!("prompt selection skipped: {e}");
                None
            }
        }
    } else {
        None
    };

    let mut drift: BTreeMap<String, BTreeMap<Language, f64>> = BTreeMap::new();
    let mut drift_complete = true;
    for (lang, models) in &per_language {
        for (model, v) in models {
            match v.get(Metric::Drift) {
                Some(d) => {
                    drift.entry(model.clone()).or_default().insert(*lang, d);
                }
                None => drift_complete = false,
            }
        }
    }
    let support = drift_complete.then(|| language_support_verdict(&drift, cfg.ranking.support_threshold));

    let corrections = match corrections_path(cfg, offline) {
        Ok(p) => Some(select_corrections(cfg, load_corrections(&p, None)?)),
        Err(_) => None,
    };
    let rule_set = rules(cfg)?;
    let counts = corrections.as_ref().map(|c| pattern_counts(c, &rule_set));

    let manifest = Manifest::load_or_default(&cfg.out_dir)?;
    let inputs = ReportInputs {
        per_language,
        macro_scores: Some(macro_scores),
        rankings: Some(&rankings),
        prompt_selection: selection.as_ref(),
        support: support.as_ref(),
        patterns: counts.as_deref(),
        stability: None,
        stamp: manifest.stamp_lines(),
    };
    let written = emit_tables(&cfg.out_dir, &inputs)?;
    let mut m = manifest;
    m.stamp(cfg, "report");
    m.save(&cfg.out_dir)?;
    Ok(written)
}

pub fn run_patterns(cfg: &RunConfig, offline: Option<&Path>) -> Result<Vec<crate::report::PatternCount>> {
    let path = corrections_path(cfg, offline)?;
    let corrections = select_corrections(cfg, load_corrections(&path, None)?);
    let counts = pattern_counts(&corrections, &rules(cfg)?);
    let inputs = ReportInputs {
        patterns: Some(&counts),
        ..Default::default()
    };
    let files = render_tables(&inputs)?
        .into_iter()
        .filter(|(name, _)| name == "patterns.csv")
        .collect();
    write_files(&cfg.out_dir, files)?;
    Ok(counts)
}

/// Compares the cells of several run directories.
pub fn run_stability(cfg: &RunConfig, run_dirs: &[PathBuf]) -> Result<crate::report::StabilityReport> {
    let runs: Vec<_> = run_dirs.iter().map(|d| load_cells(d)).collect::<Result<_>>()?;
    let report = stability_report(&runs)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    report.write_csv(File::create(cfg.out_dir.join("stability.csv"))?)?;
    Ok(report)
}

/// Scores the same corrections `runs` times into `out/runs/run-<k>` and
/// compares them.
pub fn run_stability_repeat(
    cfg: &RunConfig,
    offline: Option<&Path>,
    runs: usize,
) -> Result<crate::report::StabilityReport> {
    let path = corrections_path(cfg, offline)?;
    let mut dirs = Vec::new();
    for k in 1..=runs {
        let dir = cfg.out_dir.join("runs").join(format!("run-{k}"));
        run_score_into(cfg, &path, &dir)?;
        dirs.push(dir);
    }
    run_stability(cfg, &dirs)
}

/// Checks configuration and reachability of the configured services.
/// Writes nothing.
pub fn dry_run(cfg: &RunConfig) -> Result<Vec<String>> {
    cfg.validate()?;
    let mut lines = vec![format!("config ok (hash {})", cfg.hash())];
    let catalog = catalog(cfg)?;
    for e in catalog.list_prompts() {
        if !e.present {
            lines.push(format!("missing template {} for {}", e.prompt_id, e.language));
        }
    }
    let scorers = Scorers::from_config(cfg)?;
    let mut failures = Vec::new();
    if let Some(checker) = &scorers.checker {
        match checker.check("", Language::En) {
            Ok(_) => lines.push(format!(
                "checker reachable (version {})",
                checker.server_version().unwrap_or("unknown")
            )),
            Err(e) => failures.push(format!("checker: {e}")),
        }
    }
    if let Some(scorer) = &scorers.scorer {
        match scorer.health() {
            Ok(h) => lines.push(format!("scorer reachable (status {})", h.status)),
            Err(e) => failures.push(format!("scorer: {e}")),
        }
    }
    for model in &cfg.models {
        if let Ok(endpoint) = cfg.endpoint_for(model) {
            let client = ChatClient::new(&endpoint, model.served_name(), cfg.api_key.clone(), Duration::from_secs(10))?;
            match client.ping() {
                Ok(()) => lines.push(format!("endpoint for {} reachable", model.id)),
                Err(e) => failures.push(format!("endpoint for {}: {e}", model.id)),
            }
        }
    }
    if failures.is_empty() {
        Ok(lines)
    } else {
        Err(Error::Config(failures.join("; ")))
    }
}

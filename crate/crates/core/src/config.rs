//! Run configuration: one TOML file plus environment overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{LabelScheme, StdDevKind};
use crate::error::{Error, Result};
use crate::gateway::GenerationConfig;
use crate::language::Language;
use crate::prompts::PromptId;
use crate::ranking::{Aggregate, Precision};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub id: String,
    /// Model name sent to the endpoint; defaults to `id`.
    #[serde(default)]
    pub served_name: Option<String>,
    #[serde(default)]
    pub endpoint: Option<String>,
}

impl ModelConfig {
    pub fn served_name(&self) -> &str {
        self.served_name.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub files: BTreeMap<Language, PathBuf>,
    pub labels: LabelScheme,
    pub stddev: StdDevKind,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            files: BTreeMap::new(),
            labels: LabelScheme::default(),
            stddev: StdDevKind::Population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    pub endpoint: Option<String>,
    pub timeout_secs: u64,
    pub retries: u32,
    pub backoff_ms: u64,
    pub concurrency: usize,
    #[serde(flatten)]
    pub params: GenerationConfig,
}

impl Default for GenerationSection {
    fn default() -> Self {
        Self {
            endpoint: None,
            timeout_secs: 120,
            retries: 3,
            backoff_ms: 1000,
            concurrency: 4,
            params: GenerationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckerConfig {
    pub url: Option<String>,
    /// Expected server version; a mismatch is logged and stamped.
    pub version: Option<String>,
    pub languages: BTreeMap<Language, String>,
    pub concurrency: usize,
    pub timeout_secs: u64,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        Self {
            url: None,
            version: None,
            languages: BTreeMap::new(),
            concurrency: 4,
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerConfig {
    pub url: Option<String>,
    pub batch_size: usize,
    pub rescale_with_baseline: Option<bool>,
    pub timeout_secs: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            url: None,
            batch_size: 64,
            rescale_with_baseline: None,
            timeout_secs: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    pub precision: Precision,
    pub aggregate: Aggregate,
    /// Prompt whose cells feed the model ranking.
    pub prompt: PromptId,
    pub support_threshold: f64,
}

impl Default for RankingConfig {
    fn default() -> Self {
        Self {
            precision: Precision::Rounded,
            aggregate: Aggregate::Macro,
            prompt: PromptId::P3,
            support_threshold: -0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub languages: Vec<Language>,
    pub prompts: Vec<PromptId>,
    pub prompt_dir: Option<PathBuf>,
    pub pattern_rules: Option<PathBuf>,
    pub corpus: CorpusConfig,
    pub models: Vec<ModelConfig>,
    pub generation: GenerationSection,
    pub checker: CheckerConfig,
    pub scorer: ScorerConfig,
    pub ranking: RankingConfig,
    /// API key for the chat endpoint; only ever set from the environment.
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("gec-eval-out"),
            languages: Language::ALL.to_vec(),
            prompts: PromptId::ALL.to_vec(),
            prompt_dir: None,
            pattern_rules: None,
            corpus: CorpusConfig::default(),
            models: Vec::new(),
            generation: GenerationSection::default(),
            checker: CheckerConfig::default(),
            scorer: ScorerConfig::default(),
            ranking: RankingConfig::default(),
            api_key: None,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.out_dir);
        for p in cfg.corpus.files.values_mut() {
            resolve(base, p);
        }
        for p in [&mut cfg.prompt_dir, &mut cfg.pattern_rules].into_iter().flatten() {
            resolve(base, p);
        }
        Ok(cfg)
    }

    /// Applies `GEC_API_KEY`, `GEC_ENDPOINT`, `GEC_CHECKER_URL` and
    /// `GEC_SCORER_URL` through the given lookup.
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(v) = get("GEC_API_KEY") {
            self.api_key = Some(v);
        }
        if let Some(v) = get("GEC_ENDPOINT") {
            self.generation.endpoint = Some(v);
        }
        if let Some(v) = get("GEC_CHECKER_URL") {
            self.checker.url = Some(v);
        }
        if let Some(v) = get("GEC_SCORER_URL") {
            self.scorer.url = Some(v);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.languages.is_empty() {
            return Err(Error::Config("no languages selected".into()));
        }
        if self.prompts.is_empty() {
            return Err(Error::Config("no prompts selected".into()));
        }
        self.generation.params.validate()?;
        let mut paths: Vec<(&str, &Path)> = self
            .corpus
            .files
            .iter()
            .filter(|(l, _)| self.languages.contains(l))
            .map(|(_, p)| ("corpus file", p.as_path()))
            .collect();
        if let Some(p) = &self.prompt_dir {
            paths.push(("prompt directory", p));
        }
        if let Some(p) = &self.pattern_rules {
            paths.push(("pattern rules", p));
        }
        for (what, p) in paths {
            if !p.exists() {
                return Err(Error::Config(format!("{what} {} does not exist", p.display())));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for m in &self.models {
            if !seen.insert(m.id.as_str()) {
                return Err(Error::Config(format!("model id `{}` listed twice", m.id)));
            }
        }
        if !(self.ranking.support_threshold >= -1.0 && self.ranking.support_threshold <= 1.0) {
            return Err(Error::Config("support_threshold must be in [-1, 1]".into()));
        }
        Ok(())
    }

    pub fn endpoint_for(&self, model: &ModelConfig) -> Result<String> {
        model
            .endpoint
            .clone()
            .or_else(|| self.generation.endpoint.clone())
            .ok_or_else(|| Error::Config(format!("no endpoint for model `{}` (set GEC_ENDPOINT)", model.id)))
    }

    /// Hex SHA-256 of the canonical JSON form (secrets excluded).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

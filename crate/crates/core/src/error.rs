use std::path::PathBuf;

use thiserror::Error;

use crate::metrics::Metric;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown language `{0}` (expected one of en, de, it, sv)")]
    UnknownLanguage(String),

    #[error("unknown prompt id `{0}` (expected P1, P2 or P3)")]
    UnknownPrompt(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no template for prompt {prompt} in language {language}")]
    MissingTemplate { prompt: String, language: String },

    #[error("generation failed for sentence {sentence_id}: {message}")]
    Generation { sentence_id: String, message: String },

    #[error("grammar check failed: {0}")]
    Check(String),

    #[error("scorer request failed: {0}")]
    Scorer(String),

    #[error("language `{0}` missing from probability map")]
    MissingProbability(String),

    #[error("metric {0} is missing or incomplete")]
    MissingMetric(Metric),

    #[error("value for model `{model}` is not finite")]
    NonFinite { model: String },

    #[error("ranking inputs disagree on the model set")]
    ModelSetMismatch,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("coverage mismatch between runs: {0}")]
    CoverageMismatch(String),

    #[error("missing upstream artifact {path}; run `gec-eval {stage}` first")]
    MissingArtifact { path: PathBuf, stage: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

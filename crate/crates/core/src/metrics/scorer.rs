//! Client for the neural scoring sidecar (`/score`, `/lid`, `/health`).
//!
//! For every semantic metric the source sentence is sent as `reference`
//! and the model output as `candidate`.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::LanguageProbabilities;
use crate::error::{Error, Result};
use crate::language::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticMetric {
    Bertscore,
    Sbert,
    Bleurt,
}

impl SemanticMetric {
    pub const ALL: [SemanticMetric; 3] = [SemanticMetric::Bertscore, SemanticMetric::Sbert, SemanticMetric::Bleurt];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticScores {
    pub bertscore: f64,
    pub sbert: f64,
    pub bleurt: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScorePair<'a> {
    pub reference: &'a str,
    pub candidate: &'a str,
}

#[derive(Debug, Serialize)]
struct ScoreRequest<'a> {
    metric: SemanticMetric,
    pairs: Vec<ScorePair<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rescale_with_baseline: Option<bool>,
}

#[derive(Debug, Deserialize)]
struct ScoreResponse {
    scores: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct LidRequest<'a> {
    texts: &'a [String],
    languages: Vec<&'static str>,
}

#[derive(Debug, Deserialize)]
struct LidResponse {
    probabilities: Vec<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerHealth {
    pub status: String,
    #[serde(default)]
    pub model_versions: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct ScorerClient {
    base_url: String,
    http: reqwest::blocking::Client,
    batch_cap: usize,
    rescale_with_baseline: Option<bool>,
}

impl ScorerClient {
    pub fn new(base_url: &str, timeout: Duration) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Scorer(e.to_string()))?;
        Ok(Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            http,
            batch_cap: 64,
            rescale_with_baseline: None,
        })
    }

    pub fn with_batch_cap(mut self, cap: usize) -> Self {
        self.batch_cap = cap.max(1);
        self
    }

    pub fn with_rescale(mut self, rescale: Option<bool>) -> Self {
        self.rescale_with_baseline = rescale;
        self
    }

    fn post<T: Serialize + ?Sized, R: for<'de> Deserialize<'de>>(&self, path: &str, body: &T) -> Result<R> {
        let url = format!("{}{}", self.base_url, path);
        let resp = self
            .http
            .post(&url)
            .json(body)
            .send()
            .map_err(|e| Error::Scorer(format!("{url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(Error::Scorer(format!("{url}: HTTP {status}: {text}")));
        }
        resp.json().map_err(|e| Error::Scorer(format!("{url}: bad response: {e}")))
    }

    /// Scores `(reference, candidate)` pairs, chunked by the batch cap.
    pub fn score(&self, metric: SemanticMetric, pairs: &[(&str, &str)]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(self.batch_cap) {
            let request = ScoreRequest {
                metric,
                pairs: chunk
                    .iter()
                    .map(|&(reference, candidate)| ScorePair { reference, candidate })
                    .collect(),
                rescale_with_baseline: self.rescale_with_baseline,
            };
            let resp: ScoreResponse = self.post("/score", &request)?;
            if resp.scores.len() != chunk.len() {
                return Err(Error::Scorer(format!(
                    "expected {} scores, got {}",
                    chunk.len(),
                    resp.scores.len()
                )));
            }
            if resp.scores.iter().any(|s| !s.is_finite()) {
                return Err(Error::Scorer("non-finite score in response".into()));
            }
            out.extend(resp.scores);
        }
        Ok(out)
    }

    /// All three semantic similarities for a batch of `(source, output)` pairs.
    pub fn semantic_scores_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<SemanticScores>> {
        let bertscore = self.score(SemanticMetric::Bertscore, pairs)?;
        let sbert = self.score(SemanticMetric::Sbert, pairs)?;
        let bleurt = self.score(SemanticMetric::Bleurt, pairs)?;
        Ok((0..pairs.len())
            .map(|i| SemanticScores {
                bertscore: bertscore[i],
                sbert: sbert[i],
                bleurt: bleurt[i],
            })
            .collect())
    }

    pub fn semantic_scores(&self, source: &str, output: &str, _language: Language) -> Result<SemanticScores> {
        Ok(self.semantic_scores_batch(&[(source, output)])?[0])
    }

    /// Probabilities of each requested language for every text.
    pub fn lid(&self, texts: &[String], languages: &[Language]) -> Result<Vec<LanguageProbabilities>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_cap) {
            let request = LidRequest {
                texts: chunk,
                languages: languages.iter().map(|l| l.code()).collect(),
            };
            let resp: LidResponse = self.post("/lid", &request)?;
            if resp.probabilities.len() != chunk.len() {
                return Err(Error::Scorer(format!(
                    "expected {} probability maps, got {}",
                    chunk.len(),
                    resp.probabilities.len()
                )));
            }
            for (text, map) in chunk.iter().zip(resp.probabilities) {
                let mut probability_of = BTreeMap::new();
                for (code, p) in map {
                    if let Ok(lang) = code.parse::<Language>() {
                        if !(0.0..=1.0).contains(&p) {
                            return Err(Error::Scorer(format!("probability {p} out of range")));
                        }
                        probability_of.insert(lang, p);
                    }
                }
                out.push(LanguageProbabilities {
                    text: text.clone(),
                    probability_of,
                });
            }
        }
        Ok(out)
    }

    pub fn health(&self) -> Result<ScorerHealth> {
        let url = format!("{}/health", self.base_url);
        let resp = self
            .http
            .get(&url)
            .send()
            .map_err(|e| Error::Scorer(format!("{url}: {e}")))?;
        if !resp.status().is_success() {
            return Err(Error::Scorer(format!("{url}: HTTP {}", resp.status())));
        }
        resp.json().map_err(|e| Error::Scorer(format!("{url}: bad response: {e}")))
    }
}

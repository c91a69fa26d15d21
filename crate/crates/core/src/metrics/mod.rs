//! Per-sentence metrics and their aggregation into metric vectors.

mod cell;
mod gleu;
mod levenshtein;
mod scorer;
mod tokenize;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::SentenceRecord;
use crate::error::{Error, Result};
use crate::gateway::Correction;
use crate::language::Language;

pub use cell::{
    evaluate_cell, macro_average, macro_average_over, read_cells_csv, read_score_cache, write_cells_csv, write_score_cache, CellKey,
    CellResult, Coverage, SentenceScores,
};
pub(crate) use cell::sentence_order;
pub use gleu::{gleu_score, gleu_tokens};
pub use levenshtein::{edit_distance, edit_distance_chars, levenshtein_score};
pub use scorer::{ScorerClient, ScorerHealth, SemanticMetric, SemanticScores};
pub use tokenize::word_tokenize;

/// The nine reported metrics; every one of them is higher-is-better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Lt,
    Bertscore,
    Sbert,
    Bleurt,
    Levenshtein,
    LengthDiff,
    Gleu,
    Drift,
    PreservationF1,
}

impl Metric {
    /// Table column order.
    pub const ALL: [Metric; 9] = [
        Metric::Lt,
        Metric::Bertscore,
        Metric::Sbert,
        Metric::Bleurt,
        Metric::Levenshtein,
        Metric::LengthDiff,
        Metric::Gleu,
        Metric::Drift,
        Metric::PreservationF1,
    ];

    pub const SEMANTIC: [Metric; 3] = [Metric::Bertscore, Metric::Sbert, Metric::Bleurt];
    pub const SYNTACTIC: [Metric; 3] = [Metric::Gleu, Metric::LengthDiff, Metric::Levenshtein];

    pub fn id(self) -> &'static str {
        match self {
            Metric::Lt => "lt",
            Metric::Bertscore => "bertscore",
            Metric::Sbert => "sbert",
            Metric::Bleurt => "bleurt",
            Metric::Levenshtein => "levenshtein",
            Metric::LengthDiff => "length_diff",
            Metric::Gleu => "gleu",
            Metric::Drift => "drift",
            Metric::PreservationF1 => "preservation_f1",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Metric::Lt => "LT",
            Metric::Bertscore => "BERT Score",
            Metric::Sbert => "SentenceBERT",
            Metric::Bleurt => "BLEURT",
            Metric::Levenshtein => "Levenshtein",
            Metric::LengthDiff => "Length diff",
            Metric::Gleu => "GLEU",
            Metric::Drift => "Language drift",
            Metric::PreservationF1 => "Correct (F1)",
        }
    }

    fn index(self) -> usize {
        Metric::ALL.iter().position(|&m| m == self).unwrap()
    }

    /// Closed range a valid value must fall in, when the metric has one.
    pub fn bounds(self) -> Option<(f64, f64)> {
        match self {
            Metric::Lt | Metric::Levenshtein | Metric::LengthDiff | Metric::Gleu | Metric::PreservationF1 => {
                Some((0.0, 1.0))
            }
            Metric::Drift | Metric::Sbert => Some((-1.0, 1.0)),
            Metric::Bertscore | Metric::Bleurt => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.id() == s.trim())
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// Values of the nine metrics for one sentence or one aggregated cell.
/// A metric without a value is missing (never imputed).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricVector {
    values: [Option<f64>; 9],
}

impl MetricVector {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        self.values[metric.index()]
    }

    pub fn set(&mut self, metric: Metric, value: Option<f64>) {
        self.values[metric.index()] = value;
    }

    pub fn with(mut self, metric: Metric, value: f64) -> Self {
        self.set(metric, Some(value));
        self
    }

    pub fn require(&self, metric: Metric) -> Result<f64> {
        self.get(metric).ok_or(Error::MissingMetric(metric))
    }

    pub fn from_values(values: [f64; 9]) -> Self {
        Self {
            values: values.map(Some),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Metric, Option<f64>)> + '_ {
        Metric::ALL.into_iter().map(|m| (m, self.get(m)))
    }

    /// Metrics whose value lies outside the metric's range.
    pub fn out_of_bounds(&self) -> Vec<Metric> {
        self.iter()
            .filter_map(|(m, v)| {
                let (lo, hi) = m.bounds()?;
                let v = v?;
                (!(lo..=hi).contains(&v)).then_some(m)
            })
            .collect()
    }
}

/// `1 - |n_i - n_o| / max(n_i, n_o)` over token counts. Both empty gives 1.
pub fn length_diff_counts(source_tokens: usize, output_tokens: usize) -> f64 {
    let max = source_tokens.max(output_tokens);
    if max == 0 {
        return 1.0;
    }
    1.0 - source_tokens.abs_diff(output_tokens) as f64 / max as f64
}

pub fn length_diff_score(source: &str, output: &str, _language: Language) -> f64 {
    length_diff_counts(word_tokenize(source).len(), word_tokenize(output).len())
}

/// Language-identification probabilities for one text.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LanguageProbabilities {
    pub text: String,
    pub probability_of: BTreeMap<Language, f64>,
}

impl LanguageProbabilities {
    pub fn probability(&self, language: Language) -> Result<f64> {
        self.probability_of
            .get(&language)
            .copied()
            .ok_or_else(|| Error::MissingProbability(language.to_string()))
    }
}

/// `P(l | output) - P(l | source)`; positive when the output is more
/// confidently in the expected language.
pub fn drift_score(source: &LanguageProbabilities, output: &LanguageProbabilities, language: Language) -> Result<f64> {
    Ok(output.probability(language)? - source.probability(language)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PreservationCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl PreservationCounts {
    /// Counts one sentence: `copied` is `source == output`.
    pub fn record(&mut self, copied: bool, gold_correct: bool) {
        match (copied, gold_correct) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => {}
        }
    }

    /// `2tp / (2tp + fp + fn)`, zero when there are no true positives.
    pub fn f1(&self) -> f64 {
        if self.tp == 0 {
            return 0.0;
        }
        let tp2 = 2.0 * self.tp as f64;
        tp2 / (tp2 + self.fp as f64 + self.fn_ as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreservationResult {
    pub counts: PreservationCounts,
    pub f1: f64,
}

/// Exact string equality between the (post-processed) output and the source.
pub fn is_copy(source: &str, output: &str) -> bool {
    source == output
}

pub fn preservation_f1<'a, I>(pairs: I) -> PreservationResult
where
    I: IntoIterator<Item = (&'a Correction, &'a SentenceRecord)>,
{
    let mut counts = PreservationCounts::default();
    for (correction, record) in pairs {
        counts.record(is_copy(&record.text, &correction.output_text), record.is_correct);
    }
    PreservationResult { counts, f1: counts.f1() }
}

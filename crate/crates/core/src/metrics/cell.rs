use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Metric, MetricVector, PreservationCounts, PreservationResult};
use crate::error::{Error, Result};
use crate::language::Language;
use crate::prompts::PromptId;

/// One (model, prompt, language) evaluation cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub model_id: String,
    pub prompt_id: PromptId,
    pub language: Language,
}

impl CellKey {
    pub fn new(model_id: impl Into<String>, prompt_id: PromptId, language: Language) -> Self {
        Self {
            model_id: model_id.into(),
            prompt_id,
            language,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScores {
    pub sentence_id: String,
    pub metrics: MetricVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Coverage {
    pub present: usize,
    pub total: usize,
}

impl Coverage {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.present as f64 / self.total as f64
        }
    }

    pub fn is_complete(&self) -> bool {
        self.total > 0 && self.present == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub vector: MetricVector,
    pub coverage: BTreeMap<Metric, Coverage>,
    pub preservation: PreservationCounts,
}

impl CellResult {
    pub fn incomplete_metrics(&self) -> Vec<(Metric, Coverage)> {
        self.coverage
            .iter()
            .filter(|(_, c)| !c.is_complete())
            .map(|(&m, &c)| (m, c))
            .collect()
    }
}

/// Numeric order for ids of the form `<lang>-<index>`.
pub(crate) fn sentence_order(id: &str) -> (String, u64, String) {
    match id.rsplit_once('-') {
        Some((prefix, idx)) => match idx.parse::<u64>() {
            Ok(n) => (prefix.to_string(), n, String::new()),
            Err(_) => (prefix.to_string(), u64::MAX, idx.to_string()),
        },
        None => (id.to_string(), u64::MAX, String::new()),
    }
}

/// Averages per-sentence scores (missing values excluded and counted in the
/// coverage) and attaches the corpus-level preservation F1.
pub fn evaluate_cell(scores: &[SentenceScores], preservation: PreservationResult) -> CellResult {
    let mut ordered: Vec<&SentenceScores> = scores.iter().collect();
    ordered.sort_by_key(|s| sentence_order(&s.sentence_id));

    let mut vector = MetricVector::default();
    let mut coverage = BTreeMap::new();
    for metric in Metric::ALL {
        if metric == Metric::PreservationF1 {
            continue;
        }
        let values: Vec<f64> = ordered.iter().filter_map(|s| s.metrics.get(metric)).collect();
        let cov = Coverage {
            present: values.len(),
            total: ordered.len(),
        };
        if cov.present < cov.total {
            log::warn!(
                "metric {metric} incomplete: coverage {}/{} ({:.3})",
                cov.present,
                cov.total,
                cov.ratio()
            );
        }
        let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        vector.set(metric, mean);
        coverage.insert(metric, cov);
    }
    vector.set(Metric::PreservationF1, Some(preservation.f1));
    coverage.insert(
        Metric::PreservationF1,
        Coverage {
            present: ordered.len(),
            total: ordered.len(),
        },
    );
    CellResult {
        vector,
        coverage,
        preservation: preservation.counts,
    }
}

/// Unweighted mean over exactly the `required` languages. A metric missing in
/// any language is missing in the result.
pub fn macro_average_over(per_language: &BTreeMap<Language, MetricVector>, required: &[Language]) -> Result<MetricVector> {
    if required.is_empty() {
        return Err(Error::Empty("no languages to average".into()));
    }
    for lang in required {
        if !per_language.contains_key(lang) {
            return Err(Error::Config(format!("macro average needs language {lang}")));
        }
    }
    let mut out = MetricVector::default();
    for metric in Metric::ALL {
        let mut sum = 0.0;
        let mut complete = true;
        for lang in Language::ALL.iter().filter(|l| required.contains(l)) {
            match per_language[lang].get(metric) {
                Some(v) => sum += v,
                None => complete = false,
            }
        }
        out.set(metric, complete.then(|| sum / required.len() as f64));
    }
    Ok(out)
}

/// Macro average over all four languages.
pub fn macro_average(per_language: &BTreeMap<Language, MetricVector>) -> Result<MetricVector> {
    macro_average_over(per_language, &Language::ALL)
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreRow {
    sentence_id: String,
    model_id: String,
    prompt_id: PromptId,
    language: Language,
    metric: Metric,
    value: f64,
}

/// Writes the per-sentence score cache: one row per present metric value,
/// ordered by cell, sentence index and metric.
pub fn write_score_cache<W: Write>(writer: W, scores: &BTreeMap<CellKey, Vec<SentenceScores>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sentence_id", "model_id", "prompt_id", "language", "metric", "value"])?;
    for (key, rows) in scores {
        let mut ordered: Vec<&SentenceScores> = rows.iter().collect();
        ordered.sort_by_key(|s| sentence_order(&s.sentence_id));
        for s in ordered {
            for (metric, value) in s.metrics.iter() {
                let Some(value) = value else { continue };
                w.write_record([
                    s.sentence_id.as_str(),
                    key.model_id.as_str(),
                    key.prompt_id.as_str(),
                    key.language.code(),
                    metric.id(),
                    &value.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_score_cache<R: Read>(reader: R) -> Result<BTreeMap<CellKey, Vec<SentenceScores>>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut cells: BTreeMap<CellKey, BTreeMap<String, MetricVector>> = BTreeMap::new();
    for row in r.deserialize() {
        let row: ScoreRow = row?;
        let key = CellKey::new(row.model_id, row.prompt_id, row.language);
        cells
            .entry(key)
            .or_default()
            .entry(row.sentence_id)
            .or_default()
            .set(row.metric, Some(row.value));
    }
    Ok(cells
        .into_iter()
        .map(|(k, sentences)| {
            let mut v: Vec<SentenceScores> = sentences
                .into_iter()
                .map(|(sentence_id, metrics)| SentenceScores { sentence_id, metrics })
                .collect();
            v.sort_by_key(|s| sentence_order(&s.sentence_id));
            (k, v)
        })
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct CellRow {
    model_id: String,
    prompt_id: PromptId,
    language: Language,
    metric: Metric,
    value: Option<f64>,
    present: usize,
    total: usize,
    tp: Option<usize>,
    fp: Option<usize>,
    #[serde(rename = "fn")]
    fn_: Option<usize>,
}

/// Aggregated cells, one row per (cell, metric) in key and column order.
pub fn write_cells_csv<W: Write>(writer: W, cells: &BTreeMap<CellKey, CellResult>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (key, cell) in cells {
        for metric in Metric::ALL {
            let cov = cell.coverage.get(&metric).copied().unwrap_or_default();
            let counts = (metric == Metric::PreservationF1).then_some(cell.preservation);
            w.serialize(CellRow {
                model_id: key.model_id.clone(),
                prompt_id: key.prompt_id,
                language: key.language,
                metric,
                value: cell.vector.get(metric),
                present: cov.present,
                total: cov.total,
                tp: counts.map(|c| c.tp),
                fp: counts.map(|c| c.fp),
                fn_: counts.map(|c| c.fn_),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_cells_csv<R: Read>(reader: R) -> Result<BTreeMap<CellKey, CellResult>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut cells: BTreeMap<CellKey, CellResult> = BTreeMap::new();
    for row in r.deserialize() {
        let row: CellRow = row?;
        let key = CellKey::new(row.model_id, row.prompt_id, row.language);
        let cell = cells.entry(key).or_insert_with(|| CellResult {
            vector: MetricVector::default(),
            coverage: BTreeMap::new(),
            preservation: PreservationCounts::default(),
        });
        cell.vector.set(row.metric, row.value);
        cell.coverage.insert(
            row.metric,
            Coverage {
                present: row.present,
                total: row.total,
            },
        );
        if row.metric == Metric::PreservationF1 {
            cell.preservation = PreservationCounts {
                tp: row.tp.unwrap_or(0),
                fp: row.fp.unwrap_or(0),
                fn_: row.fn_.unwrap_or(0),
            };
        }
    }
    Ok(cells)
}

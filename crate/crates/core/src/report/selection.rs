use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::language::Language;
use crate::metrics::{CellKey, CellResult, Metric, MetricVector};
use crate::prompts::PromptId;
use crate::ranking::{round3, Precision};

/// Mean vector over models for every (prompt, language). A metric missing
/// for any model is missing in the mean.
pub fn prompt_cells(cells: &BTreeMap<CellKey, CellResult>) -> BTreeMap<(PromptId, Language), MetricVector> {
    let mut groups: BTreeMap<(PromptId, Language), Vec<&MetricVector>> = BTreeMap::new();
    for (key, cell) in cells {
        groups.entry((key.prompt_id, key.language)).or_default().push(&cell.vector);
    }
    groups
        .into_iter()
        .map(|(k, vs)| {
            let mut mean = MetricVector::default();
            for m in Metric::ALL {
                let values: Option<Vec<f64>> = vs.iter().map(|v| v.get(m)).collect();
                mean.set(m, values.map(|xs| xs.iter().sum::<f64>() / xs.len() as f64));
            }
            (k, mean)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptSelection {
    pub cells: BTreeMap<(PromptId, Language), MetricVector>,
    /// Winning prompts per (language, metric) scenario.
    pub winners: BTreeMap<(Language, Metric), Vec<PromptId>>,
    pub wins: BTreeMap<PromptId, usize>,
    pub scenarios: usize,
}

/// Counts, for every (language, metric), which prompts reach the best value.
/// Tied prompts are all credited.
pub fn prompt_selection_table(
    cells: &BTreeMap<(PromptId, Language), MetricVector>,
    precision: Precision,
) -> Result<PromptSelection> {
    let languages: Vec<Language> = {
        let mut ls: Vec<Language> = cells.keys().map(|(_, l)| *l).collect();
        ls.dedup();
        ls.sort();
        ls.dedup();
        ls
    };
    if languages.is_empty() {
        return Err(Error::Empty("no prompt cells".into()));
    }
    let mut winners = BTreeMap::new();
    let mut wins: BTreeMap<PromptId, usize> = PromptId::ALL.iter().map(|&p| (p, 0)).collect();
    for &lang in &languages {
        for metric in Metric::ALL {
            let mut values = Vec::with_capacity(3);
            for prompt in PromptId::ALL {
                let v = cells
                    .get(&(prompt, lang))
                    .ok_or_else(|| Error::Config(format!("prompt selection needs {prompt} for {lang}")))?
                    .get(metric)
                    .ok_or_else(|| Error::Config(format!("prompt selection: {metric} missing for {prompt}/{lang}")))?;
                values.push((prompt, if precision == Precision::Rounded { round3(v) } else { v }));
            }
            let best = values.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
            let top: Vec<PromptId> = values.iter().filter(|&&(_, v)| v == best).map(|&(p, _)| p).collect();
            for p in &top {
                *wins.get_mut(p).unwrap() += 1;
            }
            winners.insert((lang, metric), top);
        }
    }
    Ok(PromptSelection {
        cells: cells.clone(),
        winners,
        wins,
        scenarios: languages.len() * Metric::ALL.len(),
    })
}

/// A model supports a language when its mean drift is at least `threshold`.
pub fn supports(mean_drift: f64, threshold: f64) -> bool {
    mean_drift >= threshold
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportVerdict {
    pub per_language: BTreeMap<Language, bool>,
    pub all: bool,
}

pub fn language_support_verdict(
    drift_by_language: &BTreeMap<String, BTreeMap<Language, f64>>,
    threshold: f64,
) -> BTreeMap<String, SupportVerdict> {
    drift_by_language
        .iter()
        .map(|(model, drifts)| {
            let per_language: BTreeMap<Language, bool> =
                drifts.iter().map(|(&l, &d)| (l, supports(d, threshold))).collect();
            let all = Language::ALL.iter().all(|l| per_language.get(l) == Some(&true));
            (model.clone(), SupportVerdict { per_language, all })
        })
        .collect()
}

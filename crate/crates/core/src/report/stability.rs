use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{CellKey, CellResult, Metric};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityEntry {
    pub values: Vec<f64>,
    pub max_abs_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StabilityReport {
    pub entries: BTreeMap<(CellKey, Metric), StabilityEntry>,
}

impl StabilityReport {
    pub fn max_deviation(&self) -> f64 {
        self.entries.values().map(|e| e.max_abs_deviation).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model", "prompt", "language", "metric", "values", "max_abs_deviation"])?;
        for ((key, metric), e) in &self.entries {
            let values: Vec<String> = e.values.iter().map(|v| format!("{v:.6}")).collect();
            w.write_record([
                key.model_id.as_str(),
                key.prompt_id.as_str(),
                key.language.code(),
                metric.id(),
                &values.join(";"),
                &format!("{:.6}", e.max_abs_deviation),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest pairwise absolute difference per cell and metric across runs.
pub fn stability_report(runs: &[BTreeMap<CellKey, CellResult>]) -> Result<StabilityReport> {
    if runs.len() < 2 {
        return Err(Error::Config(format!("stability needs at least 2 runs, got {}", runs.len())));
    }
    let first = &runs[0];
    for (i, run) in runs.iter().enumerate().skip(1) {
        if !run.keys().eq(first.keys()) {
            return Err(Error::CoverageMismatch(format!("run {} covers different cells than run 1", i + 1)));
        }
    }
    let mut report = StabilityReport::default();
    for key in first.keys() {
        for metric in Metric::ALL {
            let values: Vec<Option<f64>> = runs.iter().map(|r| r[key].vector.get(metric)).collect();
            if values.iter().all(Option::is_none) {
                continue;
            }
            let Some(values) = values.into_iter().collect::<Option<Vec<f64>>>() else {
                return Err(Error::CoverageMismatch(format!(
                    "{metric} present in some runs only for {}/{}/{}",
                    key.model_id, key.prompt_id, key.language
                )));
            };
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            report.entries.insert(
                (key.clone(), metric),
                StabilityEntry {
                    values,
                    max_abs_deviation: max - min,
                },
            );
        }
    }
    Ok(report)
}

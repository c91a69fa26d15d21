use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricVector};

/// Three-decimal display; missing values render empty.
pub fn fmt3(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.3}")).unwrap_or_default()
}

pub fn metric_header() -> Vec<&'static str> {
    std::iter::once("model").chain(Metric::ALL.iter().map(|m| m.id())).collect()
}

/// `model,<nine metric ids>` rows, values at display precision.
pub fn write_metric_table<W: Write>(writer: W, vectors: &BTreeMap<String, MetricVector>) -> Result<()> {
    if vectors.is_empty() {
        return Err(Error::Empty("no models to write".into()));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(metric_header())?;
    for (model, v) in vectors {
        let mut row = vec![model.clone()];
        row.extend(v.iter().map(|(_, x)| fmt3(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `model,<metric ids...>` table. Columns may come in any order and
/// any subset; blank cells are missing.
pub fn read_metric_table<R: Read>(reader: R) -> Result<BTreeMap<String, MetricVector>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("model") {
        return Err(Error::Config("metric table must start with a `model` column".into()));
    }
    let metrics: Vec<Metric> = headers.iter().skip(1).map(|h| h.parse()).collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let model = record.get(0).unwrap_or_default().trim().to_string();
        let mut v = MetricVector::default();
        for (metric, cell) in metrics.iter().zip(record.iter().skip(1)) {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            let x: f64 = cell.parse().map_err(|_| Error::Parse {
                path: "metric table".into(),
                line: i + 2,
                message: format!("bad number `{cell}` for {metric}"),
            })?;
            v.set(*metric, Some(x));
        }
        out.insert(model, v);
    }
    Ok(out)
}

/// Markdown table with columns padded to equal width.
pub fn markdown_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count().max(3)).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(&rule));
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

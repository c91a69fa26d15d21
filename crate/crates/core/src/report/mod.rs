//! Report tables: scores, ranks, prompt selection, language support,
//! recurrent output patterns and run stability.

mod patterns;
mod selection;
mod stability;
mod table;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use patterns::{default_rules, load_rules, parse_rules, pattern_counts, MatchMode, PatternCount, PatternRule};
pub use selection::{
    language_support_verdict, prompt_cells, prompt_selection_table, supports, PromptSelection, SupportVerdict,
};
pub use stability::{stability_report, StabilityEntry, StabilityReport};
pub use table::{fmt3, markdown_table, metric_header, read_metric_table, write_metric_table};

use crate::error::{Error, Result};
use crate::language::Language;
use crate::metrics::{Metric, MetricVector};
use crate::prompts::PromptId;
use crate::ranking::{RankingSet, TwoStepResult};

/// Everything `emit_tables` can render. Absent parts are skipped.
#[derive(Debug, Default)]
pub struct ReportInputs<'a> {
    pub per_language: BTreeMap<Language, BTreeMap<String, MetricVector>>,
    pub macro_scores: Option<BTreeMap<String, MetricVector>>,
    pub rankings: Option<&'a RankingSet>,
    pub prompt_selection: Option<&'a PromptSelection>,
    pub support: Option<&'a BTreeMap<String, SupportVerdict>>,
    pub patterns: Option<&'a [PatternCount]>,
    pub stability: Option<&'a StabilityReport>,
    /// Provenance lines for the digest, e.g. checker and scorer versions.
    pub stamp: BTreeMap<String, String>,
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn csv_rows(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    })
}

fn rank_rows(result: &TwoStepResult) -> (Vec<String>, Vec<Vec<String>>) {
    let metrics: Vec<Metric> = Metric::ALL
        .into_iter()
        .filter(|m| result.metric_ranks.contains_key(m))
        .collect();
    let mut header: Vec<String> = vec!["model".into()];
    header.extend(metrics.iter().map(|m| m.id().to_string()));
    header.extend(["semantic", "syntactic", "borda_points", "global"].map(String::from));
    let rows = result
        .global
        .ordered()
        .into_iter()
        .map(|(model, rank)| {
            let mut row = vec![model.to_string()];
            row.extend(metrics.iter().map(|m| result.metric_ranks[m].ranks[model].to_string()));
            for g in [&result.semantic, &result.syntactic] {
                row.push(g.as_ref().map(|g| g.ranks[model].to_string()).unwrap_or_default());
            }
            row.push(result.global.borda_points[model].to_string());
            row.push(rank.to_string());
            row
        })
        .collect();
    (header, rows)
}

fn score_rows(vectors: &BTreeMap<String, MetricVector>) -> (Vec<String>, Vec<Vec<String>>) {
    let header = metric_header().into_iter().map(String::from).collect();
    let rows = vectors
        .iter()
        .map(|(model, v)| {
            let mut row = vec![model.clone()];
            row.extend(v.iter().map(|(_, x)| fmt3(x)));
            row
        })
        .collect();
    (header, rows)
}

/// Renders every available table as `(file name, contents)`.
pub fn render_tables(inputs: &ReportInputs) -> Result<Vec<(String, String)>> {
    let mut files: Vec<(String, String)> = Vec::new();
    let mut digest = String::from("# Evaluation digest\n\n");
    for (k, v) in &inputs.stamp {
        writeln!(digest, "- {k}: {v}").unwrap();
    }
    if !inputs.stamp.is_empty() {
        digest.push('\n');
    }

    let empty_table = inputs.per_language.values().any(BTreeMap::is_empty)
        || inputs.macro_scores.as_ref().is_some_and(BTreeMap::is_empty)
        || inputs.rankings.is_some_and(|r| r.overall.global.ranks.is_empty());
    let nothing = inputs.per_language.is_empty()
        && inputs.macro_scores.is_none()
        && inputs.rankings.is_none()
        && inputs.prompt_selection.is_none()
        && inputs.patterns.is_none()
        && inputs.stability.is_none();
    if empty_table || nothing {
        return Err(Error::Empty("no models to report".into()));
    }

    for (lang, vectors) in &inputs.per_language {
        let (header, rows) = score_rows(vectors);
        files.push((format!("scores_{}.csv", lang.code()), csv_rows(&header, &rows)?));
        writeln!(digest, "## Scores, {}\n\n{}", lang.name(), markdown_table(&header, &rows)).unwrap();
    }
    if let Some(vectors) = &inputs.macro_scores {
        let (header, rows) = score_rows(vectors);
        files.push(("scores_macro.csv".into(), csv_rows(&header, &rows)?));
        writeln!(digest, "## Scores, macro average\n\n{}", markdown_table(&header, &rows)).unwrap();
    }

    if let Some(rankings) = inputs.rankings {
        for (lang, result) in &rankings.per_language {
            let (header, rows) = rank_rows(result);
            files.push((format!("ranks_{}.csv", lang.code()), csv_rows(&header, &rows)?));
        }
        let (header, rows) = rank_rows(&rankings.overall);
        files.push(("ranks_overall.csv".into(), csv_rows(&header, &rows)?));
        writeln!(
            digest,
            "## Ranks, overall ({} aggregation)\n\n{}",
            rankings.aggregate,
            markdown_table(&header, &rows)
        )
        .unwrap();
        if !rankings.overall.excluded.is_empty() {
            let ids: Vec<&str> = rankings.overall.excluded.iter().map(|m| m.id()).collect();
            writeln!(digest, "Excluded from ranking (missing for every model): {}\n", ids.join(", ")).unwrap();
        }

        let mut header = vec!["model".to_string(), "overall".to_string()];
        header.extend(rankings.per_language.keys().map(|l| l.code().to_string()));
        let rows: Vec<Vec<String>> = rankings
            .overall
            .global
            .ordered()
            .into_iter()
            .map(|(model, rank)| {
                let mut row = vec![model.to_string(), rank.to_string()];
                row.extend(rankings.per_language.values().map(|r| {
                    r.global.ranks.get(model).map(ToString::to_string).unwrap_or_default()
                }));
                row
            })
            .collect();
        files.push(("global_ranking.csv".into(), csv_rows(&header, &rows)?));
        writeln!(digest, "## Global ranking\n\n{}", markdown_table(&header, &rows)).unwrap();
    }

    if let Some(sel) = inputs.prompt_selection {
        let mut header = vec!["prompt".to_string(), "language".to_string()];
        header.extend(Metric::ALL.iter().map(|m| m.id().to_string()));
        let rows: Vec<Vec<String>> = sel
            .cells
            .iter()
            .map(|((p, l), v)| {
                let mut row = vec![p.to_string(), l.code().to_string()];
                row.extend(v.iter().map(|(_, x)| fmt3(x)));
                row
            })
            .collect();
        files.push(("prompt_selection.csv".into(), csv_rows(&header, &rows)?));
        let win_header: Vec<String> = ["prompt", "wins", "scenarios"].map(String::from).to_vec();
        let win_rows: Vec<Vec<String>> = PromptId::ALL
            .iter()
            .map(|p| vec![p.to_string(), sel.wins[p].to_string(), sel.scenarios.to_string()])
            .collect();
        files.push(("prompt_wins.csv".into(), csv_rows(&win_header, &win_rows)?));
        writeln!(
            digest,
            "## Prompt selection\n\n{}\n{}",
            markdown_table(&header, &rows),
            markdown_table(&win_header, &win_rows)
        )
        .unwrap();
    }

    if let Some(support) = inputs.support {
        let mut header = vec!["model".to_string()];
        header.extend(Language::ALL.iter().map(|l| l.code().to_string()));
        header.push("all".into());
        let yn = |b: Option<&bool>| match b {
            Some(true) => "yes".to_string(),
            Some(false) => "no".to_string(),
            None => String::new(),
        };
        let rows: Vec<Vec<String>> = support
            .iter()
            .map(|(model, v)| {
                let mut row = vec![model.clone()];
                row.extend(Language::ALL.iter().map(|l| yn(v.per_language.get(l))));
                row.push(yn(Some(&v.all)));
                row
            })
            .collect();
        files.push(("language_support.csv".into(), csv_rows(&header, &rows)?));
        writeln!(digest, "## Language support\n\n{}", markdown_table(&header, &rows)).unwrap();
    }

    if let Some(counts) = inputs.patterns {
        let header: Vec<String> = ["kind", "language", "model", "mode", "pattern", "count"].map(String::from).to_vec();
        let rows: Vec<Vec<String>> = counts
            .iter()
            .map(|c| {
                vec![
                    c.rule.kind.clone(),
                    c.rule.language.clone(),
                    c.rule.model.clone(),
                    match c.rule.match_mode {
                        MatchMode::Substring => "substring".into(),
                        MatchMode::Prefix => "prefix".into(),
                    },
                    c.rule.pattern.clone(),
                    c.count.to_string(),
                ]
            })
            .collect();
        files.push(("patterns.csv".into(), csv_rows(&header, &rows)?));
        writeln!(digest, "## Recurrent output patterns\n\n{}", markdown_table(&header, &rows)).unwrap();
    }

    if let Some(stab) = inputs.stability {
        files.push(("stability.csv".into(), csv_string(|buf| stab.write_csv(buf))?));
        writeln!(
            digest,
            "## Stability\n\nLargest deviation across runs: {:.6} over {} cell metrics.\n",
            stab.max_deviation(),
            stab.entries.len()
        )
        .unwrap();
    }

    files.push(("digest.md".into(), digest));
    Ok(files)
}

/// Renders all available tables into `out_dir` and returns the written
/// paths. Everything is rendered in memory first, so a failure leaves no
/// partial files behind.
pub fn emit_tables(out_dir: &Path, inputs: &ReportInputs) -> Result<Vec<PathBuf>> {
    let files = render_tables(inputs)?;
    write_files(out_dir, files)
}

/// Writes rendered files into `out_dir`.
pub fn write_files(out_dir: &Path, files: Vec<(String, String)>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}

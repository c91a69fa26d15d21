//! Per-metric competition ranks and two-step Borda aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;
use crate::metrics::{macro_average_over, Metric, MetricVector};

/// Competition ranks of a table, higher value first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub label: String,
    pub ranks: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRanking {
    pub scope: String,
    pub borda_points: BTreeMap<String, f64>,
    pub ranks: BTreeMap<String, usize>,
}

impl GlobalRanking {
    pub fn as_rank_table(&self) -> RankTable {
        RankTable {
            label: self.scope.clone(),
            ranks: self.ranks.clone(),
        }
    }

    /// Models ordered by rank, then id.
    pub fn ordered(&self) -> Vec<(&str, usize)> {
        let mut v: Vec<(&str, usize)> = self.ranks.iter().map(|(m, &r)| (m.as_str(), r)).collect();
        v.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Rank on values as displayed (three decimals).
    #[default]
    Rounded,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    /// Two-step ranking of the language-averaged metric vectors.
    #[default]
    Macro,
    /// Borda over the per-language global rankings.
    PerLanguage,
}

impl FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "macro" => Ok(Aggregate::Macro),
            "per-language" | "per_language" => Ok(Aggregate::PerLanguage),
            _ => Err(Error::Config(format!("unknown aggregate mode `{s}` (macro, per-language)"))),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Macro => "macro",
            Aggregate::PerLanguage => "per-language",
        })
    }
}

/// Value as printed with three decimals.
pub fn round3(x: f64) -> f64 {
    format!("{x:.3}").parse().expect("formatted float parses")
}

fn competition(points: &BTreeMap<String, f64>) -> BTreeMap<String, usize> {
    points
        .iter()
        .map(|(m, &v)| (m.clone(), 1 + points.values().filter(|&&o| o > v).count()))
        .collect()
}

/// Ranks models on one metric, higher value better, ties sharing the
/// smallest rank.
pub fn rank_by_metric(label: &str, values: &BTreeMap<String, f64>) -> Result<RankTable> {
    if values.is_empty() {
        return Err(Error::Empty(format!("no values to rank for {label}")));
    }
    if let Some((model, _)) = values.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { model: model.clone() });
    }
    Ok(RankTable {
        label: label.to_string(),
        ranks: competition(values),
    })
}

/// Borda count: `n - rank` points per table, summed, then competition-ranked.
pub fn borda(scope: &str, rankings: &[RankTable]) -> Result<GlobalRanking> {
    let first = rankings
        .first()
        .ok_or_else(|| Error::Empty(format!("no rankings to aggregate for {scope}")))?;
    for t in &rankings[1..] {
        if !t.ranks.keys().eq(first.ranks.keys()) {
            return Err(Error::ModelSetMismatch);
        }
    }
    let n = first.ranks.len();
    let mut points: BTreeMap<String, f64> = first.ranks.keys().map(|m| (m.clone(), 0.0)).collect();
    for t in rankings {
        for (m, &r) in &t.ranks {
            *points.get_mut(m).unwrap() += n.saturating_sub(r) as f64;
        }
    }
    let ranks = competition(&points);
    Ok(GlobalRanking {
        scope: scope.to_string(),
        borda_points: points,
        ranks,
    })
}

/// All intermediate and final tables of the two-step aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepResult {
    pub metric_ranks: BTreeMap<Metric, RankTable>,
    /// `None` when every metric of the group was excluded.
    pub semantic: Option<GlobalRanking>,
    pub syntactic: Option<GlobalRanking>,
    pub global: GlobalRanking,
    /// Ranked metrics absent for every model (e.g. no scorer service).
    pub excluded: Vec<Metric>,
}

/// Metrics the two-step ranking consumes; drift is left out.
pub const RANKED_METRICS: [Metric; 8] = [
    Metric::Lt,
    Metric::Bertscore,
    Metric::Sbert,
    Metric::Bleurt,
    Metric::Levenshtein,
    Metric::LengthDiff,
    Metric::Gleu,
    Metric::PreservationF1,
];

pub fn metric_ranks(
    vectors: &BTreeMap<String, MetricVector>,
    metrics: &[Metric],
    precision: Precision,
) -> Result<BTreeMap<Metric, RankTable>> {
    let mut out = BTreeMap::new();
    for &metric in metrics {
        let mut values = BTreeMap::new();
        for (model, v) in vectors {
            let x = v.require(metric)?;
            values.insert(model.clone(), if precision == Precision::Rounded { round3(x) } else { x });
        }
        out.insert(metric, rank_by_metric(metric.id(), &values)?);
    }
    Ok(out)
}

/// Step 1: Borda within the semantic and the syntactic metric groups.
/// Step 2: Borda over LT, preservation F1 and the two group rankings.
///
/// A metric missing for every model is excluded and reported in
/// `excluded`; one missing for only some models is an error.
pub fn two_step_global_rank(
    scope: &str,
    vectors: &BTreeMap<String, MetricVector>,
    precision: Precision,
) -> Result<TwoStepResult> {
    if vectors.is_empty() {
        return Err(Error::Empty("no models to rank".into()));
    }
    let excluded: Vec<Metric> = RANKED_METRICS
        .into_iter()
        .filter(|&m| vectors.values().all(|v| v.get(m).is_none()))
        .collect();
    let used: Vec<Metric> = RANKED_METRICS.into_iter().filter(|m| !excluded.contains(m)).collect();
    let mut metric_ranks = metric_ranks(vectors, &used, precision)?;
    let group = |label: &str, ms: &[Metric]| -> Result<Option<GlobalRanking>> {
        let tables: Vec<RankTable> = ms.iter().filter_map(|m| metric_ranks.get(m).cloned()).collect();
        if tables.is_empty() {
            return Ok(None);
        }
        borda(label, &tables).map(Some)
    };
    let semantic = group("semantic", &Metric::SEMANTIC)?;
    let syntactic = group("syntactic", &Metric::SYNTACTIC)?;
    let mut step2: Vec<RankTable> = [Metric::Lt, Metric::PreservationF1]
        .iter()
        .filter_map(|m| metric_ranks.get(m).cloned())
        .collect();
    step2.extend(semantic.iter().chain(&syntactic).map(GlobalRanking::as_rank_table));
    let global = borda(scope, &step2)?;
    if !excluded.is_empty() {
        let ids: Vec<&str> = excluded.iter().map(|m| m.id()).collect();
        log::warn!("{scope}: ranked without {}", ids.join(", "));
    }
    // drift is ranked for display only
    if vectors.values().all(|v| v.get(Metric::Drift).is_some()) {
        metric_ranks.extend(self::metric_ranks(vectors, &[Metric::Drift], precision)?);
    }
    Ok(TwoStepResult {
        metric_ranks,
        semantic,
        syntactic,
        global,
        excluded,
    })
}

/// Per-language two-step rankings plus one overall ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSet {
    pub per_language: BTreeMap<Language, TwoStepResult>,
    pub overall: TwoStepResult,
    pub aggregate: Aggregate,
}

pub fn rank_all(
    per_language: &BTreeMap<Language, BTreeMap<String, MetricVector>>,
    aggregate: Aggregate,
    precision: Precision,
) -> Result<RankingSet> {
    if per_language.is_empty() {
        return Err(Error::Empty("no languages to rank".into()));
    }
    let mut results = BTreeMap::new();
    for (lang, vectors) in per_language {
        results.insert(*lang, two_step_global_rank(lang.code(), vectors, precision)?);
    }
    let languages: Vec<Language> = per_language.keys().copied().collect();
    let macro_vectors = macro_vectors(per_language, &languages)?;
    let mut overall = two_step_global_rank("overall", &macro_vectors, precision)?;
    if aggregate == Aggregate::PerLanguage {
        let tables: Vec<RankTable> = results.values().map(|r| r.global.as_rank_table()).collect();
        overall.global = borda("overall", &tables)?;
    }
    Ok(RankingSet {
        per_language: results,
        overall,
        aggregate,
    })
}

/// Macro-averaged vector per model over `languages`.
pub fn macro_vectors(
    per_language: &BTreeMap<Language, BTreeMap<String, MetricVector>>,
    languages: &[Language],
) -> Result<BTreeMap<String, MetricVector>> {
    let models: Vec<&String> = per_language
        .values()
        .next()
        .map(|m| m.keys().collect())
        .unwrap_or_default();
    let mut out = BTreeMap::new();
    for model in models {
        let mut by_lang = BTreeMap::new();
        for lang in languages {
            let v = per_language
                .get(lang)
                .and_then(|m| m.get(model))
                .ok_or(Error::ModelSetMismatch)?;
            by_lang.insert(*lang, *v);
        }
        out.insert(model.clone(), macro_average_over(&by_lang, languages)?);
    }
    for models in per_language.values() {
        if models.len() != out.len() {
            return Err(Error::ModelSetMismatch);
        }
    }
    Ok(out)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman correlation (Pearson on tie-averaged ranks) over shared keys.
pub fn spearman(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Result<f64> {
    if !a.keys().eq(b.keys()) {
        return Err(Error::ModelSetMismatch);
    }
    let xs = average_ranks(&a.values().copied().collect::<Vec<_>>());
    let ys = average_ranks(&b.values().copied().collect::<Vec<_>>());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Empty("constant ranking has no correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

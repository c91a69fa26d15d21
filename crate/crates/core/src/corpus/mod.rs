//! MultiGED-style corpora: token/label parsing, sentence reconstruction and
//! the per-language dataset summary.

mod detok;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;

pub use detok::detokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenLabel {
    Correct,
    Incorrect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRow {
    pub token: String,
    pub label: TokenLabel,
}

/// Label alphabet of the second TSV column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelScheme {
    pub correct: String,
    pub incorrect: String,
}

impl Default for LabelScheme {
    fn default() -> Self {
        Self {
            correct: "c".into(),
            incorrect: "i".into(),
        }
    }
}

impl LabelScheme {
    fn label(&self, raw: &str) -> Option<TokenLabel> {
        if raw == self.correct {
            Some(TokenLabel::Correct)
        } else if raw == self.incorrect {
            Some(TokenLabel::Incorrect)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    /// `<language>-<index>`, index counted in file order from zero.
    pub id: String,
    pub language: Language,
    pub tokens: Vec<TokenRow>,
    pub text: String,
    pub is_correct: bool,
}

impl SentenceRecord {
    pub fn new(language: Language, index: usize, tokens: Vec<TokenRow>) -> Self {
        let words: Vec<&str> = tokens.iter().map(|t| t.token.as_str()).collect();
        let text = detokenize(&words, language);
        let is_correct = tokens.iter().all(|t| t.label == TokenLabel::Correct);
        Self {
            id: sentence_id(language, index),
            language,
            tokens,
            text,
            is_correct,
        }
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

pub fn sentence_id(language: Language, index: usize) -> String {
    format!("{}-{}", language.code(), index)
}

/// Parses a token-per-line, blank-line-separated corpus.
///
/// `source` only names the input in error messages.
pub fn parse_multiged<R: BufRead>(
    reader: R,
    language: Language,
    scheme: &LabelScheme,
    source: &str,
) -> Result<Vec<SentenceRecord>> {
    let mut sentences = Vec::new();
    let mut current: Vec<TokenRow> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            if !current.is_empty() {
                let index = sentences.len();
                sentences.push(SentenceRecord::new(language, index, std::mem::take(&mut current)));
            }
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_string(),
            line: line_no,
            message,
        };
        let (token, label) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `token<TAB>label`".into()))?;
        let token = token.trim();
        if token.is_empty() {
            return Err(parse_err("empty token".into()));
        }
        let label = label.trim();
        let label = scheme
            .label(label)
            .ok_or_else(|| parse_err(format!("unknown label `{label}`")))?;
        current.push(TokenRow {
            token: token.to_string(),
            label,
        });
    }
    if !current.is_empty() {
        let index = sentences.len();
        sentences.push(SentenceRecord::new(language, index, current));
    }
    Ok(sentences)
}

pub fn parse_multiged_str(input: &str, language: Language, scheme: &LabelScheme) -> Result<Vec<SentenceRecord>> {
    parse_multiged(input.as_bytes(), language, scheme, "<input>")
}

pub fn load_multiged(path: &Path, language: Language, scheme: &LabelScheme) -> Result<Vec<SentenceRecord>> {
    let file = File::open(path)?;
    parse_multiged(BufReader::new(file), language, scheme, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdDevKind {
    #[default]
    Population,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    /// `None` for the pooled TOTAL row.
    pub language: Option<Language>,
    pub total_sentences: usize,
    pub correct_sentences: usize,
    pub mean_tokens: f64,
    pub stddev_tokens: f64,
}

impl SummaryRow {
    fn from_counts(language: Option<Language>, counts: &[usize], correct: usize, kind: StdDevKind) -> Self {
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / n;
        let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
        let denom = match kind {
            StdDevKind::Population => n,
            StdDevKind::Sample => (n - 1.0).max(1.0),
        };
        Self {
            language,
            total_sentences: counts.len(),
            correct_sentences: correct,
            mean_tokens: mean,
            stddev_tokens: (ss / denom).sqrt(),
        }
    }

    pub fn label(&self) -> &'static str {
        self.language.map_or("TOTAL", Language::name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub rows: Vec<SummaryRow>,
    pub total: SummaryRow,
    pub stddev: StdDevKind,
}

impl CorpusSummary {
    pub fn row(&self, language: Language) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.language == Some(language))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["language", "total_sentences", "correct_sentences", "mean_tokens", "stddev_tokens"])?;
        for row in self.rows.iter().chain(std::iter::once(&self.total)) {
            w.write_record([
                row.language.map_or("TOTAL", Language::code).to_string(),
                row.total_sentences.to_string(),
                row.correct_sentences.to_string(),
                format!("{:.4}", row.mean_tokens),
                format!("{:.4}", row.stddev_tokens),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Fixed-width text rendering in the layout of the dataset summary table.
    pub fn to_aligned_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>11} {:>8}  Tokens per sent",
            "Language", "Total sents", "Correct"
        );
        for row in self.rows.iter().chain(std::iter::once(&self.total)) {
            let _ = writeln!(
                out,
                "{:<10} {:>11} {:>8}  {:.2} (+/- {:.2})",
                row.label(),
                row.total_sentences,
                row.correct_sentences,
                row.mean_tokens,
                row.stddev_tokens
            );
        }
        out
    }
}

/// Per-language counts and token statistics plus a pooled TOTAL row.
pub fn summarize(corpus: &BTreeMap<Language, Vec<SentenceRecord>>, stddev: StdDevKind) -> Result<CorpusSummary> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus has no languages".into()));
    }
    let mut rows = Vec::new();
    let mut pooled = Vec::new();
    let mut pooled_correct = 0;
    for (&language, sentences) in corpus {
        if sentences.is_empty() {
            return Err(Error::Empty(format!("no sentences for {language}")));
        }
        let counts: Vec<usize> = sentences.iter().map(SentenceRecord::token_count).collect();
        let correct = sentences.iter().filter(|s| s.is_correct).count();
        rows.push(SummaryRow::from_counts(Some(language), &counts, correct, stddev));
        pooled.extend(counts);
        pooled_correct += correct;
    }
    let total = SummaryRow::from_counts(None, &pooled, pooled_correct, stddev);
    Ok(CorpusSummary { rows, total, stddev })
}

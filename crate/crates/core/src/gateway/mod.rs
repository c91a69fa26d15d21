//! Obtaining corrections: live chat-completion calls or replay files.

mod cache;
mod client;
mod config;
mod postprocess;

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;
use crate::prompts::PromptId;

pub use cache::{cache_key, CorrectionCache};
pub use client::{generate, generate_batch, ChatClient, RetryPolicy};
pub use config::GenerationConfig;
pub use postprocess::postprocess;

/// One model output for one source sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub sentence_id: String,
    pub model_id: String,
    pub prompt_id: PromptId,
    pub language: Language,
    pub output_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

impl Correction {
    pub fn key(&self) -> (&str, &str, PromptId) {
        (&self.sentence_id, &self.model_id, self.prompt_id)
    }
}

/// Parses a JSONL corrections stream. When `known_ids` is given, records for
/// sentences outside it are rejected. Duplicates keep the last record in the
/// position of the first.
pub fn parse_corrections<R: BufRead>(
    reader: R,
    source: &str,
    known_ids: Option<&BTreeSet<String>>,
) -> Result<Vec<Correction>> {
    let mut out: Vec<Correction> = Vec::new();
    let mut position: HashMap<(String, String, PromptId), usize> = HashMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_string(),
            line: line_no,
            message,
        };
        let c: Correction = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if let Some(known) = known_ids {
            if !known.contains(&c.sentence_id) {
                return Err(parse_err(format!("unknown sentence_id `{}`", c.sentence_id)));
            }
        }
        let key = (c.sentence_id.clone(), c.model_id.clone(), c.prompt_id);
        match position.get(&key) {
            Some(&i) => {
                log::warn!(
                    "{source}:{line_no}: duplicate record for ({}, {}, {}); keeping the later one",
                    key.0,
                    key.1,
                    key.2
                );
                out[i] = c;
            }
            None => {
                position.insert(key, out.len());
                out.push(c);
            }
        }
    }
    Ok(out)
}

pub fn load_corrections(path: &Path, known_ids: Option<&BTreeSet<String>>) -> Result<Vec<Correction>> {
    let file = File::open(path)?;
    parse_corrections(BufReader::new(file), &path.display().to_string(), known_ids)
}

pub fn write_corrections<W: Write>(mut writer: W, corrections: &[Correction]) -> Result<()> {
    for c in corrections {
        serde_json::to_writer(&mut writer, c)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

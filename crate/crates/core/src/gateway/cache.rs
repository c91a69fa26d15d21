use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Correction;
use crate::error::Result;
use crate::language::Language;
use crate::prompts::PromptId;

/// Hex SHA-256 over model, prompt, language, SHA-256 of the text and the
/// generation config hash.
pub fn cache_key(model_id: &str, prompt_id: PromptId, language: Language, text: &str, config_hash: &str) -> String {
    let text_hash = hex::encode(Sha256::digest(text.as_bytes()));
    let mut h = Sha256::new();
    for part in [model_id, prompt_id.as_str(), language.code(), &text_hash, config_hash] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    correction: Correction,
}

/// Append-only JSONL log of generated corrections. The in-memory index is
/// rebuilt on open; later lines win.
pub struct CorrectionCache {
    path: PathBuf,
    index: Mutex<HashMap<String, Correction>>,
    file: Mutex<File>,
}

impl CorrectionCache {
    pub fn open(path: &Path) -> Result<Self> {
        let mut index = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Entry>(&line) {
                    Ok(e) => {
                        index.insert(e.key, e.correction);
                    }
                    // a torn final write from an interrupted run
                    Err(err) => log::warn!("{}:{}: skipping unreadable cache line: {err}", path.display(), n + 1),
                }
            }
        } else if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let len = file.metadata()?.len();
        if len > 0 && std::fs::read(path)?.last() != Some(&b'\n') {
            file.write_all(b"\n")?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            index: Mutex::new(index),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.index.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Correction> {
        self.index.lock().unwrap().get(key).cloned()
    }

    pub fn put(&self, key: &str, correction: &Correction) -> Result<()> {
        let mut line = serde_json::to_string(&Entry {
            key: key.to_string(),
            correction: correction.clone(),
        })?;
        line.push('\n');
        {
            let mut f = self.file.lock().unwrap();
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        self.index.lock().unwrap().insert(key.to_string(), correction.clone());
        Ok(())
    }
}

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Decoding parameters sent with every completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub max_new_tokens: u32,
    pub repetition_penalty: f64,
    pub top_k: u32,
    pub top_p: f64,
    pub sampling: bool,
    pub renormalize_logits: bool,
    pub use_cache: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            max_new_tokens: 256,
            repetition_penalty: 1.18,
            top_k: 40,
            top_p: 0.1,
            sampling: true,
            renormalize_logits: false,
            use_cache: true,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_new_tokens == 0 {
            return Err(Error::Config("max_new_tokens must be positive".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::Config(format!("top_p must be in (0, 1], got {}", self.top_p)));
        }
        if !(self.repetition_penalty >= 1.0 && self.repetition_penalty.is_finite()) {
            return Err(Error::Config(format!(
                "repetition_penalty must be >= 1, got {}",
                self.repetition_penalty
            )));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Adds the sampling fields to a chat-completions request body.
    /// `renormalize_logits` and `use_cache` are local decoding switches with no
    /// wire counterpart; they only enter the config hash.
    pub fn apply_to(&self, body: &mut serde_json::Map<String, serde_json::Value>) {
        use serde_json::json;
        body.insert("max_tokens".into(), json!(self.max_new_tokens));
        body.insert("top_p".into(), json!(self.top_p));
        body.insert("top_k".into(), json!(self.top_k));
        body.insert("repetition_penalty".into(), json!(self.repetition_penalty));
        if !self.sampling {
            body.insert("temperature".into(), json!(0.0));
        }
    }
}

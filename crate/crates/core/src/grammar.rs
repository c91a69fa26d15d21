//! LanguageTool client and the checker-based correctness score.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSpan {
    /// UTF-16 code unit offset, as reported by the server.
    pub offset: usize,
    pub length: usize,
    pub rule_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarCheckResult {
    pub text: String,
    pub language: Language,
    pub num_errors: usize,
    pub match_spans: Vec<MatchSpan>,
}

/// `1 / (1 + n)`.
pub fn correctness(num_errors: usize) -> f64 {
    1.0 / (1.0 + num_errors as f64)
}

pub fn correctness_score(result: &GrammarCheckResult) -> f64 {
    correctness(result.num_errors)
}

#[derive(Debug, Deserialize)]
struct CheckResponse {
    #[serde(default)]
    software: Option<Software>,
    matches: Vec<RawMatch>,
}

#[derive(Debug, Deserialize)]
struct Software {
    #[serde(default)]
    version: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RawMatch {
    offset: usize,
    length: usize,
    #[serde(default)]
    message: String,
    #[serde(default)]
    rule: Option<RawRule>,
}

#[derive(Debug, Deserialize)]
struct RawRule {
    #[serde(default)]
    id: String,
}

#[derive(Debug)]
pub struct LanguageToolClient {
    http: reqwest::blocking::Client,
    url: String,
    codes: BTreeMap<Language, String>,
    version: OnceLock<String>,
}

impl LanguageToolClient {
    pub fn new(base_url: &str, timeout: Duration) -> Result<Self> {
        let base = base_url.trim_end_matches('/');
        let url = if base.ends_with("/v2/check") {
            base.to_string()
        } else if base.ends_with("/v2") {
            format!("{base}/check")
        } else {
            format!("{base}/v2/check")
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Check(e.to_string()))?;
        let codes = Language::ALL
            .into_iter()
            .map(|l| (l, l.default_checker_code().to_string()))
            .collect();
        Ok(Self {
            http,
            url,
            codes,
            version: OnceLock::new(),
        })
    }

    /// Overrides the checker language code for some languages.
    pub fn with_codes(mut self, codes: &BTreeMap<Language, String>) -> Self {
        for (l, c) in codes {
            self.codes.insert(*l, c.clone());
        }
        self
    }

    /// Server version from the first successful response, if any.
    pub fn server_version(&self) -> Option<&str> {
        self.version.get().map(String::as_str)
    }

    pub fn check(&self, text: &str, language: Language) -> Result<GrammarCheckResult> {
        let code = &self.codes[&language];
        let resp = self
            .http
            .post(&self.url)
            .form(&[("text", text), ("language", code.as_str())])
            .send()
            .map_err(|e| Error::Check(format!("{}: {e}", self.url)))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::Check(format!(
                "{}: HTTP {status}: {}",
                self.url,
                resp.text().unwrap_or_default()
            )));
        }
        let parsed: CheckResponse = resp
            .json()
            .map_err(|e| Error::Check(format!("{}: bad response: {e}", self.url)))?;
        if let Some(v) = parsed.software.and_then(|s| s.version) {
            let _ = self.version.set(v);
        }
        let units = text.encode_utf16().count();
        let mut spans = Vec::with_capacity(parsed.matches.len());
        for m in parsed.matches {
            if m.offset + m.length > units {
                return Err(Error::Check(format!(
                    "match at {}+{} exceeds text length {units}",
                    m.offset, m.length
                )));
            }
            spans.push(MatchSpan {
                offset: m.offset,
                length: m.length,
                rule_id: m.rule.map(|r| r.id).unwrap_or_default(),
                message: m.message,
            });
        }
        Ok(GrammarCheckResult {
            text: text.to_string(),
            language,
            num_errors: spans.len(),
            match_spans: spans,
        })
    }
}

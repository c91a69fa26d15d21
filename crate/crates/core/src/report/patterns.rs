use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::Correction;
use crate::language::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    #[default]
    Substring,
    Prefix,
}

/// `language` and `model` are either a value or `any`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRule {
    pub pattern: String,
    #[serde(default = "any")]
    pub language: String,
    #[serde(default = "any")]
    pub model: String,
    #[serde(default, rename = "mode")]
    pub match_mode: MatchMode,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub kind: String,
}

fn any() -> String {
    "any".into()
}

impl PatternRule {
    pub fn new(pattern: &str) -> Self {
        Self {
            pattern: pattern.into(),
            language: any(),
            model: any(),
            match_mode: MatchMode::Substring,
            kind: String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pattern.trim().is_empty() {
            return Err(Error::Config("pattern rule with empty pattern".into()));
        }
        if !self.language.eq_ignore_ascii_case("any") {
            self.language.parse::<Language>()?;
        }
        Ok(())
    }

    fn applies_to(&self, c: &Correction) -> bool {
        let lang_ok = self.language.eq_ignore_ascii_case("any")
            || self.language.parse::<Language>().is_ok_and(|l| l == c.language);
        let model_ok = self.model.eq_ignore_ascii_case("any") || self.model.to_lowercase() == c.model_id.to_lowercase();
        lang_ok && model_ok
    }

    /// Case-insensitive match of the pattern against one output.
    pub fn matches(&self, output: &str) -> bool {
        let hay = output.to_lowercase();
        let needle = self.pattern.to_lowercase();
        match self.match_mode {
            MatchMode::Substring => hay.contains(&needle),
            MatchMode::Prefix => hay.trim_start().starts_with(&needle),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternCount {
    pub rule: PatternRule,
    pub count: usize,
}

/// Number of corrections, among those the rule's filters select, whose
/// output matches the rule.
pub fn pattern_counts(corrections: &[Correction], rules: &[PatternRule]) -> Vec<PatternCount> {
    rules
        .iter()
        .map(|rule| PatternCount {
            rule: rule.clone(),
            count: corrections
                .iter()
                .filter(|c| rule.applies_to(c) && rule.matches(&c.output_text))
                .count(),
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct RulesFile {
    #[serde(default, rename = "rule")]
    rules: Vec<PatternRule>,
}

pub fn parse_rules(text: &str) -> Result<Vec<PatternRule>> {
    let file: RulesFile = toml::from_str(text).map_err(|e| Error::Config(format!("pattern rules: {e}")))?;
    for r in &file.rules {
        r.validate()?;
    }
    Ok(file.rules)
}

pub fn load_rules(path: &Path) -> Result<Vec<PatternRule>> {
    parse_rules(&std::fs::read_to_string(path)?)
}

pub fn default_rules() -> Vec<PatternRule> {
    parse_rules(include_str!("../../assets/pattern_rules.toml")).expect("bundled rules parse")
}

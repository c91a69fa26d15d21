use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The four languages the harness evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    De,
    It,
    Sv,
}

impl Language {
    pub const ALL: [Language; 4] = [Language::En, Language::De, Language::It, Language::Sv];

    /// Lowercase ISO 639-1 code, used in ids, file names and wire payloads.
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::It => "it",
            Language::Sv => "sv",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Language::En => "English",
            Language::De => "German",
            Language::It => "Italian",
            Language::Sv => "Swedish",
        }
    }

    /// Default region variant sent to a LanguageTool server.
    pub fn default_checker_code(self) -> &'static str {
        match self {
            Language::En => "en-US",
            Language::De => "de-DE",
            Language::It => "it",
            Language::Sv => "sv",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "de" | "german" => Ok(Language::De),
            "it" | "italian" => Ok(Language::It),
            "sv" | "swedish" => Ok(Language::Sv),
            other => Err(Error::UnknownLanguage(other.to_string())),
        }
    }
}

/// Parses a comma separated list such as `en,de,it,sv`.
pub fn parse_language_list(s: &str) -> Result<Vec<Language>, Error> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let lang: Language = part.parse()?;
        if !out.contains(&lang) {
            out.push(lang);
        }
    }
    Ok(out)
}

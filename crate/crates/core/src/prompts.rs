//! Prompt templates (three instructions per language) and chat message rendering.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PromptId {
    P1,
    P2,
    P3,
}

impl PromptId {
    pub const ALL: [PromptId; 3] = [PromptId::P1, PromptId::P2, PromptId::P3];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptId::P1 => "P1",
            PromptId::P2 => "P2",
            PromptId::P3 => "P3",
        }
    }
}

impl fmt::Display for PromptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" => Ok(PromptId::P1),
            "P2" => Ok(PromptId::P2),
            "P3" => Ok(PromptId::P3),
            _ => Err(Error::UnknownPrompt(s.to_string())),
        }
    }
}

pub fn parse_prompt_list(s: &str) -> Result<Vec<PromptId>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let id: PromptId = part.parse()?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub prompt_id: PromptId,
    pub language: Language,
    pub instruction: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl PromptTemplate {
    /// A single user message: instruction, newline, sentence.
    pub fn render(&self, sentence_text: &str) -> Vec<ChatMessage> {
        vec![ChatMessage {
            role: Role::User,
            content: format!("{}\n{}", self.instruction, sentence_text),
        }]
    }
}

/// On-disk shape of one language's template file.
#[derive(Debug, Deserialize)]
struct TemplateFile {
    language: Language,
    #[serde(default)]
    default: bool,
    prompts: BTreeMap<String, String>,
}

const BUILTIN: [(&str, &str); 4] = [
    ("en.toml", include_str!("../assets/prompts/en.toml")),
    ("de.toml", include_str!("../assets/prompts/de.toml")),
    ("it.toml", include_str!("../assets/prompts/it.toml")),
    ("sv.toml", include_str!("../assets/prompts/sv.toml")),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub prompt_id: PromptId,
    pub language: Language,
    pub present: bool,
    /// Set when the shipped default translation is in use.
    pub is_default: bool,
}

#[derive(Debug, Clone, Default)]
pub struct PromptCatalog {
    templates: BTreeMap<(PromptId, Language), PromptTemplate>,
    defaults: BTreeMap<Language, bool>,
}

impl PromptCatalog {
    pub fn builtin() -> Self {
        let mut catalog = Self::default();
        for (name, text) in BUILTIN {
            catalog
                .add_file(name, text)
                .expect("built-in prompt templates are valid");
        }
        catalog
    }

    /// Loads every `*.toml` file in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut catalog = Self::default();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "toml"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path)?;
            catalog.add_file(&path.display().to_string(), &text)?;
        }
        Ok(catalog)
    }

    pub fn add_file(&mut self, name: &str, text: &str) -> Result<()> {
        let file: TemplateFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("{name}: {e}")))?;
        self.defaults.insert(file.language, file.default);
        for (key, instruction) in file.prompts {
            let prompt_id: PromptId = key.parse()?;
            let instruction = instruction.trim().to_string();
            if instruction.is_empty() || !instruction.ends_with(':') {
                return Err(Error::Config(format!(
                    "{name}: instruction {prompt_id} must be non-empty and end with a colon"
                )));
            }
            self.templates.insert(
                (prompt_id, file.language),
                PromptTemplate {
                    prompt_id,
                    language: file.language,
                    instruction,
                },
            );
        }
        Ok(())
    }

    /// Restricts the catalog to the given languages.
    pub fn retain_languages(&mut self, languages: &[Language]) {
        self.templates.retain(|(_, l), _| languages.contains(l));
        self.defaults.retain(|l, _| languages.contains(l));
    }

    pub fn get(&self, prompt_id: PromptId, language: Language) -> Result<&PromptTemplate> {
        self.templates
            .get(&(prompt_id, language))
            .ok_or_else(|| Error::MissingTemplate {
                prompt: prompt_id.to_string(),
                language: language.to_string(),
            })
    }

    pub fn render(&self, prompt_id: PromptId, language: Language, sentence_text: &str) -> Result<Vec<ChatMessage>> {
        Ok(self.get(prompt_id, language)?.render(sentence_text))
    }

    /// Every (prompt, language) slot for the configured languages; missing
    /// templates are listed with `present == false`.
    pub fn list_prompts(&self) -> Vec<CatalogEntry> {
        let mut out = Vec::new();
        for (&language, &is_default) in &self.defaults {
            for prompt_id in PromptId::ALL {
                let present = self.templates.contains_key(&(prompt_id, language));
                if !present {
                    log::warn!("no {prompt_id} template for {language}");
                }
                out.push(CatalogEntry {
                    prompt_id,
                    language,
                    present,
                    is_default,
                });
            }
        }
        out
    }
}

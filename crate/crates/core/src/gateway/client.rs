use std::thread;
use std::time::Duration;

use serde::Deserialize;

use super::cache::{cache_key, CorrectionCache};
use super::config::GenerationConfig;
use super::postprocess::postprocess;
use super::Correction;
use crate::corpus::SentenceRecord;
use crate::error::{Error, Result};
use crate::prompts::{ChatMessage, PromptTemplate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Chat-completions client bound to one served model.
#[derive(Debug, Clone)]
pub struct ChatClient {
    http: reqwest::blocking::Client,
    url: String,
    served_model: String,
    api_key: Option<String>,
    retry: RetryPolicy,
}

impl ChatClient {
    /// `endpoint` is either the full `/chat/completions` URL or its base.
    pub fn new(endpoint: &str, served_model: &str, api_key: Option<String>, timeout: Duration) -> Result<Self> {
        let base = endpoint.trim_end_matches('/');
        let url = if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            http,
            url,
            served_model: served_model.to_string(),
            api_key,
            retry: RetryPolicy::default(),
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn request_body(&self, messages: &[ChatMessage], config: &GenerationConfig) -> serde_json::Value {
        let mut body = serde_json::Map::new();
        body.insert("model".into(), self.served_model.clone().into());
        body.insert("messages".into(), serde_json::to_value(messages).expect("messages serialize"));
        config.apply_to(&mut body);
        body.insert("stream".into(), false.into());
        serde_json::Value::Object(body)
    }

    fn attempt(&self, body: &serde_json::Value) -> std::result::Result<String, String> {
        let mut req = self.http.post(&self.url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}: {}", resp.text().unwrap_or_default()));
        }
        let parsed: CompletionResponse = resp.json().map_err(|e| format!("bad response: {e}"))?;
        let choice = parsed.choices.into_iter().next().ok_or("response has no choices")?;
        Ok(choice.message.content.unwrap_or_default())
    }

    /// Reachability probe: any HTTP answer from `<base>/models` counts.
    pub fn ping(&self) -> std::result::Result<(), String> {
        let base = self.url.trim_end_matches("/chat/completions");
        let mut req = self.http.get(format!("{base}/models"));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        req.send().map(|_| ()).map_err(|e| e.to_string())
    }

    /// Raw completion text, retried with exponential backoff.
    pub fn complete(&self, messages: &[ChatMessage], config: &GenerationConfig) -> std::result::Result<String, String> {
        let body = self.request_body(messages, config);
        let mut delay = self.retry.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=self.retry.attempts.max(1) {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    log::warn!("{}: attempt {attempt} failed: {e}", self.url);
                    last = e;
                }
            }
            if attempt < self.retry.attempts {
                thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(format!("{} attempts failed; last error: {last}", self.retry.attempts.max(1)))
    }
}

/// Produces one correction, consulting and then filling the cache.
pub fn generate(
    sentence: &SentenceRecord,
    template: &PromptTemplate,
    model_id: &str,
    client: &ChatClient,
    config: &GenerationConfig,
    cache: Option<&CorrectionCache>,
) -> Result<Correction> {
    if template.language != sentence.language {
        return Err(Error::Config(format!(
            "template language {} does not match sentence {} ({})",
            template.language, sentence.id, sentence.language
        )));
    }
    let key = cache_key(model_id, template.prompt_id, sentence.language, &sentence.text, &config.hash());
    if let Some(hit) = cache.and_then(|c| c.get(&key)) {
        return Ok(hit);
    }
    let raw = client
        .complete(&template.render(&sentence.text), config)
        .map_err(|message| Error::Generation {
            sentence_id: sentence.id.clone(),
            message,
        })?;
    let correction = Correction {
        sentence_id: sentence.id.clone(),
        model_id: model_id.to_string(),
        prompt_id: template.prompt_id,
        language: sentence.language,
        output_text: postprocess(&raw),
        raw_response: Some(raw),
        timestamp: Some(chrono::Utc::now()),
    };
    if let Some(cache) = cache {
        cache.put(&key, &correction)?;
    }
    Ok(correction)
}

/// Runs `generate` over many sentences with at most `concurrency` requests in
/// flight. Results keep the input order.
pub fn generate_batch(
    jobs: &[(&SentenceRecord, &PromptTemplate)],
    model_id: &str,
    client: &ChatClient,
    config: &GenerationConfig,
    cache: Option<&CorrectionCache>,
    concurrency: usize,
) -> Result<Vec<Result<Correction>>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|(sentence, template)| generate(sentence, template, model_id, client, config, cache))
            .collect()
    }))
}

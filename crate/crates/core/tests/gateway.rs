mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use common::{chat_reply, echo_chat, prompt_text, MockServer, Response};
use gec_eval::corpus::parse_multiged_str;
use gec_eval::corpus::LabelScheme;
use gec_eval::gateway::{generate, generate_batch, ChatClient, CorrectionCache, GenerationConfig, RetryPolicy};
use gec_eval::prompts::{PromptCatalog, PromptId};
use gec_eval::{Error, Language};

fn fast_retry() -> RetryPolicy {
    RetryPolicy {
        attempts: 3,
        initial_backoff: Duration::from_millis(10),
    }
}

fn client(server: &MockServer) -> ChatClient {
    ChatClient::new(&format!("{}/v1", server.url), "served/model", None, Duration::from_secs(5))
        .unwrap()
        .with_retry(fast_retry())
}

fn sentences() -> Vec<gec_eval::corpus::SentenceRecord> {
    parse_multiged_str(common::EN_TSV, Language::En, &LabelScheme::default()).unwrap()
}

#[test]
fn request_carries_defaults_and_single_user_message() {
    let server = echo_chat();
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let template = catalog.get(PromptId::P3, Language::En).unwrap();
    let s = &sentences()[0];
    let out = generate(s, template, "m", &c, &GenerationConfig::default(), None).unwrap();
    assert_eq!(out.output_text, "I like the cat.");
    assert_eq!(out.raw_response.as_deref(), Some("I like the cat."));

    let reqs = server.requests();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].path, "/v1/chat/completions");
    let body = reqs[0].json();
    assert_eq!(body["model"], "served/model");
    assert_eq!(body["max_tokens"], 256);
    assert_eq!(body["top_k"], 40);
    assert_eq!(body["top_p"], 0.1);
    assert_eq!(body["repetition_penalty"], 1.18);
    assert_eq!(body["stream"], false);
    assert!(body.get("temperature").is_none());
    let messages = body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 1);
    assert_eq!(messages[0]["role"], "user");
    assert_eq!(
        messages[0]["content"].as_str().unwrap(),
        format!("{}\n{}", template.instruction, s.text)
    );
}

#[test]
fn greedy_decoding_sends_zero_temperature() {
    let server = echo_chat();
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let config = GenerationConfig {
        sampling: false,
        ..Default::default()
    };
    generate(&sentences()[1], catalog.get(PromptId::P1, Language::En).unwrap(), "m", &c, &config, None).unwrap();
    assert_eq!(server.requests()[0].json()["temperature"], 0.0);
}

#[test]
fn wrapped_output_is_cleaned_and_raw_kept() {
    let server = MockServer::start(|_| chat_reply("  \"She is here.\"<|im_end|>\n"));
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let out = generate(
        &sentences()[1],
        catalog.get(PromptId::P3, Language::En).unwrap(),
        "m",
        &c,
        &GenerationConfig::default(),
        None,
    )
    .unwrap();
    assert_eq!(out.output_text, "She is here.");
    assert_eq!(out.raw_response.as_deref(), Some("  \"She is here.\"<|im_end|>\n"));
}

#[test]
fn empty_output_is_kept_as_empty_correction() {
    let server = MockServer::start(|_| chat_reply(""));
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let out = generate(
        &sentences()[0],
        catalog.get(PromptId::P2, Language::En).unwrap(),
        "m",
        &c,
        &GenerationConfig::default(),
        None,
    )
    .unwrap();
    assert_eq!(out.output_text, "");
}

#[test]
fn transient_failures_are_retried() {
    let calls = Arc::new(AtomicUsize::new(0));
    let seen = calls.clone();
    let server = MockServer::start(move |req| {
        if seen.fetch_add(1, Ordering::SeqCst) < 2 {
            Response::status(503, "loading")
        } else {
            chat_reply(&prompt_text(req))
        }
    });
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let out = generate(
        &sentences()[1],
        catalog.get(PromptId::P3, Language::En).unwrap(),
        "m",
        &c,
        &GenerationConfig::default(),
        None,
    )
    .unwrap();
    assert_eq!(out.output_text, "She is here.");
    assert_eq!(calls.load(Ordering::SeqCst), 3);
}

#[test]
fn exhausted_retries_name_the_sentence() {
    let server = MockServer::start(|_| Response::status(500, "boom"));
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let err = generate(
        &sentences()[2],
        catalog.get(PromptId::P3, Language::En).unwrap(),
        "m",
        &c,
        &GenerationConfig::default(),
        None,
    )
    .unwrap_err();
    match err {
        Error::Generation { sentence_id, message } => {
            assert_eq!(sentence_id, "en-2");
            assert!(message.contains("3 attempts"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn cache_hit_skips_the_endpoint_and_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let server = echo_chat();
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let template = catalog.get(PromptId::P3, Language::En).unwrap();
    let config = GenerationConfig::default();
    let s = &sentences()[0];

    let cache = CorrectionCache::open(&path).unwrap();
    let first = generate(s, template, "m", &c, &config, Some(&cache)).unwrap();
    let second = generate(s, template, "m", &c, &config, Some(&cache)).unwrap();
    assert_eq!(first, second);
    assert_eq!(server.requests().len(), 1);
    drop(cache);

    let reopened = CorrectionCache::open(&path).unwrap();
    assert_eq!(reopened.len(), 1);
    let third = generate(s, template, "m", &c, &config, Some(&reopened)).unwrap();
    assert_eq!(third, first);
    assert_eq!(server.requests().len(), 1);

    // a different config is a different key
    let other = GenerationConfig {
        top_k: 1,
        ..Default::default()
    };
    generate(s, template, "m", &c, &other, Some(&reopened)).unwrap();
    assert_eq!(server.requests().len(), 2);
}

#[test]
fn batch_keeps_order_and_reports_failures_per_item() {
    let server = MockServer::start(|req| {
        let text = prompt_text(req);
        if text.starts_with("She") {
            Response::status(400, "bad request")
        } else {
            chat_reply(&text)
        }
    });
    let c = client(&server).with_retry(RetryPolicy {
        attempts: 1,
        initial_backoff: Duration::ZERO,
    });
    let catalog = PromptCatalog::builtin();
    let template = catalog.get(PromptId::P3, Language::En).unwrap();
    let sents = sentences();
    let jobs: Vec<_> = sents.iter().map(|s| (s, template)).collect();
    let results = generate_batch(&jobs, "m", &c, &GenerationConfig::default(), None, 3).unwrap();
    assert_eq!(results.len(), 3);
    assert_eq!(results[0].as_ref().unwrap().sentence_id, "en-0");
    assert!(results[1].is_err());
    assert_eq!(results[2].as_ref().unwrap().sentence_id, "en-2");
}

#[test]
fn language_mismatch_is_rejected_before_any_request() {
    let server = echo_chat();
    let c = client(&server);
    let catalog = PromptCatalog::builtin();
    let err = generate(
        &sentences()[0],
        catalog.get(PromptId::P3, Language::De).unwrap(),
        "m",
        &c,
        &GenerationConfig::default(),
        None,
    );
    assert!(matches!(err, Err(Error::Config(_))));
    assert!(server.requests().is_empty());
}

//! Test helpers: a minimal threaded HTTP/1.1 server and fixture builders.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub headers: BTreeMap<String, String>,
    pub body: Vec<u8>,
}

impl Request {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).expect("json body")
    }

    pub fn form(&self) -> BTreeMap<String, String> {
        let body = String::from_utf8(self.body.clone()).unwrap();
        body.split('&')
            .filter(|p| !p.is_empty())
            .map(|pair| {
                let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
                (url_decode(k), url_decode(v))
            })
            .collect()
    }
}

fn url_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => out.push(b' '),
            b'%' if i + 2 < bytes.len() => {
                let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap();
                out.push(u8::from_str_radix(hex, 16).unwrap());
                i += 2;
            }
            b => out.push(b),
        }
        i += 1;
    }
    String::from_utf8(out).unwrap()
}

pub struct Response {
    pub status: u16,
    pub body: String,
}

impl Response {
    pub fn json(v: Value) -> Self {
        Self {
            status: 200,
            body: v.to_string(),
        }
    }

    pub fn status(status: u16, body: &str) -> Self {
        Self {
            status,
            body: body.to_string(),
        }
    }
}

type Handler = dyn Fn(&Request) -> Response + Send + Sync;

pub struct MockServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
}

impl MockServer {
    pub fn start(handler: impl Fn(&Request) -> Response + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let log = requests.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let handler = handler.clone();
                let log = log.clone();
                thread::spawn(move || serve(stream, &*handler, &log));
            }
        });
        Self { url, requests }
    }

    pub fn requests(&self) -> Vec<Request> {
        self.requests.lock().unwrap().clone()
    }

    pub fn count(&self, path: &str) -> usize {
        self.requests().iter().filter(|r| r.path == path).count()
    }
}

fn serve(stream: TcpStream, handler: &Handler, log: &Mutex<Vec<Request>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let mut parts = line.split_whitespace();
        let method = parts.next().unwrap_or_default().to_string();
        let path = parts.next().unwrap_or_default().to_string();
        let mut headers = BTreeMap::new();
        loop {
            let mut h = String::new();
            reader.read_line(&mut h).unwrap();
            let h = h.trim_end();
            if h.is_empty() {
                break;
            }
            if let Some((k, v)) = h.split_once(':') {
                headers.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
            }
        }
        let len: usize = headers.get("content-length").and_then(|v| v.parse().ok()).unwrap_or(0);
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        let req = Request {
            method,
            path,
            headers,
            body,
        };
        let resp = handler(&req);
        log.lock().unwrap().push(req);
        let reason = if resp.status == 200 { "OK" } else { "Error" };
        let out = format!(
            "HTTP/1.1 {} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{}",
            resp.status,
            resp.body.len(),
            resp.body
        );
        if writer.write_all(out.as_bytes()).is_err() {
            return;
        }
    }
}

/// Sentence text of a rendered single-message prompt (`instruction\ntext`).
pub fn prompt_text(req: &Request) -> String {
    let body = req.json();
    let content = body["messages"][0]["content"].as_str().unwrap().to_string();
    content.rsplit_once('\n').map(|(_, t)| t.to_string()).unwrap_or(content)
}

pub fn chat_reply(content: &str) -> Response {
    Response::json(json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}]
    }))
}

/// Chat endpoint that returns the input sentence with "teh" fixed.
pub fn echo_chat() -> MockServer {
    MockServer::start(|req| {
        if req.path.ends_with("/models") {
            return Response::json(json!({"data": []}));
        }
        chat_reply(&prompt_text(req).replace("teh", "the"))
    })
}

/// LanguageTool stand-in: one match per occurrence of "teh".
pub fn mock_checker() -> MockServer {
    MockServer::start(|req| {
        let form = req.form();
        let text = form.get("text").cloned().unwrap_or_default();
        let mut matches = Vec::new();
        let mut from = 0;
        while let Some(pos) = text[from..].find("teh") {
            let byte = from + pos;
            let offset = text[..byte].encode_utf16().count();
            matches.push(json!({
                "message": "Possible spelling mistake",
                "offset": offset,
                "length": 3,
                "rule": {"id": "MORFOLOGIK_RULE"}
            }));
            from = byte + 3;
        }
        Response::json(json!({
            "software": {"name": "LanguageTool", "version": "6.4"},
            "language": {"code": form.get("language")},
            "matches": matches
        }))
    })
}

/// Scoring sidecar stand-in with deterministic, text-derived scores.
pub fn mock_scorer() -> MockServer {
    MockServer::start(|req| match req.path.as_str() {
        "/health" => Response::json(json!({
            "status": "ready",
            "model_versions": {"bertscore": "bert-base-multilingual-cased", "lid": "lid218e"}
        })),
        "/score" => {
            let body = req.json();
            let metric = body["metric"].as_str().unwrap().to_string();
            let scores: Vec<f64> = body["pairs"]
                .as_array()
                .unwrap()
                .iter()
                .map(|p| {
                    let r = p["reference"].as_str().unwrap();
                    let c = p["candidate"].as_str().unwrap();
                    let base = 1.0 / (1.0 + (r.len() as f64 - c.len() as f64).abs());
                    match metric.as_str() {
                        "bertscore" => base,
                        "sbert" => base * 0.9,
                        _ => base * 0.8,
                    }
                })
                .collect();
            Response::json(json!({ "scores": scores }))
        }
        "/lid" => {
            let body = req.json();
            let langs: Vec<String> = body["languages"]
                .as_array()
                .unwrap()
                .iter()
                .map(|l| l.as_str().unwrap().to_string())
                .collect();
            let probs: Vec<Value> = body["texts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| {
                    let t = t.as_str().unwrap();
                    let guess = if t.contains(" der ") || t.contains(" ist ") { "de" } else { "en" };
                    let m: serde_json::Map<String, Value> = langs
                        .iter()
                        .map(|l| (l.clone(), json!(if l == guess { 0.9 } else { 0.02 })))
                        .collect();
                    Value::Object(m)
                })
                .collect();
            Response::json(json!({ "probabilities": probs }))
        }
        _ => Response::status(404, "not found"),
    })
}

pub const EN_TSV: &str = "\
I\tc\nlike\tc\nteh\ti\ncat\tc\n.\tc\n\n\
She\tc\nis\tc\nhere\tc\n.\tc\n\n\
We\tc\ndo\tc\nn't\tc\nknow\tc\nteh\ti\nway\tc\n.\tc\n";

pub const DE_TSV: &str = "\
Das\tc\nist\tc\nder\tc\nHund\tc\n.\tc\n\n\
Er\tc\nist\tc\nteh\ti\nMann\tc\n.\tc\n";

/// Writes the two-language fixture corpus and a config pointing at it.
pub fn write_fixture(dir: &Path, extra: &str) -> PathBuf {
    std::fs::write(dir.join("en.tsv"), EN_TSV).unwrap();
    std::fs::write(dir.join("de.tsv"), DE_TSV).unwrap();
    let cfg = format!(
        "out_dir = \"out\"\nlanguages = [\"en\", \"de\"]\n\n[corpus.files]\nen = \"en.tsv\"\nde = \"de.tsv\"\n\n{extra}"
    );
    let path = dir.join("gec-eval.toml");
    std::fs::write(&path, cfg).unwrap();
    path
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

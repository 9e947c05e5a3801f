//! OpenAI-compatible chat-completions client.
//!
//! Wire subset: `POST {base}/chat/completions` with
//! `{"model", "messages": [{"role":"system",...},{"role":"user",...}], ...hyperparams}`;
//! the reply is read from `choices[0].message.content` and
//! `usage.{prompt_tokens,completion_tokens}`.
//!
//! Transport-level failures (connection errors, 429, 5xx) retry with
//! exponential backoff; this budget is separate from the runtime's semantic
//! retry loop, which reacts to well-formed but unusable model output.

use std::collections::BTreeMap;
use std::time::Duration;

use serde_json::{json, Value as JsonValue};

use crate::frontend::ast::Literal;

use super::{BackendError, CompletionRequest, CompletionResult, ModelBackend};

#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Additional transport attempts after the first (not semantic retries).
    pub max_transport_retries: u32,
    pub initial_backoff: Duration,
    pub request_timeout: Duration,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            max_transport_retries: 3,
            initial_backoff: Duration::from_millis(200),
            request_timeout: Duration::from_secs(120),
        }
    }
}

pub struct HttpBackend {
    base_url: String,
    api_key: String,
    /// Lowest-precedence hyperparameters; request-level values win.
    defaults: BTreeMap<String, Literal>,
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

pub fn http_backend(
    base_url: &str,
    api_key: &str,
    defaults: BTreeMap<String, Literal>,
) -> Result<HttpBackend, BackendError> {
    HttpBackend::new(base_url, api_key, defaults, HttpConfig::default())
}

impl HttpBackend {
    pub fn new(
        base_url: &str,
        api_key: &str,
        defaults: BTreeMap<String, Literal>,
        config: HttpConfig,
    ) -> Result<HttpBackend, BackendError> {
        if api_key.is_empty() {
            return Err(BackendError::Config { message: "api key must not be empty".to_string() });
        }
        if !(base_url.starts_with("http://") || base_url.starts_with("https://")) {
            return Err(BackendError::Config {
                message: format!("base url `{base_url}` must start with http:// or https://"),
            });
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.request_timeout)
            .build()
            .map_err(|e| BackendError::Config { message: format!("http client: {e}") })?;
        Ok(HttpBackend {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key: api_key.to_string(),
            defaults,
            config,
            client,
        })
    }

    fn body_for(&self, request: &CompletionRequest) -> JsonValue {
        let mut body = json!({
            "model": request.model_name,
            "messages": [
                { "role": "system", "content": request.prompt.system },
                { "role": "user", "content": request.prompt.user },
            ],
        });
        let object = body.as_object_mut().unwrap();
        let mut merged = self.defaults.clone();
        merged.extend(request.hyperparams.clone());
        for (name, value) in &merged {
            let v = match value {
                Literal::Int(i) => json!(i),
                Literal::Float(f) => json!(f),
                Literal::Str(s) => json!(s),
                Literal::Bool(b) => json!(b),
            };
            object.insert(name.clone(), v);
        }
        body
    }
}

pub(crate) fn parse_completion_response(body: &JsonValue) -> Result<CompletionResult, String> {
    let content = body
        .pointer("/choices/0/message/content")
        .and_then(JsonValue::as_str)
        .ok_or("response has no choices[0].message.content")?;
    let prompt_tokens = body.pointer("/usage/prompt_tokens").and_then(JsonValue::as_u64).unwrap_or(0);
    let completion_tokens = body.pointer("/usage/completion_tokens").and_then(JsonValue::as_u64).unwrap_or(0);
    Ok(CompletionResult { text: content.to_string(), prompt_tokens, completion_tokens })
}

fn excerpt(body: &str) -> String {
    let mut text: String = body.chars().take(200).collect();
    if body.chars().count() > 200 {
        text.push('…');
    }
    text
}

impl ModelBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        let url = format!("{}/chat/completions", self.base_url);
        let body = self.body_for(request);
        let mut backoff = self.config.initial_backoff;
        let attempts = self.config.max_transport_retries + 1;
        let mut last_transport = String::new();
        for attempt in 1..=attempts {
            let sent = self
                .client
                .post(&url)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send();
            match sent {
                Err(e) => last_transport = e.to_string(),
                Ok(response) => {
                    let status = response.status();
                    let text = response.text().unwrap_or_default();
                    if status.is_success() {
                        let parsed: JsonValue = serde_json::from_str(&text).map_err(|e| {
                            BackendError::Provider { status: status.as_u16(), body_excerpt: format!("unparseable body: {e}") }
                        })?;
                        return parse_completion_response(&parsed).map_err(|message| BackendError::Provider {
                            status: status.as_u16(),
                            body_excerpt: format!("{message}; body: {}", excerpt(&text)),
                        });
                    }
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    if !retryable {
                        return Err(BackendError::Provider { status: status.as_u16(), body_excerpt: excerpt(&text) });
                    }
                    last_transport = format!("status {status}: {}", excerpt(&text));
                }
            }
            if attempt < attempts {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(BackendError::Transport { message: last_transport, attempts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::{Prompt, Sections};
    use std::io::{Read, Write};
    use std::net::TcpListener;

    fn request() -> CompletionRequest {
        CompletionRequest {
            prompt: Prompt { system: "sys".into(), user: "user text".into(), sections: Sections::default() },
            model_name: "gpt-test".into(),
            hyperparams: [
                ("temperature".to_string(), Literal::Float(0.7)),
                ("max_tokens".to_string(), Literal::Int(64)),
            ]
            .into_iter()
            .collect(),
        }
    }

    /// One-shot HTTP server returning a fixed response; captures the request.
    fn serve_once(status_line: &'static str, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = vec![0u8; 65536];
            let mut read_total = 0;
            let captured = loop {
                let n = stream.read(&mut buf[read_total..]).unwrap();
                read_total += n;
                let text = String::from_utf8_lossy(&buf[..read_total]).to_string();
                if let Some(header_end) = text.find("\r\n\r\n") {
                    let content_length = text
                        .lines()
                        .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse::<usize>().unwrap()))
                        .unwrap_or(0);
                    if read_total >= header_end + 4 + content_length {
                        break text;
                    }
                }
                if n == 0 {
                    break text;
                }
            };
            let response = format!(
                "HTTP/1.1 {status_line}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
            captured
        });
        (format!("http://{addr}"), handle)
    }

    #[test]
    fn maps_wire_response_to_completion_result() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"145"}}],"usage":{"prompt_tokens":812,"completion_tokens":77}}"#;
        let (base, handle) = serve_once("200 OK", body);
        let backend = http_backend(&base, "test-key", BTreeMap::new()).unwrap();
        let result = backend.complete(&request()).unwrap();
        assert_eq!(result.text, "145");
        assert_eq!(result.prompt_tokens, 812);
        assert_eq!(result.completion_tokens, 77);

        let captured = handle.join().unwrap();
        assert!(captured.starts_with("POST /chat/completions"));
        assert!(captured.contains("authorization: Bearer test-key") || captured.contains("Authorization: Bearer test-key"));
        let json_start = captured.find("\r\n\r\n").unwrap() + 4;
        let sent: JsonValue = serde_json::from_str(&captured[json_start..]).unwrap();
        assert_eq!(sent["model"], "gpt-test");
        assert_eq!(sent["messages"][0]["role"], "system");
        assert_eq!(sent["messages"][1]["content"], "user text");
        assert_eq!(sent["temperature"], 0.7);
        assert_eq!(sent["max_tokens"], 64);
    }

    #[test]
    fn unauthorized_is_a_provider_error() {
        let (base, handle) = serve_once("401 Unauthorized", r#"{"error":{"message":"bad key"}}"#);
        let backend = http_backend(&base, "wrong", BTreeMap::new()).unwrap();
        match backend.complete(&request()) {
            Err(BackendError::Provider { status: 401, body_excerpt }) => {
                assert!(body_excerpt.contains("bad key"));
            }
            other => panic!("expected provider error, got {other:?}"),
        }
        handle.join().unwrap();
    }

    #[test]
    fn connection_failure_exhausts_transport_budget() {
        // Bind-then-drop leaves a port nothing listens on.
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let backend = HttpBackend::new(
            &format!("http://127.0.0.1:{port}"),
            "key",
            BTreeMap::new(),
            HttpConfig {
                max_transport_retries: 1,
                initial_backoff: Duration::from_millis(1),
                request_timeout: Duration::from_secs(2),
            },
        )
        .unwrap();
        match backend.complete(&request()) {
            Err(BackendError::Transport { attempts: 2, .. }) => {}
            other => panic!("expected transport error, got {other:?}"),
        }
    }

    #[test]
    fn empty_api_key_is_a_config_error() {
        assert!(matches!(
            http_backend("http://localhost", "", BTreeMap::new()),
            Err(BackendError::Config { .. })
        ));
        assert!(matches!(
            http_backend("localhost", "k", BTreeMap::new()),
            Err(BackendError::Config { .. })
        ));
    }

    #[test]
    fn defaults_yield_to_request_hyperparams() {
        let backend = http_backend(
            "http://example.invalid",
            "k",
            [("temperature".to_string(), Literal::Float(0.0)), ("top_p".to_string(), Literal::Float(0.9))]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let body = backend.body_for(&request());
        assert_eq!(body["temperature"], 0.7, "request-level temperature wins");
        assert_eq!(body["top_p"], 0.9, "backend default fills the gap");
    }
}

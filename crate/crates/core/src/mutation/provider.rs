use std::collections::BTreeMap;
use std::io::Read;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::stub::{StubProvider, StubRule};
use super::PromptRequest;
use crate::error::{Error, Result};
use crate::language::LanguageProfile;

pub const ENDPOINT_ENV: &str = "SIZEPROBE_LLM_ENDPOINT";
pub const MODEL_ENV: &str = "SIZEPROBE_LLM_MODEL";

/// Anything that turns a rendered prompt into a raw textual answer.
pub trait MutationProvider: Send + Sync {
    fn mutate(&self, request: &PromptRequest) -> Result<String>;

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Remote,
    #[default]
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub request_timeout_secs: f64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    /// Passed through verbatim into the request body (temperature, top_p, ...).
    pub options: BTreeMap<String, Value>,
    pub stub_rules: BTreeMap<String, StubRule>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::Stub,
            endpoint: None,
            model: None,
            request_timeout_secs: 120.0,
            max_attempts: 3,
            backoff_ms: 500,
            options: BTreeMap::new(),
            stub_rules: BTreeMap::new(),
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kind == ProviderKind::Remote {
            if self.endpoint.as_deref().is_none_or(str::is_empty) {
                return Err(Error::config("provider.endpoint", "remote provider needs an endpoint"));
            }
            if self.model.as_deref().is_none_or(str::is_empty) {
                return Err(Error::config("provider.model", "remote provider needs a model name"));
            }
        }
        if self.max_attempts == 0 {
            return Err(Error::config("provider.max_attempts", "must be at least 1"));
        }
        if !(self.request_timeout_secs > 0.0) {
            return Err(Error::config("provider.request_timeout_secs", "must be positive"));
        }
        Ok(())
    }

    pub fn build(&self, profile: &LanguageProfile) -> Result<Box<dyn MutationProvider>> {
        self.validate()?;
        Ok(match self.kind {
            ProviderKind::Stub => Box::new(StubProvider::new(profile.clone()).with_rules(self.stub_rules.clone())),
            ProviderKind::Remote => Box::new(RemoteProvider::from_config(self)),
        })
    }
}

/// Chat-completion client: one user message per request, no history.
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    endpoint: String,
    model: String,
    timeout: Duration,
    max_attempts: u32,
    backoff: Duration,
    options: BTreeMap<String, Value>,
}

enum Attempt {
    Timeout,
    Transport(String),
}

impl RemoteProvider {
    pub fn from_config(cfg: &ProviderConfig) -> Self {
        RemoteProvider {
            endpoint: cfg.endpoint.clone().unwrap_or_default(),
            model: cfg.model.clone().unwrap_or_default(),
            timeout: Duration::from_secs_f64(cfg.request_timeout_secs),
            max_attempts: cfg.max_attempts,
            backoff: Duration::from_millis(cfg.backoff_ms),
            options: cfg.options.clone(),
        }
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let obj = body.as_object_mut().expect("object literal");
        for (k, v) in &self.options {
            obj.entry(k.clone()).or_insert_with(|| v.clone());
        }
        body
    }

    fn attempt(&self, body: &str) -> std::result::Result<String, Attempt> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut resp = agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => Attempt::Timeout,
                other => Attempt::Transport(other.to_string()),
            })?;
        let status = resp.status();
        let mut text = String::new();
        resp.body_mut()
            .as_reader()
            .read_to_string(&mut text)
            .map_err(|e| Attempt::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(Attempt::Transport(format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        parse_completion(&text).ok_or_else(|| Attempt::Transport("response has no message content".into()))
    }
}

/// Accepts OpenAI-style `choices[0].message.content`, Ollama-style
/// `message.content` and bare `response` strings.
pub(crate) fn parse_completion(text: &str) -> Option<String> {
    let v: Value = serde_json::from_str(text).ok()?;
    let content = v
        .pointer("/choices/0/message/content")
        .or_else(|| v.pointer("/message/content"))
        .or_else(|| v.pointer("/choices/0/text"))
        .or_else(|| v.get("response"))?;
    content.as_str().map(str::to_string)
}

impl MutationProvider for RemoteProvider {
    fn mutate(&self, request: &PromptRequest) -> Result<String> {
        let body = self.request_body(&request.rendered_prompt).to_string();
        let mut last = String::new();
        for attempt in 1..=self.max_attempts {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Attempt::Timeout) => return Err(Error::ProviderTimeout { secs: self.timeout.as_secs_f64() }),
                Err(Attempt::Transport(msg)) => {
                    log::warn!("provider attempt {attempt}/{} failed: {msg}", self.max_attempts);
                    last = msg;
                    if attempt < self.max_attempts {
                        std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
                    }
                }
            }
        }
        Err(Error::ProviderUnavailable { attempts: self.max_attempts, last })
    }

    fn describe(&self) -> String {
        format!("remote({} @ {})", self.model, self.endpoint)
    }
}

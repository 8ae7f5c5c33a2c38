//! Text-completion backends: the deterministic oracle and a remote
//! chat-completion client with cassette record/replay.

mod cassette;
pub mod oracle;
mod remote;

pub use cassette::{Cassette, CassetteMode, CassetteReasoner};
pub use oracle::{oracle_rules, OracleReasoner, RuleHypothesis};
pub use remote::{RemoteConfig, RemoteReasoner, DEFAULT_API_KEY_ENV};

use crate::literal::{parse_response_map, LiteralValue};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReasonerError {
    #[error("prompt exchange has no messages")]
    EmptyExchange,
    #[error("missing credential: set the {0} environment variable")]
    MissingCredential(String),
    #[error("backend unavailable after {attempts} attempts: {message}")]
    Unavailable { attempts: u32, message: String },
    #[error("malformed backend response: {0}")]
    BadResponse(String),
    #[error("cassette error: {0}")]
    Cassette(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub temperature: f64,
    pub max_tokens: u32,
    pub top_p: f64,
    pub n: u32,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { temperature: 0.1, max_tokens: 4000, top_p: 1.0, n: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptExchange {
    pub system: String,
    pub messages: Vec<Message>,
    pub sampling: SamplingConfig,
}

impl PromptExchange {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            system: system.into(),
            messages: vec![Message { role: Role::User, content: user.into() }],
            sampling: SamplingConfig::default(),
        }
    }

    pub fn push(&mut self, role: Role, content: impl Into<String>) {
        self.messages.push(Message { role, content: content.into() });
    }

    pub fn last_user(&self) -> &str {
        self.messages.iter().rev().find(|m| m.role == Role::User).map_or("", |m| m.content.as_str())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("exchange serializes");
        hex::encode(Sha256::digest(json))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub retries: u32,
}

/// One backend call as logged into the episode results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonerTrace {
    pub kind: String,
    pub digest: String,
    pub response: String,
    pub latency_ms: u64,
    pub retries: u32,
}

pub trait Reasoner: Send + Sync {
    fn name(&self) -> String;
    fn complete(&self, exchange: &PromptExchange) -> Result<Completion, ReasonerError>;
    /// Whether latencies are meaningful; the oracle logs 0 so traces stay
    /// byte-identical across runs.
    fn timed(&self) -> bool {
        true
    }
}

/// Per-agent wrapper that tracks traces and handles the parse-retry rule.
pub struct ReasonerClient {
    reasoner: Arc<dyn Reasoner>,
    pub system: String,
    pub sampling: SamplingConfig,
    traces: Vec<ReasonerTrace>,
}

impl ReasonerClient {
    pub fn new(reasoner: Arc<dyn Reasoner>, system: impl Into<String>) -> Self {
        Self { reasoner, system: system.into(), sampling: SamplingConfig::default(), traces: Vec::new() }
    }

    pub fn backend_name(&self) -> String {
        self.reasoner.name()
    }

    fn call(&mut self, kind: &str, exchange: &PromptExchange) -> Result<String, ReasonerError> {
        if exchange.messages.is_empty() {
            return Err(ReasonerError::EmptyExchange);
        }
        let started = Instant::now();
        let completion = self.reasoner.complete(exchange)?;
        let latency_ms = if self.reasoner.timed() { started.elapsed().as_millis() as u64 } else { 0 };
        self.traces.push(ReasonerTrace {
            kind: kind.to_string(),
            digest: exchange.digest(),
            response: completion.text.clone(),
            latency_ms,
            retries: completion.retries,
        });
        Ok(completion.text)
    }

    pub fn ask(&mut self, kind: &str, user: &str) -> Result<String, ReasonerError> {
        let mut ex = PromptExchange::new(self.system.clone(), user);
        ex.sampling = self.sampling;
        self.call(kind, &ex)
    }

    /// Asks for a literal map; on a parse failure asks once more with the
    /// error appended. `Ok(None)` means both answers were unparsable.
    pub fn ask_map(&mut self, kind: &str, user: &str) -> Result<Option<LiteralValue>, ReasonerError> {
        let mut ex = PromptExchange::new(self.system.clone(), user);
        ex.sampling = self.sampling;
        let first = self.call(kind, &ex)?;
        let err = match parse_response_map(&first) {
            Ok(v) => return Ok(Some(v)),
            Err(e) => e,
        };
        ex.push(Role::Assistant, first);
        ex.push(
            Role::User,
            format!("Your previous response could not be parsed: {err}. Reply again with a single Python dictionary in a ```python block."),
        );
        let second = self.call(kind, &ex)?;
        Ok(parse_response_map(&second).ok())
    }

    pub fn drain_traces(&mut self) -> Vec<ReasonerTrace> {
        std::mem::take(&mut self.traces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = PromptExchange::new("sys", "hello");
        let b = PromptExchange::new("sys", "hello");
        let c = PromptExchange::new("sys", "hello!");
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }

    struct Echo(&'static [&'static str], std::sync::Mutex<usize>);

    impl Reasoner for Echo {
        fn name(&self) -> String {
            "echo".into()
        }
        fn complete(&self, _: &PromptExchange) -> Result<Completion, ReasonerError> {
            let mut i = self.1.lock().unwrap();
            let text = self.0[(*i).min(self.0.len() - 1)].to_string();
            *i += 1;
            Ok(Completion { text, retries: 0 })
        }
        fn timed(&self) -> bool {
            false
        }
    }

    #[test]
    fn ask_map_retries_once_then_gives_up() {
        let r = Arc::new(Echo(&["no dict here {", "{'ok': True}"], Default::default()));
        let mut c = ReasonerClient::new(r, "sys");
        let v = c.ask_map("test", "go").unwrap().unwrap();
        assert_eq!(v.get("ok").and_then(LiteralValue::as_bool), Some(true));
        assert_eq!(c.drain_traces().len(), 2);

        let r = Arc::new(Echo(&["{", "{'a': [}"], Default::default()));
        let mut c = ReasonerClient::new(r, "sys");
        assert!(c.ask_map("test", "go").unwrap().is_none());
        assert_eq!(c.drain_traces().len(), 2);
    }
}

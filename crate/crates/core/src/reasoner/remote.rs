use super::{Completion, PromptExchange, Reasoner, ReasonerError, Role};
use serde::{Deserialize, Serialize};
use std::time::Duration;

pub const DEFAULT_API_KEY_ENV: &str = "HM_API_KEY";

/// Connection settings. The credential itself is never stored here, only
/// the name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4-1106-preview".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            max_retries: 4,
            initial_backoff_ms: 500,
            max_backoff_ms: 16_000,
            timeout_secs: 120,
        }
    }
}

impl RemoteConfig {
    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.initial_backoff_ms.saturating_mul(1 << attempt.min(16));
        Duration::from_millis(ms.min(self.max_backoff_ms))
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
    top_p: f64,
    n: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireReply,
}

#[derive(Deserialize)]
struct WireReply {
    content: Option<String>,
}

enum Attempt {
    Retry(String),
    Fatal(ReasonerError),
}

/// Chat-completion client over HTTPS.
pub struct RemoteReasoner {
    config: RemoteConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl RemoteReasoner {
    /// Reads the credential from the configured environment variable.
    pub fn from_env(config: RemoteConfig) -> Result<Self, ReasonerError> {
        let api_key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| ReasonerError::MissingCredential(config.api_key_env.clone()))?;
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: RemoteConfig, api_key: String) -> Result<Self, ReasonerError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ReasonerError::Unavailable { attempts: 0, message: e.to_string() })?;
        Ok(Self { config, api_key, http })
    }

    fn attempt(&self, exchange: &PromptExchange) -> Result<String, Attempt> {
        let mut messages = vec![WireMessage { role: "system", content: &exchange.system }];
        messages.extend(exchange.messages.iter().map(|m| WireMessage {
            role: match m.role {
                Role::User => "user",
                Role::Assistant => "assistant",
            },
            content: &m.content,
        }));
        let body = WireRequest {
            model: &self.config.model,
            messages,
            temperature: exchange.sampling.temperature,
            max_tokens: exchange.sampling.max_tokens,
            top_p: exchange.sampling.top_p,
            n: exchange.sampling.n,
        };
        let resp = self
            .http
            .post(&self.config.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| Attempt::Retry(format!("transport: {e}")))?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(ReasonerError::BadResponse(format!("HTTP {status}"))));
        }
        let parsed: WireResponse =
            resp.json().map_err(|e| Attempt::Fatal(ReasonerError::BadResponse(e.to_string())))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Attempt::Fatal(ReasonerError::BadResponse("no choices in response".into())))
    }
}

impl Reasoner for RemoteReasoner {
    fn name(&self) -> String {
        format!("remote:{}", self.config.model)
    }

    fn complete(&self, exchange: &PromptExchange) -> Result<Completion, ReasonerError> {
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.config.backoff(attempt - 1));
            }
            match self.attempt(exchange) {
                Ok(text) => return Ok(Completion { text, retries: attempt }),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => {
                    log::warn!("reasoner attempt {} failed: {msg}", attempt + 1);
                    last = msg;
                }
            }
        }
        Err(ReasonerError::Unavailable { attempts: self.config.max_retries + 1, message: last })
    }
}

//! OpenAI-compatible chat-completions client.

use std::time::Duration;

use serde_json::json;

use super::{BackendConfig, LlmBackend, LlmError, LlmSession, StepContext};
use crate::http::{HttpError, JsonClient, RetryPolicy};
use crate::prompt::PromptBundle;
use crate::scene::Episode;

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    url: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
    client: JsonClient,
}

impl RemoteBackend {
    pub fn new(cfg: &BackendConfig) -> Result<Self, LlmError> {
        let base = cfg
            .endpoint_url
            .clone()
            .ok_or_else(|| LlmError::Config("remote backend needs endpoint_url".into()))?;
        let model = cfg
            .model_name
            .clone()
            .ok_or_else(|| LlmError::Config("remote backend needs model_name".into()))?;
        let url = if base.trim_end_matches('/').ends_with("/chat/completions") {
            base
        } else {
            format!("{}/chat/completions", base.trim_end_matches('/'))
        };
        let api_key = match &cfg.api_key_env_var {
            Some(var) => Some(
                std::env::var(var).map_err(|_| LlmError::Config(format!("environment variable {var} is not set")))?,
            ),
            None => None,
        };
        if !(cfg.timeout_secs > 0.0 && cfg.timeout_secs.is_finite()) {
            return Err(LlmError::Config("timeout_secs must be positive".into()));
        }
        let client = JsonClient::new(RetryPolicy {
            timeout: Duration::from_secs_f64(cfg.timeout_secs),
            max_retries: cfg.max_retries,
            ..RetryPolicy::default()
        })
        .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(RemoteBackend { url, model, temperature: cfg.temperature, api_key, client })
    }

    pub fn with_backoff(mut self, initial: Duration) -> Self {
        let policy = RetryPolicy { initial_backoff: initial, ..self.client.policy().clone() };
        self.client = JsonClient::new(policy).expect("client rebuilds");
        self
    }

    pub fn complete_prompt(&self, prompt: &PromptBundle) -> Result<String, LlmError> {
        let body = json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": prompt.prefix},
                {"role": "user", "content": prompt.input},
            ],
            "temperature": self.temperature,
        });
        let resp = self.client.post_json(&self.url, self.api_key.as_deref(), &body).map_err(|e| match e {
            HttpError::Transport { attempts, message } => LlmError::Transport { attempts, message },
            HttpError::Status { status, body } => LlmError::Api { status, body },
            HttpError::Client(m) => LlmError::Config(m),
        })?;
        resp["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| LlmError::BadResponse("missing choices[0].message.content".into()))
    }
}

struct RemoteSession {
    backend: RemoteBackend,
}

impl LlmBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn session(&self, _episode: &Episode) -> Box<dyn LlmSession> {
        Box::new(RemoteSession { backend: self.clone() })
    }
}

impl LlmSession for RemoteSession {
    fn complete(&mut self, prompt: &PromptBundle, _ctx: &StepContext) -> Result<String, LlmError> {
        self.backend.complete_prompt(prompt)
    }
}

//! LLM backends behind one trait: a remote chat-completions client, a
//! scripted stub, and a ground-truth oracle. Backends are registered by name
//! and hand out one session per episode.

mod oracle;
mod parse;
mod remote;
mod scripted;

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::PromptBundle;
use crate::registry::Registry;
use crate::scene::Episode;

pub use oracle::OracleBackend;
pub use parse::{parse_decision, render_decision, Decision, DecisionError};
pub use remote::RemoteBackend;
pub use scripted::{ScriptFile, ScriptedBackend};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned HTTP {status}: {body}")]
    Api { status: u16, body: String },
    #[error("malformed completion response: {0}")]
    BadResponse(String),
    #[error("script for episode {episode} exhausted at response {index}")]
    ScriptExhausted { episode: String, index: usize },
    #[error("oracle: episode {episode} step {step} is at `{at}`, off the ground-truth path")]
    OracleMissingPath { episode: String, step: usize, at: String },
    #[error("backend config: {0}")]
    Config(String),
}

/// Where the agent is when a completion is requested.
#[derive(Debug, Clone, PartialEq)]
pub struct StepContext {
    pub step: usize,
    pub at: String,
}

pub trait LlmSession: Send {
    fn complete(&mut self, prompt: &PromptBundle, ctx: &StepContext) -> Result<String, LlmError>;
}

pub trait LlmBackend: Send + Sync {
    fn name(&self) -> &str;
    /// Fresh per-episode session; sessions are never shared across episodes.
    fn session(&self, episode: &Episode) -> Box<dyn LlmSession>;
}

fn default_timeout() -> f64 {
    60.0
}

fn default_retries() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    /// Registry name: `remote`, `scripted` or `oracle`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env_var: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_path: Option<String>,
}

impl BackendConfig {
    pub fn new(kind: impl Into<String>) -> Self {
        BackendConfig {
            kind: kind.into(),
            endpoint_url: None,
            model_name: None,
            api_key_env_var: None,
            temperature: 0.0,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            script_path: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        match self.kind.as_str() {
            "remote" if self.endpoint_url.is_none() || self.model_name.is_none() => {
                Err(LlmError::Config("remote backend requires endpoint_url and model_name".into()))
            }
            "scripted" if self.script_path.is_none() => {
                Err(LlmError::Config("scripted backend requires script_path".into()))
            }
            _ => Ok(()),
        }
    }
}

pub type BackendCtor = fn(&BackendConfig) -> Result<Arc<dyn LlmBackend>, LlmError>;

pub fn backends() -> Registry<BackendCtor> {
    let mut r: Registry<BackendCtor> = Registry::new("backend");
    r.register("remote", |cfg| Ok(Arc::new(RemoteBackend::new(cfg)?)));
    r.register("scripted", |cfg| {
        let path = cfg.script_path.as_deref().ok_or_else(|| LlmError::Config("scripted backend requires script_path".into()))?;
        Ok(Arc::new(ScriptedBackend::new(ScriptFile::load(path)?)))
    });
    r.register("oracle", |_| Ok(Arc::new(OracleBackend)));
    r
}

/// Validates `cfg` and builds the named backend.
pub fn build_backend(cfg: &BackendConfig) -> Result<Arc<dyn LlmBackend>, LlmError> {
    cfg.validate()?;
    let ctor = *backends().get(&cfg.kind).map_err(|e| LlmError::Config(e.to_string()))?;
    ctor(cfg)
}

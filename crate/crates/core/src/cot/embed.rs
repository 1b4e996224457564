//! Text embedding providers and cosine similarity.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::http::{HttpError, JsonClient, RetryPolicy};
use crate::registry::Registry;

pub const TRIGRAM_DIM: usize = 256;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding service error: {0}")]
    Service(String),
    #[error("zero-norm vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("embedder config: {0}")]
    Config(String),
}

impl From<HttpError> for EmbedError {
    fn from(e: HttpError) -> Self {
        EmbedError::Service(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        EmbeddingVector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine of the angle between two vectors, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbedError> {
    if a.dim() != b.dim() {
        return Err(EmbedError::DimMismatch(a.dim(), b.dim()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
        return Err(EmbedError::ZeroVector);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub trait Embedder: Send + Sync {
    /// Identifier recorded in example-set files; sets only match the
    /// embedder that produced them.
    fn id(&self) -> String;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Offline default: lowercase, pad with one space on each side, hash every
/// character trigram (FNV-1a) into 256 buckets, L2-normalize the counts.
#[derive(Debug, Clone, Default)]
pub struct TrigramEmbedder;

impl TrigramEmbedder {
    pub fn buckets(text: &str) -> Vec<usize> {
        let padded: Vec<char> = format!(" {} ", text.to_lowercase()).chars().collect();
        padded
            .windows(3)
            .map(|w| {
                let gram: String = w.iter().collect();
                (fnv1a(gram.as_bytes()) % TRIGRAM_DIM as u64) as usize
            })
            .collect()
    }
}

impl Embedder for TrigramEmbedder {
    fn id(&self) -> String {
        format!("trigram-{TRIGRAM_DIM}")
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let mut values = vec![0.0; TRIGRAM_DIM];
        for b in Self::buckets(text) {
            values[b] += 1.0;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(EmbeddingVector { values })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EmbedderConfig {
    #[serde(default)]
    pub endpoint_url: Option<String>,
    #[serde(default)]
    pub model_name: Option<String>,
    #[serde(default)]
    pub api_key_env_var: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout() -> f64 {
    30.0
}

fn default_retries() -> u32 {
    2
}

/// Client for an OpenAI-compatible `/embeddings` endpoint.
pub struct RemoteEmbedder {
    url: String,
    model: String,
    api_key: Option<String>,
    client: JsonClient,
}

impl RemoteEmbedder {
    pub fn new(cfg: &EmbedderConfig) -> Result<Self, EmbedError> {
        let base = cfg
            .endpoint_url
            .clone()
            .ok_or_else(|| EmbedError::Config("remote embedder needs endpoint_url".into()))?;
        let model = cfg
            .model_name
            .clone()
            .ok_or_else(|| EmbedError::Config("remote embedder needs model_name".into()))?;
        let url = if base.trim_end_matches('/').ends_with("/embeddings") {
            base
        } else {
            format!("{}/embeddings", base.trim_end_matches('/'))
        };
        let api_key = cfg.api_key_env_var.as_ref().and_then(|v| std::env::var(v).ok());
        let client = JsonClient::new(RetryPolicy {
            timeout: std::time::Duration::from_secs_f64(cfg.timeout_secs),
            max_retries: cfg.max_retries,
            ..RetryPolicy::default()
        })?;
        Ok(RemoteEmbedder { url, model, api_key, client })
    }
}

impl Embedder for RemoteEmbedder {
    fn id(&self) -> String {
        format!("remote:{}", self.model)
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let resp = self.client.post_json(
            &self.url,
            self.api_key.as_deref(),
            &json!({ "model": self.model, "input": text }),
        )?;
        let values: Vec<f64> = resp["data"][0]["embedding"]
            .as_array()
            .ok_or_else(|| EmbedError::Service("response lacks data[0].embedding".into()))?
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| EmbedError::Service("non-numeric embedding entry".into())))
            .collect::<Result<_, _>>()?;
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::Service("empty or non-finite embedding".into()));
        }
        Ok(EmbeddingVector { values })
    }
}

pub type EmbedderCtor = fn(&EmbedderConfig) -> Result<Arc<dyn Embedder>, EmbedError>;

pub fn embedders() -> Registry<EmbedderCtor> {
    let mut r: Registry<EmbedderCtor> = Registry::new("embedder");
    r.register("trigram", |_| Ok(Arc::new(TrigramEmbedder)));
    r.register("remote", |cfg| Ok(Arc::new(RemoteEmbedder::new(cfg)?)));
    r
}

//! Blocking JSON-over-HTTP POST with bounded retries and exponential backoff,
//! shared by the remote chat and embedding clients.

use std::thread;
use std::time::{Duration, Instant};

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HttpError {
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("cannot build HTTP client: {0}")]
    Client(String),
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub timeout: Duration,
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            timeout: Duration::from_secs(60),
            max_retries: 2,
            initial_backoff: Duration::from_millis(250),
        }
    }
}

#[derive(Debug, Clone)]
pub struct JsonClient {
    client: reqwest::blocking::Client,
    policy: RetryPolicy,
}

fn retryable_status(status: u16) -> bool {
    status == 429 || status >= 500
}

impl JsonClient {
    pub fn new(policy: RetryPolicy) -> Result<Self, HttpError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| HttpError::Client(e.to_string()))?;
        Ok(JsonClient { client, policy })
    }

    pub fn policy(&self) -> &RetryPolicy {
        &self.policy
    }

    /// POSTs `body` and returns the decoded JSON response. Transport failures,
    /// 429 and 5xx are retried; total wall time stays within
    /// `timeout * (max_retries + 1)`.
    pub fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value) -> Result<Value, HttpError> {
        let budget = self.policy.timeout * (self.policy.max_retries + 1);
        let deadline = Instant::now() + budget;
        let mut backoff = self.policy.initial_backoff;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let remaining = deadline.saturating_duration_since(Instant::now());
            let mut req = self
                .client
                .post(url)
                .timeout(self.policy.timeout.min(remaining).max(Duration::from_millis(1)))
                .json(body);
            if let Some(key) = bearer {
                req = req.bearer_auth(key);
            }
            let failure = match req.send() {
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    let text = resp.text().unwrap_or_default();
                    if (200..300).contains(&status) {
                        return serde_json::from_str(&text).map_err(|e| HttpError::Status {
                            status,
                            body: format!("undecodable response body: {e}"),
                        });
                    }
                    if !retryable_status(status) {
                        return Err(HttpError::Status { status, body: text });
                    }
                    format!("HTTP {status}: {text}")
                }
                Err(e) => e.to_string(),
            };
            let remaining = deadline.saturating_duration_since(Instant::now());
            if attempts > self.policy.max_retries || remaining.is_zero() {
                return Err(HttpError::Transport { attempts, message: failure });
            }
            thread::sleep(backoff.min(remaining));
            backoff *= 2;
        }
    }
}

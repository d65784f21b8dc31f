//! Remote embedding service adapter (OpenAI-compatible `/v1/embeddings`).
//!
//! The HTTP client is only compiled with the `remote` feature. The retry
//! policy is always available.
//!
//! Credentials come from `TOOLSEEK_EMBEDDING_API_KEY`, falling back to
//! `OPENAI_API_KEY`; both are read once, when the provider is constructed.
//! `TOOLSEEK_EMBEDDING_URL` overrides the endpoint.

use std::time::Duration;

pub const API_KEY_ENV: &str = "TOOLSEEK_EMBEDDING_API_KEY";
pub const FALLBACK_API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const ENDPOINT_ENV: &str = "TOOLSEEK_EMBEDDING_URL";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/embeddings";
pub const DEFAULT_MODEL: &str = "text-embedding-3-large";
pub const DEFAULT_MODEL_DIM: usize = 3072;

/// Bounded retries with exponential backoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based: the wait after the
    /// first failure is `base_delay`).
    pub fn delay_before_retry(&self, attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(attempt.saturating_sub(1))
    }

    /// Runs `op` until it succeeds or `max_attempts` calls have failed.
    /// `sleep` is injected so tests do not wait.
    pub fn run<T, E>(
        &self,
        mut op: impl FnMut(u32) -> Result<T, E>,
        mut sleep: impl FnMut(Duration),
    ) -> Result<T, E> {
        let attempts = self.max_attempts.max(1);
        let mut attempt = 1;
        loop {
            match op(attempt) {
                Ok(v) => return Ok(v),
                Err(e) if attempt >= attempts => return Err(e),
                Err(_) => {
                    sleep(self.delay_before_retry(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

#[cfg(feature = "remote")]
pub use client::RemoteEmbedder;

#[cfg(feature = "remote")]
mod client {
    use serde::{Deserialize, Serialize};

    use super::*;
    use crate::embedding::{EmbeddingError, EmbeddingProvider};
    use crate::scalar::Scalar;

    #[derive(Serialize)]
    struct Request<'a> {
        model: &'a str,
        input: &'a [&'a str],
    }

    #[derive(Deserialize)]
    struct Datum {
        index: usize,
        embedding: Vec<f64>,
    }

    #[derive(Deserialize)]
    struct Response {
        data: Vec<Datum>,
    }

    pub struct RemoteEmbedder {
        client: reqwest::blocking::Client,
        endpoint: String,
        api_key: String,
        model: String,
        dim: usize,
        batch_size: usize,
        retry: RetryPolicy,
        id: String,
    }

    impl RemoteEmbedder {
        /// Reads credentials from the environment. Must not be called from
        /// inside an async runtime thread.
        pub fn from_env(model: Option<&str>, dim: Option<usize>) -> Result<Self, EmbeddingError> {
            let api_key = std::env::var(API_KEY_ENV)
                .or_else(|_| std::env::var(FALLBACK_API_KEY_ENV))
                .map_err(|_| {
                    EmbeddingError::ProviderFailure(format!("set {API_KEY_ENV} or {FALLBACK_API_KEY_ENV}"))
                })?;
            let endpoint = std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string());
            let model = model.unwrap_or(DEFAULT_MODEL).to_string();
            let dim = dim.unwrap_or(DEFAULT_MODEL_DIM);
            let client = reqwest::blocking::Client::builder()
                .timeout(std::time::Duration::from_secs(60))
                .build()
                .map_err(|e| EmbeddingError::ProviderFailure(e.to_string()))?;
            Ok(Self {
                client,
                endpoint,
                api_key,
                id: format!("remote/{model}/{dim}"),
                model,
                dim,
                batch_size: 64,
                retry: RetryPolicy::default(),
            })
        }

        pub fn with_batch_size(mut self, batch_size: usize) -> Self {
            self.batch_size = batch_size.max(1);
            self
        }

        pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
            self.retry = retry;
            self
        }

        fn call(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
            let resp = self
                .client
                .post(&self.endpoint)
                .bearer_auth(&self.api_key)
                .json(&Request {
                    model: &self.model,
                    input: texts,
                })
                .send()
                .and_then(|r| r.error_for_status())
                .map_err(|e| EmbeddingError::ProviderFailure(e.to_string()))?;
            let mut body: Response = resp.json().map_err(|e| EmbeddingError::ProviderFailure(e.to_string()))?;
            body.data.sort_by_key(|d| d.index);
            Ok(body.data.into_iter().map(|d| d.embedding).collect())
        }
    }

    impl<F: Scalar> EmbeddingProvider<F> for RemoteEmbedder {
        fn provider_id(&self) -> &str {
            &self.id
        }

        fn dim(&self) -> usize {
            self.dim
        }

        fn batch_size(&self) -> usize {
            self.batch_size
        }

        fn embed_raw(&self, texts: &[&str]) -> Result<Vec<Vec<F>>, EmbeddingError> {
            let raw = self.retry.run(|_| self.call(texts), std::thread::sleep)?;
            Ok(raw
                .into_iter()
                .map(|v| v.into_iter().map(F::from_f64_lossy).collect())
                .collect())
        }
    }
}

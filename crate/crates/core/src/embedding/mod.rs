//! Text embeddings: provider contract, vectors, similarity, catalog index.

mod hashing;
mod index;
pub mod remote;

use thiserror::Error;

use crate::scalar::Scalar;

pub use hashing::{HashEmbedder, DEFAULT_HASH_DIM};
pub use index::{build_index, EmbeddingIndex, IndexError, ServerEmbeddings, ToolEmbedding, INDEX_FORMAT_VERSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("text {0:?} embeds to the zero vector")]
    ZeroVector(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("similarity undefined for a zero vector")]
    ZeroNorm,
    #[error("embedding provider failed: {0}")]
    ProviderFailure(String),
}

/// Produces raw (not necessarily normalized) embeddings for batches of text.
pub trait EmbeddingProvider<F: Scalar>: Send + Sync {
    /// Stable identity of the model behind the vectors; indexes record it.
    fn provider_id(&self) -> &str;

    fn dim(&self) -> usize;

    /// Preferred number of texts per `embed_raw` call.
    fn batch_size(&self) -> usize {
        64
    }

    /// One vector of length [`dim`](Self::dim) per input, in input order.
    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<Vec<F>>, EmbeddingError>;
}

impl<F: Scalar, P: EmbeddingProvider<F> + ?Sized> EmbeddingProvider<F> for &P {
    fn provider_id(&self) -> &str {
        (**self).provider_id()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn batch_size(&self) -> usize {
        (**self).batch_size()
    }
    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<Vec<F>>, EmbeddingError> {
        (**self).embed_raw(texts)
    }
}

impl<F: Scalar, P: EmbeddingProvider<F> + ?Sized> EmbeddingProvider<F> for Box<P> {
    fn provider_id(&self) -> &str {
        (**self).provider_id()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn batch_size(&self) -> usize {
        (**self).batch_size()
    }
    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<Vec<F>>, EmbeddingError> {
        (**self).embed_raw(texts)
    }
}

/// A dense embedding tagged with the provider that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector<F> {
    values: Vec<F>,
    provider_id: String,
    normalized: bool,
}

impl<F: Scalar> EmbeddingVector<F> {
    pub fn new(values: Vec<F>, provider_id: impl Into<String>) -> Self {
        Self {
            values,
            provider_id: provider_id.into(),
            normalized: false,
        }
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> F {
        dot(&self.values, &self.values).sqrt()
    }

    /// Scales to unit Euclidean norm.
    pub fn normalize(mut self) -> Result<Self, EmbeddingError> {
        let norm = self.norm();
        if norm == F::zero() || !norm.is_finite() {
            return Err(EmbeddingError::ZeroNorm);
        }
        for v in &mut self.values {
            *v = *v / norm;
        }
        self.normalized = true;
        Ok(self)
    }

    /// Marks stored values as already unit-norm if they are within `tol`.
    pub(crate) fn assume_normalized(mut self, tol: f64) -> Option<Self> {
        let norm = self.norm().to_f64_lossless();
        if (norm - 1.0).abs() <= tol {
            self.normalized = true;
            Some(self)
        } else {
            None
        }
    }
}

/// Left-to-right dot product; the fixed summation order keeps results
/// bitwise reproducible across call sites.
pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Cosine similarity. For two unit-normalized vectors this is exactly their
/// dot product.
pub fn cosine_similarity<F: Scalar>(a: &EmbeddingVector<F>, b: &EmbeddingVector<F>) -> Result<F, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.normalized && b.normalized {
        return Ok(dot(&a.values, &b.values));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == F::zero() || nb == F::zero() {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok(dot(&a.values, &b.values) / (na * nb))
}

/// Embeds one text and normalizes the result.
pub fn embed<F: Scalar, P: EmbeddingProvider<F> + ?Sized>(
    text: &str,
    provider: &P,
) -> Result<EmbeddingVector<F>, EmbeddingError> {
    let mut out = embed_batch(&[text], provider)?;
    Ok(out.pop().expect("one vector per input"))
}

/// Embeds and normalizes a batch, preserving input order.
pub fn embed_batch<F: Scalar, P: EmbeddingProvider<F> + ?Sized>(
    texts: &[&str],
    provider: &P,
) -> Result<Vec<EmbeddingVector<F>>, EmbeddingError> {
    if texts.iter().any(|t| t.trim().is_empty()) {
        return Err(EmbeddingError::EmptyText);
    }
    let raw = provider.embed_raw(texts)?;
    if raw.len() != texts.len() {
        return Err(EmbeddingError::ProviderFailure(format!(
            "provider returned {} vectors for {} texts",
            raw.len(),
            texts.len()
        )));
    }
    raw.into_iter()
        .zip(texts)
        .map(|(values, text)| {
            if values.len() != provider.dim() {
                return Err(EmbeddingError::DimensionMismatch {
                    left: values.len(),
                    right: provider.dim(),
                });
            }
            EmbeddingVector::new(values, provider.provider_id())
                .normalize()
                .map_err(|_| EmbeddingError::ZeroVector((*text).to_string()))
        })
        .collect()
}

//! Deterministic offline embedder based on signed feature hashing.
//!
//! Text is lowercased and split on non-alphanumeric characters. Each token
//! adds ±1 to one bucket; bucket and sign come from two independently seeded
//! FNV-1a hashes. The result depends only on the token multiset, so word
//! order never changes a vector.

use crate::scalar::Scalar;

use super::{EmbeddingError, EmbeddingProvider};

pub const DEFAULT_HASH_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const BUCKET_SEED: u64 = 0x9e37_79b9_7f4a_7c15;
const SIGN_SEED: u64 = 0xc2b2_ae3d_27d4_eb4f;

fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut hash = FNV_OFFSET ^ seed;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
    id: String,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            id: format!("hash-fnv1a-v1/{dim}"),
        }
    }

    pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
    }

    fn features<F: Scalar>(&self, text: &str) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for token in Self::tokens(text) {
            let bucket = (fnv1a(token.as_bytes(), BUCKET_SEED) % self.dim as u64) as usize;
            if fnv1a(token.as_bytes(), SIGN_SEED) & 1 == 0 {
                out[bucket] = out[bucket] + F::one();
            } else {
                out[bucket] = out[bucket] - F::one();
            }
        }
        out
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_HASH_DIM)
    }
}

impl<F: Scalar> EmbeddingProvider<F> for HashEmbedder {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn batch_size(&self) -> usize {
        256
    }

    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<Vec<F>>, EmbeddingError> {
        Ok(texts.iter().map(|t| self.features(t)).collect())
    }
}

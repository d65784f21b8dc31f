//! Precomputed embeddings for every server description, server summary and
//! tool description of a catalog.
//!
//! Sidecar format (JSON, version 1):
//!
//! ```json
//! {
//!   "format": "toolseek-embedding-index",
//!   "version": 1,
//!   "provider_id": "hash-fnv1a-v1/256",
//!   "dim": 256,
//!   "scalar": "f64",
//!   "catalog_fingerprint": "<sha256 hex>",
//!   "entries": [
//!     { "path": "servers[0].server_description", "vector": [0.0, 0.25, ...] },
//!     { "path": "servers[0].server_summary", "vector": [...] },
//!     { "path": "servers[0].tools[0].description", "vector": [...] }
//!   ]
//! }
//! ```
//!
//! Vectors are unit-normalized and written as shortest round-trip base-10
//! decimals, so a save/load cycle reproduces every component exactly.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::scalar::Scalar;

use super::{embed_batch, EmbeddingError, EmbeddingProvider, EmbeddingVector};

pub const INDEX_FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "toolseek-embedding-index";
const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("embedding {path} failed: {source}")]
    Provider {
        path: String,
        #[source]
        source: EmbeddingError,
    },
    #[error("index does not match catalog: {0}")]
    Mismatch(String),
    #[error("malformed index file: {0}")]
    Malformed(String),
    #[error("index I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolEmbedding<F> {
    pub name: String,
    pub description: EmbeddingVector<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerEmbeddings<F> {
    pub name: String,
    pub description: EmbeddingVector<F>,
    pub summary: EmbeddingVector<F>,
    pub tools: Vec<ToolEmbedding<F>>,
}

/// Immutable embedding index aligned with catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex<F> {
    provider_id: String,
    dim: usize,
    catalog_fingerprint: String,
    servers: Vec<ServerEmbeddings<F>>,
}

fn server_desc_path(i: usize) -> String {
    format!("servers[{i}].server_description")
}
fn server_summary_path(i: usize) -> String {
    format!("servers[{i}].server_summary")
}
fn tool_path(i: usize, j: usize) -> String {
    format!("servers[{i}].tools[{j}].description")
}

/// `(path, text)` for every embedded text, in index order.
fn catalog_texts(catalog: &Catalog) -> Vec<(String, &str)> {
    let mut out = Vec::with_capacity(2 * catalog.server_count() + catalog.total_tools());
    for (i, s) in catalog.servers().iter().enumerate() {
        out.push((server_desc_path(i), s.description.as_str()));
        out.push((server_summary_path(i), s.summary.as_str()));
        for (j, t) in s.tools.iter().enumerate() {
            out.push((tool_path(i, j), t.description.as_str()));
        }
    }
    out
}

/// Embeds every description and summary of `catalog` with `provider`.
pub fn build_index<F: Scalar, P: EmbeddingProvider<F> + ?Sized>(
    catalog: &Catalog,
    provider: &P,
) -> Result<EmbeddingIndex<F>, IndexError> {
    let texts = catalog_texts(catalog);
    let batch = provider.batch_size().max(1);
    let mut vectors = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(batch) {
        let refs: Vec<&str> = chunk.iter().map(|(_, t)| *t).collect();
        match embed_batch(&refs, provider) {
            Ok(v) => vectors.extend(v),
            Err(_) if chunk.len() > 1 => {
                // locate the failing entry
                for (path, text) in chunk {
                    let v = embed_batch(&[text], provider).map_err(|source| IndexError::Provider {
                        path: path.clone(),
                        source,
                    })?;
                    vectors.extend(v);
                }
            }
            Err(source) => {
                return Err(IndexError::Provider {
                    path: chunk[0].0.clone(),
                    source,
                })
            }
        }
    }
    let index = assemble(catalog, provider.provider_id().to_string(), provider.dim(), vectors);
    Ok(index)
}

fn assemble<F: Scalar>(
    catalog: &Catalog,
    provider_id: String,
    dim: usize,
    vectors: Vec<EmbeddingVector<F>>,
) -> EmbeddingIndex<F> {
    let mut it = vectors.into_iter();
    let servers = catalog
        .servers()
        .iter()
        .map(|s| ServerEmbeddings {
            name: s.name.clone(),
            description: it.next().expect("vector per server description"),
            summary: it.next().expect("vector per server summary"),
            tools: s
                .tools
                .iter()
                .map(|t| ToolEmbedding {
                    name: t.name.clone(),
                    description: it.next().expect("vector per tool"),
                })
                .collect(),
        })
        .collect();
    EmbeddingIndex {
        provider_id,
        dim,
        catalog_fingerprint: catalog.fingerprint().to_string(),
        servers,
    }
}

#[derive(Serialize, Deserialize)]
struct SidecarEntry {
    path: String,
    vector: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: String,
    version: u32,
    provider_id: String,
    dim: usize,
    scalar: String,
    catalog_fingerprint: String,
    entries: Vec<SidecarEntry>,
}

fn scalar_name<F: Scalar>() -> &'static str {
    if std::mem::size_of::<F>() == 4 {
        "f32"
    } else {
        "f64"
    }
}

impl<F: Scalar> EmbeddingIndex<F> {
    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn catalog_fingerprint(&self) -> &str {
        &self.catalog_fingerprint
    }

    pub fn servers(&self) -> &[ServerEmbeddings<F>] {
        &self.servers
    }

    /// Number of stored vectors: two per server plus one per tool.
    pub fn entry_count(&self) -> usize {
        self.servers.iter().map(|s| 2 + s.tools.len()).sum()
    }

    /// Fails unless this index was built from `catalog`.
    pub fn check_catalog(&self, catalog: &Catalog) -> Result<(), IndexError> {
        let fp = catalog.fingerprint();
        if fp != self.catalog_fingerprint {
            return Err(IndexError::Mismatch(format!(
                "catalog fingerprint {fp} differs from index fingerprint {}",
                self.catalog_fingerprint
            )));
        }
        Ok(())
    }

    /// Fails unless query vectors from `provider` are comparable with this index.
    pub fn check_provider<P: EmbeddingProvider<F> + ?Sized>(&self, provider: &P) -> Result<(), IndexError> {
        if provider.provider_id() != self.provider_id || provider.dim() != self.dim {
            return Err(IndexError::Mismatch(format!(
                "index built with {} (dim {}), queried with {} (dim {})",
                self.provider_id,
                self.dim,
                provider.provider_id(),
                provider.dim()
            )));
        }
        Ok(())
    }

    /// Sub-index for a catalog restricted from the one this index was built
    /// on. Vectors are reused, not recomputed.
    pub fn restrict(&self, sub: &Catalog) -> Result<Self, IndexError> {
        let by_name: HashMap<&str, &ServerEmbeddings<F>> =
            self.servers.iter().map(|s| (s.name.as_str(), s)).collect();
        let servers = sub
            .servers()
            .iter()
            .map(|s| {
                let src = by_name
                    .get(s.name.as_str())
                    .ok_or_else(|| IndexError::Mismatch(format!("server {:?} not in index", s.name)))?;
                let tools = s
                    .tools
                    .iter()
                    .map(|t| {
                        src.tools
                            .iter()
                            .find(|te| te.name == t.name)
                            .cloned()
                            .ok_or_else(|| IndexError::Mismatch(format!("tool {}/{} not in index", s.name, t.name)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ServerEmbeddings {
                    name: s.name.clone(),
                    description: src.description.clone(),
                    summary: src.summary.clone(),
                    tools,
                })
            })
            .collect::<Result<Vec<_>, IndexError>>()?;
        Ok(Self {
            provider_id: self.provider_id.clone(),
            dim: self.dim,
            catalog_fingerprint: sub.fingerprint().to_string(),
            servers,
        })
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<(), IndexError> {
        let mut entries = Vec::with_capacity(self.entry_count());
        for (i, s) in self.servers.iter().enumerate() {
            let widen = |v: &EmbeddingVector<F>| v.values().iter().map(|x| x.to_f64_lossless()).collect();
            entries.push(SidecarEntry {
                path: server_desc_path(i),
                vector: widen(&s.description),
            });
            entries.push(SidecarEntry {
                path: server_summary_path(i),
                vector: widen(&s.summary),
            });
            for (j, t) in s.tools.iter().enumerate() {
                entries.push(SidecarEntry {
                    path: tool_path(i, j),
                    vector: widen(&t.description),
                });
            }
        }
        let sidecar = Sidecar {
            format: FORMAT_NAME.into(),
            version: INDEX_FORMAT_VERSION,
            provider_id: self.provider_id.clone(),
            dim: self.dim,
            scalar: scalar_name::<F>().into(),
            catalog_fingerprint: self.catalog_fingerprint.clone(),
            entries,
        };
        serde_json::to_writer(&mut out, &sidecar).map_err(|e| IndexError::Malformed(e.to_string()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// Reads a sidecar and checks it against `catalog`: fingerprint, entry
    /// layout, dimension of every vector and unit norm.
    pub fn load<R: Read>(source: R, catalog: &Catalog) -> Result<Self, IndexError> {
        let sidecar: Sidecar =
            serde_json::from_reader(source).map_err(|e| IndexError::Malformed(e.to_string()))?;
        if sidecar.format != FORMAT_NAME {
            return Err(IndexError::Malformed(format!("unknown format {:?}", sidecar.format)));
        }
        if sidecar.version != INDEX_FORMAT_VERSION {
            return Err(IndexError::Malformed(format!("unsupported version {}", sidecar.version)));
        }
        if sidecar.scalar != scalar_name::<F>() {
            return Err(IndexError::Mismatch(format!(
                "index stores {} vectors, expected {}",
                sidecar.scalar,
                scalar_name::<F>()
            )));
        }
        let fp = catalog.fingerprint();
        if sidecar.catalog_fingerprint != fp {
            return Err(IndexError::Mismatch(format!(
                "index fingerprint {} differs from catalog fingerprint {fp}",
                sidecar.catalog_fingerprint
            )));
        }
        let expected = catalog_texts(catalog);
        if expected.len() != sidecar.entries.len() {
            return Err(IndexError::Mismatch(format!(
                "index has {} entries, catalog needs {}",
                sidecar.entries.len(),
                expected.len()
            )));
        }
        let mut vectors = Vec::with_capacity(expected.len());
        for ((path, _), entry) in expected.iter().zip(sidecar.entries) {
            if *path != entry.path {
                return Err(IndexError::Mismatch(format!("expected entry {path}, found {}", entry.path)));
            }
            if entry.vector.len() != sidecar.dim {
                return Err(IndexError::Mismatch(format!(
                    "{path}: vector has dim {}, header says {}",
                    entry.vector.len(),
                    sidecar.dim
                )));
            }
            let values = entry.vector.into_iter().map(F::from_f64_lossy).collect();
            let v = EmbeddingVector::new(values, sidecar.provider_id.clone())
                .assume_normalized(NORM_TOLERANCE)
                .ok_or_else(|| IndexError::Malformed(format!("{path}: vector is not unit-normalized")))?;
            vectors.push(v);
        }
        Ok(assemble(catalog, sidecar.provider_id, sidecar.dim, vectors))
    }
}

//! Settings resolution: command-line flags, then `TOOLSEEK_*` environment
//! variables (both handled by clap), then the TOML config file, then
//! built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::Deserialize;
use toolseek::RoutingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Deterministic local hashing embedder.
    Hash,
    /// OpenAI-compatible embedding endpoint (needs the `remote` build feature).
    Remote,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutingFile {
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub max_k: Option<usize>,
    pub clamp: Option<bool>,
}

/// Contents of the `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub catalog: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub dim: Option<usize>,
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub bind: Option<String>,
    pub routing: RoutingFile,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with defaults for any of these options.
    #[arg(long, global = true, env = "TOOLSEEK_CONFIG")]
    pub config: Option<PathBuf>,
    /// Catalog JSON in the MCP-tools layout.
    #[arg(long, global = true, env = "TOOLSEEK_CATALOG")]
    pub catalog: Option<PathBuf>,
    /// Embedding index sidecar (default: `<catalog>.index.json`).
    #[arg(long, global = true, env = "TOOLSEEK_INDEX")]
    pub index: Option<PathBuf>,
    /// Servers kept after the server stage.
    #[arg(long = "m", global = true, env = "TOOLSEEK_M")]
    pub m: Option<usize>,
    /// Tools returned (before cluster expansion).
    #[arg(long, global = true, env = "TOOLSEEK_K")]
    pub k: Option<usize>,
    /// Score gap within which trailing candidates are kept.
    #[arg(long, global = true, env = "TOOLSEEK_EPSILON")]
    pub epsilon: Option<f64>,
    /// Upper bound on the expanded result count.
    #[arg(long, global = true, env = "TOOLSEEK_MAX_K")]
    pub max_k: Option<usize>,
    /// Clamp similarities to [0, 1] (`--clamp` or `--clamp=false`).
    #[arg(long, global = true, env = "TOOLSEEK_CLAMP", num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub clamp: Option<bool>,
    #[arg(long, global = true, env = "TOOLSEEK_PROVIDER", value_enum)]
    pub provider: Option<ProviderKind>,
    /// Embedding dimension.
    #[arg(long, global = true, env = "TOOLSEEK_DIM")]
    pub dim: Option<usize>,
    /// Remote embedding model name.
    #[arg(long, global = true, env = "TOOLSEEK_MODEL")]
    pub model: Option<String>,
    #[arg(long, global = true, env = "TOOLSEEK_SEED")]
    pub seed: Option<u64>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub catalog: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub routing: RoutingConfig,
    pub provider: ProviderKind,
    pub dim: Option<usize>,
    pub model: Option<String>,
    pub seed: u64,
    pub bind: Option<String>,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let d = RoutingConfig::default();
        let routing = RoutingConfig {
            server_shortlist: args.m.or(file.routing.m).unwrap_or(d.server_shortlist),
            top_k: args.k.or(file.routing.k).unwrap_or(d.top_k),
            cluster_epsilon: args.epsilon.or(file.routing.epsilon).unwrap_or(d.cluster_epsilon),
            max_expanded_k: args.max_k.or(file.routing.max_k).unwrap_or(d.max_expanded_k),
            clamp: args.clamp.or(file.routing.clamp).unwrap_or(d.clamp),
        };
        let routing = if routing.top_k > routing.max_expanded_k && args.max_k.or(file.routing.max_k).is_none() {
            routing.with_k(routing.top_k)
        } else {
            routing
        };
        routing.validate()?;
        Ok(Self {
            catalog: args.catalog.clone().or(file.catalog),
            index: args.index.clone().or(file.index),
            routing,
            provider: args.provider.or(file.provider).unwrap_or(ProviderKind::Hash),
            dim: args.dim.or(file.dim),
            model: args.model.clone().or(file.model),
            seed: args.seed.or(file.seed).unwrap_or(0),
            bind: file.bind,
        })
    }

    pub fn catalog_path(&self) -> anyhow::Result<&Path> {
        self.catalog
            .as_deref()
            .context("no catalog given; pass --catalog, set TOOLSEEK_CATALOG or add `catalog` to the config file")
    }

    /// Explicit index path, or the sidecar next to the catalog.
    pub fn index_path(&self) -> anyhow::Result<PathBuf> {
        match &self.index {
            Some(p) => Ok(p.clone()),
            None => Ok(sidecar_path(self.catalog_path()?)),
        }
    }
}

pub fn sidecar_path(catalog: &Path) -> PathBuf {
    let mut name = catalog.file_name().unwrap_or_default().to_os_string();
    name.push(".index.json");
    catalog.with_file_name(name)
}

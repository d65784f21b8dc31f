//! `toolseek` command line: build an embedding index for a catalog, route
//! single requests, run retrieval evaluations and serve routing over HTTP.

pub mod config;
pub mod service;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use toolseek::eval::{
    emit_report, run_haystack, synthetic_catalog, HaystackSpec, NeedlePosition, QueryMode, ReportFormat,
    SyntheticSpec,
};
use toolseek::{
    build_index, catalog_stats, load_catalog, retrieve, ApproxTokenizer, Catalog, EmbeddingProvider, HashEmbedder,
    Index, RetrieveRequestMessage,
};

use crate::config::{CommonArgs, ProviderKind, Settings};

pub type Provider = Arc<dyn EmbeddingProvider<f64>>;

#[derive(Debug, Parser)]
#[command(name = "toolseek", version, about = "Route tool requests to the matching MCP tool schemas")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed every server and tool description and write the index sidecar.
    Index {
        /// Output path (default: the index path).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Route one request and print the ranked candidates.
    Query {
        #[arg(long)]
        server: String,
        #[arg(long)]
        tool: String,
        /// Print the response message as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print catalog statistics.
    Stats,
    /// Needle-in-a-haystack evaluation over growing tool collections.
    Eval {
        /// Use a seeded synthetic catalog `SERVERSxTOOLS` instead of --catalog.
        #[arg(long, value_name = "SERVERSxTOOLS")]
        synthetic: Option<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 10, 100, 1000])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_enum, default_values_t = [Position::First, Position::Middle, Position::Last, Position::Uniform])]
        positions: Vec<Position>,
        /// Drop words from the needle description before querying.
        #[arg(long)]
        perturbed: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve `POST /retrieve` and `GET /health`.
    Serve {
        #[arg(long, env = "TOOLSEEK_BIND")]
        bind: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Position {
    First,
    Middle,
    Last,
    Uniform,
}

impl From<Position> for NeedlePosition {
    fn from(p: Position) -> Self {
        match p {
            Position::First => NeedlePosition::First,
            Position::Middle => NeedlePosition::Middle,
            Position::Last => NeedlePosition::Last,
            Position::Uniform => NeedlePosition::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn make_provider(settings: &Settings) -> anyhow::Result<Provider> {
    match settings.provider {
        ProviderKind::Hash => Ok(Arc::new(HashEmbedder::new(
            settings.dim.unwrap_or(toolseek::embedding::DEFAULT_HASH_DIM),
        ))),
        #[cfg(feature = "remote")]
        ProviderKind::Remote => Ok(Arc::new(toolseek::embedding::remote::RemoteEmbedder::from_env(
            settings.model.as_deref(),
            settings.dim,
        )?)),
        #[cfg(not(feature = "remote"))]
        ProviderKind::Remote => bail!("the remote provider needs a build with the `remote` feature"),
    }
}

/// Everything needed to answer retrieval requests.
pub struct Loaded {
    pub catalog: Catalog,
    pub index: Index,
    pub provider: Provider,
}

fn open_index(path: &Path, catalog: &Catalog, provider: &Provider) -> anyhow::Result<Index> {
    let file = std::fs::File::open(path).with_context(|| format!("opening index {}", path.display()))?;
    let index = Index::load(std::io::BufReader::new(file), catalog)
        .with_context(|| format!("loading index {}", path.display()))?;
    index
        .check_provider(provider.as_ref())
        .with_context(|| format!("index {} was built with another provider", path.display()))?;
    Ok(index)
}

/// Loads the catalog and its index. A missing default sidecar is rebuilt
/// in memory; an explicit index path must exist and match.
pub fn load(settings: &Settings) -> anyhow::Result<Loaded> {
    let catalog_path = settings.catalog_path()?;
    let catalog = load_catalog(catalog_path).with_context(|| format!("loading catalog {}", catalog_path.display()))?;
    let provider = make_provider(settings)?;
    let index_path = settings.index_path()?;
    let index = if settings.index.is_some() || index_path.exists() {
        open_index(&index_path, &catalog, &provider)?
    } else {
        build_index(&catalog, provider.as_ref())?
    };
    Ok(Loaded {
        catalog,
        index,
        provider,
    })
}

fn parse_synthetic(spec: &str, seed: u64) -> anyhow::Result<SyntheticSpec> {
    let (s, t) = spec
        .split_once('x')
        .with_context(|| format!("synthetic spec `{spec}` is not SERVERSxTOOLS"))?;
    let servers: usize = s.trim().parse().with_context(|| format!("bad server count in `{spec}`"))?;
    let tools: usize = t.trim().parse().with_context(|| format!("bad tool count in `{spec}`"))?;
    if servers == 0 || tools < servers {
        bail!("synthetic spec `{spec}` needs at least one tool per server");
    }
    Ok(SyntheticSpec::new(servers, tools, seed))
}

/// Runs a non-serving command, writing its output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    let settings = Settings::resolve(&cli.common)?;
    match &cli.command {
        Command::Index { out: target } => {
            let catalog_path = settings.catalog_path()?;
            let catalog =
                load_catalog(catalog_path).with_context(|| format!("loading catalog {}", catalog_path.display()))?;
            let provider = make_provider(&settings)?;
            let index = build_index(&catalog, provider.as_ref())?;
            let path = match target {
                Some(p) => p.clone(),
                None => settings.index_path()?,
            };
            std::fs::write(&path, index.to_bytes()).with_context(|| format!("writing index {}", path.display()))?;
            writeln!(out, "{} embeddings written to {}", index.entry_count(), path.display())?;
        }
        Command::Query { server, tool, json } => {
            let loaded = load(&settings)?;
            let msg = RetrieveRequestMessage {
                server: server.clone(),
                tool: tool.clone(),
                k: None,
                clamp: None,
            };
            let resp = retrieve(&msg, &loaded.catalog, &loaded.index, &settings.routing, loaded.provider.as_ref())?;
            if *json {
                writeln!(out, "{}", serde_json::to_string(&resp)?)?;
            } else {
                for (i, c) in resp.candidates.iter().enumerate() {
                    writeln!(
                        out,
                        "{}. {}/{} score={:.6} s_server={:.6} s_tool={:.6}",
                        i + 1,
                        c.server_name,
                        c.tool_name,
                        c.score,
                        c.s_server,
                        c.s_tool
                    )?;
                }
                writeln!(out, "comparisons: {}", resp.comparisons_made)?;
            }
        }
        Command::Stats => {
            let path = settings.catalog_path()?;
            let catalog = load_catalog(path).with_context(|| format!("loading catalog {}", path.display()))?;
            writeln!(out, "{}", catalog_stats(&catalog))?;
        }
        Command::Eval {
            synthetic,
            sizes,
            positions,
            perturbed,
            format,
            out: target,
        } => {
            let provider = make_provider(&settings)?;
            let (catalog, index) = match synthetic {
                Some(spec) => {
                    let catalog = synthetic_catalog(&parse_synthetic(spec, settings.seed)?)?;
                    let index = build_index(&catalog, provider.as_ref())?;
                    (catalog, index)
                }
                None => {
                    let loaded = load(&settings)?;
                    (loaded.catalog, loaded.index)
                }
            };
            let spec = HaystackSpec {
                sizes: sizes.clone(),
                positions: positions.iter().map(|&p| p.into()).collect(),
                query_mode: if *perturbed {
                    QueryMode::PerturbedDescription
                } else {
                    QueryMode::ExactDescription
                },
                seed: settings.seed,
                ..Default::default()
            };
            let report = run_haystack(&spec, &catalog, &index, &settings.routing, provider.as_ref(), &ApproxTokenizer)?;
            let bytes = emit_report(
                &report,
                match format {
                    OutputFormat::Csv => ReportFormat::Csv,
                    OutputFormat::Json => ReportFormat::Structured,
                },
            );
            match target {
                Some(p) => std::fs::write(p, &bytes).with_context(|| format!("writing report {}", p.display()))?,
                None => out.write_all(&bytes)?,
            }
        }
        Command::Serve { bind } => {
            let loaded = load(&settings)?;
            let bind = bind
                .clone()
                .or(settings.bind.clone())
                .unwrap_or_else(|| "127.0.0.1:8080".to_string());
            let state = Arc::new(service::AppState::new(loaded, settings.routing));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind)
                    .await
                    .with_context(|| format!("binding {bind}"))?;
                writeln!(out, "listening on {}", listener.local_addr()?)?;
                out.flush()?;
                axum::serve(listener, service::router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}

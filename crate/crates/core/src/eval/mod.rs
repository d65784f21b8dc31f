//! Desk-scale retrieval evaluation.
//!
//! A needle-in-a-haystack run hides target tools inside sub-catalogs of
//! growing size, asks for each target by its own description (exact or
//! with words dropped) and records retrieval accuracy, the token cost of
//! injecting every schema up front (baseline) versus the discovery prompt
//! plus retrieved schemas (active), and similarity comparisons.

mod report;
mod synthetic;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Map;
use thiserror::Error;

use crate::catalog::{render_tool_schema, Catalog, CatalogError, ServerRecord, ToolRecord};
use crate::embedding::{EmbeddingIndex, EmbeddingProvider, IndexError};
use crate::protocol::{build_discovery_prompt, ToolRequest};
use crate::routing::{route, RoutingConfig, RoutingError};
use crate::scalar::Scalar;
use crate::tokenize::Tokenizer;

pub use report::{emit_report, parse_csv_rows, EvalReport, EvalRow, PositionRow, ReportFormat, CSV_HEADER, REPORT_SCHEMA_VERSION};
pub use synthetic::{perturb, synthetic_catalog, SyntheticSpec};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("haystack size {size} exceeds catalog tool count {available}")]
    SizeExceedsCatalog { size: usize, available: usize },
    #[error("invalid haystack spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeedlePosition {
    First,
    Middle,
    Last,
    Uniform,
}

impl NeedlePosition {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::First => "first",
            Self::Middle => "middle",
            Self::Last => "last",
            Self::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    ExactDescription,
    PerturbedDescription,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaystackSpec {
    /// Tool-collection sizes, positive and non-decreasing.
    pub sizes: Vec<usize>,
    pub positions: Vec<NeedlePosition>,
    /// Needles drawn per size for [`NeedlePosition::Uniform`].
    pub uniform_draws: usize,
    pub query_mode: QueryMode,
    /// Fraction of words dropped in perturbed mode.
    pub drop_fraction: f64,
    pub seed: u64,
}

impl Default for HaystackSpec {
    fn default() -> Self {
        Self {
            sizes: vec![1, 10, 100, 1000],
            positions: vec![
                NeedlePosition::First,
                NeedlePosition::Middle,
                NeedlePosition::Last,
                NeedlePosition::Uniform,
            ],
            uniform_draws: 5,
            query_mode: QueryMode::ExactDescription,
            drop_fraction: 0.3,
            seed: 0,
        }
    }
}

impl HaystackSpec {
    fn validate(&self, available: usize) -> Result<(), EvalError> {
        if self.sizes.contains(&0) {
            return Err(EvalError::InvalidSpec("sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] > w[1]) {
            return Err(EvalError::InvalidSpec("sizes must be non-decreasing".into()));
        }
        if self.positions.is_empty() {
            return Err(EvalError::InvalidSpec("at least one needle position is required".into()));
        }
        if !(0.0..1.0).contains(&self.drop_fraction) {
            return Err(EvalError::InvalidSpec("drop_fraction must be in [0, 1)".into()));
        }
        if let Some(&size) = self.sizes.iter().find(|&&s| s > available) {
            return Err(EvalError::SizeExceedsCatalog { size, available });
        }
        Ok(())
    }
}

/// Tokens needed to put every tool schema of `catalog` into the context.
pub fn baseline_injection_cost(catalog: &Catalog, tokenizer: &dyn Tokenizer) -> usize {
    catalog
        .iter_tools()
        .map(|(s, t)| tokenizer.count(&render_tool_schema(t, s)))
        .sum()
}

/// Wraps a flat tool list (no server level) into a single pseudo-server so
/// it can be routed; with one server the shortlist always covers it.
pub fn single_server_catalog(
    name: &str,
    description: &str,
    tools: Vec<ToolRecord>,
) -> Result<Catalog, CatalogError> {
    Catalog::new(
        vec![ServerRecord {
            name: name.to_string(),
            description: description.to_string(),
            summary: description.to_string(),
            tools,
            extra: Map::new(),
        }],
        format!("flat:{name}"),
    )
}

/// Sample of `size` tools, seeded, returned in catalog order.
pub fn sample_subcatalog(catalog: &Catalog, size: usize, rng: &mut impl Rng) -> Result<Catalog, EvalError> {
    let mut all: Vec<(String, String)> = catalog
        .iter_tools()
        .map(|(s, t)| (s.name.clone(), t.name.clone()))
        .collect();
    if size > all.len() {
        return Err(EvalError::SizeExceedsCatalog {
            size,
            available: all.len(),
        });
    }
    all.shuffle(rng);
    let keep: HashSet<_> = all.into_iter().take(size).collect();
    Ok(catalog.restrict(&keep, format!("{}#sample{size}", catalog.source_tag()))?)
}

/// First sentence of a description.
fn head(text: &str) -> &str {
    let end = text.find(". ").map(|i| i + 1).unwrap_or(text.len());
    text[..end].trim()
}

fn size_seed(seed: u64, size: usize) -> u64 {
    seed ^ (size as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

struct Trial {
    position: NeedlePosition,
    hit_at_1: bool,
    hit_at_k: bool,
    active_tokens: usize,
    comparisons: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_size<F: Scalar>(
    spec: &HaystackSpec,
    size: usize,
    catalog: &Catalog,
    index: &EmbeddingIndex<F>,
    cfg: &RoutingConfig,
    provider: &dyn EmbeddingProvider<F>,
    tokenizer: &dyn Tokenizer,
    prompt_tokens: usize,
) -> Result<(EvalRow, Vec<PositionRow>), EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(size_seed(spec.seed, size));
    let sub = sample_subcatalog(catalog, size, &mut rng)?;
    let sub_index = index.restrict(&sub)?;
    let flat: Vec<(&ServerRecord, &ToolRecord)> = sub.iter_tools().collect();
    let n = flat.len();

    let mut needles = Vec::new();
    for &pos in &spec.positions {
        match pos {
            NeedlePosition::First => needles.push((pos, 0)),
            NeedlePosition::Middle => needles.push((pos, n / 2)),
            NeedlePosition::Last => needles.push((pos, n - 1)),
            NeedlePosition::Uniform => {
                for _ in 0..spec.uniform_draws {
                    needles.push((pos, rng.random_range(0..n)));
                }
            }
        }
    }

    let mut trials = Vec::with_capacity(needles.len());
    for (position, at) in needles {
        let (server, tool) = flat[at];
        let tool_text = match spec.query_mode {
            QueryMode::ExactDescription => tool.description.clone(),
            QueryMode::PerturbedDescription => perturb(&tool.description, spec.drop_fraction, &mut rng),
        };
        let request = ToolRequest::new(head(&server.description), tool_text)
            .map_err(|e| EvalError::InvalidSpec(e.to_string()))?;
        let result = route(&request, &sub_index, &sub, cfg, provider)?;
        let is_needle = |c: &crate::routing::RankedTool<F>| c.server_name == server.name && c.tool_name == tool.name;
        let injected = result
            .candidates
            .iter()
            .filter_map(|c| {
                let s = sub.server(&c.server_name)?;
                Some(render_tool_schema(s.tool(&c.tool_name)?, s))
            })
            .collect::<Vec<_>>()
            .join("\n");
        trials.push(Trial {
            position,
            hit_at_1: result.candidates.first().is_some_and(is_needle),
            hit_at_k: result.candidates.iter().any(is_needle),
            active_tokens: prompt_tokens + tokenizer.count(&injected),
            comparisons: result.comparisons_made,
        });
    }

    let count = trials.len() as f64;
    let row = EvalRow {
        size,
        accuracy_at_1: trials.iter().filter(|t| t.hit_at_1).count() as f64 / count,
        accuracy_at_k: trials.iter().filter(|t| t.hit_at_k).count() as f64 / count,
        mean_tokens_baseline: baseline_injection_cost(&sub, tokenizer) as f64,
        mean_tokens_active: trials.iter().map(|t| t.active_tokens as f64).sum::<f64>() / count,
        comparisons_active: trials.iter().map(|t| t.comparisons as f64).sum::<f64>() / count,
        comparisons_oracle: 2 * sub.server_count() + sub.total_tools(),
    };

    let mut positions = Vec::new();
    for &pos in &spec.positions {
        if positions.iter().any(|p: &PositionRow| p.position == pos) {
            continue;
        }
        let of_pos: Vec<_> = trials.iter().filter(|t| t.position == pos).collect();
        positions.push(PositionRow {
            size,
            position: pos,
            trials: of_pos.len(),
            hits_at_1: of_pos.iter().filter(|t| t.hit_at_1).count(),
            hits_at_k: of_pos.iter().filter(|t| t.hit_at_k).count(),
        });
    }
    Ok((row, positions))
}

/// Runs every size of `spec` (concurrently, one sampler per size) and
/// assembles the report in size order.
pub fn run_haystack<F: Scalar>(
    spec: &HaystackSpec,
    catalog: &Catalog,
    index: &EmbeddingIndex<F>,
    cfg: &RoutingConfig,
    provider: &dyn EmbeddingProvider<F>,
    tokenizer: &dyn Tokenizer,
) -> Result<EvalReport, EvalError> {
    spec.validate(catalog.total_tools())?;
    cfg.validate()?;
    index.check_catalog(catalog)?;
    let prompt_tokens = tokenizer.count(&build_discovery_prompt(false).text());

    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = spec
            .sizes
            .iter()
            .map(|&size| {
                scope.spawn(move || run_size(spec, size, catalog, index, cfg, provider, tokenizer, prompt_tokens))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("haystack worker panicked"))
            .collect()
    });

    let mut report = EvalReport::default();
    for r in results {
        let (row, positions) = r?;
        report.rows.push(row);
        report.positions.extend(positions);
    }
    Ok(report)
}

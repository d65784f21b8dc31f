//! Two-stage hierarchical routing of a [`ToolRequest`] to ranked tools.
//!
//! Stage 1 compares the request's server text with every server's
//! description and summary, keeps the better of the two similarities, and
//! shortlists the best `server_shortlist` servers. Stage 2 compares the tool
//! text with each tool of the shortlisted servers and combines both levels:
//!
//! ```text
//! score = (s_server * s_tool) * max(s_server, s_tool)
//! ```
//!
//! [`brute_force_route`] scores every pair in the catalog without a shortlist
//! and is kept as a reference for equivalence testing.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::embedding::{dot, embed, EmbeddingError, EmbeddingIndex, EmbeddingProvider, EmbeddingVector};
use crate::protocol::ToolRequest;
use crate::scalar::{cmp_desc, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("request field `{0}` is empty")]
    EmptyRequestField(&'static str),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("invalid routing config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoutingConfig {
    /// Servers kept after stage 1; clamped to the catalog size.
    pub server_shortlist: usize,
    pub top_k: usize,
    pub cluster_epsilon: f64,
    pub max_expanded_k: usize,
    /// Clamp similarities to `[0, 1]` before they are ranked and combined.
    pub clamp: bool,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        Self {
            server_shortlist: 5,
            top_k: 1,
            cluster_epsilon: 0.02,
            max_expanded_k: 5,
            clamp: false,
        }
    }
}

impl RoutingConfig {
    pub fn validate(&self) -> Result<(), RoutingError> {
        if self.server_shortlist == 0 {
            return Err(RoutingError::InvalidConfig("server_shortlist must be positive".into()));
        }
        if self.top_k == 0 || self.max_expanded_k == 0 {
            return Err(RoutingError::InvalidConfig("top_k and max_expanded_k must be positive".into()));
        }
        if self.top_k > self.max_expanded_k {
            return Err(RoutingError::InvalidConfig(format!(
                "top_k {} exceeds max_expanded_k {}",
                self.top_k, self.max_expanded_k
            )));
        }
        if !(self.cluster_epsilon >= 0.0 && self.cluster_epsilon.is_finite()) {
            return Err(RoutingError::InvalidConfig("cluster_epsilon must be a non-negative number".into()));
        }
        Ok(())
    }

    /// Same config returning exactly `k` results unless scores cluster.
    pub fn with_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self.max_expanded_k = self.max_expanded_k.max(k);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTool<F> {
    pub server_name: String,
    pub tool_name: String,
    pub s_server: F,
    pub s_tool: F,
    pub score: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult<F> {
    pub candidates: Vec<RankedTool<F>>,
    /// Similarity evaluations performed (one dot product each).
    pub comparisons_made: usize,
    pub request: ToolRequest,
    /// Stage-1 servers in shortlist order.
    pub shortlist: Vec<String>,
}

impl<F: Scalar> RetrievalResult<F> {
    pub fn best_score(&self) -> Option<F> {
        self.candidates.first().map(|c| c.score)
    }
}

/// Combines server- and tool-level similarity.
#[inline]
pub fn score_pair<F: Scalar>(s_server: F, s_tool: F) -> F {
    (s_server * s_tool) * s_server.max(s_tool)
}

fn clamp_unit<F: Scalar>(s: F, clamp: bool) -> F {
    if clamp {
        s.max(F::zero()).min(F::one())
    } else {
        s
    }
}

/// Ranking order: score descending, then server name, then tool name.
pub fn candidate_order<F: Scalar>(a: &RankedTool<F>, b: &RankedTool<F>) -> Ordering {
    cmp_desc(a.score, b.score)
        .then_with(|| a.server_name.cmp(&b.server_name))
        .then_with(|| a.tool_name.cmp(&b.tool_name))
}

/// Keeps `top_k` candidates, growing the cut while the next score stays
/// within `cluster_epsilon` of the best, up to `max_expanded_k`.
pub fn expand_k<F: Scalar>(mut candidates: Vec<RankedTool<F>>, cfg: &RoutingConfig) -> Vec<RankedTool<F>> {
    let Some(best) = candidates.first().map(|c| c.score) else {
        return candidates;
    };
    let threshold = best - F::from_f64_lossy(cfg.cluster_epsilon);
    let cap = cfg.max_expanded_k.min(candidates.len());
    let mut k = cfg.top_k.min(cap);
    while k < cap && candidates[k].score >= threshold {
        k += 1;
    }
    candidates.truncate(k);
    candidates
}

struct QueryVectors<F> {
    server: EmbeddingVector<F>,
    tool: EmbeddingVector<F>,
}

fn prepare<F: Scalar, P: EmbeddingProvider<F> + ?Sized>(
    request: &ToolRequest,
    index: &EmbeddingIndex<F>,
    catalog: &Catalog,
    provider: &P,
) -> Result<QueryVectors<F>, RoutingError> {
    if request.server_text.trim().is_empty() {
        return Err(RoutingError::EmptyRequestField("server"));
    }
    if request.tool_text.trim().is_empty() {
        return Err(RoutingError::EmptyRequestField("tool"));
    }
    index
        .check_catalog(catalog)
        .map_err(|e| RoutingError::IndexMismatch(e.to_string()))?;
    index
        .check_provider(provider)
        .map_err(|e| RoutingError::IndexMismatch(e.to_string()))?;
    Ok(QueryVectors {
        server: embed(&request.server_text, provider)?,
        tool: embed(&request.tool_text, provider)?,
    })
}

/// Hierarchical retrieval: shortlist servers, then rank their tools.
pub fn route<F: Scalar, P: EmbeddingProvider<F> + ?Sized>(
    request: &ToolRequest,
    index: &EmbeddingIndex<F>,
    catalog: &Catalog,
    cfg: &RoutingConfig,
    provider: &P,
) -> Result<RetrievalResult<F>, RoutingError> {
    cfg.validate()?;
    let q = prepare(request, index, catalog, provider)?;
    let mut comparisons = 0usize;

    // stage 1: dual-matched server similarity
    let mut servers: Vec<(usize, F)> = index
        .servers()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            comparisons += 2;
            let by_desc = dot(q.server.values(), s.description.values());
            let by_summary = dot(q.server.values(), s.summary.values());
            (i, clamp_unit(by_desc.max(by_summary), cfg.clamp))
        })
        .collect();
    servers.sort_by(|a, b| {
        cmp_desc(a.1, b.1).then_with(|| index.servers()[a.0].name.cmp(&index.servers()[b.0].name))
    });
    servers.truncate(cfg.server_shortlist.min(servers.len()));

    // stage 2: tools within the shortlist
    let mut candidates = Vec::new();
    for &(i, s_server) in &servers {
        let server = &index.servers()[i];
        for tool in &server.tools {
            comparisons += 1;
            let s_tool = clamp_unit(dot(q.tool.values(), tool.description.values()), cfg.clamp);
            candidates.push(RankedTool {
                server_name: server.name.clone(),
                tool_name: tool.name.clone(),
                s_server,
                s_tool,
                score: score_pair(s_server, s_tool),
            });
        }
    }
    candidates.sort_by(candidate_order);

    Ok(RetrievalResult {
        candidates: expand_k(candidates, cfg),
        comparisons_made: comparisons,
        request: request.clone(),
        shortlist: servers.iter().map(|&(i, _)| index.servers()[i].name.clone()).collect(),
    })
}

/// Exhaustive reference: every (server, tool) pair of the catalog, full
/// ranking, no shortlist and no cut.
pub fn brute_force_route<F: Scalar, P: EmbeddingProvider<F> + ?Sized>(
    request: &ToolRequest,
    index: &EmbeddingIndex<F>,
    catalog: &Catalog,
    provider: &P,
    clamp: bool,
) -> Result<RetrievalResult<F>, RoutingError> {
    let q = prepare(request, index, catalog, provider)?;
    let mut candidates = Vec::with_capacity(catalog.total_tools());
    let mut comparisons = 0;
    for server in index.servers() {
        let by_desc = dot(q.server.values(), server.description.values());
        let by_summary = dot(q.server.values(), server.summary.values());
        comparisons += 2;
        let s_server = clamp_unit(if by_summary > by_desc { by_summary } else { by_desc }, clamp);
        for tool in &server.tools {
            let s_tool = clamp_unit(dot(q.tool.values(), tool.description.values()), clamp);
            comparisons += 1;
            candidates.push(RankedTool {
                server_name: server.name.clone(),
                tool_name: tool.name.clone(),
                s_server,
                s_tool,
                score: (s_server * s_tool) * if s_server > s_tool { s_server } else { s_tool },
            });
        }
    }
    candidates.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(a.server_name.cmp(&b.server_name))
            .then(a.tool_name.cmp(&b.tool_name))
    });
    let mut shortlist: Vec<(&str, F)> = Vec::new();
    for c in &candidates {
        if !shortlist.iter().any(|(n, _)| *n == c.server_name) {
            shortlist.push((&c.server_name, c.s_server));
        }
    }
    shortlist.sort_by(|a, b| cmp_desc(a.1, b.1).then_with(|| a.0.cmp(b.0)));
    let shortlist = shortlist.into_iter().map(|(n, _)| n.to_string()).collect();
    Ok(RetrievalResult {
        candidates,
        comparisons_made: comparisons,
        request: request.clone(),
        shortlist,
    })
}

//! Request and response messages shared by the command line and the HTTP
//! service, plus the single entry point both use.

use serde::{Deserialize, Serialize};

use crate::catalog::{render_tool_schema, Catalog};
use crate::embedding::{EmbeddingIndex, EmbeddingProvider};
use crate::protocol::ToolRequest;
use crate::routing::{route, RoutingConfig, RoutingError};
use crate::scalar::Scalar;

/// Version of the request, response and health body schemas.
pub const API_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrieveRequestMessage {
    pub server: String,
    pub tool: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMessage {
    pub server_name: String,
    pub tool_name: String,
    pub score: f64,
    pub s_server: f64,
    pub s_tool: f64,
    pub schema_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrieveResponseMessage {
    pub candidates: Vec<CandidateMessage>,
    pub comparisons_made: usize,
}

/// Routes one request message. `k` and `clamp` in the message override
/// the defaults in `cfg`.
pub fn retrieve<F: Scalar, P: EmbeddingProvider<F> + ?Sized>(
    message: &RetrieveRequestMessage,
    catalog: &Catalog,
    index: &EmbeddingIndex<F>,
    cfg: &RoutingConfig,
    provider: &P,
) -> Result<RetrieveResponseMessage, RoutingError> {
    let request = ToolRequest::new(&message.server, &message.tool).map_err(|e| match e {
        crate::protocol::ProtocolError::EmptyField(f) => RoutingError::EmptyRequestField(f),
        other => RoutingError::InvalidConfig(other.to_string()),
    })?;
    let mut cfg = *cfg;
    if let Some(k) = message.k {
        cfg = cfg.with_k(k);
    }
    if let Some(clamp) = message.clamp {
        cfg.clamp = clamp;
    }
    let result = route(&request, index, catalog, &cfg, provider)?;
    let candidates = result
        .candidates
        .iter()
        .map(|c| {
            let server = catalog.server(&c.server_name).expect("routed server is in the catalog");
            let tool = server.tool(&c.tool_name).expect("routed tool is in the catalog");
            CandidateMessage {
                server_name: c.server_name.clone(),
                tool_name: c.tool_name.clone(),
                score: c.score.to_f64_lossless(),
                s_server: c.s_server.to_f64_lossless(),
                s_tool: c.s_tool.to_f64_lossless(),
                schema_text: render_tool_schema(tool, server),
            }
        })
        .collect();
    Ok(RetrieveResponseMessage {
        candidates,
        comparisons_made: result.comparisons_made,
    })
}

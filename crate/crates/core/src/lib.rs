//! Active tool discovery for language-model agents.
//!
//! A model emits a `<tool_assistant>` block naming the server domain and the
//! operation it needs; the router embeds both fields, shortlists servers by
//! their description and summary, ranks the tools inside the shortlist and
//! hands back only the best-matching schemas. The session driver runs that
//! loop against any [`LlmClient`] and keeps a per-turn token ledger, and the
//! `eval` module measures accuracy and token cost as the catalog grows.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix it to `f64` for everyday use.

pub mod api;
pub mod catalog;
pub mod embedding;
pub mod eval;
pub mod protocol;
pub mod routing;
pub mod scalar;
pub mod session;
pub mod tokenize;

pub use api::{retrieve, API_SCHEMA_VERSION, CandidateMessage, RetrieveRequestMessage, RetrieveResponseMessage};
pub use catalog::{
    catalog_stats, load_catalog, render_tool_schema, Catalog, CatalogError, CatalogFormat, CatalogStats,
    ParameterSpec, ServerRecord, ToolRecord,
};
pub use embedding::{build_index, cosine_similarity, EmbeddingError, EmbeddingProvider, HashEmbedder, IndexError};
pub use protocol::{
    build_discovery_prompt, extract_requests, extract_requests_bytes, format_request_block, Extraction,
    ParseWarning, ProtocolError, ToolRequest,
};
pub use routing::{brute_force_route, route, RoutingConfig, RoutingError};
pub use scalar::Scalar;
pub use session::{
    replay, run_session, start_session, LlmClient, RouterContext, ScriptedClient, SessionConfig, SessionError,
    SessionStatus, TokenLedger,
};
pub use tokenize::{ApproxTokenizer, Tokenizer};

pub type Index = embedding::EmbeddingIndex<f64>;
pub type Index32 = embedding::EmbeddingIndex<f32>;
pub type Embedding = embedding::EmbeddingVector<f64>;
pub type Ranked = routing::RankedTool<f64>;
pub type Retrieval = routing::RetrievalResult<f64>;
pub type Session = session::Session<f64>;
pub type TurnEvent = session::TurnEvent<f64>;

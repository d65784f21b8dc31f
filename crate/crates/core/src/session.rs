//! Iterative request → retrieve → inject loop with token accounting.
//!
//! A session starts with the discovery prompt and the user's query. Each
//! model turn is scanned for request blocks; every request is routed and the
//! retrieved schemas (or a "no tool found" notice) are injected back into
//! the context. The session ends when the model answers without requesting,
//! or when it asks for retrieval more than `max_retrieval_rounds` times.
//!
//! Token charges: discovery prompt, user and model messages, injected
//! schemas and notices. Routing itself is free.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{render_tool_schema, Catalog};
use crate::embedding::{EmbeddingIndex, EmbeddingProvider};
use crate::protocol::{build_discovery_prompt, extract_requests, ToolRequest};
use crate::routing::{route, RetrievalResult, RoutingConfig};
use crate::scalar::Scalar;
use crate::tokenize::Tokenizer;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("user query is empty")]
    EmptyQuery,
    #[error("session is no longer active ({0:?})")]
    NotActive(SessionStatus),
    #[error("language model failed: {0}")]
    Llm(#[from] LlmError),
    #[error("transcript cannot be replayed: {0}")]
    BadTranscript(String),
    #[error("transcript I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("transcript encoding: {0}")]
    Encoding(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Completed,
    ToolNotFound,
    IterationLimit,
}

impl SessionStatus {
    pub fn is_terminal(self) -> bool {
        self != Self::Active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    UserMessage,
    ModelMessage,
    ToolRequest,
    RetrievalInjection,
    Termination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proceed,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionOutcome {
    Found,
    NotFound,
    RoutingFailed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection<F> {
    /// Exactly the text placed into the context.
    pub text: String,
    pub outcome: InjectionOutcome,
    pub result: Option<RetrievalResult<F>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload<F> {
    Text(String),
    Request(ToolRequest),
    Injection(Injection<F>),
    Status(SessionStatus),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TurnEvent<F> {
    pub kind: EventKind,
    pub payload: Payload<F>,
    pub token_cost: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLedger {
    /// Everything except retrieved tool schemas: discovery prompt, messages,
    /// not-found notices.
    pub prompt_tokens: usize,
    pub injected_schema_tokens: usize,
    pub total_tokens: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub routing: RoutingConfig,
    pub max_retrieval_rounds: usize,
    /// Best scores below this floor count as "no tool found".
    pub score_floor: f64,
    pub include_icl: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            routing: RoutingConfig::default(),
            max_retrieval_rounds: 5,
            score_floor: 0.1,
            include_icl: false,
        }
    }
}

/// Read-only state a session routes against.
pub struct RouterContext<'a, F: Scalar> {
    pub catalog: &'a Catalog,
    pub index: &'a EmbeddingIndex<F>,
    pub provider: &'a dyn EmbeddingProvider<F>,
    pub tokenizer: &'a dyn Tokenizer,
}

/// Whether a retrieval produced anything worth injecting.
pub fn give_up_check<F: Scalar>(result: &RetrievalResult<F>, floor: f64) -> Verdict {
    match result.best_score() {
        Some(best) if best.to_f64_lossless() >= floor => Verdict::Proceed,
        _ => Verdict::NotFound,
    }
}

fn not_found_notice(request: &ToolRequest) -> String {
    format!(
        "No tool found for server \"{}\" / tool \"{}\". Refine the request or continue without tools.",
        request.server_text, request.tool_text
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("scripted client has no more outputs")]
    Exhausted,
    #[error("{0}")]
    Transport(String),
}

/// Sends the conversation so far, receives the next model turn.
pub trait LlmClient {
    fn respond(&mut self, context: &[ChatMessage]) -> Result<String, LlmError>;
}

/// Replays canned outputs in order.
#[derive(Debug, Clone, Default)]
pub struct ScriptedClient {
    outputs: VecDeque<String>,
    pub seen_contexts: usize,
}

impl ScriptedClient {
    pub fn new<I, S>(outputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            outputs: outputs.into_iter().map(Into::into).collect(),
            seen_contexts: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.outputs.len()
    }
}

impl LlmClient for ScriptedClient {
    fn respond(&mut self, _context: &[ChatMessage]) -> Result<String, LlmError> {
        self.seen_contexts += 1;
        self.outputs.pop_front().ok_or(LlmError::Exhausted)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session<F> {
    transcript: Vec<TurnEvent<F>>,
    ledger: TokenLedger,
    status: SessionStatus,
    config: SessionConfig,
    discovery_prompt: String,
    rounds: usize,
}

/// Opens a session: the discovery prompt and the query are charged to the
/// ledger as the first (user) event.
pub fn start_session<F: Scalar>(
    user_query: &str,
    config: SessionConfig,
    tokenizer: &dyn Tokenizer,
) -> Result<Session<F>, SessionError> {
    if user_query.trim().is_empty() {
        return Err(SessionError::EmptyQuery);
    }
    let discovery_prompt = build_discovery_prompt(config.include_icl).text();
    let cost = tokenizer.count(&discovery_prompt) + tokenizer.count(user_query);
    let mut s = Session {
        transcript: Vec::new(),
        ledger: TokenLedger::default(),
        status: SessionStatus::Active,
        config,
        discovery_prompt,
        rounds: 0,
    };
    s.push(TurnEvent {
        kind: EventKind::UserMessage,
        payload: Payload::Text(user_query.to_string()),
        token_cost: cost,
    });
    Ok(s)
}

impl<F: Scalar> Session<F> {
    pub fn transcript(&self) -> &[TurnEvent<F>] {
        &self.transcript
    }

    pub fn ledger(&self) -> TokenLedger {
        self.ledger
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn retrieval_rounds(&self) -> usize {
        self.rounds
    }

    pub fn discovery_prompt(&self) -> &str {
        &self.discovery_prompt
    }

    fn push(&mut self, event: TurnEvent<F>) {
        let schema = matches!(
            &event.payload,
            Payload::Injection(Injection {
                outcome: InjectionOutcome::Found,
                ..
            })
        );
        if schema {
            self.ledger.injected_schema_tokens += event.token_cost;
        } else {
            self.ledger.prompt_tokens += event.token_cost;
        }
        self.ledger.total_tokens += event.token_cost;
        self.transcript.push(event);
        debug_assert!(self.ledger_is_conserved());
    }

    /// Ledger totals equal the per-event costs.
    pub fn ledger_is_conserved(&self) -> bool {
        let sum: usize = self.transcript.iter().map(|e| e.token_cost).sum();
        let schemas: usize = self
            .transcript
            .iter()
            .filter(|e| {
                matches!(
                    &e.payload,
                    Payload::Injection(Injection {
                        outcome: InjectionOutcome::Found,
                        ..
                    })
                )
            })
            .map(|e| e.token_cost)
            .sum();
        self.ledger.total_tokens == sum
            && self.ledger.injected_schema_tokens == schemas
            && self.ledger.prompt_tokens + self.ledger.injected_schema_tokens == sum
    }

    fn terminate(&mut self, status: SessionStatus) {
        self.status = status;
        self.push(TurnEvent {
            kind: EventKind::Termination,
            payload: Payload::Status(status),
            token_cost: 0,
        });
    }

    fn last_outcome(&self) -> Option<&InjectionOutcome> {
        self.transcript.iter().rev().find_map(|e| match &e.payload {
            Payload::Injection(inj) => Some(&inj.outcome),
            _ => None,
        })
    }

    /// Processes one model turn.
    pub fn step(&mut self, model_output: &str, ctx: &RouterContext<'_, F>) -> Result<(), SessionError> {
        if self.status.is_terminal() {
            return Err(SessionError::NotActive(self.status));
        }
        self.push(TurnEvent {
            kind: EventKind::ModelMessage,
            payload: Payload::Text(model_output.to_string()),
            token_cost: ctx.tokenizer.count(model_output),
        });

        let requests = extract_requests(model_output).requests;
        if requests.is_empty() {
            let status = match self.last_outcome() {
                Some(InjectionOutcome::Found) | None => SessionStatus::Completed,
                Some(_) => SessionStatus::ToolNotFound,
            };
            self.terminate(status);
            return Ok(());
        }
        if self.rounds >= self.config.max_retrieval_rounds {
            self.terminate(SessionStatus::IterationLimit);
            return Ok(());
        }
        self.rounds += 1;

        for request in requests {
            self.push(TurnEvent {
                kind: EventKind::ToolRequest,
                payload: Payload::Request(request.clone()),
                token_cost: 0,
            });
            let injection = match route(&request, ctx.index, ctx.catalog, &self.config.routing, ctx.provider) {
                Ok(result) => match give_up_check(&result, self.config.score_floor) {
                    Verdict::Proceed => {
                        let text = result
                            .candidates
                            .iter()
                            .filter_map(|c| {
                                let server = ctx.catalog.server(&c.server_name)?;
                                Some(render_tool_schema(server.tool(&c.tool_name)?, server))
                            })
                            .collect::<Vec<_>>()
                            .join("\n");
                        Injection {
                            text,
                            outcome: InjectionOutcome::Found,
                            result: Some(result),
                        }
                    }
                    Verdict::NotFound => Injection {
                        text: not_found_notice(&request),
                        outcome: InjectionOutcome::NotFound,
                        result: Some(result),
                    },
                },
                Err(e) => Injection {
                    text: format!("Tool retrieval failed: {e}. Refine the request or continue without tools."),
                    outcome: InjectionOutcome::RoutingFailed(e.to_string()),
                    result: None,
                },
            };
            self.push(TurnEvent {
                kind: EventKind::RetrievalInjection,
                token_cost: ctx.tokenizer.count(&injection.text),
                payload: Payload::Injection(injection),
            });
        }
        Ok(())
    }

    /// The conversation as chat messages for an [`LlmClient`].
    pub fn context_messages(&self) -> Vec<ChatMessage> {
        let mut out = vec![ChatMessage {
            role: Role::System,
            content: self.discovery_prompt.clone(),
        }];
        for e in &self.transcript {
            let (role, content) = match (&e.kind, &e.payload) {
                (EventKind::UserMessage, Payload::Text(t)) => (Role::User, t.clone()),
                (EventKind::ModelMessage, Payload::Text(t)) => (Role::Assistant, t.clone()),
                (EventKind::RetrievalInjection, Payload::Injection(i)) => (Role::Tool, i.text.clone()),
                _ => continue,
            };
            out.push(ChatMessage { role, content });
        }
        out
    }

    /// Writes the transcript as JSON lines, one event per line.
    pub fn export_transcript<W: Write>(&self, mut out: W) -> Result<(), SessionError> {
        for e in &self.transcript {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Reads a transcript written by [`Session::export_transcript`].
pub fn import_transcript<F: Scalar, R: BufRead>(source: R) -> Result<Vec<TurnEvent<F>>, SessionError> {
    let mut events = Vec::new();
    for line in source.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            events.push(serde_json::from_str(&line)?);
        }
    }
    Ok(events)
}

/// Drives a session to a terminal state with `llm`.
pub fn run_session<F: Scalar>(
    user_query: &str,
    config: SessionConfig,
    llm: &mut dyn LlmClient,
    ctx: &RouterContext<'_, F>,
) -> Result<Session<F>, SessionError> {
    let mut session = start_session(user_query, config, ctx.tokenizer)?;
    while !session.status().is_terminal() {
        let output = llm.respond(&session.context_messages())?;
        session.step(&output, ctx)?;
    }
    Ok(session)
}

/// Re-runs the user query and model turns of a recorded transcript.
pub fn replay<F: Scalar>(
    events: &[TurnEvent<F>],
    config: SessionConfig,
    ctx: &RouterContext<'_, F>,
) -> Result<Session<F>, SessionError> {
    let query = match events.first() {
        Some(TurnEvent {
            kind: EventKind::UserMessage,
            payload: Payload::Text(q),
            ..
        }) => q,
        _ => return Err(SessionError::BadTranscript("first event is not a user message".into())),
    };
    let outputs = events.iter().filter_map(|e| match (&e.kind, &e.payload) {
        (EventKind::ModelMessage, Payload::Text(t)) => Some(t.clone()),
        _ => None,
    });
    run_session(query, config, &mut ScriptedClient::new(outputs), ctx)
}

//! The `<tool_assistant>` request block: extraction from model output,
//! canonical formatting, and the discovery instruction given to the model.
//!
//! Grammar (ABNF-style; `ws` is any whitespace except line breaks):
//!
//! ```text
//! block      = *ws "<tool_assistant>" *ws eol *body-line *ws "</tool_assistant>" *ws (eol / EOF)
//! body-line  = *ws (field / comment / "") eol
//! field      = key *ws ":" value
//! key        = "server" / "tool"            ; case-insensitive
//! value      = text [1*ws "#" comment-text]  ; '#' opens a comment only after whitespace
//! comment    = "#" comment-text
//! eol        = LF / CRLF
//! ```
//!
//! A block is accepted when both fields are present and non-empty after
//! trimming. Repeated fields keep the last value. Problems never abort
//! extraction; they come back as [`ParseWarning`]s alongside the requests.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const OPEN_TAG: &str = "<tool_assistant>";
pub const CLOSE_TAG: &str = "</tool_assistant>";

/// Half-open range of character (not byte) offsets into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }
}

/// A parsed request: which server domain and which operation the model needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolRequest {
    pub server_text: String,
    pub tool_text: String,
    #[serde(default)]
    pub source_span: Span,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("request field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("request field `{field}` cannot be written as a block: {reason}")]
    Format { field: &'static str, reason: &'static str },
}

impl ToolRequest {
    pub fn new(server_text: impl Into<String>, tool_text: impl Into<String>) -> Result<Self, ProtocolError> {
        let server_text = server_text.into().trim().to_string();
        let tool_text = tool_text.into().trim().to_string();
        if server_text.is_empty() {
            return Err(ProtocolError::EmptyField("server"));
        }
        if tool_text.is_empty() {
            return Err(ProtocolError::EmptyField("tool"));
        }
        Ok(Self {
            server_text,
            tool_text,
            source_span: Span::default(),
        })
    }

    /// Field equality, ignoring where the request was found.
    pub fn same_fields(&self, other: &Self) -> bool {
        self.server_text == other.server_text && self.tool_text == other.tool_text
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    UnclosedBlock,
    MissingField,
    DuplicateField,
    StrayClose,
    UnrecognizedLine,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub kind: WarningKind,
    pub span: Span,
    pub detail: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}..{}: {}", self.kind, self.span.start, self.span.end, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub requests: Vec<ToolRequest>,
    pub warnings: Vec<ParseWarning>,
}

struct OpenBlock {
    start: usize,
    server: Option<String>,
    tool: Option<String>,
}

/// Cuts a trailing `# comment`. A `#` only starts a comment when the
/// preceding character is whitespace.
fn strip_comment(value: &str) -> &str {
    let mut prev_ws = false;
    for (i, c) in value.char_indices() {
        if c == '#' && prev_ws {
            return &value[..i];
        }
        prev_ws = c.is_whitespace();
    }
    value
}

/// Finds every well-formed request block in `text`, in document order.
pub fn extract_requests(text: &str) -> Extraction {
    let mut out = Extraction::default();
    let mut open: Option<OpenBlock> = None;
    let mut line_start = 0usize; // char offset

    for raw_line in text.split('\n') {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let line_chars = raw_line.chars().count();
        let indent = line.chars().take_while(|c| c.is_whitespace()).count();
        let content = line.trim();

        if content == OPEN_TAG {
            if let Some(prev) = open.take() {
                out.warnings.push(ParseWarning {
                    kind: WarningKind::UnclosedBlock,
                    span: Span::new(prev.start, line_start),
                    detail: "block reopened before it was closed".into(),
                });
            }
            open = Some(OpenBlock {
                start: line_start + indent,
                server: None,
                tool: None,
            });
        } else if content == CLOSE_TAG {
            let end = line_start + indent + CLOSE_TAG.chars().count();
            match open.take() {
                Some(block) => {
                    let span = Span::new(block.start, end);
                    match (block.server, block.tool) {
                        (Some(server_text), Some(tool_text)) => out.requests.push(ToolRequest {
                            server_text,
                            tool_text,
                            source_span: span,
                        }),
                        (server, _) => out.warnings.push(ParseWarning {
                            kind: WarningKind::MissingField,
                            span,
                            detail: if server.is_none() { "server" } else { "tool" }.into(),
                        }),
                    }
                }
                None => out.warnings.push(ParseWarning {
                    kind: WarningKind::StrayClose,
                    span: Span::new(line_start + indent, end),
                    detail: "closing tag without an open block".into(),
                }),
            }
        } else if let Some(block) = open.as_mut() {
            let line_span = Span::new(line_start, line_start + line.chars().count());
            if !content.is_empty() && !content.starts_with('#') {
                let field = content.split_once(':').and_then(|(key, rest)| {
                    let key = key.trim();
                    let slot = if key.eq_ignore_ascii_case("server") {
                        &mut block.server
                    } else if key.eq_ignore_ascii_case("tool") {
                        &mut block.tool
                    } else {
                        return None;
                    };
                    Some((key.to_ascii_lowercase(), slot, strip_comment(rest).trim().to_string()))
                });
                match field {
                    Some((key, slot, value)) => {
                        if slot.is_some() {
                            out.warnings.push(ParseWarning {
                                kind: WarningKind::DuplicateField,
                                span: line_span,
                                detail: format!("{key} repeated; last value kept"),
                            });
                        }
                        *slot = (!value.is_empty()).then_some(value);
                    }
                    None => out.warnings.push(ParseWarning {
                        kind: WarningKind::UnrecognizedLine,
                        span: line_span,
                        detail: content.chars().take(40).collect(),
                    }),
                }
            }
        }
        line_start += line_chars + 1;
    }

    if let Some(block) = open {
        out.warnings.push(ParseWarning {
            kind: WarningKind::UnclosedBlock,
            span: Span::new(block.start, text.chars().count()),
            detail: "block not closed before end of text".into(),
        });
    }
    out
}

/// Lossy UTF-8 decoding in front of [`extract_requests`].
pub fn extract_requests_bytes(bytes: &[u8]) -> Extraction {
    extract_requests(&String::from_utf8_lossy(bytes))
}

fn check_field(field: &'static str, text: &str) -> Result<(), ProtocolError> {
    let fail = |reason| Err(ProtocolError::Format { field, reason });
    if text.trim().is_empty() {
        return Err(ProtocolError::EmptyField(field));
    }
    if text.contains(OPEN_TAG) || text.contains(CLOSE_TAG) {
        return fail("contains a block delimiter");
    }
    if text.chars().any(|c| c.is_control() || (c.is_whitespace() && c != ' ')) {
        return fail("contains a line break or control character");
    }
    if text.trim() != text {
        return fail("has leading or trailing whitespace");
    }
    let mut prev_ws = true;
    for c in text.chars() {
        if c == '#' && prev_ws {
            return fail("'#' after whitespace would start a comment");
        }
        prev_ws = c.is_whitespace();
    }
    Ok(())
}

/// Canonical block text for `request`.
pub fn format_request_block(request: &ToolRequest) -> Result<String, ProtocolError> {
    check_field("server", &request.server_text)?;
    check_field("tool", &request.tool_text)?;
    Ok(format!(
        "{OPEN_TAG}\nserver: {}\ntool: {}\n{CLOSE_TAG}",
        request.server_text, request.tool_text
    ))
}

/// One-shot example shown after the instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IclExample {
    pub block: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscoveryPrompt {
    pub instruction_text: String,
    pub icl_example: Option<IclExample>,
}

const INSTRUCTION: &str = "\
You can request external tools. When you need a capability you do not have, \
stop and write a request block: a line containing only <tool_assistant>, \
then a line `server: ...` naming the platform or permission domain the tool \
lives in, then a line `tool: ...` naming the operation and its target, then \
a line containing only </tool_assistant>. Matching tool schemas are returned \
to you. If none fit, refine the request and ask again, or answer without tools. \
Several requests may be issued over the conversation.";

impl DiscoveryPrompt {
    pub fn text(&self) -> String {
        match &self.icl_example {
            None => self.instruction_text.clone(),
            Some(ex) => format!("{}\n\nExample:\n{}\n{}", self.instruction_text, ex.block, ex.rationale),
        }
    }
}

/// The instruction that lets a model ask for tools, optionally with one
/// worked example block.
pub fn build_discovery_prompt(include_icl: bool) -> DiscoveryPrompt {
    let icl_example = include_icl.then(|| {
        let request = ToolRequest::new("filesystem", "read_file: read the contents of a local file")
            .expect("static example is valid");
        IclExample {
            block: format_request_block(&request).expect("static example formats"),
            rationale: "Name the server by its domain and the tool by the concrete operation it performs.".into(),
        }
    });
    DiscoveryPrompt {
        instruction_text: INSTRUCTION.to_string(),
        icl_example,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        let text = "<tool_assistant>\nserver: file system\ntool: read file contents\n</tool_assistant>";
        let ex = extract_requests(text);
        assert!(ex.warnings.is_empty());
        assert_eq!(ex.requests.len(), 1);
        let r = &ex.requests[0];
        assert_eq!(r.server_text, "file system");
        assert_eq!(r.tool_text, "read file contents");
        assert_eq!(r.source_span, Span::new(0, text.chars().count()));
    }

    #[test]
    fn no_blocks() {
        assert_eq!(extract_requests("just prose, <tool_assistant> inline"), Extraction::default());
    }

    #[test]
    fn two_blocks_with_comment() {
        let text = "I need two things.\n\
            <tool_assistant>\nserver: github\ntool: search repositories\n</tool_assistant>\n\
            Then later:\n  <tool_assistant>\n  server: slack   # messaging\n  tool: post message #channel\n  </tool_assistant>\n";
        let ex = extract_requests(text);
        assert!(ex.warnings.is_empty(), "{:?}", ex.warnings);
        let fields: Vec<_> = ex.requests.iter().map(|r| (r.server_text.as_str(), r.tool_text.as_str())).collect();
        assert_eq!(fields, [("github", "search repositories"), ("slack", "post message")]);
        let chars: Vec<char> = text.chars().collect();
        let s = ex.requests[1].source_span;
        let slice: String = chars[s.start..s.end].iter().collect();
        assert!(slice.starts_with(OPEN_TAG) && slice.ends_with(CLOSE_TAG));
    }

    #[test]
    fn hash_without_whitespace_is_kept() {
        let ex = extract_requests("<tool_assistant>\nserver: c#\ntool: compile c# project\n</tool_assistant>");
        assert_eq!(ex.requests[0].server_text, "c#");
        assert_eq!(ex.requests[0].tool_text, "compile c# project");
    }

    #[test]
    fn crlf_and_case_insensitive_keys() {
        let ex = extract_requests("<tool_assistant>\r\n   SERVER: fs\r\n\tTool : read\r\n</tool_assistant>\r\n");
        assert_eq!(ex.requests.len(), 1);
        assert_eq!(ex.requests[0].server_text, "fs");
        assert_eq!(ex.requests[0].tool_text, "read");
    }

    #[test]
    fn span_counts_characters() {
        let text = "é\n<tool_assistant>\nserver: fs\ntool: read\n</tool_assistant>";
        let r = &extract_requests(text).requests[0];
        assert_eq!(r.source_span.start, 2);
        assert_eq!(r.source_span.end, text.chars().count());
    }

    #[test]
    fn malformed_blocks_are_reported() {
        let ex = extract_requests("<tool_assistant>\nserver: fs\n</tool_assistant>");
        assert!(ex.requests.is_empty());
        assert_eq!(ex.warnings[0].kind, WarningKind::MissingField);

        let ex = extract_requests("<tool_assistant>\nserver: fs\ntool: read\n");
        assert!(ex.requests.is_empty());
        assert_eq!(ex.warnings[0].kind, WarningKind::UnclosedBlock);

        let ex = extract_requests("</tool_assistant>");
        assert_eq!(ex.warnings[0].kind, WarningKind::StrayClose);

        let ex = extract_requests("<tool_assistant>\nserver:   # nothing\ntool: read\n</tool_assistant>");
        assert!(ex.requests.is_empty());
        assert_eq!(ex.warnings[0].kind, WarningKind::MissingField);
    }

    #[test]
    fn reopen_abandons_previous_block() {
        let ex = extract_requests(
            "<tool_assistant>\nserver: a\n<tool_assistant>\nserver: b\ntool: t\n</tool_assistant>",
        );
        assert_eq!(ex.requests.len(), 1);
        assert_eq!(ex.requests[0].server_text, "b");
        assert_eq!(ex.warnings[0].kind, WarningKind::UnclosedBlock);
    }

    #[test]
    fn duplicate_field_last_wins() {
        let ex = extract_requests("<tool_assistant>\nserver: a\nserver: b\ntool: t\n</tool_assistant>");
        assert_eq!(ex.requests[0].server_text, "b");
        assert_eq!(ex.warnings.len(), 1);
        assert_eq!(ex.warnings[0].kind, WarningKind::DuplicateField);
    }

    #[test]
    fn unknown_lines_warn_but_keep_block() {
        let ex = extract_requests("<tool_assistant>\nserver: a\nreason: because\ntool: t\n</tool_assistant>");
        assert_eq!(ex.requests.len(), 1);
        assert_eq!(ex.warnings[0].kind, WarningKind::UnrecognizedLine);
    }

    #[test]
    fn format_canonical() {
        let r = ToolRequest::new("github", "search repositories").unwrap();
        let text = format_request_block(&r).unwrap();
        assert_eq!(text, "<tool_assistant>\nserver: github\ntool: search repositories\n</tool_assistant>");
        let back = extract_requests(&text);
        assert!(back.requests[0].same_fields(&r));
    }

    #[test]
    fn format_rejects_injection() {
        let mut r = ToolRequest::new("github", "x").unwrap();
        r.tool_text = "x </tool_assistant>".into();
        assert!(matches!(format_request_block(&r), Err(ProtocolError::Format { field: "tool", .. })));
        r.tool_text = "a\nb".into();
        assert!(format_request_block(&r).is_err());
        r.tool_text = "a #b".into();
        assert!(format_request_block(&r).is_err());
        r.tool_text = "#b".into();
        assert!(format_request_block(&r).is_err());
        r.tool_text = "a#b".into();
        assert!(format_request_block(&r).is_ok());
    }

    #[test]
    fn empty_fields_rejected() {
        assert_eq!(ToolRequest::new(" ", "t"), Err(ProtocolError::EmptyField("server")));
        assert_eq!(ToolRequest::new("s", ""), Err(ProtocolError::EmptyField("tool")));
    }

    #[test]
    fn discovery_prompt_contents() {
        let plain = build_discovery_prompt(false);
        let text = plain.text();
        for needle in [OPEN_TAG, CLOSE_TAG, "server:", "tool:"] {
            assert!(text.contains(needle), "missing {needle}");
        }
        assert!(extract_requests(&text).requests.is_empty());

        let icl = build_discovery_prompt(true);
        assert!(icl.text().starts_with(&text));
        let ex = extract_requests(&icl.text());
        assert_eq!(ex.requests.len(), 1);
        assert!(ex.warnings.is_empty());
        assert_eq!(plain, build_discovery_prompt(false));
    }
}

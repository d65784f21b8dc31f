//! Tool catalog in the MCP-tools layout: loading, validation, statistics and
//! schema rendering.
//!
//! The on-disk document is a JSON array of server objects:
//!
//! ```json
//! [{
//!   "server_name": "fs",
//!   "server_description": "Filesystem access",
//!   "server_summary": "Read and write local files ...",
//!   "tools": [{
//!     "name": "read_file",
//!     "description": "Read a file",
//!     "parameter": { "path": "(string) file path", "encoding": "(Optional, string) text encoding" }
//!   }]
//! }]
//! ```
//!
//! Unknown fields on servers and tools are carried through untouched so a
//! load/serialize cycle is lossless.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed catalog document: {0}")]
    MalformedDocument(String),
    #[error("schema violation at {path}: {reason}")]
    SchemaViolation { path: String, reason: String },
}

impl CatalogError {
    fn violation(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::SchemaViolation {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Supported input layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CatalogFormat {
    #[default]
    McpToolsSchema,
}

/// One entry of a tool's `parameter` map, e.g. `"(Optional, int) page number"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSpec {
    pub name: String,
    pub type_tag: String,
    pub description: String,
    pub optional: bool,
    /// The source string, kept verbatim for lossless serialization.
    pub raw: String,
}

impl ParameterSpec {
    /// Splits `"(Optional, type) text"` / `"(type) text"` into its parts.
    /// Text without a leading parenthesized segment has an empty type tag.
    pub fn parse(name: impl Into<String>, raw: impl Into<String>) -> Self {
        let name = name.into();
        let raw = raw.into();
        let trimmed = raw.trim_start();
        let (mut type_tag, mut description, mut optional) =
            (String::new(), trimmed.trim().to_string(), false);

        if let Some(rest) = trimmed.strip_prefix('(') {
            if let Some(close) = rest.find(')') {
                let inner = &rest[..close];
                description = rest[close + 1..].trim().to_string();
                let (head, tail) = match inner.split_once(',') {
                    Some((h, t)) => (h.trim(), Some(t.trim())),
                    None => (inner.trim(), None),
                };
                if head.eq_ignore_ascii_case("optional") {
                    optional = true;
                    type_tag = tail.unwrap_or("").to_string();
                } else {
                    type_tag = inner.trim().to_string();
                }
            }
        } else if starts_with_optional_word(trimmed) {
            optional = true;
            description = trimmed["optional".len()..]
                .trim_start_matches(|c: char| !c.is_alphanumeric())
                .trim()
                .to_string();
        }

        Self {
            name,
            type_tag,
            description,
            optional,
            raw,
        }
    }
}

fn starts_with_optional_word(text: &str) -> bool {
    text.len() >= 8
        && text.is_char_boundary(8)
        && text[..8].eq_ignore_ascii_case("optional")
        && !text[8..].starts_with(|c: char| c.is_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolRecord {
    pub name: String,
    pub description: String,
    pub parameters: Vec<ParameterSpec>,
    pub extra: Map<String, Value>,
}

impl ToolRecord {
    pub fn required_parameters(&self) -> impl Iterator<Item = &ParameterSpec> {
        self.parameters.iter().filter(|p| !p.optional)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerRecord {
    pub name: String,
    pub description: String,
    pub summary: String,
    pub tools: Vec<ToolRecord>,
    pub extra: Map<String, Value>,
}

impl ServerRecord {
    pub fn tool(&self, name: &str) -> Option<&ToolRecord> {
        self.tools.iter().find(|t| t.name == name)
    }
}

/// A validated, immutable tool catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    servers: Vec<ServerRecord>,
    source_tag: String,
    fingerprint: String,
}

impl Catalog {
    /// Builds a catalog from in-memory records, applying the same validation
    /// as [`load_catalog`].
    pub fn new(servers: Vec<ServerRecord>, source_tag: impl Into<String>) -> Result<Self, CatalogError> {
        validate(&servers)?;
        let fingerprint = content_fingerprint(&servers);
        Ok(Self {
            servers,
            source_tag: source_tag.into(),
            fingerprint,
        })
    }

    pub fn from_reader<R: Read>(
        source: R,
        format: CatalogFormat,
        source_tag: impl Into<String>,
    ) -> Result<Self, CatalogError> {
        let CatalogFormat::McpToolsSchema = format;
        let doc: Value = serde_json::from_reader(source)
            .map_err(|e| CatalogError::MalformedDocument(e.to_string()))?;
        let servers = parse_document(doc)?;
        Self::new(servers, source_tag)
    }

    pub fn from_json_str(text: &str, source_tag: impl Into<String>) -> Result<Self, CatalogError> {
        Self::from_reader(text.as_bytes(), CatalogFormat::McpToolsSchema, source_tag)
    }

    pub fn servers(&self) -> &[ServerRecord] {
        &self.servers
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn server(&self, name: &str) -> Option<&ServerRecord> {
        self.servers.iter().find(|s| s.name == name)
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }

    pub fn total_tools(&self) -> usize {
        self.servers.iter().map(|s| s.tools.len()).sum()
    }

    /// `(server, tool)` pairs in catalog order.
    pub fn iter_tools(&self) -> impl Iterator<Item = (&ServerRecord, &ToolRecord)> {
        self.servers
            .iter()
            .flat_map(|s| s.tools.iter().map(move |t| (s, t)))
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(self.servers.iter().map(server_to_value).collect())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("catalog values always serialize")
    }

    /// SHA-256 over the compact serialization; identifies catalog content
    /// independent of where it was loaded from.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// A catalog holding only the listed tools, keeping catalog order.
    /// Servers left without tools are dropped.
    pub fn restrict(&self, keep: &HashSet<(String, String)>, source_tag: impl Into<String>) -> Result<Self, CatalogError> {
        let servers = self
            .servers
            .iter()
            .filter_map(|s| {
                let tools: Vec<_> = s
                    .tools
                    .iter()
                    .filter(|t| keep.contains(&(s.name.clone(), t.name.clone())))
                    .cloned()
                    .collect();
                (!tools.is_empty()).then(|| ServerRecord {
                    tools,
                    ..s.clone()
                })
            })
            .collect();
        Self::new(servers, source_tag)
    }
}

/// Reads and validates a catalog file.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Catalog::from_reader(
        std::io::BufReader::new(file),
        CatalogFormat::McpToolsSchema,
        path.display().to_string(),
    )
}

fn take_string(obj: &mut Map<String, Value>, key: &str, path: &str) -> Result<String, CatalogError> {
    match obj.remove(key) {
        Some(Value::String(s)) => Ok(s),
        Some(other) => Err(CatalogError::violation(
            format!("{path}.{key}"),
            format!("expected string, found {}", json_kind(&other)),
        )),
        None => Err(CatalogError::violation(format!("{path}.{key}"), "missing field")),
    }
}

fn json_kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn parse_document(doc: Value) -> Result<Vec<ServerRecord>, CatalogError> {
    let Value::Array(items) = doc else {
        return Err(CatalogError::violation("$", format!("expected array of servers, found {}", json_kind(&doc))));
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| parse_server(item, &format!("servers[{i}]")))
        .collect()
}

fn parse_server(item: Value, path: &str) -> Result<ServerRecord, CatalogError> {
    let Value::Object(mut obj) = item else {
        return Err(CatalogError::violation(path, "expected object"));
    };
    let name = take_string(&mut obj, "server_name", path)?;
    let description = take_string(&mut obj, "server_description", path)?;
    let summary = take_string(&mut obj, "server_summary", path)?;
    let tools = match obj.remove("tools") {
        Some(Value::Array(tools)) => tools
            .into_iter()
            .enumerate()
            .map(|(j, t)| parse_tool(t, &format!("{path}.tools[{j}]")))
            .collect::<Result<Vec<_>, _>>()?,
        Some(other) => {
            return Err(CatalogError::violation(
                format!("{path}.tools"),
                format!("expected array, found {}", json_kind(&other)),
            ))
        }
        None => return Err(CatalogError::violation(format!("{path}.tools"), "missing field")),
    };
    Ok(ServerRecord {
        name,
        description,
        summary,
        tools,
        extra: obj,
    })
}

fn parse_tool(item: Value, path: &str) -> Result<ToolRecord, CatalogError> {
    let Value::Object(mut obj) = item else {
        return Err(CatalogError::violation(path, "expected object"));
    };
    let name = take_string(&mut obj, "name", path)?;
    let description = take_string(&mut obj, "description", path)?;
    let parameters = match obj.remove("parameter") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Object(params)) => params
            .into_iter()
            .map(|(pname, v)| match v {
                Value::String(raw) => Ok(ParameterSpec::parse(pname, raw)),
                other => Err(CatalogError::violation(
                    format!("{path}.parameter.{pname}"),
                    format!("expected string, found {}", json_kind(&other)),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(other) => {
            return Err(CatalogError::violation(
                format!("{path}.parameter"),
                format!("expected object, found {}", json_kind(&other)),
            ))
        }
    };
    Ok(ToolRecord {
        name,
        description,
        parameters,
        extra: obj,
    })
}

fn validate(servers: &[ServerRecord]) -> Result<(), CatalogError> {
    let mut server_names = HashSet::new();
    for (i, server) in servers.iter().enumerate() {
        let path = format!("servers[{i}]");
        if server.name.trim().is_empty() {
            return Err(CatalogError::violation(format!("{path}.server_name"), "empty name"));
        }
        if !server_names.insert(server.name.as_str()) {
            return Err(CatalogError::violation(
                format!("{path}.server_name"),
                format!("duplicate server name {:?}", server.name),
            ));
        }
        if server.description.trim().is_empty() {
            return Err(CatalogError::violation(format!("{path}.server_description"), "empty description"));
        }
        if server.summary.trim().is_empty() {
            return Err(CatalogError::violation(format!("{path}.server_summary"), "empty summary"));
        }
        if server.tools.is_empty() {
            return Err(CatalogError::violation(format!("{path}.tools"), "server has no tools"));
        }
        let mut tool_names = HashSet::new();
        for (j, tool) in server.tools.iter().enumerate() {
            let tpath = format!("{path}.tools[{j}]");
            if tool.name.trim().is_empty() {
                return Err(CatalogError::violation(format!("{tpath}.name"), "empty name"));
            }
            if !tool_names.insert(tool.name.as_str()) {
                return Err(CatalogError::violation(
                    format!("{tpath}.name"),
                    format!("duplicate tool name {:?}", tool.name),
                ));
            }
            if tool.description.trim().is_empty() {
                return Err(CatalogError::violation(format!("{tpath}.description"), "empty description"));
            }
            let mut param_names = HashSet::new();
            for p in &tool.parameters {
                if p.name.is_empty() {
                    return Err(CatalogError::violation(format!("{tpath}.parameter"), "empty parameter name"));
                }
                // JSON objects cannot carry duplicate keys after parsing, but
                // in-memory construction can.
                if !param_names.insert(p.name.as_str()) {
                    return Err(CatalogError::violation(
                        format!("{tpath}.parameter.{}", p.name),
                        "duplicate parameter name",
                    ));
                }
            }
        }
    }
    Ok(())
}

fn content_fingerprint(servers: &[ServerRecord]) -> String {
    let doc = Value::Array(servers.iter().map(server_to_value).collect());
    let bytes = serde_json::to_vec(&doc).expect("catalog values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

fn tool_to_value(tool: &ToolRecord) -> Value {
    let mut obj = Map::new();
    obj.insert("name".into(), Value::String(tool.name.clone()));
    obj.insert("description".into(), Value::String(tool.description.clone()));
    let params: Map<String, Value> = tool
        .parameters
        .iter()
        .map(|p| (p.name.clone(), Value::String(p.raw.clone())))
        .collect();
    obj.insert("parameter".into(), Value::Object(params));
    for (k, v) in &tool.extra {
        obj.insert(k.clone(), v.clone());
    }
    Value::Object(obj)
}

fn server_to_value(server: &ServerRecord) -> Value {
    let mut obj = Map::new();
    obj.insert("server_name".into(), Value::String(server.name.clone()));
    obj.insert("server_description".into(), Value::String(server.description.clone()));
    obj.insert("server_summary".into(), Value::String(server.summary.clone()));
    obj.insert("tools".into(), Value::Array(server.tools.iter().map(tool_to_value).collect()));
    for (k, v) in &server.extra {
        obj.insert(k.clone(), v.clone());
    }
    Value::Object(obj)
}

/// Descriptive statistics over tools-per-server.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogStats {
    pub server_count: usize,
    pub tool_count: usize,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation (divides by N).
    pub stddev: f64,
    pub max: usize,
    pub min: usize,
    pub servers_with_at_most_5_tools: usize,
}

impl fmt::Display for CatalogStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} servers, {} tools; tools/server mean {:.2} median {:.1} stddev {:.2} min {} max {}; {} servers with <=5 tools",
            self.server_count,
            self.tool_count,
            self.mean,
            self.median,
            self.stddev,
            self.min,
            self.max,
            self.servers_with_at_most_5_tools
        )
    }
}

pub fn catalog_stats(catalog: &Catalog) -> CatalogStats {
    let mut counts: Vec<usize> = catalog.servers.iter().map(|s| s.tools.len()).collect();
    counts.sort_unstable();
    let n = counts.len();
    let total: usize = counts.iter().sum();
    let mean = total as f64 / n as f64;
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };
    let variance = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    CatalogStats {
        server_count: n,
        tool_count: total,
        mean,
        median,
        stddev: variance.sqrt(),
        max: counts[n - 1],
        min: counts[0],
        servers_with_at_most_5_tools: counts.iter().filter(|&&c| c <= 5).count(),
    }
}

/// Renders the callable schema of `tool` as compact JSON text for injection
/// into a model context. Output is byte-stable for identical inputs.
pub fn render_tool_schema(tool: &ToolRecord, server: &ServerRecord) -> String {
    let mut properties = Map::new();
    for p in &tool.parameters {
        let mut prop = Map::new();
        prop.insert("description".into(), Value::String(p.raw.clone()));
        let ty = if p.type_tag.is_empty() { "string" } else { p.type_tag.as_str() };
        prop.insert("type".into(), Value::String(ty.to_string()));
        properties.insert(p.name.clone(), Value::Object(prop));
    }
    let required: Vec<Value> = tool
        .required_parameters()
        .map(|p| Value::String(p.name.clone()))
        .collect();

    let mut parameters = Map::new();
    parameters.insert("properties".into(), Value::Object(properties));
    parameters.insert("required".into(), Value::Array(required));
    parameters.insert("type".into(), Value::String("object".into()));

    let mut schema = Map::new();
    schema.insert("description".into(), Value::String(tool.description.clone()));
    schema.insert("name".into(), Value::String(tool.name.clone()));
    schema.insert("parameters".into(), Value::Object(parameters));
    schema.insert("server".into(), Value::String(server.name.clone()));
    serde_json::to_string(&Value::Object(schema)).expect("schema values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"[{"server_name":"fs","server_description":"Filesystem access",
        "server_summary":"Read/write local files and list directories",
        "tools":[{"name":"read_file","description":"Read a file","parameter":{"path":"(string) file path"}}]}]"#;

    fn violation_path(err: CatalogError) -> String {
        match err {
            CatalogError::SchemaViolation { path, .. } => path,
            other => panic!("expected schema violation, got {other:?}"),
        }
    }

    #[test]
    fn loads_minimal_document() {
        let c = Catalog::from_json_str(MINIMAL, "inline").unwrap();
        assert_eq!(c.server_count(), 1);
        assert_eq!(c.total_tools(), 1);
        let p = &c.servers()[0].tools[0].parameters[0];
        assert_eq!(p.type_tag, "string");
        assert_eq!(p.description, "file path");
        assert!(!p.optional);
    }

    #[test]
    fn empty_tools_is_a_violation() {
        let doc = MINIMAL.replace(
            r#"[{"name":"read_file","description":"Read a file","parameter":{"path":"(string) file path"}}]"#,
            "[]",
        );
        let err = Catalog::from_json_str(&doc, "inline").unwrap_err();
        assert_eq!(violation_path(err), "servers[0].tools");
    }

    #[test]
    fn violations_name_the_path() {
        let missing = r#"[{"server_name":"a","server_description":"d","tools":[]}]"#;
        assert_eq!(
            violation_path(Catalog::from_json_str(missing, "x").unwrap_err()),
            "servers[0].server_summary"
        );
        let empty_desc = r#"[{"server_name":"a","server_description":"d","server_summary":"s",
            "tools":[{"name":"t","description":"  "}]}]"#;
        assert_eq!(
            violation_path(Catalog::from_json_str(empty_desc, "x").unwrap_err()),
            "servers[0].tools[0].description"
        );
        let dup_tool = r#"[{"server_name":"a","server_description":"d","server_summary":"s",
            "tools":[{"name":"t","description":"x"},{"name":"t","description":"y"}]}]"#;
        assert_eq!(
            violation_path(Catalog::from_json_str(dup_tool, "x").unwrap_err()),
            "servers[0].tools[1].name"
        );
        let dup_server = r#"[{"server_name":"a","server_description":"d","server_summary":"s","tools":[{"name":"t","description":"x"}]},
            {"server_name":"a","server_description":"d","server_summary":"s","tools":[{"name":"t","description":"x"}]}]"#;
        assert_eq!(
            violation_path(Catalog::from_json_str(dup_server, "x").unwrap_err()),
            "servers[1].server_name"
        );
        let bad_param = r#"[{"server_name":"a","server_description":"d","server_summary":"s",
            "tools":[{"name":"t","description":"x","parameter":{"p":3}}]}]"#;
        assert_eq!(
            violation_path(Catalog::from_json_str(bad_param, "x").unwrap_err()),
            "servers[0].tools[0].parameter.p"
        );
    }

    #[test]
    fn syntax_errors_are_malformed() {
        assert!(matches!(
            Catalog::from_json_str("[{", "x"),
            Err(CatalogError::MalformedDocument(_))
        ));
    }

    #[test]
    fn same_tool_name_in_two_servers_is_allowed() {
        let doc = r#"[{"server_name":"a","server_description":"d","server_summary":"s","tools":[{"name":"t","description":"x"}]},
            {"server_name":"b","server_description":"d","server_summary":"s","tools":[{"name":"t","description":"x"}]}]"#;
        assert_eq!(Catalog::from_json_str(doc, "x").unwrap().total_tools(), 2);
    }

    #[test]
    fn optional_marker_parsing() {
        let p = ParameterSpec::parse("page", "(Optional, int) page number");
        assert!(p.optional);
        assert_eq!(p.type_tag, "int");
        assert_eq!(p.description, "page number");

        let p = ParameterSpec::parse("page", "(optional) page number");
        assert!(p.optional);
        assert_eq!(p.type_tag, "");

        let p = ParameterSpec::parse("page", "Optional. Page number");
        assert!(p.optional);
        assert_eq!(p.description, "Page number");

        assert!(!ParameterSpec::parse("x", "(string) optional flag").optional);
        assert!(!ParameterSpec::parse("x", "Optionality of the thing").optional);
        assert!(!ParameterSpec::parse("x", "plain text").optional);
    }

    #[test]
    fn stats_small_catalogs() {
        let two = r#"[{"server_name":"a","server_description":"d","server_summary":"s","tools":[
              {"name":"1","description":"x"},{"name":"2","description":"x"},{"name":"3","description":"x"}]},
            {"server_name":"b","server_description":"d","server_summary":"s","tools":[
              {"name":"1","description":"x"},{"name":"2","description":"x"},{"name":"3","description":"x"},
              {"name":"4","description":"x"},{"name":"5","description":"x"}]}]"#;
        let s = catalog_stats(&Catalog::from_json_str(two, "x").unwrap());
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 4.0);
        assert_eq!(s.stddev, 1.0);
        assert_eq!((s.min, s.max), (3, 5));
        assert_eq!(s.servers_with_at_most_5_tools, 2);

        let s = catalog_stats(&Catalog::from_json_str(MINIMAL, "x").unwrap());
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.stddev, 0.0);
    }

    #[test]
    fn render_lists_required_parameters() {
        let c = Catalog::from_json_str(MINIMAL, "x").unwrap();
        let server = &c.servers()[0];
        let text = render_tool_schema(&server.tools[0], server);
        assert!(text.contains("read_file"));
        assert!(text.contains("(string) file path"));
        assert!(text.contains(r#""required":["path"]"#));
        assert_eq!(text, render_tool_schema(&server.tools[0], server));
    }

    #[test]
    fn render_excludes_optional_from_required() {
        let doc = r#"[{"server_name":"gh","server_description":"GitHub","server_summary":"s",
            "tools":[{"name":"search","description":"Search repositories",
              "parameter":{"query":"(string) search query","page":"(Optional, number) page"}}]}]"#;
        let c = Catalog::from_json_str(doc, "x").unwrap();
        let server = &c.servers()[0];
        let text = render_tool_schema(&server.tools[0], server);
        assert!(text.contains(r#""required":["query"]"#));
        assert!(text.contains(r#""page":{"description":"(Optional, number) page","type":"number"}"#));
    }

    #[test]
    fn unknown_fields_survive_round_trip() {
        let doc = r#"[{"server_name":"a","server_description":"d","server_summary":"s","stars":12,
            "tools":[{"name":"t","description":"x","parameter":{"b":"(int) b","a":"(Optional, str) a"},"tags":["z"]}]}]"#;
        let c = Catalog::from_json_str(doc, "x").unwrap();
        assert_eq!(c.servers()[0].extra["stars"], 12);
        let again = Catalog::from_json_str(&c.to_json_string(), "x").unwrap();
        assert_eq!(c, again);
        // parameter order is preserved
        assert_eq!(again.servers()[0].tools[0].parameters[0].name, "b");
        assert_eq!(c.fingerprint(), again.fingerprint());
    }

    #[test]
    fn missing_parameter_map_means_no_parameters() {
        let doc = r#"[{"server_name":"a","server_description":"d","server_summary":"s","tools":[{"name":"t","description":"x"}]}]"#;
        let c = Catalog::from_json_str(doc, "x").unwrap();
        assert!(c.servers()[0].tools[0].parameters.is_empty());
    }

    #[test]
    fn restrict_keeps_order_and_drops_empty_servers() {
        let doc = r#"[{"server_name":"a","server_description":"d","server_summary":"s","tools":[{"name":"t1","description":"x"},{"name":"t2","description":"y"}]},
            {"server_name":"b","server_description":"d","server_summary":"s","tools":[{"name":"t3","description":"x"}]}]"#;
        let c = Catalog::from_json_str(doc, "x").unwrap();
        let keep: HashSet<_> = [("a".to_string(), "t2".to_string())].into_iter().collect();
        let sub = c.restrict(&keep, "sub").unwrap();
        assert_eq!(sub.server_count(), 1);
        assert_eq!(sub.servers()[0].tools[0].name, "t2");
    }
}

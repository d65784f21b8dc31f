use proptest::prelude::*;
use toolseek::{extract_requests, extract_requests_bytes, format_request_block, ToolRequest};

/// Field text that a block can carry: no delimiters, no line breaks, no
/// comment marker, no surrounding whitespace.
fn field() -> impl Strategy<Value = String> {
    "[A-Za-z0-9][A-Za-z0-9 _.,:/()'-]{0,40}".prop_map(|s| s.trim_end().to_string())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn format_then_extract(server in field(), tool in field(), prefix in "[a-z \n]{0,20}", suffix in "[a-z \n]{0,20}") {
        let req = ToolRequest::new(server, tool).unwrap();
        let block = format_request_block(&req).unwrap();
        let text = format!("{prefix}\n{block}\n{suffix}");
        let got = extract_requests(&text);
        prop_assert_eq!(got.requests.len(), 1);
        prop_assert!(got.requests[0].same_fields(&req));
        let span = got.requests[0].source_span;
        let covered: String = text.chars().skip(span.start).take(span.end - span.start).collect();
        prop_assert!(covered.starts_with("<tool_assistant>"));
        prop_assert!(covered.ends_with("</tool_assistant>"));
    }

    #[test]
    fn extract_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let _ = extract_requests_bytes(&bytes);
    }

    #[test]
    fn extract_never_panics_on_tag_soup(parts in prop::collection::vec(
        prop::sample::select(vec!["<tool_assistant>", "</tool_assistant>", "\n", "\r\n", "server:", "tool:", " x ", "#", "é"]),
        0..40,
    )) {
        let text: String = parts.concat();
        let got = extract_requests(&text);
        for r in &got.requests {
            prop_assert!(!r.server_text.is_empty() && !r.tool_text.is_empty());
        }
    }
}

#[test]
fn two_blocks_in_order() {
    let a = ToolRequest::new("filesystem", "read a file").unwrap();
    let b = ToolRequest::new("web", "fetch a page").unwrap();
    let text = format!(
        "first\n{}\nthen\n{}\n",
        format_request_block(&a).unwrap(),
        format_request_block(&b).unwrap()
    );
    let got = extract_requests(&text);
    assert_eq!(got.requests.len(), 2);
    assert!(got.requests[0].same_fields(&a) && got.requests[1].same_fields(&b));
    assert!(got.requests[0].source_span.end <= got.requests[1].source_span.start);
}

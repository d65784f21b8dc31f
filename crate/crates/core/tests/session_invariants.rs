use proptest::prelude::*;
use toolseek::session::{import_transcript, EventKind, Payload};
use toolseek::{
    build_index, format_request_block, replay, run_session, ApproxTokenizer, Catalog, HashEmbedder, Index,
    RouterContext, ScriptedClient, SessionConfig, SessionStatus, Tokenizer, ToolRequest,
};

fn catalog() -> Catalog {
    toolseek::load_catalog(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/two_servers.json")).unwrap()
}

#[derive(Debug, Clone)]
enum Turn {
    Answer(String),
    Request(Vec<(String, String)>),
}

fn turn() -> impl Strategy<Value = Turn> {
    let phrase = prop::sample::select(vec![
        "local filesystem access",
        "weather forecasts",
        "read the contents of a local file",
        "get the weather forecast for a city",
        "quantum chromodynamics lattice",
        "zzz qqq",
    ]);
    prop_oneof![
        "[a-z ]{1,30}".prop_map(Turn::Answer),
        prop::collection::vec((phrase.clone(), phrase), 1..3)
            .prop_map(|v| Turn::Request(v.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect())),
    ]
}

fn render(t: &Turn) -> String {
    match t {
        Turn::Answer(a) => format!("answer: {a}"),
        Turn::Request(reqs) => reqs
            .iter()
            .map(|(s, t)| format_request_block(&ToolRequest::new(s.as_str(), t.as_str()).unwrap()).unwrap())
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn sessions_conserve_tokens_and_replay(script in prop::collection::vec(turn(), 1..9), floor in 0.0f64..0.6, rounds in 1usize..6) {
        let c = catalog();
        let p = HashEmbedder::default();
        let idx: Index = build_index(&c, &p).unwrap();
        let ctx = RouterContext { catalog: &c, index: &idx, provider: &p, tokenizer: &ApproxTokenizer };
        let cfg = SessionConfig { score_floor: floor, max_retrieval_rounds: rounds, ..Default::default() };
        let mut outputs: Vec<String> = script.iter().map(render).collect();
        outputs.push("final answer".into());
        let mut llm = ScriptedClient::new(outputs);
        let s = run_session("help me", cfg, &mut llm, &ctx).unwrap();

        prop_assert!(s.status().is_terminal());
        prop_assert!(s.ledger_is_conserved());
        prop_assert!(s.retrieval_rounds() <= rounds);
        let ledger = s.ledger();
        prop_assert_eq!(ledger.total_tokens, ledger.prompt_tokens + ledger.injected_schema_tokens);
        let t = s.transcript();
        prop_assert_eq!(t[0].kind, EventKind::UserMessage);
        prop_assert_eq!(t.last().unwrap().kind, EventKind::Termination);
        prop_assert_eq!(t.iter().filter(|e| e.kind == EventKind::Termination).count(), 1);
        for e in t {
            if let (EventKind::ModelMessage, Payload::Text(text)) = (&e.kind, &e.payload) {
                prop_assert_eq!(e.token_cost, ApproxTokenizer.count(text));
            }
        }
        if s.status() == SessionStatus::IterationLimit {
            prop_assert_eq!(s.retrieval_rounds(), rounds);
        }

        let mut buf = Vec::new();
        s.export_transcript(&mut buf).unwrap();
        let events = import_transcript::<f64, _>(buf.as_slice()).unwrap();
        prop_assert_eq!(&events[..], t);
        prop_assert_eq!(replay(&events, cfg, &ctx).unwrap(), s);
    }
}

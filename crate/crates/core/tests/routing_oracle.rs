//! Hierarchical routing against the exhaustive scorer on random catalogs.

use proptest::prelude::*;
use serde_json::Map;
use toolseek::routing::expand_k;
use toolseek::{
    brute_force_route, build_index, route, Catalog, HashEmbedder, Index, RoutingConfig, ServerRecord,
    ToolRecord, ToolRequest,
};

const WORDS: &[&str] = &[
    "read", "write", "file", "list", "weather", "city", "send", "mail", "query", "table", "image", "resize",
    "search", "web", "page", "price", "stock", "note",
];

fn text(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..=max).prop_map(|w| w.join(" "))
}

fn catalog() -> impl Strategy<Value = Catalog> {
    prop::collection::vec((text(4), text(6), prop::collection::vec(text(5), 1..=8)), 1..=20).prop_map(|servers| {
        let servers = servers
            .into_iter()
            .enumerate()
            .map(|(i, (description, summary, tools))| ServerRecord {
                name: format!("s{i}"),
                description,
                summary,
                tools: tools
                    .into_iter()
                    .enumerate()
                    .map(|(j, description)| ToolRecord {
                        name: format!("t{j}"),
                        description,
                        parameters: vec![],
                        extra: Map::new(),
                    })
                    .collect(),
                extra: Map::new(),
            })
            .collect();
        Catalog::new(servers, "prop").unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn full_shortlist_matches_exhaustive(c in catalog(), server in text(4), tool in text(5), clamp: bool) {
        let p = HashEmbedder::default();
        let idx: Index = build_index(&c, &p).unwrap();
        let req = ToolRequest::new(server, tool).unwrap();
        let oracle = brute_force_route(&req, &idx, &c, &p, clamp).unwrap();

        let n = c.total_tools();
        let mut all = RoutingConfig { server_shortlist: c.server_count(), clamp, ..Default::default() }.with_k(n);
        all.max_expanded_k = n;
        let full = route(&req, &idx, &c, &all, &p).unwrap();
        prop_assert_eq!(&full.candidates, &oracle.candidates);
        prop_assert_eq!(&full.shortlist, &oracle.shortlist);
        prop_assert_eq!(full.comparisons_made, oracle.comparisons_made);
        prop_assert_eq!(oracle.comparisons_made, 2 * c.server_count() + n);

        let cut = RoutingConfig { server_shortlist: c.server_count(), clamp, ..Default::default() };
        let top = route(&req, &idx, &c, &cut, &p).unwrap();
        prop_assert_eq!(top.candidates, expand_k(oracle.candidates.clone(), &cut));
    }

    #[test]
    fn shortlist_comparisons_and_membership(c in catalog(), server in text(4), tool in text(5), m in 1usize..8) {
        let p = HashEmbedder::default();
        let idx: Index = build_index(&c, &p).unwrap();
        let req = ToolRequest::new(server, tool).unwrap();
        let cfg = RoutingConfig { server_shortlist: m, ..Default::default() };
        let r = route(&req, &idx, &c, &cfg, &p).unwrap();
        let in_shortlist: usize = r.shortlist.iter().map(|s| c.server(s).unwrap().tools.len()).sum();
        prop_assert_eq!(r.shortlist.len(), m.min(c.server_count()));
        prop_assert_eq!(r.comparisons_made, 2 * c.server_count() + in_shortlist);
        prop_assert!(!r.candidates.is_empty() && r.candidates.len() <= cfg.max_expanded_k);
        for cand in &r.candidates {
            prop_assert!(r.shortlist.contains(&cand.server_name));
        }
        for w in r.candidates.windows(2) {
            prop_assert!(w[0].score >= w[1].score);
        }
        let oracle = brute_force_route(&req, &idx, &c, &p, false).unwrap();
        prop_assert_eq!(&r.shortlist[..], &oracle.shortlist[..r.shortlist.len()]);
    }

    #[test]
    fn routing_is_deterministic(c in catalog(), server in text(4), tool in text(5)) {
        let p = HashEmbedder::default();
        let idx: Index = build_index(&c, &p).unwrap();
        let req = ToolRequest::new(server, tool).unwrap();
        let cfg = RoutingConfig::default();
        prop_assert_eq!(route(&req, &idx, &c, &cfg, &p).unwrap(), route(&req, &idx, &c, &cfg, &p).unwrap());
    }
}

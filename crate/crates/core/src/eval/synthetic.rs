//! Seeded synthetic catalogs with distinct, uniformly sized descriptions.
//!
//! Every word has the same length and every name has a fixed width, so all
//! rendered tool schemas cost the same number of tokens. That keeps the
//! active-retrieval token cost independent of which tool is retrieved.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

use crate::catalog::{Catalog, CatalogError, ParameterSpec, ServerRecord, ToolRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub servers: usize,
    pub tools: usize,
    pub seed: u64,
    pub words_per_tool: usize,
    pub words_per_server: usize,
}

impl SyntheticSpec {
    pub fn new(servers: usize, tools: usize, seed: u64) -> Self {
        Self {
            servers,
            tools,
            seed,
            words_per_tool: 8,
            words_per_server: 6,
        }
    }
}

const WORD_LEN: usize = 7;
const VOCAB_SIZE: usize = 4096;

fn vocabulary(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut seen = HashSet::with_capacity(VOCAB_SIZE);
    let mut words = Vec::with_capacity(VOCAB_SIZE);
    while words.len() < VOCAB_SIZE {
        let w: String = (0..WORD_LEN).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

fn phrase(rng: &mut ChaCha8Rng, vocab: &[String], n: usize) -> Vec<String> {
    (0..n).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect()
}

/// Draws a phrase whose token multiset has not been used before.
fn distinct_phrase(rng: &mut ChaCha8Rng, vocab: &[String], n: usize, used: &mut HashSet<Vec<String>>) -> String {
    loop {
        let words = phrase(rng, vocab, n);
        let mut key = words.clone();
        key.sort();
        if used.insert(key) {
            return words.join(" ");
        }
    }
}

/// A catalog of `spec.servers` servers holding `spec.tools` tools in total,
/// spread as evenly as possible (the first `tools % servers` servers get
/// one extra).
pub fn synthetic_catalog(spec: &SyntheticSpec) -> Result<Catalog, CatalogError> {
    assert!(spec.servers > 0 && spec.tools >= spec.servers, "need at least one tool per server");
    assert!(spec.servers < 10_000 && spec.tools < 100_000, "names are fixed width");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocab = vocabulary(&mut rng);
    let mut used = HashSet::new();

    let base = spec.tools / spec.servers;
    let extra = spec.tools % spec.servers;
    let mut tool_no = 0usize;
    let mut servers = Vec::with_capacity(spec.servers);
    for i in 0..spec.servers {
        let description = format!("{}.", distinct_phrase(&mut rng, &vocab, spec.words_per_server, &mut used));
        let summary = format!(
            "{}. {}.",
            distinct_phrase(&mut rng, &vocab, spec.words_per_server, &mut used),
            distinct_phrase(&mut rng, &vocab, spec.words_per_server, &mut used)
        );
        let count = base + usize::from(i < extra);
        let tools = (0..count)
            .map(|_| {
                tool_no += 1;
                let target = phrase(&mut rng, &vocab, 3).join(" ");
                let limit = phrase(&mut rng, &vocab, 3).join(" ");
                ToolRecord {
                    name: format!("tool_{tool_no:05}"),
                    description: distinct_phrase(&mut rng, &vocab, spec.words_per_tool, &mut used),
                    parameters: vec![
                        ParameterSpec::parse("target", format!("(string) {target}")),
                        ParameterSpec::parse("limit", format!("(Optional, integer) {limit}")),
                    ],
                    extra: Map::new(),
                }
            })
            .collect();
        servers.push(ServerRecord {
            name: format!("server_{i:04}"),
            description,
            summary,
            tools,
            extra: Map::new(),
        });
    }
    Catalog::new(
        servers,
        format!("synthetic:{}x{}:seed={}", spec.servers, spec.tools, spec.seed),
    )
}

/// Drops `fraction` of the words of `text` (at least one word survives),
/// keeping the order of the rest.
pub fn perturb(text: &str, fraction: f64, rng: &mut impl Rng) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    let drop = ((words.len() as f64) * fraction).round() as usize;
    let drop = drop.min(words.len().saturating_sub(1));
    let mut idx: Vec<usize> = (0..words.len()).collect();
    idx.shuffle(rng);
    let mut dropped: Vec<usize> = idx.into_iter().take(drop).collect();
    dropped.sort_unstable();
    words
        .iter()
        .enumerate()
        .filter(|(i, _)| dropped.binary_search(i).is_err())
        .map(|(_, w)| *w)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog_stats, render_tool_schema};
    use crate::tokenize::{ApproxTokenizer, Tokenizer};

    #[test]
    fn shape_and_determinism() {
        let spec = SyntheticSpec::new(7, 30, 11);
        let a = synthetic_catalog(&spec).unwrap();
        assert_eq!(a.server_count(), 7);
        assert_eq!(a.total_tools(), 30);
        let s = catalog_stats(&a);
        assert_eq!((s.min, s.max), (4, 5));
        assert_eq!(a, synthetic_catalog(&spec).unwrap());
        assert_ne!(a.fingerprint(), synthetic_catalog(&SyntheticSpec::new(7, 30, 12)).unwrap().fingerprint());
    }

    #[test]
    fn descriptions_are_distinct() {
        let c = synthetic_catalog(&SyntheticSpec::new(50, 500, 3)).unwrap();
        let mut seen = HashSet::new();
        for (_, t) in c.iter_tools() {
            let mut words: Vec<_> = t.description.split(' ').collect();
            words.sort();
            assert!(seen.insert(words));
        }
    }

    #[test]
    fn schemas_cost_the_same() {
        let c = synthetic_catalog(&SyntheticSpec::new(12, 40, 5)).unwrap();
        let costs: HashSet<usize> = c
            .iter_tools()
            .map(|(s, t)| ApproxTokenizer.count(&render_tool_schema(t, s)))
            .collect();
        assert_eq!(costs.len(), 1, "{costs:?}");
    }

    #[test]
    fn perturb_drops_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let text = "a b c d e f g h i j";
        let p = perturb(text, 0.3, &mut rng);
        assert_eq!(p.split(' ').count(), 7);
        assert_eq!(perturb("solo", 0.9, &mut rng), "solo");
    }
}

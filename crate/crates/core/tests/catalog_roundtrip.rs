use std::path::PathBuf;

use toolseek::{catalog_stats, load_catalog, Catalog, CatalogError, HashEmbedder, Index};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/two_servers.json")
}

#[test]
fn fixture_loads_with_expected_shape() {
    let c = load_catalog(fixture()).unwrap();
    assert_eq!(c.server_count(), 2);
    assert_eq!(c.total_tools(), 4);
    let fs = c.server("filesystem").unwrap();
    assert_eq!(fs.tools.len(), 3);
    let days = &c.server("weather").unwrap().tools[0].parameters[1];
    assert_eq!(days.name, "days");
    assert!(days.optional);
    assert_eq!(days.type_tag, "integer");
}

#[test]
fn load_serialize_load_is_lossless() {
    let a = load_catalog(fixture()).unwrap();
    let b = Catalog::from_json_str(&a.to_json_string(), "again").unwrap();
    assert_eq!(a.servers(), b.servers());
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.to_json_value(), b.to_json_value());
    let original: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture()).unwrap()).unwrap();
    assert_eq!(a.to_json_value(), original);
}

#[test]
fn stats_of_fixture() {
    let s = catalog_stats(&load_catalog(fixture()).unwrap());
    assert_eq!((s.server_count, s.tool_count, s.min, s.max), (2, 4, 1, 3));
    assert_eq!(s.mean, 2.0);
    assert_eq!(s.median, 2.0);
    assert_eq!(s.stddev, 1.0);
    assert_eq!(s.servers_with_at_most_5_tools, 2);
}

#[test]
fn missing_file_names_path() {
    let err = load_catalog("/nonexistent/catalog.json").unwrap_err();
    assert!(matches!(err, CatalogError::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/catalog.json"));
}

#[test]
fn schema_violation_names_field_path() {
    let text = r#"[{"server_name":"a","server_description":"d","server_summary":"s",
        "tools":[{"name":"t","description":"x","parameter":{}},{"name":"u","parameter":{}}]}]"#;
    let err = Catalog::from_json_str(text, "inline").unwrap_err().to_string();
    assert!(err.contains("servers[0].tools[1].description"), "{err}");
}

#[test]
fn index_sidecar_round_trip_and_stale_detection() {
    let c = load_catalog(fixture()).unwrap();
    let p = HashEmbedder::default();
    let idx: Index = toolseek::build_index(&c, &p).unwrap();
    assert_eq!(idx.entry_count(), 2 * 2 + 4);
    let bytes = idx.to_bytes();
    let back = Index::load(bytes.as_slice(), &c).unwrap();
    assert_eq!(back, idx);

    let mut changed = c.to_json_value();
    changed[0]["tools"][0]["description"] = "Get tomorrow's weather".into();
    let changed = Catalog::from_json_str(&changed.to_string(), "changed").unwrap();
    assert!(Index::load(bytes.as_slice(), &changed).is_err());
}

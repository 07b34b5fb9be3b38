use std::path::PathBuf;

use pcflow::parse_config;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Set `PCFLOW_BLESS=1` to rewrite the snapshot after an intended change.
#[test]
fn golden_config_matches_snapshot() {
    let text = std::fs::read_to_string(data("golden.toml")).unwrap();
    let config = parse_config(&text).unwrap();
    let rendered = serde_json::to_string_pretty(&config).unwrap() + "\n";
    let snapshot = data("golden.json");
    if std::env::var_os("PCFLOW_BLESS").is_some() {
        std::fs::write(&snapshot, &rendered).unwrap();
    }
    let expected = std::fs::read_to_string(&snapshot).unwrap();
    assert_eq!(rendered, expected);
}

#[test]
fn golden_config_fields() {
    let config = parse_config(&std::fs::read_to_string(data("golden.toml")).unwrap()).unwrap();
    assert_eq!(config.band, 12);
    assert_eq!(config.initial.band(), Some(10));
    assert_eq!(config.seed, Some(11));
    assert_eq!(config.geometry.side_lengths().unwrap(), vec![6.0, 8.0]);
}

use std::collections::BTreeSet;
use std::path::Path;

use galbrun::config::RunConfig;
use serde_json::Value;

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn schema_keys(schema: &Value, def: &str) -> BTreeSet<String> {
    keys(&schema["$defs"][def]["properties"])
}

#[test]
fn schema_sections_match_config_structs() {
    let s = schema();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let run = RunConfig::load(&configs.join("flow.json")).unwrap();
    let v = serde_json::to_value(&run).unwrap();

    assert_eq!(keys(&s["properties"]), keys(&v));
    for section in ["sampling", "forms", "solve", "compare", "diagnostics"] {
        assert_eq!(schema_keys(&s, section), keys(&v[section]), "section {section}");
    }
    assert_eq!(schema_keys(&s, "model"), keys(&v["model"]));
    assert_eq!(schema_keys(&s, "mms"), keys(&v["solve"]["mms"]));
    assert_eq!(schema_keys(&s, "assembly"), keys(&v["solve"]["assembly"]));
    assert_eq!(schema_keys(&s, "rule_order"), keys(&v["forms"]["quadrature"]));
}

#[test]
fn shipped_configs_load() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["standard.json", "standard_model.json", "flow.json", "mms.json", "tabulated.json"] {
        RunConfig::load(&configs.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

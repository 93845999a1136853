#![allow(dead_code)]

use std::path::PathBuf;

use metaforge_core::{parse_template_str, Template, ValuePath};

pub const FIXTURE_TEMPLATES: [&str; 5] = ["empty", "rnaseq_assay", "investigator", "psych_ds", "kitchen_sink"];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn template(name: &str) -> Template {
    let text = std::fs::read_to_string(fixtures_dir().join(format!("templates/{name}.json"))).unwrap();
    parse_template_str(&text).unwrap()
}

pub fn instance_text(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(format!("instances/{name}.jsonld"))).unwrap()
}

pub fn p(s: &str) -> ValuePath {
    s.parse().unwrap()
}

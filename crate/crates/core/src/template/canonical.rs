use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::{Cardinality, Constraints, FieldType, Granularity, NodeKind, NumberKind, Template, TemplateNode};

impl Template {
    /// Canonical JSON form: every defaulted member made explicit, empty
    /// language maps dropped, object keys sorted (serde_json maps are
    /// ordered), children in declared order.
    pub fn to_json(&self) -> Value {
        let mut obj: Map<String, Value> = self.extras.clone().into_iter().collect();
        obj.insert("id".into(), json!(self.id));
        obj.insert("version".into(), json!(self.version));
        if !self.name.is_empty() {
            obj.insert("name".into(), json!(self.name));
        }
        if !self.description.is_empty() {
            obj.insert("description".into(), json!(self.description));
        }
        if !self.property_context.is_empty() {
            obj.insert("propertyContext".into(), json!(self.property_context));
        }
        obj.insert("children".into(), Value::Array(self.children.iter().map(node_json).collect()));
        Value::Object(obj)
    }

    /// Canonical UTF-8 bytes: compact JSON of [`Template::to_json`].
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.to_json()).expect("template JSON is always serializable")
    }
}

/// Lowercase hex SHA-256 over the canonical serialization.
pub fn template_fingerprint(t: &Template) -> String {
    hex::encode(Sha256::digest(t.canonical_bytes()))
}

fn cardinality_json(c: Cardinality) -> Value {
    match c.max {
        Some(max) => json!({"min": c.min, "max": max}),
        None => json!({"min": c.min}),
    }
}

fn node_json(n: &TemplateNode) -> Value {
    let mut obj = Map::new();
    obj.insert("key".into(), json!(n.key));
    if !n.label.is_empty() {
        obj.insert("label".into(), json!(n.label));
    }
    if !n.help.is_empty() {
        obj.insert("help".into(), json!(n.help));
    }
    obj.insert("hidden".into(), json!(n.hidden));
    obj.insert("cardinality".into(), cardinality_json(n.cardinality));
    match &n.kind {
        NodeKind::Element(children) => {
            obj.insert("kind".into(), json!("element"));
            obj.insert("children".into(), Value::Array(children.iter().map(node_json).collect()));
        }
        NodeKind::Field(f) => {
            obj.insert("kind".into(), json!("field"));
            obj.insert("fieldType".into(), json!(f.field_type));
            obj.insert("required".into(), json!(f.required));
            let constraints = constraints_json(f.field_type, &f.constraints);
            if !constraints.is_empty() {
                obj.insert("constraints".into(), Value::Object(constraints));
            }
            if let Some(d) = &f.default {
                obj.insert("default".into(), d.to_jsonld());
            }
        }
    }
    Value::Object(obj)
}

fn constraints_json(t: FieldType, c: &Constraints) -> Map<String, Value> {
    let mut m = Map::new();
    match t {
        FieldType::Text => {
            if let Some(v) = c.min_length {
                m.insert("minLength".into(), json!(v));
            }
            if let Some(v) = c.max_length {
                m.insert("maxLength".into(), json!(v));
            }
            if let Some(p) = &c.regex {
                m.insert("regex".into(), json!(p.source()));
            }
        }
        FieldType::Number => {
            let kind = match c.number_kind.unwrap_or_default() {
                NumberKind::Integer => "integer",
                NumberKind::Decimal => "decimal",
            };
            m.insert("numberKind".into(), json!(kind));
            if let Some(v) = &c.min_value {
                m.insert("minValue".into(), json!(v.to_string()));
            }
            if let Some(v) = &c.max_value {
                m.insert("maxValue".into(), json!(v.to_string()));
            }
        }
        FieldType::Temporal => {
            let g = match c.granularity.unwrap_or_default() {
                Granularity::Date => "date",
                Granularity::Datetime => "datetime",
                Granularity::Time => "time",
            };
            m.insert("granularity".into(), json!(g));
        }
        FieldType::Checkbox | FieldType::List => {
            m.insert("literals".into(), json!(c.literals));
        }
        FieldType::ControlledTerm => {
            m.insert("sources".into(), json!(c.sources));
        }
        FieldType::ExternalAuthority => {
            if let Some(a) = c.authority {
                m.insert("authority".into(), json!(a));
            }
        }
        FieldType::Boolean | FieldType::Link | FieldType::Image | FieldType::Video => {}
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{parse_template, parse_template_str};
    use proptest::prelude::*;

    const DOC: &str = r#"{"id":"https://ex.org/t/a","name":{"en":"A"},"version":"1.2.0",
        "propertyContext":{"analyte_class":"http://purl.org/x/analyte"},
        "children":[
          {"kind":"field","key":"analyte_class","fieldType":"list","required":true,
           "constraints":{"literals":["Chromatin","DNA",{"label":"Lipid","iri":"http://purl.obolibrary.org/obo/CHEBI_18059"}]}},
          {"kind":"element","key":"authors","cardinality":{"min":1},"children":[
             {"kind":"field","key":"orcid","fieldType":"external_authority","constraints":{"authority":"orcid"}}]},
          {"kind":"field","key":"n","fieldType":"number","constraints":{"minValue":0.5,"maxValue":"10"}}]}"#;

    #[test]
    fn canonical_round_trip_is_fixed_point() {
        let t = parse_template_str(DOC).unwrap();
        let again = parse_template(&t.to_json()).unwrap();
        assert_eq!(t, again);
        assert_eq!(t.canonical_bytes(), again.canonical_bytes());
        assert_eq!(template_fingerprint(&t), template_fingerprint(&again));
    }

    #[test]
    fn literal_label_change_changes_digest() {
        let t = parse_template_str(DOC).unwrap();
        let mutated = parse_template_str(&DOC.replace("\"Chromatin\"", "\"Chromatin \"")).unwrap();
        assert_ne!(template_fingerprint(&t), template_fingerprint(&mutated));
    }

    #[test]
    fn fingerprint_is_64_hex_chars() {
        let fp = template_fingerprint(&parse_template_str(DOC).unwrap());
        assert_eq!(fp.len(), 64);
        assert!(fp.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()));
    }

    /// Rebuilds a JSON value with object members inserted in a shuffled
    /// order, then re-serializes it with `preserve_order`-independent text.
    fn reordered_text(v: &Value, seed: u64) -> String {
        match v {
            Value::Object(m) => {
                let mut entries: Vec<(&String, &Value)> = m.iter().collect();
                let n = entries.len();
                if n > 1 {
                    entries.rotate_left((seed as usize) % n);
                }
                if seed % 2 == 1 {
                    entries.reverse();
                }
                let body: Vec<String> = entries
                    .iter()
                    .map(|(k, v)| format!("{}:{}", serde_json::to_string(k).unwrap(), reordered_text(v, seed.wrapping_mul(31).wrapping_add(7))))
                    .collect();
                format!("{{{}}}", body.join(","))
            }
            Value::Array(items) => {
                let body: Vec<String> = items.iter().map(|i| reordered_text(i, seed.wrapping_add(1))).collect();
                format!("[{}]", body.join(","))
            }
            other => serde_json::to_string(other).unwrap(),
        }
    }

    proptest! {
        #[test]
        fn key_order_in_raw_json_does_not_matter(seed in any::<u64>()) {
            let raw: Value = serde_json::from_str(DOC).unwrap();
            let text = reordered_text(&raw, seed);
            let t1 = parse_template_str(DOC).unwrap();
            let t2 = parse_template_str(&text).unwrap();
            prop_assert_eq!(template_fingerprint(&t1), template_fingerprint(&t2));
        }
    }
}

use serde_json::{json, Map, Value};

use super::validate::detect_source;
use super::{fresh_record, initial_count, sort_issues, validate_instance, InstanceError, IssueCode, MetadataInstance, Record, Slots, ValidationIssue};
use crate::path::ValuePath;
use crate::template::{FieldSpec, FieldType, NodeKind, Severity, Template, TemplateNode};
use crate::value::{FieldValue, RDFS_LABEL};

const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

/// Serializes an instance as a JSON-LD document. Empty values are omitted.
/// With `strict`, an instance with validation errors is refused.
pub fn serialize_jsonld(t: &Template, i: &MetadataInstance, strict: bool) -> Result<Value, InstanceError> {
    let issues = validate_instance(t, i, strict)?;
    if strict && issues.iter().any(ValidationIssue::is_error) {
        return Err(InstanceError::ValidationFailed(issues));
    }
    let mut context = Map::new();
    context.insert("rdfs".into(), json!(RDFS_NS));
    context.insert("xsd".into(), json!(XSD_NS));
    for (_, node) in t.walk() {
        context.insert(node.key.clone(), json!({"@id": t.property_iri(&node.key)}));
    }
    let mut doc = record_json(&t.children, i.root());
    doc.insert("@context".into(), Value::Object(context));
    doc.insert("@type".into(), json!(t.id));
    Ok(Value::Object(doc))
}

/// Compact text of [`serialize_jsonld`]; keys come out sorted.
pub fn to_jsonld_string(t: &Template, i: &MetadataInstance, strict: bool) -> Result<String, InstanceError> {
    Ok(serde_json::to_string_pretty(&serialize_jsonld(t, i, strict)?).expect("JSON values always serialize"))
}

fn record_json(nodes: &[TemplateNode], rec: &Record) -> Map<String, Value> {
    let mut obj = Map::new();
    for n in nodes {
        let multi = n.is_multi_valued();
        let items: Vec<Value> = match rec.get(&n.key) {
            Some(Slots::Field(vals)) => vals.iter().filter(|v| !v.is_empty()).map(FieldValue::to_jsonld).collect(),
            Some(Slots::Element(recs)) => recs
                .iter()
                .filter(|r| !r.is_blank())
                .map(|r| Value::Object(record_json(n.children(), r)))
                .collect(),
            None => Vec::new(),
        };
        if items.is_empty() {
            continue;
        }
        let v = if multi { Value::Array(items) } else { items.into_iter().next().unwrap() };
        obj.insert(n.key.clone(), v);
    }
    obj
}

/// An instance recovered from JSON-LD plus the non-fatal findings made while
/// binding the document to the template.
#[derive(Debug, Clone)]
pub struct ParsedInstance {
    pub instance: MetadataInstance,
    pub issues: Vec<ValidationIssue>,
}

pub fn parse_instance_str(t: &Template, text: &str) -> Result<ParsedInstance, InstanceError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| InstanceError::MalformedJson(e.to_string()))?;
    parse_instance(t, &doc)
}

/// Binds a JSON-LD document to the template's paths. Unknown keys become
/// UNKNOWN_FIELD warnings; nodes absent from the document get empty slots.
pub fn parse_instance(t: &Template, doc: &Value) -> Result<ParsedInstance, InstanceError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| InstanceError::MalformedJson("instance document must be a JSON object".into()))?;
    let actual = obj.get("@type").and_then(Value::as_str).unwrap_or_default();
    if actual != t.id {
        return Err(InstanceError::ContextMismatch {
            expected: t.id.clone(),
            actual: actual.to_owned(),
        });
    }
    let mut issues = Vec::new();
    let root = bind_record(&t.children, obj, &ValuePath::root(), &mut issues);
    sort_issues(&mut issues);
    Ok(ParsedInstance {
        instance: MetadataInstance::from_record(t, root),
        issues,
    })
}

fn bind_record(nodes: &[TemplateNode], obj: &Map<String, Value>, parent: &ValuePath, issues: &mut Vec<ValidationIssue>) -> Record {
    for key in obj.keys() {
        if !key.starts_with('@') && !nodes.iter().any(|n| &n.key == key) {
            issues.push(ValidationIssue::new(
                Severity::Warning,
                parent.child(key_for_path(key), None),
                IssueCode::UnknownField,
                format!("`{key}` is not part of the template"),
            ));
        }
    }
    let mut rec = fresh_record(nodes, false);
    for n in nodes {
        let Some(raw) = obj.get(&n.key) else { continue };
        let node_path = parent.child(&n.key, None);
        let multi = n.is_multi_valued();
        let mut items: Vec<&Value> = match raw {
            Value::Array(a) => a.iter().collect(),
            Value::Null => Vec::new(),
            other => vec![other],
        };
        let limit = if multi { n.cardinality.max.map(|m| m as usize) } else { Some(1) };
        if let Some(max) = limit {
            if items.len() > max {
                issues.push(
                    ValidationIssue::new(Severity::Warning, node_path.clone(), IssueCode::CardinalityOverflow, format!("{} values given, extra values dropped", items.len()))
                        .with_expected(n.cardinality.to_string(), items.len().to_string()),
                );
                items.truncate(max);
            }
        }
        let slots = match &n.kind {
            NodeKind::Field(spec) => {
                let vals: Vec<FieldValue> = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| bind_value(spec, v, &parent.child(&n.key, multi.then_some(i)), issues))
                    .collect();
                Slots::Field(pad(vals, multi, n, FieldValue::Empty))
            }
            NodeKind::Element(children) => {
                let recs: Vec<Record> = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let path = parent.child(&n.key, multi.then_some(i));
                        match v.as_object() {
                            Some(o) => bind_record(children, o, &path, issues),
                            None => {
                                issues.push(ValidationIssue::new(Severity::Error, path, IssueCode::TypeMismatch, "element value must be an object"));
                                fresh_record(children, false)
                            }
                        }
                    })
                    .collect();
                Slots::Element(pad(recs, multi, n, fresh_record(children, false)))
            }
        };
        rec.insert(n.key.clone(), slots);
    }
    rec
}

/// Single-valued nodes always hold one slot; an explicit empty array for a
/// multi-valued node stays empty.
fn pad<T: Clone>(mut items: Vec<T>, multi: bool, n: &TemplateNode, filler: T) -> Vec<T> {
    if items.is_empty() && !multi {
        items.resize(initial_count(n), filler);
    }
    items
}

/// Unknown keys may not satisfy the path grammar; such keys are reported
/// under a sanitized name.
fn key_for_path(key: &str) -> &str {
    if crate::path::valid_key(key) {
        key
    } else {
        "unknown"
    }
}

fn bind_value(spec: &FieldSpec, v: &Value, path: &ValuePath, issues: &mut Vec<ValidationIssue>) -> FieldValue {
    let mismatch = |issues: &mut Vec<ValidationIssue>, what: &str| {
        issues.push(ValidationIssue::new(Severity::Error, path.clone(), IssueCode::TypeMismatch, format!("cannot read {what} as a field value")));
        FieldValue::Empty
    };
    match v {
        Value::Null => FieldValue::Empty,
        Value::String(s) => FieldValue::literal(s.clone(), spec.literal_datatype()),
        Value::Number(n) => FieldValue::literal(n.to_string(), spec.literal_datatype()),
        Value::Bool(b) => FieldValue::literal(b.to_string(), spec.literal_datatype()),
        Value::Array(_) => mismatch(issues, "a nested array"),
        Value::Object(o) => {
            if let Some(id) = o.get("@id") {
                let Some(id) = id.as_str() else {
                    return mismatch(issues, "a non-string @id");
                };
                let label = o
                    .get(RDFS_LABEL)
                    .or_else(|| o.get(&format!("{RDFS_NS}label")))
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_owned();
                if spec.field_type == FieldType::ExternalAuthority {
                    if let Some(source) = spec.constraints.authority.or_else(|| detect_source(id)) {
                        return FieldValue::authority(source, id, label);
                    }
                }
                return FieldValue::term(id, label);
            }
            match o.get("@value") {
                Some(Value::String(s)) => FieldValue::literal(s.clone(), &datatype_of(o, spec)),
                Some(Value::Number(n)) => FieldValue::literal(n.to_string(), &datatype_of(o, spec)),
                Some(Value::Bool(b)) => FieldValue::literal(b.to_string(), &datatype_of(o, spec)),
                _ => mismatch(issues, "an object without @id or @value"),
            }
        }
    }
}

fn datatype_of(o: &Map<String, Value>, spec: &FieldSpec) -> String {
    match o.get("@type").and_then(Value::as_str) {
        Some(dt) => match dt.strip_prefix(XSD_NS) {
            Some(local) => format!("xsd:{local}"),
            None => dt.to_owned(),
        },
        None => spec.literal_datatype().to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identifier::AuthoritySource;
    use crate::instance::new_instance;
    use crate::template::parse_template_str;

    fn template() -> Template {
        parse_template_str(
            r#"{"id":"https://ex.org/t/ld","version":"1.0.0","propertyContext":{"pi":"http://schema.org/author"},"children":[
              {"kind":"field","key":"title","fieldType":"text"},
              {"kind":"field","key":"pi","fieldType":"external_authority","constraints":{"authority":"orcid"}},
              {"kind":"field","key":"flags","fieldType":"checkbox","constraints":{"literals":["a","b"]}},
              {"kind":"field","key":"done","fieldType":"boolean"},
              {"kind":"element","key":"authors","cardinality":{"min":1},"children":[
                 {"kind":"field","key":"name","fieldType":"text"}]}]}"#,
        )
        .unwrap()
    }

    fn p(s: &str) -> ValuePath {
        s.parse().unwrap()
    }

    #[test]
    fn empty_template_document() {
        let t = parse_template_str(r#"{"id":"https://ex.org/t/empty","version":"1.0.0","children":[]}"#).unwrap();
        let doc = serialize_jsonld(&t, &new_instance(&t), true).unwrap();
        assert_eq!(
            doc,
            json!({"@context":{"rdfs":RDFS_NS,"xsd":XSD_NS},"@type":"https://ex.org/t/empty"})
        );
    }

    #[test]
    fn shape_of_values() {
        let t = template();
        let orcid = FieldValue::authority(AuthoritySource::Orcid, "https://orcid.org/0000-0002-2256-2421", "Martin O'Connor");
        let i = new_instance(&t)
            .set_value(&t, &p("pi"), orcid)
            .and_then(|i| i.set_value(&t, &p("flags[0]"), FieldValue::string("a")))
            .and_then(|i| i.set_value(&t, &p("done"), FieldValue::string("false")))
            .and_then(|i| i.set_value(&t, &p("authors[0]/name"), FieldValue::string("Ada")))
            .unwrap();
        let doc = serialize_jsonld(&t, &i, true).unwrap();
        assert_eq!(doc["pi"], json!({"@id":"https://orcid.org/0000-0002-2256-2421","rdfs:label":"Martin O'Connor"}));
        assert_eq!(doc["flags"], json!([{"@value":"a","@type":"xsd:string"}]));
        assert_eq!(doc["done"], json!({"@value":"false","@type":"xsd:boolean"}));
        assert_eq!(doc["authors"], json!([{"name":{"@value":"Ada","@type":"xsd:string"}}]));
        assert!(doc.get("title").is_none());
        assert_eq!(doc["@context"]["pi"], json!({"@id":"http://schema.org/author"}));
        assert_eq!(doc["@context"]["title"], json!({"@id":"https://ex.org/t/ld#title"}));
        assert_eq!(doc["@context"]["name"], json!({"@id":"https://ex.org/t/ld#name"}));

        let back = parse_instance(&t, &doc).unwrap();
        assert!(back.issues.is_empty());
        assert_eq!(back.instance.normalized(&t), i.normalized(&t));
    }

    #[test]
    fn new_instance_round_trips_exactly() {
        let t = template();
        let i = new_instance(&t);
        let doc = serialize_jsonld(&t, &i, false).unwrap();
        assert_eq!(parse_instance(&t, &doc).unwrap().instance.root(), i.root());
    }

    #[test]
    fn unknown_keys_warn() {
        let t = template();
        let mut doc = serialize_jsonld(&t, &new_instance(&t), false).unwrap();
        doc["frobnicate"] = json!(1);
        let parsed = parse_instance(&t, &doc).unwrap();
        assert_eq!(parsed.issues.len(), 1);
        assert_eq!(parsed.issues[0].code, IssueCode::UnknownField);
        assert_eq!(parsed.issues[0].path.to_string(), "frobnicate");
    }

    #[test]
    fn wrong_type_is_context_mismatch() {
        let t = template();
        let doc = json!({"@type":"https://ex.org/t/other"});
        assert!(matches!(parse_instance(&t, &doc), Err(InstanceError::ContextMismatch { .. })));
        assert!(matches!(parse_instance_str(&t, "{nope"), Err(InstanceError::MalformedJson(_))));
    }

    #[test]
    fn strict_serialization_refuses_errors() {
        let t = template();
        let i = new_instance(&t).set_value(&t, &p("flags[0]"), FieldValue::string("zzz")).unwrap();
        assert!(matches!(serialize_jsonld(&t, &i, true), Err(InstanceError::ValidationFailed(_))));
        assert!(serialize_jsonld(&t, &i, false).is_ok());
    }

    #[test]
    fn expanded_datatypes_compact() {
        let t = template();
        let doc = json!({"@type":"https://ex.org/t/ld","done":{"@value":true,"@type":"http://www.w3.org/2001/XMLSchema#boolean"}});
        let i = parse_instance(&t, &doc).unwrap().instance;
        assert_eq!(i.get(&t, &p("done")), Some(&FieldValue::literal("true", "xsd:boolean")));
    }
}

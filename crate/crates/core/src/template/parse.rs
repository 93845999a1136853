use std::collections::{BTreeMap, HashSet};

use serde_json::{Map, Value};

use super::{
    Cardinality, Constraints, FieldSpec, FieldType, Granularity, LanguageMap, LiteralOption, NodeKind,
    NumberKind, Pattern, Template, TemplateError, TemplateNode, TermSourceSpec,
};
use crate::decimal::Decimal;
use crate::identifier::AuthoritySource;
use crate::value::FieldValue;

const TOP_LEVEL_KEYS: &[&str] = &["id", "name", "description", "version", "propertyContext", "children"];

/// Parses a template document, rejecting sibling key collisions.
pub fn parse_template(doc: &Value) -> Result<Template, TemplateError> {
    let t = parse_template_lenient(doc)?;
    if let Some(path) = first_duplicate(&t.children, "") {
        return Err(TemplateError::DuplicateKey { path });
    }
    Ok(t)
}

/// Parses template JSON text; see [`parse_template`].
pub fn parse_template_str(text: &str) -> Result<Template, TemplateError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| TemplateError::MalformedJson(e.to_string()))?;
    parse_template(&doc)
}

/// Structural parse only. Sibling key collisions are kept so that
/// [`super::validate_template`] can report them.
pub fn parse_template_lenient(doc: &Value) -> Result<Template, TemplateError> {
    let obj = doc.as_object().ok_or_else(|| violation("", "template must be a JSON object"))?;
    let id = required_str(obj, "id", "")?;
    let version = required_str(obj, "version", "")?;
    let name = opt_language_map(obj, "name", "")?;
    let description = opt_language_map(obj, "description", "")?;

    let mut property_context = BTreeMap::new();
    if let Some(ctx) = obj.get("propertyContext") {
        let ctx = ctx
            .as_object()
            .ok_or_else(|| violation("", "`propertyContext` must be an object"))?;
        for (k, v) in ctx {
            let iri = v
                .as_str()
                .ok_or_else(|| violation("", format!("propertyContext entry `{k}` must be a string")))?;
            property_context.insert(k.clone(), iri.to_owned());
        }
    }

    let children = match obj.get("children") {
        Some(Value::Array(items)) => parse_nodes(items, "")?,
        Some(_) => return Err(violation("", "`children` must be an array")),
        None => return Err(violation("", "missing `children`")),
    };

    let extras = obj
        .iter()
        .filter(|(k, _)| !TOP_LEVEL_KEYS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();

    Ok(Template {
        id,
        name,
        description,
        version,
        property_context,
        children,
        extras,
    })
}

fn violation(path: &str, message: impl Into<String>) -> TemplateError {
    TemplateError::SchemaViolation {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_owned()
    } else {
        format!("{parent}/{key}")
    }
}

fn first_duplicate(nodes: &[TemplateNode], parent: &str) -> Option<String> {
    let mut seen = HashSet::new();
    for n in nodes {
        let path = join(parent, &n.key);
        if !seen.insert(n.key.as_str()) {
            return Some(path);
        }
        if let Some(p) = first_duplicate(n.children(), &path) {
            return Some(p);
        }
    }
    None
}

fn required_str(obj: &Map<String, Value>, key: &str, path: &str) -> Result<String, TemplateError> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(violation(path, format!("`{key}` must be a string"))),
        None => Err(violation(path, format!("missing `{key}`"))),
    }
}

fn opt_bool(obj: &Map<String, Value>, key: &str, path: &str) -> Result<bool, TemplateError> {
    match obj.get(key) {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(violation(path, format!("`{key}` must be a boolean"))),
    }
}

fn opt_language_map(obj: &Map<String, Value>, key: &str, path: &str) -> Result<LanguageMap, TemplateError> {
    let Some(v) = obj.get(key) else {
        return Ok(LanguageMap::new());
    };
    let map = v
        .as_object()
        .ok_or_else(|| violation(path, format!("`{key}` must be a language map object")))?;
    map.iter()
        .map(|(tag, text)| match text {
            Value::String(s) => Ok((tag.clone(), s.clone())),
            _ => Err(violation(path, format!("`{key}.{tag}` must be a string"))),
        })
        .collect()
}

fn parse_nodes(items: &[Value], parent: &str) -> Result<Vec<TemplateNode>, TemplateError> {
    items
        .iter()
        .enumerate()
        .map(|(i, item)| parse_node(item, parent, i))
        .collect()
}

const FIELD_KEYS: &[&str] = &[
    "kind", "key", "label", "help", "cardinality", "hidden", "required", "fieldType", "constraints", "default",
];
const ELEMENT_KEYS: &[&str] = &["kind", "key", "label", "help", "cardinality", "hidden", "children"];
const CONDITION_KEYS: &[&str] = &["visibleIf", "visibility", "condition", "conditions", "showIf"];

fn parse_node(item: &Value, parent: &str, index: usize) -> Result<TemplateNode, TemplateError> {
    let fallback = format!("{}children[{index}]", if parent.is_empty() { String::new() } else { format!("{parent}/") });
    let obj = item
        .as_object()
        .ok_or_else(|| violation(&fallback, "node must be a JSON object"))?;
    let key = required_str(obj, "key", &fallback)?;
    let path = join(parent, &key);
    let kind = required_str(obj, "kind", &path)?;
    let allowed = match kind.as_str() {
        "field" => FIELD_KEYS,
        "element" => ELEMENT_KEYS,
        other => return Err(violation(&path, format!("unknown node kind `{other}`"))),
    };
    if let Some(extra) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        if CONDITION_KEYS.contains(&extra.as_str()) {
            return Err(violation(&path, format!("`{extra}`: visibility conditions are unsupported, only a static `hidden` flag")));
        }
        return Err(violation(&path, format!("`{extra}` is not allowed on a {kind} node")));
    }

    let label = opt_language_map(obj, "label", &path)?;
    let help = opt_language_map(obj, "help", &path)?;
    let hidden = opt_bool(obj, "hidden", &path)?;

    let (kind, cardinality) = if kind == "field" {
        let type_name = required_str(obj, "fieldType", &path)?;
        let field_type: FieldType = type_name
            .parse()
            .map_err(|_| violation(&path, format!("unknown fieldType `{type_name}`")))?;
        let required = opt_bool(obj, "required", &path)?;
        let constraints = parse_constraints(obj.get("constraints"), field_type, &path)?;
        let default_max = if field_type == FieldType::Checkbox { None } else { Some(1) };
        let cardinality = parse_cardinality(obj.get("cardinality"), &path, u32::from(required), default_max)?;
        let mut spec = FieldSpec {
            field_type,
            required,
            default: None,
            constraints,
        };
        spec.default = match obj.get("default") {
            None | Some(Value::Null) => None,
            Some(v) => Some(parse_default(v, &spec, &path)?),
        };
        (NodeKind::Field(Box::new(spec)), cardinality)
    } else {
        let children = match obj.get("children") {
            Some(Value::Array(items)) => parse_nodes(items, &path)?,
            Some(_) => return Err(violation(&path, "`children` must be an array")),
            None => Vec::new(),
        };
        let cardinality = parse_cardinality(obj.get("cardinality"), &path, 1, Some(1))?;
        (NodeKind::Element(children), cardinality)
    };

    Ok(TemplateNode {
        key,
        label,
        help,
        cardinality,
        hidden,
        kind,
    })
}

fn as_u32(v: &Value, path: &str, what: &str) -> Result<u32, TemplateError> {
    v.as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| violation(path, format!("cardinality `{what}` must be a non-negative integer")))
}

fn parse_cardinality(
    v: Option<&Value>,
    path: &str,
    default_min: u32,
    default_max: Option<u32>,
) -> Result<Cardinality, TemplateError> {
    let Some(v) = v else {
        return Ok(Cardinality {
            min: default_min,
            max: default_max,
        });
    };
    let obj = v
        .as_object()
        .ok_or_else(|| violation(path, "`cardinality` must be an object"))?;
    if let Some(extra) = obj.keys().find(|k| *k != "min" && *k != "max") {
        return Err(violation(path, format!("unknown cardinality key `{extra}`")));
    }
    let min = match obj.get("min") {
        Some(m) => as_u32(m, path, "min")?,
        None => default_min,
    };
    let max = match obj.get("max") {
        None | Some(Value::Null) => None,
        Some(m) => Some(as_u32(m, path, "max")?),
    };
    Ok(Cardinality { min, max })
}

fn allowed_constraint_keys(t: FieldType) -> &'static [&'static str] {
    match t {
        FieldType::Text => &["minLength", "maxLength", "regex"],
        FieldType::Number => &["numberKind", "minValue", "maxValue"],
        FieldType::Temporal => &["granularity"],
        FieldType::Checkbox | FieldType::List => &["literals"],
        FieldType::ControlledTerm => &["sources"],
        FieldType::ExternalAuthority => &["authority"],
        FieldType::Boolean | FieldType::Link | FieldType::Image | FieldType::Video => &[],
    }
}

fn parse_constraints(v: Option<&Value>, t: FieldType, path: &str) -> Result<Constraints, TemplateError> {
    let empty = Map::new();
    let obj = match v {
        None | Some(Value::Null) => &empty,
        Some(Value::Object(o)) => o,
        Some(_) => return Err(violation(path, "`constraints` must be an object")),
    };
    let allowed = allowed_constraint_keys(t);
    if let Some(extra) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(violation(path, format!("constraint `{extra}` does not apply to {t} fields")));
    }

    let mut c = Constraints::default();
    let length = |key: &str| -> Result<Option<u64>, TemplateError> {
        obj.get(key)
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| violation(path, format!("`{key}` must be a non-negative integer")))
            })
            .transpose()
    };
    let decimal = |key: &str| -> Result<Option<Decimal>, TemplateError> {
        obj.get(key)
            .map(|v| {
                let text = match v {
                    Value::Number(n) => n.to_string(),
                    Value::String(s) => s.clone(),
                    _ => String::new(),
                };
                text.parse::<Decimal>()
                    .map_err(|_| violation(path, format!("`{key}` must be a decimal number")))
            })
            .transpose()
    };
    let enum_value = |key: &str| -> Option<Result<String, TemplateError>> {
        obj.get(key).map(|v| {
            v.as_str()
                .map(str::to_owned)
                .ok_or_else(|| violation(path, format!("`{key}` must be a string")))
        })
    };

    match t {
        FieldType::Text => {
            c.min_length = length("minLength")?;
            c.max_length = length("maxLength")?;
            if let Some(r) = enum_value("regex") {
                c.regex = Some(Pattern::new(r?));
            }
        }
        FieldType::Number => {
            c.number_kind = Some(match enum_value("numberKind").transpose()?.as_deref() {
                None | Some("decimal") => NumberKind::Decimal,
                Some("integer") => NumberKind::Integer,
                Some(other) => return Err(violation(path, format!("unknown numberKind `{other}`"))),
            });
            c.min_value = decimal("minValue")?;
            c.max_value = decimal("maxValue")?;
        }
        FieldType::Temporal => {
            c.granularity = Some(match enum_value("granularity").transpose()?.as_deref() {
                None | Some("date") => Granularity::Date,
                Some("datetime") => Granularity::Datetime,
                Some("time") => Granularity::Time,
                Some(other) => return Err(violation(path, format!("unknown granularity `{other}`"))),
            });
        }
        FieldType::Checkbox | FieldType::List => {
            c.literals = match obj.get("literals") {
                None => Vec::new(),
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|item| parse_literal(item, path))
                    .collect::<Result<_, _>>()?,
                Some(_) => return Err(violation(path, "`literals` must be an array")),
            };
        }
        FieldType::ControlledTerm => {
            c.sources = match obj.get("sources") {
                None => Vec::new(),
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|item| parse_source(item, path))
                    .collect::<Result<_, _>>()?,
                Some(_) => return Err(violation(path, "`sources` must be an array")),
            };
        }
        FieldType::ExternalAuthority => {
            let name = enum_value("authority")
                .transpose()?
                .ok_or_else(|| violation(path, "external_authority fields need exactly one `authority`"))?;
            c.authority = Some(
                name.parse::<AuthoritySource>()
                    .map_err(|_| violation(path, format!("unknown authority `{name}`")))?,
            );
        }
        FieldType::Boolean | FieldType::Link | FieldType::Image | FieldType::Video => {}
    }
    Ok(c)
}

fn parse_literal(item: &Value, path: &str) -> Result<LiteralOption, TemplateError> {
    match item {
        Value::String(s) => Ok(LiteralOption {
            label: s.clone(),
            iri: None,
        }),
        Value::Object(o) => {
            let label = required_str(o, "label", path)?;
            let iri = match o.get("iri") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(_) => return Err(violation(path, "literal `iri` must be a string")),
            };
            Ok(LiteralOption { label, iri })
        }
        _ => Err(violation(path, "literal must be a string or {label, iri}")),
    }
}

fn parse_source(item: &Value, path: &str) -> Result<TermSourceSpec, TemplateError> {
    let o = item
        .as_object()
        .ok_or_else(|| violation(path, "term source must be an object"))?;
    let acronym = required_str(o, "acronym", path)?;
    match required_str(o, "sourceType", path)?.as_str() {
        "ontology" => Ok(TermSourceSpec::Ontology { acronym }),
        "branch" => Ok(TermSourceSpec::Branch {
            acronym,
            root_iri: required_str(o, "rootIri", path)?,
        }),
        "value_set" => Ok(TermSourceSpec::ValueSet {
            acronym,
            value_set_id: required_str(o, "valueSetId", path)?,
        }),
        other => Err(violation(path, format!("unknown sourceType `{other}`"))),
    }
}

fn parse_default(v: &Value, spec: &FieldSpec, path: &str) -> Result<FieldValue, TemplateError> {
    let datatype = spec.literal_datatype();
    match v {
        Value::String(s) => Ok(FieldValue::literal(s.clone(), datatype)),
        Value::Number(n) => Ok(FieldValue::literal(n.to_string(), datatype)),
        Value::Bool(b) => Ok(FieldValue::literal(b.to_string(), datatype)),
        Value::Object(o) => {
            if let Some(id) = o.get("@id").and_then(Value::as_str) {
                let label = o.get("rdfs:label").and_then(Value::as_str).unwrap_or_default();
                return Ok(match spec.constraints.authority {
                    Some(source) => FieldValue::authority(source, id, label),
                    None => FieldValue::term(id, label),
                });
            }
            let value = o
                .get("@value")
                .and_then(Value::as_str)
                .ok_or_else(|| violation(path, "`default` object needs `@value` or `@id`"))?;
            let dt = o.get("@type").and_then(Value::as_str).unwrap_or(datatype);
            Ok(FieldValue::literal(value, dt))
        }
        _ => Err(violation(path, "unsupported `default` value")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::TemplateError;
    use serde_json::json;

    #[test]
    fn visibility_conditions_are_rejected() {
        let doc = json!({"id":"https://ex.org/t/c","name":{"en":"C"},"version":"1.0.0","children":[
            {"kind":"field","key":"a","label":{"en":"A"},"fieldType":"text","visibleIf":"b == 1"}
        ]});
        let err = parse_template(&doc).unwrap_err().to_string();
        assert!(err.contains("visibility conditions are unsupported"), "{err}");
    }

    #[test]
    fn empty_template() {
        let t = parse_template(&json!({"id":"https://ex.org/t/empty","name":{"en":"Empty"},"version":"1.0.0","children":[]})).unwrap();
        assert!(t.children.is_empty());
        assert_eq!(t.name.get("en"), Some("Empty"));
    }

    #[test]
    fn list_literals_keep_order() {
        let labels = ["Chromatin", "Collagen", "DNA", "DNA + RNA", "Endogenous fluorophore", "Fluorochrome", "Lipid"];
        let t = parse_template(&json!({
            "id":"https://ex.org/t/a","version":"1.0.0","children":[
                {"kind":"field","key":"analyte_class","fieldType":"list","required":true,
                 "constraints":{"literals": labels}}]}))
        .unwrap();
        let f = t.children[0].field().unwrap();
        assert_eq!(f.field_type, FieldType::List);
        assert!(f.required);
        let got: Vec<&str> = f.constraints.literals.iter().map(|l| l.label.as_str()).collect();
        assert_eq!(got, labels);
    }

    #[test]
    fn omitted_max_is_unbounded() {
        let t = parse_template(&json!({
            "id":"https://ex.org/t/a","version":"1.0.0","children":[
                {"kind":"field","key":"variable_measured","fieldType":"text","cardinality":{"min":1}}]}))
        .unwrap();
        assert_eq!(t.children[0].cardinality, Cardinality { min: 1, max: None });
    }

    #[test]
    fn omitted_cardinality_follows_required() {
        let t = parse_template(&json!({
            "id":"https://ex.org/t/a","version":"1.0.0","children":[
                {"kind":"field","key":"a","fieldType":"text","required":true},
                {"kind":"field","key":"b","fieldType":"text"}]}))
        .unwrap();
        assert_eq!(t.children[0].cardinality, Cardinality::ONE);
        assert_eq!(t.children[1].cardinality, Cardinality::OPTIONAL);
    }

    #[test]
    fn unknown_top_level_keys_are_preserved() {
        let t = parse_template(&json!({"id":"https://ex.org/t/a","version":"1.0.0","children":[],"x-owner":{"team":"curation"}})).unwrap();
        assert_eq!(t.extras.get("x-owner"), Some(&json!({"team":"curation"})));
    }

    #[test]
    fn structural_errors() {
        let cases = [
            json!([]),
            json!({"version":"1.0.0","children":[]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"key":"a","fieldType":"text"}]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"kind":"field","fieldType":"text"}]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"kind":"field","key":"a"}]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"kind":"field","key":"a","fieldType":"text","cardinality":{"min":-1}}]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"kind":"field","key":"a","fieldType":"text","constraints":{"literals":[]}}]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"kind":"field","key":"a","fieldType":"external_authority"}]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"kind":"element","key":"a","fieldType":"text"}]}),
            json!({"id":"https://ex.org/t","version":"1.0.0","children":[{"kind":"field","key":"a","fieldType":"controlled_term","constraints":{"sources":[{"sourceType":"branch","acronym":"OBI"}]}}]}),
        ];
        for doc in cases {
            assert!(
                matches!(parse_template(&doc), Err(TemplateError::SchemaViolation { .. })),
                "{doc}"
            );
        }
    }

    #[test]
    fn duplicate_siblings_rejected_by_strict_parse_only() {
        let doc = json!({"id":"https://ex.org/t","version":"1.0.0","children":[
            {"kind":"field","key":"name","fieldType":"text"},
            {"kind":"field","key":"name","fieldType":"text"}]});
        assert_eq!(
            parse_template(&doc),
            Err(TemplateError::DuplicateKey { path: "name".into() })
        );
        assert_eq!(parse_template_lenient(&doc).unwrap().children.len(), 2);
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(parse_template_str("{not json"), Err(TemplateError::MalformedJson(_))));
    }

    #[test]
    fn defaults_become_typed_literals() {
        let t = parse_template(&json!({"id":"https://ex.org/t","version":"1.0.0","children":[
            {"kind":"field","key":"dataset_type","fieldType":"text","default":"RNAseq"},
            {"kind":"field","key":"n","fieldType":"number","constraints":{"numberKind":"integer"},"default":3}]}))
        .unwrap();
        assert_eq!(t.children[0].field().unwrap().default, Some(FieldValue::string("RNAseq")));
        assert_eq!(
            t.children[1].field().unwrap().default,
            Some(FieldValue::literal("3", "xsd:integer"))
        );
    }
}

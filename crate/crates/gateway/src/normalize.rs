use std::collections::BTreeMap;

use metaforge_core::identifier::AuthoritySource;
use serde_json::{Map, Value};

use crate::{AuthoritySuggestion, GatewayError};

/// Maps a raw search payload to suggestions, keeping upstream order.
///
/// Missing required keys are a shape error. Items whose identifier does not
/// canonicalize, or whose label is blank, are dropped.
pub fn normalize_response(source: AuthoritySource, raw: &Value) -> Result<Vec<AuthoritySuggestion>, GatewayError> {
    let items: &[Value] = match source {
        AuthoritySource::Orcid => match object(raw)?.get("expanded-result") {
            Some(Value::Null) => &[],
            Some(Value::Array(a)) => a,
            _ => return Err(shape("ORCID payload lacks an `expanded-result` array")),
        },
        AuthoritySource::Ror => match object(raw)?.get("items") {
            Some(Value::Array(a)) => a,
            _ => return Err(shape("ROR payload lacks an `items` array")),
        },
        AuthoritySource::Comptox => raw.as_array().ok_or_else(|| shape("CompTox payload is not an array"))?,
    };
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        if let Some(s) = normalize_item(source, object(item)?)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// Like [`normalize_response`] but also accepts the single-record payloads
/// returned by ROR and CompTox lookups.
pub fn normalize_record(source: AuthoritySource, raw: &Value) -> Result<Vec<AuthoritySuggestion>, GatewayError> {
    match (source, raw) {
        (AuthoritySource::Ror, Value::Object(o)) if !o.contains_key("items") => Ok(normalize_item(source, o)?.into_iter().collect()),
        (AuthoritySource::Comptox, Value::Object(o)) => Ok(normalize_item(source, o)?.into_iter().collect()),
        _ => normalize_response(source, raw),
    }
}

fn normalize_item(source: AuthoritySource, o: &Map<String, Value>) -> Result<Option<AuthoritySuggestion>, GatewayError> {
    let mut detail = BTreeMap::new();
    let (raw_id, label) = match source {
        AuthoritySource::Orcid => {
            let id = required(o, "orcid-id")?;
            let given = text(o, "given-names");
            let family = text(o, "family-names");
            let mut label = format!("{given} {family}").trim().to_owned();
            if label.is_empty() {
                label = text(o, "credit-name").to_owned();
            }
            let inst = strings(o.get("institution-name"));
            if !inst.is_empty() {
                detail.insert("institution".into(), inst.join("; "));
            }
            (id, label)
        }
        AuthoritySource::Ror => {
            let id = required(o, "id")?;
            let label = ror_label(o);
            let country = o
                .get("locations")
                .and_then(|l| l.get(0))
                .and_then(|l| l.pointer("/geonames_details/country_name"))
                .or_else(|| o.get("country").and_then(|c| c.get("country_name")))
                .and_then(Value::as_str);
            if let Some(c) = country {
                detail.insert("country".into(), c.to_owned());
            }
            let aliases = ror_names(o, "alias");
            if !aliases.is_empty() {
                detail.insert("aliases".into(), aliases.join("; "));
            }
            let acronyms = ror_names(o, "acronym");
            if !acronyms.is_empty() {
                detail.insert("acronyms".into(), acronyms.join("; "));
            }
            (id, label)
        }
        AuthoritySource::Comptox => {
            let id = required(o, "dtxsid")?;
            if let Some(cas) = o.get("casrn").and_then(Value::as_str) {
                detail.insert("casrn".into(), cas.to_owned());
            }
            (id, text(o, "preferredName").to_owned())
        }
    };
    let label = label.trim().to_owned();
    match source.canonicalize(raw_id) {
        Ok(id) if !label.is_empty() => Ok(Some(AuthoritySuggestion { source, id, label, detail })),
        _ => {
            tracing::debug!(%source, raw_id, "dropping upstream item");
            Ok(None)
        }
    }
}

fn ror_label(o: &Map<String, Value>) -> String {
    if let Some(n) = o.get("name").and_then(Value::as_str) {
        return n.to_owned();
    }
    let names = o.get("names").and_then(Value::as_array).map(Vec::as_slice).unwrap_or_default();
    let has = |n: &Value, ty: &str| n.get("types").and_then(Value::as_array).is_some_and(|t| t.iter().any(|x| x == ty));
    names
        .iter()
        .find(|n| has(n, "ror_display"))
        .or_else(|| names.iter().find(|n| has(n, "label")))
        .or_else(|| names.first())
        .and_then(|n| n.get("value"))
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_owned()
}

fn ror_names(o: &Map<String, Value>, ty: &str) -> Vec<String> {
    let v1_key = match ty {
        "alias" => "aliases",
        _ => "acronyms",
    };
    if let Some(v) = o.get(v1_key) {
        return strings(Some(v));
    }
    o.get("names")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter(|n| n.get("types").and_then(Value::as_array).is_some_and(|t| t.iter().any(|x| x == ty)))
        .filter_map(|n| n.get("value").and_then(Value::as_str).map(str::to_owned))
        .collect()
}

fn object(v: &Value) -> Result<&Map<String, Value>, GatewayError> {
    v.as_object().ok_or_else(|| shape("expected a JSON object"))
}

fn required<'a>(o: &'a Map<String, Value>, key: &str) -> Result<&'a str, GatewayError> {
    o.get(key).and_then(Value::as_str).ok_or_else(|| shape(&format!("item lacks `{key}`")))
}

fn text<'a>(o: &'a Map<String, Value>, key: &str) -> &'a str {
    o.get(key).and_then(Value::as_str).unwrap_or_default().trim()
}

fn strings(v: Option<&Value>) -> Vec<String> {
    match v {
        Some(Value::String(s)) => vec![s.clone()],
        Some(Value::Array(a)) => a.iter().filter_map(Value::as_str).map(str::to_owned).collect(),
        _ => Vec::new(),
    }
}

fn shape(msg: &str) -> GatewayError {
    GatewayError::UpstreamShape(msg.to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ror_v1_shape() {
        let raw = json!({"items": [{"id": "https://ror.org/00f54p054", "name": "Stanford University",
            "country": {"country_name": "United States"}, "aliases": [], "acronyms": ["SU"]}]});
        let out = normalize_response(AuthoritySource::Ror, &raw).unwrap();
        assert_eq!(out[0].label, "Stanford University");
        assert_eq!(out[0].detail["country"], "United States");
        assert_eq!(out[0].detail["acronyms"], "SU");
    }

    #[test]
    fn drops_bad_ids_and_blank_labels() {
        let raw = json!({"expanded-result": [
            {"orcid-id": "0000-0002-2256-2420", "given-names": "A", "family-names": "B"},
            {"orcid-id": "0000-0002-2256-2421", "given-names": " ", "family-names": ""},
            {"orcid-id": "0000-0002-2256-2421", "given-names": "Martin", "family-names": "O'Connor"}]});
        let out = normalize_response(AuthoritySource::Orcid, &raw).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "https://orcid.org/0000-0002-2256-2421");
    }

    #[test]
    fn comptox_ids_become_dashboard_iris() {
        let raw = json!([{"dtxsid": "DTXSID7020182", "preferredName": "Bisphenol A"}]);
        let out = normalize_response(AuthoritySource::Comptox, &raw).unwrap();
        assert_eq!(out[0].id, "https://comptox.epa.gov/dashboard/chemical/details/DTXSID7020182");
    }

    #[test]
    fn wrong_container_is_shape_error() {
        assert_eq!(normalize_response(AuthoritySource::Comptox, &json!({})).unwrap_err().code(), "UPSTREAM_SHAPE_ERROR");
        assert_eq!(normalize_response(AuthoritySource::Ror, &json!([])).unwrap_err().code(), "UPSTREAM_SHAPE_ERROR");
        assert!(normalize_response(AuthoritySource::Orcid, &json!({"expanded-result": null})).unwrap().is_empty());
    }
}

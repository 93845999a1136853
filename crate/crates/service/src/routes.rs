use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use metaforge_core::instance::sort_issues;
use metaforge_core::template::TermSourceSpec;
use metaforge_core::{
    generate_report, language_chain, new_instance, parse_instance, parse_template, render_plan as plan, serialize_jsonld,
    template_fingerprint, validate_instance, validate_template, InstanceError, ParsedInstance, RenderMode, Severity, Template,
    ValidationIssue,
};
use serde_json::{json, Value};

use crate::error::{schema_violation, validation_failed, ApiError};
use crate::registry::Registered;
use crate::AppState;

type Shared = State<Arc<AppState>>;
type ApiResult<T = Response> = Result<T, ApiError>;

pub async fn healthz() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

pub async fn not_found() -> ApiError {
    ApiError::new("NOT_FOUND", "no such route")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new("METHOD_NOT_ALLOWED", "method not allowed on this route")
}

fn parse_query(raw: Option<String>) -> HashMap<String, String> {
    form_urlencoded::parse(raw.unwrap_or_default().as_bytes()).into_owned().collect()
}

fn flag(params: &HashMap<String, String>, name: &str) -> bool {
    params.get(name).is_some_and(|v| matches!(v.as_str(), "1" | "true" | "yes"))
}

fn json_body(body: &Bytes) -> ApiResult<Value> {
    serde_json::from_slice(body).map_err(|e| ApiError::new("MALFORMED_JSON", format!("request body is not JSON: {e}")))
}

fn template(state: &AppState, id: &str) -> ApiResult<Arc<crate::RegistryEntry>> {
    state
        .registry
        .get(id)
        .ok_or_else(|| ApiError::new("UNKNOWN_TEMPLATE", format!("no template registered as `{id}`")))
}

/// Parse issues and validation issues, merged and ordered.
fn parse_and_validate(t: &Template, doc: &Value, strict: bool) -> ApiResult<(ParsedInstance, Vec<ValidationIssue>)> {
    let parsed = parse_instance(t, doc)?;
    let mut issues = parsed.issues.clone();
    issues.extend(validate_instance(t, &parsed.instance, strict)?);
    sort_issues(&mut issues);
    Ok((parsed, issues))
}

pub async fn list_templates(State(state): Shared) -> Json<Value> {
    let items: Vec<Value> = state.registry.list().iter().map(|e| e.summary()).collect();
    Json(json!({ "templates": items }))
}

pub async fn register_template(State(state): Shared, RawQuery(query): RawQuery, body: Bytes) -> ApiResult {
    let params = parse_query(query);
    let doc = json_body(&body)?;
    let t = parse_template(&doc)?;
    let issues = validate_template(&t);
    if issues.iter().any(|i| i.severity == Severity::Error) {
        return Err(schema_violation(&issues));
    }
    let outcome = state.registry.register(t, flag(&params, "force")).map_err(internal)?;
    Ok(match outcome {
        Registered::Created(e) => (StatusCode::CREATED, Json(json!({"id": e.id, "fingerprint": e.fingerprint}))).into_response(),
        Registered::Existing(e) => (StatusCode::OK, Json(json!({"id": e.id, "fingerprint": e.fingerprint}))).into_response(),
        Registered::Conflict(e) => {
            return Err(ApiError::new(
                "ID_CONFLICT",
                format!("`{}` is already registered with fingerprint {}; pass force=1 to replace", e.id, e.fingerprint),
            ))
        }
    })
}

pub async fn get_template(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(template(&state, &id)?.to_json()))
}

pub async fn render_plan(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req = if body.iter().all(u8::is_ascii_whitespace) { json!({}) } else { json_body(&body)? };
    let Some(req) = req.as_object() else {
        return Err(ApiError::new("MALFORMED_JSON", "request body must be a JSON object"));
    };
    let mode: RenderMode = match req.get("mode") {
        None | Some(Value::Null) => RenderMode::Entry,
        Some(Value::String(m)) => m.parse()?,
        Some(other) => return Err(InstanceError::BadMode(other.to_string()).into()),
    };
    let language = req.get("language").and_then(Value::as_str).unwrap_or("en");
    let inline;
    let registered;
    let t: &Template = match req.get("template") {
        Some(doc) if !doc.is_null() => {
            tracing::warn!(template_id = %id, "inline template supplied; it takes precedence over the registry");
            inline = parse_template(doc)?;
            &inline
        }
        _ => {
            registered = template(&state, &id)?;
            &registered.template
        }
    };
    let (instance, parse_issues) = match req.get("instance") {
        Some(doc) if !doc.is_null() => {
            let p = parse_instance(t, doc)?;
            (p.instance, p.issues)
        }
        _ => (new_instance(t), Vec::new()),
    };
    let mut rp = plan(t, &instance, mode, &language_chain(language))?;
    rp.issues.extend(parse_issues);
    sort_issues(&mut rp.issues);
    Ok(Json(rp.to_json()))
}

pub async fn validate(State(state): Shared, Path(id): Path<String>, RawQuery(query): RawQuery, body: Bytes) -> ApiResult<Json<Value>> {
    let params = parse_query(query);
    let entry = template(&state, &id)?;
    let doc = json_body(&body)?;
    let (_, issues) = parse_and_validate(&entry.template, &doc, flag(&params, "strict"))?;
    Ok(Json(json!({ "issues": issues })))
}

pub async fn quality_report(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let entry = template(&state, &id)?;
    let doc = json_body(&body)?;
    let parsed = parse_instance(&entry.template, &doc)?;
    let report = generate_report(&entry.template, &parsed.instance)?;
    Ok(Json(serde_json::to_value(report).expect("reports serialize")))
}

/// Canonical JSON-LD for a submitted document; with `strict=1` only when it
/// validates without errors.
pub async fn serialize(State(state): Shared, Path(id): Path<String>, RawQuery(query): RawQuery, body: Bytes) -> ApiResult<Json<Value>> {
    let params = parse_query(query);
    let entry = template(&state, &id)?;
    let doc = json_body(&body)?;
    let strict = flag(&params, "strict");
    let (parsed, issues) = parse_and_validate(&entry.template, &doc, strict)?;
    if strict && issues.iter().any(ValidationIssue::is_error) {
        return Err(validation_failed(&issues));
    }
    Ok(Json(serialize_jsonld(&entry.template, &parsed.instance, false)?))
}

pub async fn store_instance(State(state): Shared, Path(id): Path<String>, RawQuery(query): RawQuery, body: Bytes) -> ApiResult {
    let params = parse_query(query);
    let entry = template(&state, &id)?;
    let doc = json_body(&body)?;
    let draft = flag(&params, "draft");
    let (_, issues) = parse_and_validate(&entry.template, &doc, !draft)?;
    if !draft && issues.iter().any(ValidationIssue::is_error) {
        return Err(validation_failed(&issues));
    }
    let meta = state
        .store
        .put(&entry.id, &template_fingerprint(&entry.template), &body, draft)
        .map_err(internal)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "instanceId": meta.instance_id,
            "templateId": meta.template_id,
            "draft": meta.draft,
            "storedAt": meta.stored_at,
        })),
    )
        .into_response())
}

pub async fn get_instance(State(state): Shared, Path(instance_id): Path<String>) -> ApiResult {
    let Some((body, meta)) = state.store.get(&instance_id).map_err(internal)? else {
        return Err(ApiError::new("NOT_FOUND", format!("no stored instance `{instance_id}`")));
    };
    Ok((
        [
            (header::CONTENT_TYPE, "application/ld+json".to_owned()),
            (header::HeaderName::from_static("x-metaforge-template"), meta.template_id),
            (header::HeaderName::from_static("x-metaforge-draft"), meta.draft.to_string()),
        ],
        body,
    )
        .into_response())
}

fn limit(params: &HashMap<String, String>) -> ApiResult<Option<usize>> {
    match params.get("limit").map(|s| s.trim()) {
        None | Some("") => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| ApiError::new("BAD_REQUEST", format!("limit `{s}` is not a non-negative integer"))),
    }
}

fn param<'a>(params: &'a HashMap<String, String>, name: &str) -> &'a str {
    params.get(name).map(String::as_str).unwrap_or_default()
}

pub async fn search_authority(State(state): Shared, RawQuery(query): RawQuery) -> ApiResult<Json<Value>> {
    let params = parse_query(query);
    let hits = state
        .gateway
        .search_authority(param(&params, "source"), param(&params, "q"), limit(&params)?)
        .await?;
    Ok(Json(json!({ "suggestions": hits })))
}

pub async fn resolve_authority(State(state): Shared, RawQuery(query): RawQuery) -> ApiResult<Json<Value>> {
    let params = parse_query(query);
    let hit = state.gateway.resolve_identifier(param(&params, "source"), param(&params, "id")).await?;
    Ok(Json(serde_json::to_value(hit).expect("suggestions serialize")))
}

/// `acronym` may list several sources separated by commas. `valueSetId` or
/// `rootIri` narrow a single acronym to a value set or a branch.
pub async fn search_ontology(State(state): Shared, RawQuery(query): RawQuery) -> ApiResult<Json<Value>> {
    let params = parse_query(query);
    let acronyms: Vec<&str> = param(&params, "acronym").split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
    if acronyms.is_empty() {
        return Err(ApiError::new("UNKNOWN_SOURCE_ACRONYM", "no acronym given"));
    }
    let value_set = params.get("valueSetId");
    let root = params.get("rootIri");
    if (value_set.is_some() || root.is_some()) && acronyms.len() != 1 {
        return Err(ApiError::new("BAD_REQUEST", "valueSetId and rootIri apply to exactly one acronym"));
    }
    let sources: Vec<TermSourceSpec> = acronyms
        .iter()
        .map(|a| {
            let acronym = (*a).to_owned();
            match (value_set, root) {
                (Some(v), _) => TermSourceSpec::ValueSet {
                    acronym,
                    value_set_id: v.clone(),
                },
                (None, Some(r)) => TermSourceSpec::Branch {
                    acronym,
                    root_iri: r.clone(),
                },
                (None, None) => TermSourceSpec::Ontology { acronym },
            }
        })
        .collect();
    let hits = state.gateway.search_ontology(&sources, param(&params, "q"), limit(&params)?)?;
    Ok(Json(json!({ "suggestions": hits })))
}

fn internal(e: crate::StoreError) -> ApiError {
    tracing::error!("{e}");
    ApiError::new("INTERNAL", e.to_string())
}

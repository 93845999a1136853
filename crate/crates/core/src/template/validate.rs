use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

use super::{FieldType, LanguageMap, NodeKind, Template, TemplateIssue, TemplateIssueCode as Code, TemplateNode, TermSourceSpec};
use crate::identifier::is_absolute_iri;
use crate::instance::check_field_value;
use crate::path::valid_key;
use crate::template::Severity;

static SEMVER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)(-[0-9A-Za-z.-]+)?(\+[0-9A-Za-z.-]+)?$").unwrap()
});

/// Checks every template and node invariant. Returns findings sorted by
/// path then code; an empty list means the template is sound.
pub fn validate_template(t: &Template) -> Vec<TemplateIssue> {
    let mut issues = Vec::new();
    if !is_absolute_iri(&t.id) {
        issues.push(TemplateIssue::error("", Code::BadIri, format!("template id `{}` is not an absolute IRI", t.id)));
    }
    if !SEMVER.is_match(&t.version) {
        issues.push(TemplateIssue::error("", Code::SchemaViolation, format!("version `{}` is not semver", t.version)));
    }
    check_language_map(&t.name, "", "name", &mut issues);
    check_language_map(&t.description, "", "description", &mut issues);
    for (key, iri) in &t.property_context {
        if !is_absolute_iri(iri) {
            issues.push(TemplateIssue::error(key, Code::BadIri, format!("property IRI `{iri}` is not an absolute IRI")));
        }
    }
    check_siblings(&t.children, "", &mut issues);
    issues.sort_by(|a, b| (&a.path, a.code, &a.message).cmp(&(&b.path, b.code, &b.message)));
    issues
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_owned()
    } else {
        format!("{parent}/{key}")
    }
}

fn check_language_map(map: &LanguageMap, path: &str, what: &str, issues: &mut Vec<TemplateIssue>) {
    for (tag, text) in map.iter() {
        if text.is_empty() {
            issues.push(TemplateIssue::error(path, Code::SchemaViolation, format!("{what} for `{tag}` is empty")));
        }
    }
}

fn check_siblings(nodes: &[TemplateNode], parent: &str, issues: &mut Vec<TemplateIssue>) {
    let mut seen = HashSet::new();
    for n in nodes {
        let path = join(parent, &n.key);
        if !seen.insert(n.key.as_str()) {
            issues.push(TemplateIssue::error(&path, Code::DuplicateKey, format!("sibling key `{}` is used more than once", n.key)));
        }
        check_node(n, &path, issues);
    }
}

fn check_node(n: &TemplateNode, path: &str, issues: &mut Vec<TemplateIssue>) {
    if !valid_key(&n.key) {
        issues.push(TemplateIssue::error(path, Code::SchemaViolation, format!("key `{}` must match [a-z][a-z0-9_]*", n.key)));
    }
    let c = n.cardinality;
    if c.max == Some(0) || c.max.is_some_and(|max| c.min > max) {
        issues.push(TemplateIssue::error(path, Code::BadCardinality, format!("cardinality {c} is not satisfiable")));
    }
    check_language_map(&n.label, path, "label", issues);
    check_language_map(&n.help, path, "help", issues);
    if !n.hidden && n.label.is_empty() {
        issues.push(TemplateIssue::warning(path, Code::SchemaViolation, "visible node has no label"));
    }

    let f = match &n.kind {
        NodeKind::Element(children) => return check_siblings(children, path, issues),
        NodeKind::Field(f) => f,
    };
    if f.required && f.field_type.is_render_only() {
        issues.push(TemplateIssue::error(path, Code::SchemaViolation, format!("{} fields cannot be required", f.field_type)));
    }
    if f.required && n.hidden {
        issues.push(TemplateIssue::warning(path, Code::SchemaViolation, "hidden field is required"));
    }

    let k = &f.constraints;
    match f.field_type {
        FieldType::Text => {
            if k.regex.as_ref().is_some_and(|p| p.regex().is_none()) {
                issues.push(TemplateIssue::error(path, Code::BadRegex, "regex does not compile"));
            }
            if let (Some(lo), Some(hi)) = (k.min_length, k.max_length) {
                if lo > hi {
                    issues.push(TemplateIssue::error(path, Code::SchemaViolation, "minLength exceeds maxLength"));
                }
            }
        }
        FieldType::Number => {
            if let (Some(lo), Some(hi)) = (&k.min_value, &k.max_value) {
                if lo > hi {
                    issues.push(TemplateIssue::error(path, Code::SchemaViolation, "minValue exceeds maxValue"));
                }
            }
        }
        FieldType::List | FieldType::Checkbox => {
            if k.literals.is_empty() {
                issues.push(TemplateIssue::error(path, Code::EmptyLiterals, "no literals to choose from"));
            }
            let mut labels = HashSet::new();
            for lit in &k.literals {
                if lit.label.is_empty() || !labels.insert(lit.label.as_str()) {
                    issues.push(TemplateIssue::error(path, Code::SchemaViolation, format!("literal label `{}` is empty or repeated", lit.label)));
                }
                if lit.iri.as_deref().is_some_and(|iri| !is_absolute_iri(iri)) {
                    issues.push(TemplateIssue::error(path, Code::BadIri, format!("literal `{}` has an invalid IRI", lit.label)));
                }
            }
        }
        FieldType::ControlledTerm => {
            if k.sources.is_empty() {
                issues.push(TemplateIssue::error(path, Code::EmptyTermSources, "controlled term field has no term sources"));
            }
            for s in &k.sources {
                if s.acronym().is_empty() {
                    issues.push(TemplateIssue::error(path, Code::SchemaViolation, "term source acronym is empty"));
                }
                match s {
                    TermSourceSpec::Branch { root_iri, .. } if !is_absolute_iri(root_iri) => {
                        issues.push(TemplateIssue::error(path, Code::BadIri, format!("branch root `{root_iri}` is not an absolute IRI")));
                    }
                    TermSourceSpec::ValueSet { value_set_id, .. } if value_set_id.is_empty() => {
                        issues.push(TemplateIssue::error(path, Code::SchemaViolation, "value set id is empty"));
                    }
                    _ => {}
                }
            }
        }
        _ => {}
    }

    if let Some(d) = &f.default {
        let bad: Vec<String> = check_field_value(f, d)
            .into_iter()
            .filter(|(_, sev, _)| *sev == Severity::Error)
            .map(|(_, _, msg)| msg)
            .collect();
        if !bad.is_empty() {
            issues.push(TemplateIssue::error(path, Code::SchemaViolation, format!("default value is invalid: {}", bad.join("; "))));
        }
    }
}

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime};

use super::{sort_issues, InstanceError, IssueCode, MetadataInstance, Record, Slots, ValidationIssue};
use crate::decimal::Decimal;
use crate::identifier::{is_absolute_iri, AuthoritySource};
use crate::path::ValuePath;
use crate::template::{template_fingerprint, FieldSpec, FieldType, Granularity, NodeKind, NumberKind, Severity, Template, TemplateNode};
use crate::value::{self, FieldValue};

/// Validates an instance against the template it was built from. With
/// `strict == false` (draft mode) missing required values and unfilled
/// repetitions are warnings rather than errors.
pub fn validate_instance(t: &Template, i: &MetadataInstance, strict: bool) -> Result<Vec<ValidationIssue>, InstanceError> {
    let expected = template_fingerprint(t);
    if i.template_fingerprint != expected {
        return Err(InstanceError::FingerprintMismatch {
            expected,
            actual: i.template_fingerprint.clone(),
        });
    }
    let mut issues = Vec::new();
    check_record(&t.children, i.root(), &ValuePath::root(), strict, &mut issues);
    sort_issues(&mut issues);
    Ok(issues)
}

fn check_record(nodes: &[TemplateNode], rec: &Record, parent: &ValuePath, strict: bool, issues: &mut Vec<ValidationIssue>) {
    let soft = if strict { Severity::Error } else { Severity::Warning };
    for n in nodes {
        let node_path = parent.child(&n.key, None);
        let multi = n.is_multi_valued();
        let (count, filled) = match rec.get(&n.key) {
            Some(Slots::Field(vals)) => (vals.len(), vals.iter().filter(|v| !v.is_empty()).count()),
            Some(Slots::Element(recs)) => (recs.len(), recs.iter().filter(|r| !r.is_blank()).count()),
            None => (0, 0),
        };

        let mut required_reported = false;
        if n.is_required() && filled == 0 {
            issues.push(ValidationIssue::new(soft, node_path.clone(), IssueCode::RequiredMissing, "required value is missing"));
            required_reported = true;
        }
        if filled < n.cardinality.min as usize && !required_reported {
            issues.push(
                ValidationIssue::new(soft, node_path.clone(), IssueCode::CardinalityUnderflow, format!("needs at least {} value(s)", n.cardinality.min))
                    .with_expected(n.cardinality.to_string(), filled.to_string()),
            );
        }
        if n.cardinality.max.is_some_and(|m| count > m as usize) {
            issues.push(
                ValidationIssue::new(Severity::Error, node_path.clone(), IssueCode::CardinalityOverflow, format!("holds {count} repetitions"))
                    .with_expected(n.cardinality.to_string(), count.to_string()),
            );
        }

        match (&n.kind, rec.get(&n.key)) {
            (NodeKind::Field(spec), Some(Slots::Field(vals))) => {
                for (idx, v) in vals.iter().enumerate() {
                    let path = parent.child(&n.key, multi.then_some(idx));
                    for (code, severity, message) in check_field_value(spec, v) {
                        issues.push(ValidationIssue::new(severity, path.clone(), code, message));
                    }
                }
            }
            (NodeKind::Element(children), Some(Slots::Element(recs))) => {
                for (idx, r) in recs.iter().enumerate() {
                    check_record(children, r, &parent.child(&n.key, multi.then_some(idx)), strict, issues);
                }
            }
            _ => {}
        }
    }
}

type Finding = (IssueCode, Severity, String);

fn error(code: IssueCode, message: impl Into<String>) -> Finding {
    (code, Severity::Error, message.into())
}

/// Checks one value against its field's type and constraints. Emptiness is
/// not a finding here; presence is checked per node.
pub(crate) fn check_field_value(spec: &FieldSpec, v: &FieldValue) -> Vec<Finding> {
    let ft = spec.field_type;
    match v {
        FieldValue::Empty => Vec::new(),
        FieldValue::Literal { value, datatype } => check_literal(spec, value, datatype),
        FieldValue::Term { iri, label } => match ft {
            FieldType::ControlledTerm => check_term(iri, label),
            FieldType::List | FieldType::Checkbox => {
                let mut out = check_term(iri, label);
                if !spec.constraints.literals.iter().any(|l| l.iri.as_deref() == Some(iri.as_str())) {
                    out.push(error(IssueCode::NotInAllowedValues, format!("`{iri}` is not an allowed value")));
                }
                out
            }
            _ => vec![error(IssueCode::TermSourceMismatch, format!("{ft} fields do not take ontology terms"))],
        },
        FieldValue::Authority { source, id, label } => {
            if ft != FieldType::ExternalAuthority {
                return vec![error(IssueCode::TermSourceMismatch, format!("{ft} fields do not take authority identifiers"))];
            }
            let mut out = Vec::new();
            if let Some(bound) = spec.constraints.authority {
                if bound != *source {
                    out.push(error(IssueCode::TermSourceMismatch, format!("field is bound to {bound}, value comes from {source}")));
                }
            }
            if !source.is_canonical_iri(id) {
                out.push(error(IssueCode::InvalidIdentifier, format!("`{id}` is not a valid {source} identifier")));
            }
            if label.is_empty() {
                out.push(error(IssueCode::InvalidIdentifier, "identifier has no label"));
            }
            out
        }
    }
}

fn check_term(iri: &str, label: &str) -> Vec<Finding> {
    let mut out = Vec::new();
    if !is_absolute_iri(iri) {
        out.push(error(IssueCode::InvalidIdentifier, format!("`{iri}` is not an absolute IRI")));
    }
    if label.is_empty() {
        out.push(error(IssueCode::InvalidIdentifier, "term has no label"));
    }
    out
}

fn check_literal(spec: &FieldSpec, value: &str, datatype: &str) -> Vec<Finding> {
    let ft = spec.field_type;
    let k = &spec.constraints;
    if matches!(ft, FieldType::ControlledTerm | FieldType::ExternalAuthority) {
        return vec![(
            IssueCode::TermSourceMismatch,
            Severity::Warning,
            format!("`{value}` is free text; select a term with an identifier"),
        )];
    }
    let expected = spec.literal_datatype();
    if datatype != expected {
        return vec![error(IssueCode::TypeMismatch, format!("datatype {datatype} does not fit a {ft} field (expected {expected})"))];
    }
    if !lexical_ok(spec, value) {
        return vec![error(IssueCode::TypeMismatch, format!("`{value}` is not a valid {expected} value"))];
    }

    let mut out = Vec::new();
    match ft {
        FieldType::Text => {
            let len = value.chars().count() as u64;
            if k.min_length.is_some_and(|m| len < m) || k.max_length.is_some_and(|m| len > m) {
                out.push(error(IssueCode::RangeViolation, format!("length {len} is outside the allowed range")));
            }
            if let Some(re) = k.regex.as_ref().and_then(|p| p.regex()) {
                if !re.is_match(value) {
                    let src = k.regex.as_ref().map(|p| p.source()).unwrap_or_default();
                    out.push(error(IssueCode::PatternMismatch, format!("`{value}` does not match `{src}`")));
                }
            }
        }
        FieldType::Number => {
            if let Ok(d) = value.parse::<Decimal>() {
                let below = k.min_value.as_ref().is_some_and(|m| &d < m);
                let above = k.max_value.as_ref().is_some_and(|m| &d > m);
                if below || above {
                    out.push(error(IssueCode::RangeViolation, format!("{value} is outside the allowed range")));
                }
            }
        }
        FieldType::List | FieldType::Checkbox if !k.literals.iter().any(|l| l.label == value) => {
            out.push(error(IssueCode::NotInAllowedValues, format!("`{value}` is not among the allowed values")));
        }
        _ => {}
    }
    out
}

fn lexical_ok(spec: &FieldSpec, value: &str) -> bool {
    let k = &spec.constraints;
    match spec.field_type {
        FieldType::Number => match value.parse::<Decimal>() {
            Ok(d) => k.number_kind.unwrap_or_default() == NumberKind::Decimal || d.is_integer() && !value.contains('.'),
            Err(_) => false,
        },
        FieldType::Temporal => match k.granularity.unwrap_or_default() {
            Granularity::Date => NaiveDate::parse_from_str(value, "%Y-%m-%d").is_ok(),
            Granularity::Datetime => {
                DateTime::parse_from_rfc3339(value).is_ok()
                    || NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
            }
            Granularity::Time => NaiveTime::parse_from_str(value, "%H:%M:%S%.f").is_ok(),
        },
        FieldType::Boolean => value == "true" || value == "false",
        FieldType::Link | FieldType::Image | FieldType::Video => is_absolute_iri(value),
        _ => spec.literal_datatype() == value::XSD_STRING,
    }
}

/// Best-effort guess of the authority an identifier IRI belongs to.
pub(crate) fn detect_source(iri: &str) -> Option<AuthoritySource> {
    AuthoritySource::ALL.into_iter().find(|s| s.is_canonical_iri(iri))
}

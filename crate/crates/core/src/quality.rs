//! Data-quality reports: per-slot status and a completeness score over the
//! required fields.

use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Serialize, Serializer};

use crate::instance::{validate_instance, InstanceError, MetadataInstance, ValidationIssue};
use crate::path::ValuePath;
use crate::template::{FieldType, Severity, Template};
use crate::value::FieldValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldStatus {
    Complete,
    Missing,
    Invalid,
    UnresolvedTerm,
}

impl FieldStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Complete => "complete",
            Self::Missing => "missing",
            Self::Invalid => "invalid",
            Self::UnresolvedTerm => "unresolved_term",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldStatusEntry {
    pub path: ValuePath,
    pub status: FieldStatus,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Counts {
    pub required_total: u32,
    pub required_filled: u32,
    pub optional_total: u32,
    pub optional_filled: u32,
    pub invalid: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QualityReport {
    pub template_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_ref: Option<String>,
    #[serde(serialize_with = "rfc3339")]
    pub generated_at: DateTime<Utc>,
    pub field_statuses: Vec<FieldStatusEntry>,
    pub issues: Vec<ValidationIssue>,
    pub counts: Counts,
    pub completeness: f64,
}

fn rfc3339<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
}

/// Classifies every field slot and scores required-field completeness.
///
/// A slot is `missing` when Empty, `invalid` when it carries an error,
/// `unresolved_term` when a term or authority field holds free text, and
/// `complete` otherwise. Only complete slots count as filled.
pub fn generate_report(t: &Template, i: &MetadataInstance) -> Result<QualityReport, InstanceError> {
    let issues = validate_instance(t, i, true)?;
    let mut counts = Counts::default();
    let mut field_statuses = Vec::new();
    for (path, node, value) in i.values(t) {
        let Some(spec) = node.field() else { continue };
        let has_error = issues.iter().any(|x| x.severity == Severity::Error && x.path == path);
        let status = match value {
            FieldValue::Empty => FieldStatus::Missing,
            _ if has_error => FieldStatus::Invalid,
            FieldValue::Literal { .. } if matches!(spec.field_type, FieldType::ControlledTerm | FieldType::ExternalAuthority) => {
                FieldStatus::UnresolvedTerm
            }
            _ => FieldStatus::Complete,
        };
        let complete = u32::from(status == FieldStatus::Complete);
        if spec.required {
            counts.required_total += 1;
            counts.required_filled += complete;
        } else {
            counts.optional_total += 1;
            counts.optional_filled += complete;
        }
        counts.invalid += u32::from(status == FieldStatus::Invalid);
        field_statuses.push(FieldStatusEntry { path, status });
    }
    let completeness = if counts.required_total == 0 {
        1.0
    } else {
        f64::from(counts.required_filled) / f64::from(counts.required_total)
    };
    Ok(QualityReport {
        template_id: t.id.clone(),
        instance_ref: None,
        generated_at: Utc::now(),
        field_statuses,
        issues,
        counts,
        completeness,
    })
}

/// Line-oriented summary: a header, one tab-separated line per slot that is
/// not complete, and a totals line. The generation time is left out so the
/// text is stable.
pub fn render_report_text(r: &QualityReport) -> String {
    let c = &r.counts;
    let mut out = format!(
        "quality report {}: completeness {} ({}/{} required)\n",
        r.template_id, r.completeness, c.required_filled, c.required_total
    );
    for e in r.field_statuses.iter().filter(|e| e.status != FieldStatus::Complete) {
        let _ = writeln!(out, "{}\t{}", e.path, e.status.as_str());
    }
    let _ = writeln!(
        out,
        "totals: required {}/{}, optional {}/{}, invalid {}",
        c.required_filled, c.required_total, c.optional_filled, c.optional_total, c.invalid
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identifier::AuthoritySource;
    use crate::instance::new_instance;
    use crate::template::parse_template_str;

    fn template() -> Template {
        parse_template_str(
            r#"{"id":"https://ex.org/t/q","version":"1.0.0","children":[
              {"kind":"field","key":"a","fieldType":"text","required":true},
              {"kind":"field","key":"b","fieldType":"text","required":true},
              {"kind":"field","key":"c","fieldType":"text","required":true},
              {"kind":"field","key":"pi","fieldType":"external_authority","required":true,"constraints":{"authority":"orcid"}},
              {"kind":"field","key":"e","fieldType":"text"},
              {"kind":"field","key":"f","fieldType":"number"}]}"#,
        )
        .unwrap()
    }

    fn p(s: &str) -> ValuePath {
        s.parse().unwrap()
    }

    #[test]
    fn all_empty_scores_zero() {
        let t = template();
        let r = generate_report(&t, &new_instance(&t)).unwrap();
        assert_eq!(r.completeness, 0.0);
        assert_eq!(r.counts.required_filled, 0);
        assert_eq!(r.counts.required_total, 4);
        assert_eq!(r.counts.optional_total, 2);
        assert!(r.field_statuses.iter().all(|e| e.status == FieldStatus::Missing));
    }

    #[test]
    fn free_text_in_authority_field_is_unresolved() {
        let t = template();
        let i = new_instance(&t).set_value(&t, &p("pi"), FieldValue::string("Martin O'Connor")).unwrap();
        let r = generate_report(&t, &i).unwrap();
        let pi = r.field_statuses.iter().find(|e| e.path == p("pi")).unwrap();
        assert_eq!(pi.status, FieldStatus::UnresolvedTerm);

        let resolved = i
            .set_value(&t, &p("pi"), FieldValue::authority(AuthoritySource::Orcid, "https://orcid.org/0000-0002-2256-2421", "Martin O'Connor"))
            .unwrap();
        assert_eq!(generate_report(&t, &resolved).unwrap().counts.required_filled, 1);
    }

    #[test]
    fn text_form() {
        let t = template();
        let i = ["a", "b", "c", "e"].iter().fold(new_instance(&t), |acc, k| acc.set_value(&t, &p(k), FieldValue::string("x")).unwrap());
        let i = i
            .set_value(&t, &p("pi"), FieldValue::authority(AuthoritySource::Orcid, "https://orcid.org/0000-0002-2256-2421", "M"))
            .unwrap();
        let r = generate_report(&t, &i).unwrap();
        let text = render_report_text(&r);
        assert_eq!(
            text,
            "quality report https://ex.org/t/q: completeness 1 (4/4 required)\nf\tmissing\ntotals: required 4/4, optional 1/2, invalid 0\n"
        );
        assert_eq!(text, render_report_text(&generate_report(&t, &i).unwrap()));
    }
}

//! Metadata instances: incremental construction, validation, JSON-LD
//! serialization and render plans.
//!
//! Instances are values. Every update returns a new instance and leaves
//! the receiver untouched.

mod jsonld;
mod render;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::path::{Segment, ValuePath};
use crate::template::{find_child, template_fingerprint, FieldSpec, FieldType, NodeKind, Severity, Template, TemplateNode};
use crate::value::FieldValue;

pub use jsonld::{parse_instance, parse_instance_str, serialize_jsonld, to_jsonld_string, ParsedInstance};
pub use render::{render_plan, RenderMode, RenderPlan, RepeatInfo, Widget, WidgetDiagnostic, WidgetState, WidgetType};
pub(crate) use validate::check_field_value;
pub use validate::validate_instance;

/// Closed list of instance-issue codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    RequiredMissing,
    TypeMismatch,
    PatternMismatch,
    RangeViolation,
    NotInAllowedValues,
    TermSourceMismatch,
    CardinalityUnderflow,
    CardinalityOverflow,
    InvalidIdentifier,
    UnknownField,
    FingerprintMismatch,
    ContextMismatch,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::RequiredMissing => "REQUIRED_MISSING",
            Self::TypeMismatch => "TYPE_MISMATCH",
            Self::PatternMismatch => "PATTERN_MISMATCH",
            Self::RangeViolation => "RANGE_VIOLATION",
            Self::NotInAllowedValues => "NOT_IN_ALLOWED_VALUES",
            Self::TermSourceMismatch => "TERM_SOURCE_MISMATCH",
            Self::CardinalityUnderflow => "CARDINALITY_UNDERFLOW",
            Self::CardinalityOverflow => "CARDINALITY_OVERFLOW",
            Self::InvalidIdentifier => "INVALID_IDENTIFIER",
            Self::UnknownField => "UNKNOWN_FIELD",
            Self::FingerprintMismatch => "FINGERPRINT_MISMATCH",
            Self::ContextMismatch => "CONTEXT_MISMATCH",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub path: ValuePath,
    pub code: IssueCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual: Option<String>,
}

impl ValidationIssue {
    pub fn new(severity: Severity, path: ValuePath, code: IssueCode, message: impl Into<String>) -> Self {
        Self {
            severity,
            path,
            code,
            message: message.into(),
            expected: None,
            actual: None,
        }
    }

    pub fn with_expected(mut self, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        self.expected = Some(expected.into());
        self.actual = Some(actual.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Orders issues by path, code, then message.
pub fn sort_issues(issues: &mut [ValidationIssue]) {
    issues.sort_by(|a, b| (&a.path, a.code, &a.message).cmp(&(&b.path, b.code, &b.message)));
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("unknown path `{0}`")]
    UnknownPath(String),
    #[error("type mismatch at `{path}`: expected {expected}, got {actual}")]
    TypeMismatch { path: String, expected: String, actual: String },
    #[error("`{0}` is read-only")]
    ReadOnlyField(String),
    #[error("`{path}` already holds the maximum of {max} repetitions")]
    CardinalityOverflow { path: String, max: u32 },
    #[error("`{path}` cannot go below {min} repetitions")]
    CardinalityUnderflow { path: String, min: u32 },
    #[error("instance was built for template fingerprint {actual}, not {expected}")]
    FingerprintMismatch { expected: String, actual: String },
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("document describes `{actual}`, not template `{expected}`")]
    ContextMismatch { expected: String, actual: String },
    #[error("instance has {} validation error(s)", .0.iter().filter(|i| i.is_error()).count())]
    ValidationFailed(Vec<ValidationIssue>),
    #[error("unknown mode `{0}` (expected entry, edit or view)")]
    BadMode(String),
}

impl InstanceError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownPath(_) => "UNKNOWN_PATH",
            Self::TypeMismatch { .. } => "TYPE_MISMATCH",
            Self::ReadOnlyField(_) => "READ_ONLY_FIELD",
            Self::CardinalityOverflow { .. } => "CARDINALITY_OVERFLOW",
            Self::CardinalityUnderflow { .. } => "CARDINALITY_UNDERFLOW",
            Self::FingerprintMismatch { .. } => "FINGERPRINT_MISMATCH",
            Self::MalformedJson(_) => "MALFORMED_JSON",
            Self::ContextMismatch { .. } => "CONTEXT_MISMATCH",
            Self::ValidationFailed(_) => "VALIDATION_FAILED",
            Self::BadMode(_) => "BAD_MODE",
        }
    }
}

/// Repetition slots of one template node inside a record.
#[derive(Debug, Clone, PartialEq)]
pub enum Slots {
    Field(Vec<FieldValue>),
    Element(Vec<Record>),
}

impl Slots {
    pub fn len(&self) -> usize {
        match self {
            Self::Field(v) => v.len(),
            Self::Element(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The values of one element repetition (or the instance root), keyed by
/// child key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(BTreeMap<String, Slots>);

impl Record {
    pub fn get(&self, key: &str) -> Option<&Slots> {
        self.0.get(key)
    }

    pub(crate) fn insert(&mut self, key: String, slots: Slots) {
        self.0.insert(key, slots);
    }

    /// True when no field anywhere below holds a value.
    pub fn is_blank(&self) -> bool {
        self.0.values().all(|s| match s {
            Slots::Field(v) => v.iter().all(FieldValue::is_empty),
            Slots::Element(v) => v.iter().all(Record::is_blank),
        })
    }
}

fn initial_count(node: &TemplateNode) -> usize {
    if node.is_multi_valued() {
        node.cardinality.min.max(1) as usize
    } else {
        1
    }
}

/// Builds a record for `nodes`. With `defaults`, field defaults are applied.
pub(crate) fn fresh_record(nodes: &[TemplateNode], defaults: bool) -> Record {
    let mut rec = Record::default();
    for n in nodes {
        rec.insert(n.key.clone(), fresh_slots(n, initial_count(n), defaults));
    }
    rec
}

fn fresh_slots(n: &TemplateNode, count: usize, defaults: bool) -> Slots {
    match &n.kind {
        NodeKind::Field(f) => {
            let v = if defaults { f.default.clone().unwrap_or_default() } else { FieldValue::Empty };
            Slots::Field(vec![v; count])
        }
        NodeKind::Element(children) => Slots::Element(vec![fresh_record(children, defaults); count]),
    }
}

/// Record with Empty repetitions of multi-valued nodes dropped, recursively.
/// Single-valued nodes keep exactly one slot. Two instances that differ only
/// by omitted Empty values normalize to the same record.
pub fn normalize_record(nodes: &[TemplateNode], rec: &Record) -> Record {
    let mut out = Record::default();
    for n in nodes {
        let slots = rec.get(&n.key);
        let normalized = match &n.kind {
            NodeKind::Field(_) => {
                let mut vals: Vec<FieldValue> = match slots {
                    Some(Slots::Field(v)) => v.iter().filter(|v| !v.is_empty()).cloned().collect(),
                    _ => Vec::new(),
                };
                if vals.is_empty() && !n.is_multi_valued() {
                    vals.push(FieldValue::Empty);
                }
                Slots::Field(vals)
            }
            NodeKind::Element(children) => {
                let mut recs: Vec<Record> = match slots {
                    Some(Slots::Element(v)) => v
                        .iter()
                        .map(|r| normalize_record(children, r))
                        .filter(|r| !r.is_blank())
                        .collect(),
                    _ => Vec::new(),
                };
                if recs.is_empty() && !n.is_multi_valued() {
                    recs.push(normalize_record(children, &Record::default()));
                }
                Slots::Element(recs)
            }
        };
        out.insert(n.key.clone(), normalized);
    }
    out
}

#[derive(Debug, Clone)]
pub struct MetadataInstance {
    pub template_id: String,
    pub template_fingerprint: String,
    root: Record,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// Starts an instance in entry mode: defaults applied, every multi-valued
/// node holding `max(min, 1)` empty repetitions.
pub fn new_instance(t: &Template) -> MetadataInstance {
    MetadataInstance::from_record(t, fresh_record(&t.children, true))
}

/// A node located in an instance together with its slots.
struct Located<'t, 'r> {
    node: &'t TemplateNode,
    slots: &'r mut Slots,
    index: Option<usize>,
}

impl MetadataInstance {
    pub(crate) fn from_record(t: &Template, root: Record) -> Self {
        let now = Utc::now();
        Self {
            template_id: t.id.clone(),
            template_fingerprint: template_fingerprint(t),
            root,
            created_at: now,
            updated_at: now,
        }
    }

    pub fn root(&self) -> &Record {
        &self.root
    }

    /// Content with Empty omissions normalized away; excludes timestamps.
    pub fn normalized(&self, t: &Template) -> Record {
        normalize_record(&t.children, &self.root)
    }

    fn check_fingerprint(&self, t: &Template) -> Result<(), InstanceError> {
        let expected = template_fingerprint(t);
        if self.template_fingerprint == expected {
            Ok(())
        } else {
            Err(InstanceError::FingerprintMismatch {
                expected,
                actual: self.template_fingerprint.clone(),
            })
        }
    }

    fn locate<'t, 'r>(
        t: &'t Template,
        root: &'r mut Record,
        path: &ValuePath,
    ) -> Result<Located<'t, 'r>, InstanceError> {
        let unknown = || InstanceError::UnknownPath(path.to_string());
        let (last, parents) = path.segments().split_last().ok_or_else(unknown)?;
        let mut nodes: &'t [TemplateNode] = &t.children;
        let mut rec = root;
        for Segment { key, index } in parents {
            let node = find_child(nodes, key).ok_or_else(unknown)?;
            let idx = slot_index(node, *index).ok_or_else(unknown)?;
            let Some(Slots::Element(recs)) = rec.0.get_mut(key) else {
                return Err(unknown());
            };
            rec = recs.get_mut(idx).ok_or_else(unknown)?;
            nodes = node.children();
        }
        let node = find_child(nodes, &last.key).ok_or_else(unknown)?;
        let slots = rec.0.get_mut(&last.key).ok_or_else(unknown)?;
        Ok(Located {
            node,
            slots,
            index: last.index,
        })
    }

    /// Value at a field slot path, if the path resolves.
    pub fn get(&self, t: &Template, path: &ValuePath) -> Option<&FieldValue> {
        let (last, parents) = path.segments().split_last()?;
        let mut nodes: &[TemplateNode] = &t.children;
        let mut rec = &self.root;
        for Segment { key, index } in parents {
            let node = find_child(nodes, key)?;
            let Some(Slots::Element(recs)) = rec.get(key) else { return None };
            rec = recs.get(slot_index(node, *index)?)?;
            nodes = node.children();
        }
        let node = find_child(nodes, &last.key)?;
        match rec.get(&last.key)? {
            Slots::Field(v) => v.get(slot_index(node, last.index)?),
            Slots::Element(_) => None,
        }
    }

    /// Every field slot in template order, with its path.
    pub fn values<'a>(&'a self, t: &'a Template) -> Vec<(ValuePath, &'a TemplateNode, &'a FieldValue)> {
        fn go<'a>(
            nodes: &'a [TemplateNode],
            rec: &'a Record,
            parent: &ValuePath,
            out: &mut Vec<(ValuePath, &'a TemplateNode, &'a FieldValue)>,
        ) {
            for n in nodes {
                let multi = n.is_multi_valued();
                match rec.get(&n.key) {
                    Some(Slots::Field(vals)) => {
                        for (i, v) in vals.iter().enumerate() {
                            out.push((parent.child(&n.key, multi.then_some(i)), n, v));
                        }
                    }
                    Some(Slots::Element(recs)) => {
                        for (i, r) in recs.iter().enumerate() {
                            go(n.children(), r, &parent.child(&n.key, multi.then_some(i)), out);
                        }
                    }
                    None => {}
                }
            }
        }
        let mut out = Vec::new();
        go(&t.children, &self.root, &ValuePath::root(), &mut out);
        out
    }

    /// Number of repetitions currently held by the node at `path` (which
    /// must not carry an index on its last segment).
    pub fn repetition_count(&self, t: &Template, path: &ValuePath) -> Option<usize> {
        let mut root = self.root.clone();
        let loc = Self::locate(t, &mut root, path).ok()?;
        loc.index.is_none().then(|| loc.slots.len())
    }

    /// Returns a copy with `value` stored at the field slot `path`.
    ///
    /// Literals are coerced to the field's datatype; lexical forms that do
    /// not fit it are rejected.
    pub fn set_value(&self, t: &Template, path: &ValuePath, value: FieldValue) -> Result<Self, InstanceError> {
        self.check_fingerprint(t)?;
        let mut next = self.clone();
        let loc = Self::locate(t, &mut next.root, path)?;
        let spec = loc
            .node
            .field()
            .ok_or_else(|| InstanceError::UnknownPath(path.to_string()))?;
        let idx = slot_index(loc.node, loc.index).ok_or_else(|| InstanceError::UnknownPath(path.to_string()))?;
        let coerced = coerce(spec, value, path)?;
        let Slots::Field(vals) = loc.slots else {
            return Err(InstanceError::UnknownPath(path.to_string()));
        };
        let slot = vals
            .get_mut(idx)
            .ok_or_else(|| InstanceError::UnknownPath(path.to_string()))?;
        *slot = coerced;
        next.updated_at = Utc::now();
        Ok(next)
    }

    /// Appends an empty repetition to the multi-valued node at `path`.
    pub fn add_repetition(&self, t: &Template, path: &ValuePath) -> Result<Self, InstanceError> {
        self.check_fingerprint(t)?;
        let mut next = self.clone();
        let loc = Self::locate(t, &mut next.root, path)?;
        if loc.index.is_some() || !loc.node.is_multi_valued() {
            return Err(InstanceError::UnknownPath(path.to_string()));
        }
        let count = loc.slots.len();
        if let Some(max) = loc.node.cardinality.max {
            if count >= max as usize {
                return Err(InstanceError::CardinalityOverflow {
                    path: path.to_string(),
                    max,
                });
            }
        }
        match (loc.slots, fresh_slots(loc.node, 1, true)) {
            (Slots::Field(v), Slots::Field(mut add)) => v.append(&mut add),
            (Slots::Element(v), Slots::Element(mut add)) => v.append(&mut add),
            _ => return Err(InstanceError::UnknownPath(path.to_string())),
        }
        next.updated_at = Utc::now();
        Ok(next)
    }

    /// Removes repetition `path` (last segment indexed); later repetitions
    /// shift down by one.
    pub fn remove_repetition(&self, t: &Template, path: &ValuePath) -> Result<Self, InstanceError> {
        self.check_fingerprint(t)?;
        let mut next = self.clone();
        let loc = Self::locate(t, &mut next.root, path)?;
        let unknown = || InstanceError::UnknownPath(path.to_string());
        let idx = loc.index.filter(|_| loc.node.is_multi_valued()).ok_or_else(unknown)?;
        let count = loc.slots.len();
        if idx >= count {
            return Err(unknown());
        }
        let min = loc.node.cardinality.min;
        if count <= min as usize {
            return Err(InstanceError::CardinalityUnderflow {
                path: path.without_last_index().to_string(),
                min,
            });
        }
        match loc.slots {
            Slots::Field(v) => {
                v.remove(idx);
            }
            Slots::Element(v) => {
                v.remove(idx);
            }
        }
        next.updated_at = Utc::now();
        Ok(next)
    }
}

/// Index into a node's slots: multi-valued nodes need an explicit index,
/// single-valued nodes must not have one.
fn slot_index(node: &TemplateNode, index: Option<usize>) -> Option<usize> {
    match (node.is_multi_valued(), index) {
        (true, Some(i)) => Some(i),
        (false, None) => Some(0),
        _ => None,
    }
}

fn coerce(spec: &FieldSpec, value: FieldValue, path: &ValuePath) -> Result<FieldValue, InstanceError> {
    if spec.field_type.is_render_only() {
        return Err(InstanceError::ReadOnlyField(path.to_string()));
    }
    let mismatch = |actual: &str| InstanceError::TypeMismatch {
        path: path.to_string(),
        expected: spec.field_type.to_string(),
        actual: actual.to_owned(),
    };
    match value {
        FieldValue::Empty => Ok(FieldValue::Empty),
        FieldValue::Literal { value, .. } => {
            let coerced = FieldValue::literal(value, spec.literal_datatype());
            let lexical_errors = validate::check_field_value(spec, &coerced)
                .into_iter()
                .any(|(code, _, _)| code == IssueCode::TypeMismatch);
            if lexical_errors {
                let FieldValue::Literal { value, .. } = &coerced else { unreachable!() };
                Err(mismatch(&format!("literal `{value}`")))
            } else {
                Ok(coerced)
            }
        }
        v @ FieldValue::Term { .. } => match spec.field_type {
            FieldType::ControlledTerm | FieldType::List | FieldType::Checkbox => Ok(v),
            _ => Err(mismatch("term")),
        },
        v @ FieldValue::Authority { .. } => match spec.field_type {
            FieldType::ExternalAuthority => Ok(v),
            _ => Err(mismatch("authority")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identifier::AuthoritySource;
    use crate::template::parse_template_str;
    use proptest::prelude::*;

    fn template() -> Template {
        parse_template_str(
            r#"{"id":"https://ex.org/t/inst","version":"1.0.0","children":[
              {"kind":"field","key":"parent_sample_id","fieldType":"text","required":true},
              {"kind":"field","key":"dataset_type","fieldType":"text","required":true,"default":"RNAseq"},
              {"kind":"field","key":"count","fieldType":"number","constraints":{"numberKind":"integer"}},
              {"kind":"field","key":"pi","fieldType":"external_authority","constraints":{"authority":"orcid"}},
              {"kind":"field","key":"photo","fieldType":"image"},
              {"kind":"field","key":"variable_measured","fieldType":"text","cardinality":{"min":1}},
              {"kind":"field","key":"tags","fieldType":"text","cardinality":{"min":0,"max":3}},
              {"kind":"element","key":"authors","cardinality":{"min":1},"children":[
                 {"kind":"field","key":"name","fieldType":"text"},
                 {"kind":"field","key":"affiliation","fieldType":"text"}]}]}"#,
        )
        .unwrap()
    }

    fn p(s: &str) -> ValuePath {
        s.parse().unwrap()
    }

    #[test]
    fn empty_template_has_no_paths() {
        let t = parse_template_str(r#"{"id":"https://ex.org/t/empty","version":"1.0.0","children":[]}"#).unwrap();
        assert!(new_instance(&t).values(&t).is_empty());
    }

    #[test]
    fn new_instance_materializes_repetitions_and_defaults() {
        let t = template();
        let i = new_instance(&t);
        assert_eq!(i.get(&t, &p("variable_measured[0]")), Some(&FieldValue::Empty));
        assert_eq!(i.get(&t, &p("variable_measured[1]")), None);
        assert_eq!(i.repetition_count(&t, &p("tags")), Some(1));
        assert_eq!(i.get(&t, &p("dataset_type")), Some(&FieldValue::string("RNAseq")));
        assert_eq!(i.get(&t, &p("authors[0]/name")), Some(&FieldValue::Empty));
    }

    #[test]
    fn set_value_stores_typed_literal() {
        let t = template();
        let i = new_instance(&t);
        let j = i
            .set_value(&t, &p("parent_sample_id"), FieldValue::literal("HBM296.DXLM.434", "xsd:anything"))
            .unwrap();
        assert_eq!(j.get(&t, &p("parent_sample_id")), Some(&FieldValue::string("HBM296.DXLM.434")));
        assert_eq!(i.get(&t, &p("parent_sample_id")), Some(&FieldValue::Empty));
        assert!(j.updated_at >= i.updated_at);
    }

    #[test]
    fn set_value_errors() {
        let t = template();
        let i = new_instance(&t);
        assert!(matches!(
            i.set_value(&t, &p("count"), FieldValue::string("abc")),
            Err(InstanceError::TypeMismatch { .. })
        ));
        assert!(matches!(
            i.set_value(&t, &p("photo"), FieldValue::literal("https://ex.org/a.png", "xsd:anyURI")),
            Err(InstanceError::ReadOnlyField(_))
        ));
        for bad in ["nope", "variable_measured", "parent_sample_id[0]", "authors/name", "authors[3]/name", "authors[0]"] {
            assert!(
                matches!(i.set_value(&t, &p(bad), FieldValue::string("x")), Err(InstanceError::UnknownPath(_))),
                "{bad}"
            );
        }
        assert!(matches!(
            i.set_value(&t, &p("parent_sample_id"), FieldValue::term("https://ex.org/x", "x")),
            Err(InstanceError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn set_orcid_authority() {
        let t = template();
        let v = FieldValue::authority(AuthoritySource::Orcid, "https://orcid.org/0000-0002-2256-2421", "Martin O'Connor");
        let i = new_instance(&t).set_value(&t, &p("pi"), v.clone()).unwrap();
        assert_eq!(i.get(&t, &p("pi")), Some(&v));
    }

    #[test]
    fn repetition_bounds() {
        let t = template();
        let i = new_instance(&t);
        let two = i.add_repetition(&t, &p("variable_measured")).unwrap();
        assert_eq!(two.repetition_count(&t, &p("variable_measured")), Some(2));
        assert_eq!(
            i.remove_repetition(&t, &p("variable_measured[0]")).unwrap_err(),
            InstanceError::CardinalityUnderflow {
                path: "variable_measured".into(),
                min: 1
            }
        );
        let three = i
            .add_repetition(&t, &p("tags"))
            .and_then(|i| i.add_repetition(&t, &p("tags")))
            .unwrap();
        assert_eq!(
            three.add_repetition(&t, &p("tags")).unwrap_err(),
            InstanceError::CardinalityOverflow { path: "tags".into(), max: 3 }
        );
        let zero = i.remove_repetition(&t, &p("tags[0]")).unwrap();
        assert_eq!(zero.repetition_count(&t, &p("tags")), Some(0));
    }

    #[test]
    fn remove_shifts_later_repetitions_down() {
        let t = template();
        let i = new_instance(&t)
            .add_repetition(&t, &p("authors"))
            .and_then(|i| i.add_repetition(&t, &p("authors")))
            .unwrap();
        let i = (0..3).fold(i, |acc, n| {
            acc.set_value(&t, &p(&format!("authors[{n}]/name")), FieldValue::string(format!("A{n}")))
                .unwrap()
        });
        let j = i.remove_repetition(&t, &p("authors[1]")).unwrap();
        assert_eq!(j.get(&t, &p("authors[0]/name")), Some(&FieldValue::string("A0")));
        assert_eq!(j.get(&t, &p("authors[1]/name")), Some(&FieldValue::string("A2")));
        assert_eq!(j.get(&t, &p("authors[2]/name")), None);
    }

    #[test]
    fn fingerprint_mismatch_is_rejected() {
        let t = template();
        let other = parse_template_str(r#"{"id":"https://ex.org/t/inst","version":"1.0.1","children":[]}"#).unwrap();
        let i = new_instance(&other);
        assert!(matches!(
            i.set_value(&t, &p("parent_sample_id"), FieldValue::string("x")),
            Err(InstanceError::FingerprintMismatch { .. })
        ));
    }

    proptest! {
        /// Setting one path never changes any other path.
        #[test]
        fn set_value_is_local(a in 0usize..4, b in 0usize..4, text in "[a-zA-Z0-9 ]{1,12}") {
            let t = template();
            let paths = ["parent_sample_id", "dataset_type", "variable_measured[0]", "authors[0]/affiliation"];
            let base = new_instance(&t).set_value(&t, &p(paths[b]), FieldValue::string("before")).unwrap();
            let after = base.set_value(&t, &p(paths[a]), FieldValue::string(text.clone())).unwrap();
            for (i, path) in paths.iter().enumerate() {
                if i != a {
                    prop_assert_eq!(after.get(&t, &p(path)), base.get(&t, &p(path)));
                }
            }
            prop_assert_eq!(after.get(&t, &p(paths[a])), Some(&FieldValue::string(text)));
        }
    }
}

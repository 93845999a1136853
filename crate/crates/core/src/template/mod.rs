//! The machine-actionable template model: a tree of fields and nested
//! elements with cardinality, constraints and language-mapped labels.
//!
//! Templates are immutable once parsed and can be shared freely between
//! threads.

mod canonical;
mod label;
mod parse;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::decimal::Decimal;
use crate::identifier::AuthoritySource;
use crate::path::NodePath;
use crate::value::{self, FieldValue};

pub use canonical::template_fingerprint;
pub use label::{language_chain, localized_label, localized_text, FallbackDiagnostic, LabelServed};
pub(crate) use label::localized_help;
pub use parse::{parse_template, parse_template_lenient, parse_template_str};
pub use validate::validate_template;

/// BCP-47 tag → display string.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageMap(BTreeMap<String, String>);

impl LanguageMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, tag: &str) -> Option<&str> {
        self.0.get(tag).map(String::as_str)
    }

    pub fn insert(&mut self, tag: impl Into<String>, text: impl Into<String>) {
        self.0.insert(tag.into(), text.into());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for LanguageMap {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub id: String,
    pub name: LanguageMap,
    pub description: LanguageMap,
    pub version: String,
    pub property_context: BTreeMap<String, String>,
    pub children: Vec<TemplateNode>,
    /// Unrecognized top-level keys, carried through serialization untouched.
    pub extras: BTreeMap<String, Value>,
}

impl Template {
    /// Property IRI for a key; keys absent from the context get
    /// `<templateId>#<key>`.
    pub fn property_iri(&self, key: &str) -> String {
        self.property_context
            .get(key)
            .cloned()
            .unwrap_or_else(|| format!("{}#{}", self.id, key))
    }

    /// Looks up a node by key path (`authors/name`).
    pub fn resolve_node(&self, path: &NodePath) -> Result<&TemplateNode, TemplateError> {
        let unknown = || TemplateError::UnknownPath(path.to_string());
        let (first, rest) = path.keys().split_first().ok_or_else(unknown)?;
        let mut node = find_child(&self.children, first).ok_or_else(unknown)?;
        for key in rest {
            node = find_child(node.children(), key).ok_or_else(unknown)?;
        }
        Ok(node)
    }

    /// Depth-first walk over every node with its key path.
    pub fn walk(&self) -> Vec<(NodePath, &TemplateNode)> {
        fn go<'a>(nodes: &'a [TemplateNode], parent: &NodePath, out: &mut Vec<(NodePath, &'a TemplateNode)>) {
            for n in nodes {
                let p = parent.child(&n.key);
                out.push((p.clone(), n));
                go(n.children(), &p, out);
            }
        }
        let mut out = Vec::new();
        go(&self.children, &NodePath::root(), &mut out);
        out
    }
}

/// Free-function form of [`Template::resolve_node`].
pub fn resolve_node<'t>(t: &'t Template, path: &str) -> Result<&'t TemplateNode, TemplateError> {
    let parsed: NodePath = path
        .parse()
        .map_err(|_| TemplateError::UnknownPath(path.to_owned()))?;
    t.resolve_node(&parsed)
}

pub(crate) fn find_child<'a>(nodes: &'a [TemplateNode], key: &str) -> Option<&'a TemplateNode> {
    nodes.iter().find(|n| n.key == key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateNode {
    pub key: String,
    pub label: LanguageMap,
    pub help: LanguageMap,
    pub cardinality: Cardinality,
    pub hidden: bool,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Field(Box<FieldSpec>),
    Element(Vec<TemplateNode>),
}

impl TemplateNode {
    pub fn children(&self) -> &[TemplateNode] {
        match &self.kind {
            NodeKind::Element(children) => children,
            NodeKind::Field(_) => &[],
        }
    }

    pub fn field(&self) -> Option<&FieldSpec> {
        match &self.kind {
            NodeKind::Field(f) => Some(f),
            NodeKind::Element(_) => None,
        }
    }

    pub fn is_element(&self) -> bool {
        matches!(self.kind, NodeKind::Element(_))
    }

    /// Multi-valued nodes hold a list of repetitions and are addressed with
    /// indices. Checkbox fields are always multi-valued (one slot per
    /// selection).
    pub fn is_multi_valued(&self) -> bool {
        self.cardinality.max != Some(1)
            || self.field().is_some_and(|f| f.field_type == FieldType::Checkbox)
    }

    pub fn is_required(&self) -> bool {
        self.field().is_some_and(|f| f.required)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub field_type: FieldType,
    pub required: bool,
    pub default: Option<FieldValue>,
    pub constraints: Constraints,
}

impl FieldSpec {
    /// The literal datatype values of this field carry.
    pub fn literal_datatype(&self) -> &'static str {
        match self.field_type {
            FieldType::Number => match self.constraints.number_kind.unwrap_or_default() {
                NumberKind::Integer => value::XSD_INTEGER,
                NumberKind::Decimal => value::XSD_DECIMAL,
            },
            FieldType::Temporal => match self.constraints.granularity.unwrap_or_default() {
                Granularity::Date => value::XSD_DATE,
                Granularity::Datetime => value::XSD_DATETIME,
                Granularity::Time => value::XSD_TIME,
            },
            FieldType::Boolean => value::XSD_BOOLEAN,
            FieldType::Link | FieldType::Image | FieldType::Video => value::XSD_ANY_URI,
            FieldType::Text
            | FieldType::List
            | FieldType::Checkbox
            | FieldType::ControlledTerm
            | FieldType::ExternalAuthority => value::XSD_STRING,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldType {
    Text,
    Number,
    Temporal,
    Boolean,
    Checkbox,
    List,
    Link,
    ControlledTerm,
    ExternalAuthority,
    Image,
    Video,
}

impl FieldType {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Text => "text",
            Self::Number => "number",
            Self::Temporal => "temporal",
            Self::Boolean => "boolean",
            Self::Checkbox => "checkbox",
            Self::List => "list",
            Self::Link => "link",
            Self::ControlledTerm => "controlled_term",
            Self::ExternalAuthority => "external_authority",
            Self::Image => "image",
            Self::Video => "video",
        }
    }

    /// Image and video fields only display content.
    pub fn is_render_only(self) -> bool {
        matches!(self, Self::Image | Self::Video)
    }
}

impl FromStr for FieldType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        serde_json::from_value(Value::String(s.to_owned())).map_err(|_| ())
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Allowed repetition count; `max: None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cardinality {
    pub min: u32,
    pub max: Option<u32>,
}

impl Cardinality {
    pub const ONE: Cardinality = Cardinality { min: 1, max: Some(1) };
    pub const OPTIONAL: Cardinality = Cardinality { min: 0, max: Some(1) };

    pub fn allows(&self, count: usize) -> bool {
        count >= self.min as usize && self.max.is_none_or(|m| count <= m as usize)
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(m) => write!(f, "({} .. {})", self.min, m),
            None => write!(f, "({} .. \u{221e})", self.min),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumberKind {
    Integer,
    #[default]
    Decimal,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Date,
    Datetime,
    Time,
}

/// Anchored whole-string pattern; compiled once at parse time.
#[derive(Debug, Clone)]
pub struct Pattern {
    source: String,
    compiled: Option<Regex>,
}

impl Pattern {
    pub fn new(source: impl Into<String>) -> Self {
        let source = source.into();
        let compiled = Regex::new(&format!("^(?:{source})$")).ok();
        Self { source, compiled }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `None` when the source is not a valid regular expression.
    pub fn regex(&self) -> Option<&Regex> {
        self.compiled.as_ref()
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiteralOption {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iri: Option<String>,
}

/// Where a controlled-term field draws its values from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "sourceType", rename_all = "snake_case", rename_all_fields = "camelCase")]
pub enum TermSourceSpec {
    Ontology { acronym: String },
    Branch { acronym: String, root_iri: String },
    ValueSet { acronym: String, value_set_id: String },
}

impl TermSourceSpec {
    pub fn acronym(&self) -> &str {
        match self {
            Self::Ontology { acronym } | Self::Branch { acronym, .. } | Self::ValueSet { acronym, .. } => {
                acronym
            }
        }
    }
}

/// Per-type constraints. Only the members relevant to the field's type are
/// ever populated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
    pub regex: Option<Pattern>,
    pub number_kind: Option<NumberKind>,
    pub min_value: Option<Decimal>,
    pub max_value: Option<Decimal>,
    pub granularity: Option<Granularity>,
    pub literals: Vec<LiteralOption>,
    pub sources: Vec<TermSourceSpec>,
    pub authority: Option<AuthoritySource>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Error => "error",
            Self::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TemplateIssueCode {
    MalformedJson,
    SchemaViolation,
    DuplicateKey,
    BadCardinality,
    EmptyTermSources,
    BadRegex,
    BadIri,
    EmptyLiterals,
}

impl TemplateIssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MalformedJson => "MALFORMED_JSON",
            Self::SchemaViolation => "SCHEMA_VIOLATION",
            Self::DuplicateKey => "DUPLICATE_KEY",
            Self::BadCardinality => "BAD_CARDINALITY",
            Self::EmptyTermSources => "EMPTY_TERM_SOURCES",
            Self::BadRegex => "BAD_REGEX",
            Self::BadIri => "BAD_IRI",
            Self::EmptyLiterals => "EMPTY_LITERALS",
        }
    }
}

impl fmt::Display for TemplateIssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finding about a template. `path` is a key path; the empty string
/// addresses the template itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateIssue {
    pub severity: Severity,
    pub path: String,
    pub code: TemplateIssueCode,
    pub message: String,
}

impl TemplateIssue {
    pub(crate) fn error(path: impl ToString, code: TemplateIssueCode, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            path: path.to_string(),
            code,
            message: message.into(),
        }
    }

    pub(crate) fn warning(path: impl ToString, code: TemplateIssueCode, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(path, code, message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("duplicate sibling key at `{path}`")]
    DuplicateKey { path: String },
    #[error("unknown template path `{0}`")]
    UnknownPath(String),
}

impl TemplateError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MalformedJson(_) => "MALFORMED_JSON",
            Self::SchemaViolation { .. } => "SCHEMA_VIOLATION",
            Self::DuplicateKey { .. } => "DUPLICATE_KEY",
            Self::UnknownPath(_) => "UNKNOWN_PATH",
        }
    }

    /// Parse failures expressed as a template issue, for reporting alongside
    /// [`validate_template`] findings.
    pub fn to_issue(&self) -> TemplateIssue {
        let (path, code) = match self {
            Self::MalformedJson(_) => (String::new(), TemplateIssueCode::MalformedJson),
            Self::SchemaViolation { path, .. } => (path.clone(), TemplateIssueCode::SchemaViolation),
            Self::DuplicateKey { path } => (path.clone(), TemplateIssueCode::DuplicateKey),
            Self::UnknownPath(p) => (p.clone(), TemplateIssueCode::SchemaViolation),
        };
        TemplateIssue::error(path, code, self.to_string())
    }
}

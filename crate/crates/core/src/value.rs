//! Field values and their JSON-LD value-object form.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use crate::identifier::AuthoritySource;

pub const XSD_STRING: &str = "xsd:string";
pub const XSD_INTEGER: &str = "xsd:integer";
pub const XSD_DECIMAL: &str = "xsd:decimal";
pub const XSD_DATE: &str = "xsd:date";
pub const XSD_DATETIME: &str = "xsd:dateTime";
pub const XSD_TIME: &str = "xsd:time";
pub const XSD_BOOLEAN: &str = "xsd:boolean";
pub const XSD_ANY_URI: &str = "xsd:anyURI";

pub const RDFS_LABEL: &str = "rdfs:label";

/// A single value slot in an instance.
///
/// Literal datatypes are kept in compact `xsd:` form, matching what is
/// written to JSON-LD.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub enum FieldValue {
    Literal {
        value: String,
        datatype: String,
    },
    Term {
        iri: String,
        label: String,
    },
    Authority {
        source: AuthoritySource,
        id: String,
        label: String,
    },
    #[default]
    Empty,
}

impl FieldValue {
    pub fn literal(value: impl Into<String>, datatype: &str) -> Self {
        Self::Literal {
            value: value.into(),
            datatype: datatype.to_owned(),
        }
    }

    pub fn string(value: impl Into<String>) -> Self {
        Self::literal(value, XSD_STRING)
    }

    pub fn term(iri: impl Into<String>, label: impl Into<String>) -> Self {
        Self::Term {
            iri: iri.into(),
            label: label.into(),
        }
    }

    pub fn authority(source: AuthoritySource, id: impl Into<String>, label: impl Into<String>) -> Self {
        Self::Authority {
            source,
            id: id.into(),
            label: label.into(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Self::Empty)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Literal { .. } => "literal",
            Self::Term { .. } => "term",
            Self::Authority { .. } => "authority",
            Self::Empty => "empty",
        }
    }

    /// JSON-LD value object; `Empty` becomes `null`.
    pub fn to_jsonld(&self) -> Value {
        let mut obj = Map::new();
        match self {
            Self::Literal { value, datatype } => {
                obj.insert("@value".into(), Value::String(value.clone()));
                obj.insert("@type".into(), Value::String(datatype.clone()));
            }
            Self::Term { iri: id, label } | Self::Authority { id, label, .. } => {
                obj.insert("@id".into(), Value::String(id.clone()));
                obj.insert(RDFS_LABEL.into(), Value::String(label.clone()));
            }
            Self::Empty => return Value::Null,
        }
        Value::Object(obj)
    }
}

impl Serialize for FieldValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Literal { value, datatype } => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("@type", datatype)?;
                m.serialize_entry("@value", value)?;
                m.end()
            }
            Self::Term { iri: id, label } | Self::Authority { id, label, .. } => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("@id", id)?;
                m.serialize_entry(RDFS_LABEL, label)?;
                m.end()
            }
            Self::Empty => s.serialize_none(),
        }
    }
}

//! Metadata templates, instances and quality reports.
//!
//! A [`Template`] describes a form; a [`MetadataInstance`] holds the values
//! entered against it and serializes to JSON-LD.

pub mod decimal;
pub mod identifier;
pub mod instance;
pub mod path;
pub mod quality;
pub mod template;
#[cfg(any(test, feature = "testing"))]
pub mod testing;
pub mod value;

pub use decimal::Decimal;
pub use identifier::{validate_orcid_checksum, AuthoritySource, IdentifierError};
pub use instance::{
    new_instance, parse_instance, parse_instance_str, render_plan, serialize_jsonld, validate_instance, InstanceError, IssueCode,
    MetadataInstance, ParsedInstance, RenderMode, RenderPlan, ValidationIssue, Widget, WidgetState, WidgetType,
};
pub use path::{NodePath, ValuePath};
pub use quality::{generate_report, render_report_text, FieldStatus, QualityReport};
pub use template::{
    language_chain, localized_label, parse_template, parse_template_lenient, parse_template_str, resolve_node, template_fingerprint,
    validate_template, Cardinality, FieldType, Severity, Template, TemplateError, TemplateIssue, TemplateIssueCode, TemplateNode,
};
pub use value::FieldValue;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{validate_instance, InstanceError, MetadataInstance, Record, Slots, ValidationIssue};
use crate::identifier::AuthoritySource;
use crate::path::ValuePath;
use crate::template::{
    localized_help, localized_label, localized_text, FallbackDiagnostic, FieldType, LiteralOption, NodeKind, Severity, Template,
    TemplateNode, TermSourceSpec,
};
use crate::value::FieldValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Entry,
    Edit,
    View,
}

impl RenderMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Entry => "entry",
            Self::Edit => "edit",
            Self::View => "view",
        }
    }
}

impl FromStr for RenderMode {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "entry" => Ok(Self::Entry),
            "edit" => Ok(Self::Edit),
            "view" => Ok(Self::View),
            other => Err(InstanceError::BadMode(other.to_owned())),
        }
    }
}

impl fmt::Display for RenderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Widget kinds: one per field type, plus element groups and the
/// add/remove controls of multi-valued nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetType {
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
    Group,
    RepeatControls,
}

impl From<FieldType> for WidgetType {
    fn from(t: FieldType) -> Self {
        match t {
            FieldType::Text => Self::Text,
            FieldType::Number => Self::Number,
            FieldType::Temporal => Self::Temporal,
            FieldType::Boolean => Self::Boolean,
            FieldType::Checkbox => Self::Checkbox,
            FieldType::List => Self::List,
            FieldType::Link => Self::Link,
            FieldType::ControlledTerm => Self::ControlledTerm,
            FieldType::ExternalAuthority => Self::ExternalAuthority,
            FieldType::Image => Self::Image,
            FieldType::Video => Self::Video,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WidgetState {
    Valid,
    Invalid,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepeatInfo {
    pub count: usize,
    pub min: u32,
    pub max: Option<u32>,
    /// Display form, e.g. `(1 .. ∞)`.
    pub cardinality: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Widget {
    pub path: ValuePath,
    pub widget_type: WidgetType,
    pub label: String,
    pub help: String,
    pub required: bool,
    pub editable: bool,
    pub hidden: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current_value: Option<FieldValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<LiteralOption>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub authority: Option<AuthoritySource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_sources: Option<Vec<TermSourceSpec>>,
    pub state: WidgetState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeat: Option<RepeatInfo>,
}

/// A language fallback that happened while labelling a widget (or, at the
/// root path, the plan title).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WidgetDiagnostic {
    pub path: ValuePath,
    /// `label`, `help` or `title`.
    pub text: &'static str,
    #[serde(flatten)]
    pub fallback: FallbackDiagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderPlan {
    pub template_id: String,
    pub mode: RenderMode,
    pub language: String,
    pub title: String,
    pub widgets: Vec<Widget>,
    pub issues: Vec<ValidationIssue>,
    pub diagnostics: Vec<WidgetDiagnostic>,
}

impl RenderPlan {
    /// Sorted-key JSON.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("render plans always serialize")
    }
}

struct Ctx<'a> {
    mode: RenderMode,
    chain: &'a [String],
    issues: &'a [ValidationIssue],
    widgets: Vec<Widget>,
    diagnostics: Vec<WidgetDiagnostic>,
}

/// Computes the form a UI must draw: widgets in depth-first template order,
/// expanded by the instance's current repetitions. Widget state reflects
/// draft-mode validation.
pub fn render_plan(t: &Template, i: &MetadataInstance, mode: RenderMode, chain: &[String]) -> Result<RenderPlan, InstanceError> {
    let issues = validate_instance(t, i, false)?;
    let (title, title_diags) = localized_text(&t.name, chain, &t.id);
    let mut ctx = Ctx {
        mode,
        chain,
        issues: &issues,
        widgets: Vec::new(),
        diagnostics: title_diags
            .into_iter()
            .map(|fallback| WidgetDiagnostic {
                path: ValuePath::root(),
                text: "title",
                fallback,
            })
            .collect(),
    };
    walk(&mut ctx, &t.children, i.root(), &ValuePath::root(), false);
    let Ctx { widgets, diagnostics, .. } = ctx;
    Ok(RenderPlan {
        template_id: t.id.clone(),
        mode,
        language: chain.first().cloned().unwrap_or_default(),
        title,
        widgets,
        issues,
        diagnostics,
    })
}

fn walk(ctx: &mut Ctx<'_>, nodes: &[TemplateNode], rec: &Record, parent: &ValuePath, hidden_above: bool) {
    for n in nodes {
        let hidden = hidden_above || n.hidden;
        let multi = n.is_multi_valued();
        let slots = rec.get(&n.key);
        let count = slots.map_or(0, Slots::len);
        if multi && ctx.mode != RenderMode::View {
            let path = parent.child(&n.key, None);
            let mut w = base_widget(ctx, n, path, WidgetType::RepeatControls, hidden);
            w.required = n.cardinality.min > 0;
            w.repeat = Some(RepeatInfo {
                count,
                min: n.cardinality.min,
                max: n.cardinality.max,
                cardinality: n.cardinality.to_string(),
            });
            ctx.widgets.push(w);
        }
        match (&n.kind, slots) {
            (NodeKind::Field(spec), Some(Slots::Field(vals))) => {
                for (idx, v) in vals.iter().enumerate() {
                    let path = parent.child(&n.key, multi.then_some(idx));
                    let mut w = base_widget(ctx, n, path, spec.field_type.into(), hidden);
                    w.required = spec.required;
                    w.editable = w.editable && !spec.field_type.is_render_only();
                    w.current_value = (!v.is_empty()).then(|| v.clone());
                    let k = &spec.constraints;
                    match spec.field_type {
                        FieldType::List | FieldType::Checkbox => w.options = Some(k.literals.clone()),
                        FieldType::ControlledTerm => w.term_sources = Some(k.sources.clone()),
                        FieldType::ExternalAuthority => w.authority = k.authority,
                        _ => {}
                    }
                    ctx.widgets.push(w);
                }
            }
            (NodeKind::Element(children), Some(Slots::Element(recs))) => {
                for (idx, r) in recs.iter().enumerate() {
                    let path = parent.child(&n.key, multi.then_some(idx));
                    let mut w = base_widget(ctx, n, path.clone(), WidgetType::Group, hidden);
                    w.required = n.cardinality.min > 0;
                    ctx.widgets.push(w);
                    walk(ctx, children, r, &path, hidden);
                }
            }
            _ => {}
        }
    }
}

fn base_widget(ctx: &mut Ctx<'_>, n: &TemplateNode, path: ValuePath, widget_type: WidgetType, hidden: bool) -> Widget {
    let (label, label_diags) = localized_label(n, ctx.chain);
    let (help, help_diags) = localized_help(n, ctx.chain);
    for (text, diags) in [("label", label_diags), ("help", help_diags)] {
        ctx.diagnostics.extend(diags.into_iter().map(|fallback| WidgetDiagnostic {
            path: path.clone(),
            text,
            fallback,
        }));
    }
    let state = state_at(ctx.issues, &path);
    Widget {
        path,
        widget_type,
        label,
        help,
        required: false,
        editable: ctx.mode != RenderMode::View,
        hidden,
        current_value: None,
        options: None,
        authority: None,
        term_sources: None,
        state,
        repeat: None,
    }
}

fn state_at(issues: &[ValidationIssue], path: &ValuePath) -> WidgetState {
    let mut state = WidgetState::Valid;
    for i in issues.iter().filter(|i| i.path.starts_with(path)) {
        match i.severity {
            Severity::Error => return WidgetState::Invalid,
            Severity::Warning => state = WidgetState::Incomplete,
        }
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::new_instance;
    use crate::template::{language_chain, parse_template_str};

    fn fig2() -> Template {
        parse_template_str(
            r#"{"id":"https://ex.org/t/rnaseq","name":{"en":"RNAseq"},"version":"1.0.0","children":[
              {"kind":"field","key":"parent_sample_id","label":{"en":"Parent sample ID"},"fieldType":"text","required":true},
              {"kind":"field","key":"lab_id","label":{"en":"Lab ID"},"fieldType":"text"},
              {"kind":"field","key":"analyte_class","label":{"en":"Analyte class"},"fieldType":"list","required":true,
               "constraints":{"literals":["Chromatin","Collagen","DNA","DNA + RNA","Endogenous fluorophore","Fluorochrome","Lipid"]}},
              {"kind":"element","key":"authors","label":{"en":"Author"},"cardinality":{"min":1},"children":[
                 {"kind":"field","key":"name","label":{"en":"Name"},"fieldType":"text"}]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn entry_plan_order_and_options() {
        let t = fig2();
        let plan = render_plan(&t, &new_instance(&t), RenderMode::Entry, &language_chain("en")).unwrap();
        let order: Vec<(String, WidgetType)> = plan.widgets.iter().map(|w| (w.path.to_string(), w.widget_type)).collect();
        assert_eq!(
            order,
            vec![
                ("parent_sample_id".into(), WidgetType::Text),
                ("lab_id".into(), WidgetType::Text),
                ("analyte_class".into(), WidgetType::List),
                ("authors".into(), WidgetType::RepeatControls),
                ("authors[0]".into(), WidgetType::Group),
                ("authors[0]/name".into(), WidgetType::Text),
            ]
        );
        assert_eq!(plan.widgets[2].options.as_ref().unwrap().len(), 7);
        assert_eq!(plan.widgets[0].state, WidgetState::Incomplete);
        assert_eq!(plan.widgets[1].state, WidgetState::Valid);
        assert_eq!(plan.widgets[3].repeat.as_ref().unwrap().cardinality, "(1 .. \u{221e})");
        assert!(plan.diagnostics.is_empty());
    }

    #[test]
    fn view_mode_is_read_only() {
        let t = fig2();
        let plan = render_plan(&t, &new_instance(&t), RenderMode::View, &language_chain("en")).unwrap();
        assert!(plan.widgets.iter().all(|w| !w.editable));
        assert!(plan.widgets.iter().all(|w| w.widget_type != WidgetType::RepeatControls));
        assert_eq!(plan.widgets.len(), 5);
    }

    #[test]
    fn german_falls_back_to_english() {
        let t = fig2();
        let plan = render_plan(&t, &new_instance(&t), RenderMode::Entry, &language_chain("de")).unwrap();
        assert_eq!(plan.widgets[0].label, "Parent sample ID");
        assert_eq!(plan.title, "RNAseq");
        let label_diags = plan.diagnostics.iter().filter(|d| d.text == "label").count();
        assert_eq!(label_diags, plan.widgets.len());
        assert!(plan.diagnostics.iter().all(|d| d.fallback.requested_tag == "de"));
    }

    #[test]
    fn bad_mode() {
        assert!(matches!("print".parse::<RenderMode>(), Err(InstanceError::BadMode(_))));
    }
}

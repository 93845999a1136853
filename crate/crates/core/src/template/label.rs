use serde::Serialize;

use super::{LanguageMap, TemplateNode};

/// What a fallback ended up serving.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "value")]
pub enum LabelServed {
    Tag(String),
    Key(String),
}

/// Recorded whenever a label could not be served in the first requested
/// language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FallbackDiagnostic {
    pub requested_tag: String,
    pub served: LabelServed,
}

/// Resolves a node's label along `chain`, then `en`, then the smallest
/// available tag, then the node key. Never returns an empty string.
pub fn localized_label(node: &TemplateNode, chain: &[String]) -> (String, Vec<FallbackDiagnostic>) {
    localized_text(&node.label, chain, &node.key)
}

/// [`localized_label`] over any language map; `key` is served when the map
/// has no usable entry.
pub fn localized_text(map: &LanguageMap, chain: &[String], key: &str) -> (String, Vec<FallbackDiagnostic>) {
    match lookup(map, chain) {
        Some((text, None)) => (text, Vec::new()),
        Some((text, Some(served))) => (text, vec![diagnostic(chain, LabelServed::Tag(served))]),
        None => (key.to_owned(), vec![diagnostic(chain, LabelServed::Key(key.to_owned()))]),
    }
}

/// Same fallback chain for help text, which may legitimately be absent:
/// an empty help map yields `""` without a diagnostic.
pub(crate) fn localized_help(node: &TemplateNode, chain: &[String]) -> (String, Vec<FallbackDiagnostic>) {
    match lookup(&node.help, chain) {
        Some((text, None)) => (text, Vec::new()),
        Some((text, Some(served))) => (text, vec![diagnostic(chain, LabelServed::Tag(served))]),
        None => (String::new(), Vec::new()),
    }
}

fn diagnostic(chain: &[String], served: LabelServed) -> FallbackDiagnostic {
    FallbackDiagnostic {
        requested_tag: chain.first().cloned().unwrap_or_default(),
        served,
    }
}

/// `Some((text, None))` when served by the first chain entry,
/// `Some((text, Some(tag)))` for a fallback, `None` when nothing usable.
fn lookup(map: &LanguageMap, chain: &[String]) -> Option<(String, Option<String>)> {
    let usable = |tag: &str| map.get(tag).filter(|s| !s.is_empty());
    for (i, tag) in chain.iter().enumerate() {
        if let Some(text) = usable(tag) {
            return Some((text.to_owned(), (i > 0).then(|| tag.clone())));
        }
    }
    if let Some(text) = usable("en") {
        return Some((text.to_owned(), Some("en".into())));
    }
    map.iter()
        .find(|(_, text)| !text.is_empty())
        .map(|(tag, text)| (text.to_owned(), Some(tag.to_owned())))
}

/// Expands a requested tag into a lookup chain: `pt-BR` → `[pt-BR, pt]`.
pub fn language_chain(tag: &str) -> Vec<String> {
    let mut chain = vec![tag.to_owned()];
    let mut current = tag;
    while let Some((base, _)) = current.rsplit_once('-') {
        chain.push(base.to_owned());
        current = base;
    }
    chain
}

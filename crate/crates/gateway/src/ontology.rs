use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use metaforge_core::template::TermSourceSpec;
use serde::{Deserialize, Serialize};

use crate::{normalize_query, GatewayError, TermSuggestion};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VocabularyTerm {
    pub iri: String,
    pub label: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    pub source_acronym: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_iri: Option<String>,
}

/// Local term index standing in for an ontology repository.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<VocabularyTerm>,
    children: BTreeMap<String, Vec<usize>>,
}

impl Vocabulary {
    pub fn new(terms: Vec<VocabularyTerm>) -> Self {
        let mut children: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, t) in terms.iter().enumerate() {
            if let Some(p) = &t.parent_iri {
                children.entry(p.clone()).or_default().push(i);
            }
        }
        Self { terms, children }
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::UpstreamError {
            status: None,
            message: format!("{}: {e}", path.display()),
        })?;
        let terms = serde_json::from_str(&text).map_err(|e| GatewayError::UpstreamShape(format!("{}: {e}", path.display())))?;
        Ok(Self::new(terms))
    }

    pub fn terms(&self) -> &[VocabularyTerm] {
        &self.terms
    }

    pub fn has_acronym(&self, acronym: &str) -> bool {
        self.terms.iter().any(|t| t.source_acronym.eq_ignore_ascii_case(acronym))
    }

    /// Indices of the strict descendants of `root`.
    fn descendants(&self, root: &str) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![root.to_owned()];
        while let Some(iri) = stack.pop() {
            for &i in self.children.get(&iri).into_iter().flatten() {
                if out.insert(i) {
                    stack.push(self.terms[i].iri.clone());
                }
            }
        }
        out
    }

    fn in_source(&self, src: &TermSourceSpec) -> BTreeSet<usize> {
        let acronym = src.acronym();
        let same = |i: &usize| self.terms[*i].source_acronym.eq_ignore_ascii_case(acronym);
        match src {
            TermSourceSpec::Ontology { .. } => (0..self.terms.len()).filter(same).collect(),
            TermSourceSpec::Branch { root_iri, .. } => self.descendants(root_iri).into_iter().filter(same).collect(),
            TermSourceSpec::ValueSet { value_set_id, .. } => (0..self.terms.len())
                .filter(|i| same(i) && self.terms[*i].parent_iri.as_deref() == Some(value_set_id.as_str()))
                .collect(),
        }
    }
}

/// Case-insensitive search over labels and synonyms. Ranked exact label,
/// label prefix, label substring, then synonym; ties by label, then IRI.
pub fn search_terms(vocab: &Vocabulary, sources: &[TermSourceSpec], query: &str, limit: usize) -> Result<Vec<TermSuggestion>, GatewayError> {
    if sources.is_empty() {
        return Err(GatewayError::NoSources);
    }
    if let Some(s) = sources.iter().find(|s| !vocab.has_acronym(s.acronym())) {
        return Err(GatewayError::UnknownSourceAcronym(s.acronym().to_owned()));
    }
    let q = normalize_query(query);
    if q.is_empty() {
        return Err(GatewayError::QueryEmpty);
    }
    let pool: BTreeSet<usize> = sources.iter().flat_map(|s| vocab.in_source(s)).collect();
    let mut ranked: Vec<(u8, &VocabularyTerm)> = pool
        .into_iter()
        .filter_map(|i| {
            let t = &vocab.terms[i];
            let label = t.label.to_lowercase();
            let tier = if label == q {
                0
            } else if label.starts_with(&q) {
                1
            } else if label.contains(&q) {
                2
            } else if t.synonyms.iter().any(|s| s.to_lowercase().contains(&q)) {
                3
            } else {
                return None;
            };
            Some((tier, t))
        })
        .collect();
    ranked.sort_by(|a, b| (a.0, &a.1.label, &a.1.iri).cmp(&(b.0, &b.1.label, &b.1.iri)));
    ranked.dedup_by(|a, b| a.1.iri == b.1.iri);
    Ok(ranked
        .into_iter()
        .take(limit)
        .map(|(_, t)| TermSuggestion {
            iri: t.iri.clone(),
            label: t.label.clone(),
            synonyms: t.synonyms.clone(),
            source_acronym: t.source_acronym.clone(),
        })
        .collect())
}

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, SecondsFormat, Utc};
use metaforge_core::{parse_template, template_fingerprint, Template};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt store file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Writes `bytes` to a temp file in the target directory, then renames it
/// into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().expect("store paths have a parent");
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| StoreError::Io {
        path: path.to_owned(),
        source: e.error,
    })?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct EntryFile {
    id: String,
    fingerprint: String,
    registered_at: String,
    document: Value,
}

#[derive(Debug)]
pub struct RegistryEntry {
    pub id: String,
    pub fingerprint: String,
    pub registered_at: DateTime<Utc>,
    /// Canonical template JSON.
    pub document: Value,
    pub template: Template,
}

impl RegistryEntry {
    pub fn summary(&self) -> Value {
        serde_json::json!({
            "id": self.id,
            "fingerprint": self.fingerprint,
            "registeredAt": self.registered_at.to_rfc3339_opts(SecondsFormat::Secs, true),
        })
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.summary();
        v["document"] = self.document.clone();
        v
    }
}

pub enum Registered {
    Created(Arc<RegistryEntry>),
    Existing(Arc<RegistryEntry>),
    Conflict(Arc<RegistryEntry>),
}

/// File-backed template registry: one `templates/<fingerprint>.json` per
/// version. Entries are never rewritten; `force` only moves the id to a new
/// fingerprint.
pub struct Registry {
    dir: PathBuf,
    by_id: RwLock<BTreeMap<String, Arc<RegistryEntry>>>,
    by_fingerprint: RwLock<BTreeMap<String, Arc<RegistryEntry>>>,
    write: Mutex<()>,
}

impl Registry {
    pub fn open(data_dir: &Path) -> Result<Self, StoreError> {
        let dir = data_dir.join("templates");
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut entries = Vec::new();
        for item in std::fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = item.map_err(io_err(&dir))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                entries.push(Arc::new(load_entry(&path)?));
            }
        }
        // oldest first so the latest registration of an id wins
        entries.sort_by(|a, b| (a.registered_at, &a.fingerprint).cmp(&(b.registered_at, &b.fingerprint)));
        let mut by_id = BTreeMap::new();
        let mut by_fingerprint = BTreeMap::new();
        for e in entries {
            by_id.insert(e.id.clone(), e.clone());
            by_fingerprint.insert(e.fingerprint.clone(), e);
        }
        Ok(Self {
            dir,
            by_id: RwLock::new(by_id),
            by_fingerprint: RwLock::new(by_fingerprint),
            write: Mutex::new(()),
        })
    }

    /// Latest entry for a template id, or the entry with that fingerprint.
    pub fn get(&self, id_or_fingerprint: &str) -> Option<Arc<RegistryEntry>> {
        let hit = self.by_id.read().unwrap_or_else(|e| e.into_inner()).get(id_or_fingerprint).cloned();
        hit.or_else(|| self.by_fingerprint.read().unwrap_or_else(|e| e.into_inner()).get(id_or_fingerprint).cloned())
    }

    pub fn list(&self) -> Vec<Arc<RegistryEntry>> {
        self.by_id.read().unwrap_or_else(|e| e.into_inner()).values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.by_id.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn register(&self, template: Template, force: bool) -> Result<Registered, StoreError> {
        let _guard = self.write.lock().unwrap_or_else(|e| e.into_inner());
        let fingerprint = template_fingerprint(&template);
        if let Some(existing) = self.get_by_id(&template.id) {
            if existing.fingerprint == fingerprint {
                return Ok(Registered::Existing(existing));
            }
            if !force {
                return Ok(Registered::Conflict(existing));
            }
        }
        let entry = match self.by_fingerprint.read().unwrap_or_else(|e| e.into_inner()).get(&fingerprint) {
            Some(e) => e.clone(),
            None => {
                let e = Arc::new(RegistryEntry {
                    id: template.id.clone(),
                    fingerprint: fingerprint.clone(),
                    registered_at: now_secs(),
                    document: template.to_json(),
                    template,
                });
                let file = EntryFile {
                    id: e.id.clone(),
                    fingerprint: e.fingerprint.clone(),
                    registered_at: e.registered_at.to_rfc3339_opts(SecondsFormat::Secs, true),
                    document: e.document.clone(),
                };
                let bytes = serde_json::to_vec_pretty(&file).expect("entry serializes");
                write_atomic(&self.dir.join(format!("{fingerprint}.json")), &bytes)?;
                e
            }
        };
        self.by_fingerprint.write().unwrap_or_else(|e| e.into_inner()).insert(fingerprint, entry.clone());
        self.by_id.write().unwrap_or_else(|e| e.into_inner()).insert(entry.id.clone(), entry.clone());
        Ok(Registered::Created(entry))
    }

    fn get_by_id(&self, id: &str) -> Option<Arc<RegistryEntry>> {
        self.by_id.read().unwrap_or_else(|e| e.into_inner()).get(id).cloned()
    }
}

fn load_entry(path: &Path) -> Result<RegistryEntry, StoreError> {
    let corrupt = |message: String| StoreError::Corrupt {
        path: path.to_owned(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let file: EntryFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let template = parse_template(&file.document).map_err(|e| corrupt(e.to_string()))?;
    let fingerprint = template_fingerprint(&template);
    if fingerprint != file.fingerprint {
        return Err(corrupt(format!("fingerprint {} does not match content {fingerprint}", file.fingerprint)));
    }
    let registered_at = DateTime::parse_from_rfc3339(&file.registered_at)
        .map_err(|e| corrupt(e.to_string()))?
        .with_timezone(&Utc);
    Ok(RegistryEntry {
        id: file.id,
        fingerprint,
        registered_at,
        document: file.document,
        template,
    })
}

pub(crate) fn now_secs() -> DateTime<Utc> {
    let now = Utc::now();
    DateTime::from_timestamp(now.timestamp(), 0).unwrap_or(now)
}

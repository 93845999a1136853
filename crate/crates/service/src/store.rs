use std::path::{Path, PathBuf};

use chrono::SecondsFormat;
use data_encoding::BASE32_NOPAD;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::registry::{io_err, now_secs, write_atomic, StoreError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoredMeta {
    pub instance_id: String,
    pub template_id: String,
    pub template_fingerprint: String,
    pub stored_at: String,
    pub draft: bool,
}

/// Demo host-platform store: the submitted bytes in `<id>.jsonld` plus a
/// `<id>.meta.json` sidecar.
pub struct InstanceStore {
    dir: PathBuf,
}

impl InstanceStore {
    pub fn open(data_dir: &Path) -> Result<Self, StoreError> {
        let dir = data_dir.join("instances");
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self { dir })
    }

    pub fn put(&self, template_id: &str, template_fingerprint: &str, body: &[u8], draft: bool) -> Result<StoredMeta, StoreError> {
        let meta = StoredMeta {
            instance_id: new_instance_id(),
            template_id: template_id.to_owned(),
            template_fingerprint: template_fingerprint.to_owned(),
            stored_at: now_secs().to_rfc3339_opts(SecondsFormat::Secs, true),
            draft,
        };
        write_atomic(&self.document_path(&meta.instance_id), body)?;
        let meta_bytes = serde_json::to_vec_pretty(&meta).expect("meta serializes");
        write_atomic(&self.dir.join(format!("{}.meta.json", meta.instance_id)), &meta_bytes)?;
        Ok(meta)
    }

    /// The stored bytes and metadata, or None for an unknown id.
    pub fn get(&self, instance_id: &str) -> Result<Option<(Vec<u8>, StoredMeta)>, StoreError> {
        if !is_instance_id(instance_id) {
            return Ok(None);
        }
        let doc_path = self.document_path(instance_id);
        let body = match std::fs::read(&doc_path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(&doc_path)(e)),
        };
        let meta_path = self.dir.join(format!("{instance_id}.meta.json"));
        let text = std::fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
        let meta = serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
            path: meta_path,
            message: e.to_string(),
        })?;
        Ok(Some((body, meta)))
    }

    fn document_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonld"))
    }
}

/// 128 random bits, lowercase unpadded base32 (26 characters).
pub fn new_instance_id() -> String {
    let mut bytes = [0u8; 16];
    rand::thread_rng().fill_bytes(&mut bytes);
    BASE32_NOPAD.encode(&bytes).to_ascii_lowercase()
}

fn is_instance_id(s: &str) -> bool {
    s.len() == 26 && s.bytes().all(|b| b.is_ascii_lowercase() || (b'2'..=b'7').contains(&b))
}

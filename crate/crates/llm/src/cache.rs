//! On-disk response cache: one JSON file per request digest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::debug;

use crate::types::{Backend, GenerationRequest, GenerationResult, LlmError};

#[derive(Serialize, Deserialize)]
struct Entry {
    backend: String,
    request: GenerationRequest,
    response: Vec<GenerationResult>,
}

/// SHA-256 over the backend id and the serialized request.
pub fn cache_key(backend_id: &str, req: &GenerationRequest) -> String {
    let mut h = Sha256::new();
    h.update(backend_id.as_bytes());
    h.update([0u8]);
    h.update(serde_json::to_vec(req).expect("request serializes"));
    hex::encode(h.finalize())
}

pub struct CachedBackend<B> {
    inner: B,
    dir: PathBuf,
}

impl<B: Backend> CachedBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| LlmError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(CachedBackend { inner, dir })
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn lookup(&self, id: &str, key: &str, req: &GenerationRequest) -> Option<Vec<GenerationResult>> {
        let bytes = fs::read(self.path(key)).ok()?;
        let entry: Entry = serde_json::from_slice(&bytes).ok()?;
        (entry.backend == id && &entry.request == req).then_some(entry.response)
    }

    fn store(&self, key: &str, entry: &Entry) -> Result<(), LlmError> {
        let err = |e: std::io::Error| LlmError::Cache(e.to_string());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(err)?;
        serde_json::to_writer_pretty(&mut tmp, entry).map_err(|e| LlmError::Cache(e.to_string()))?;
        tmp.flush().map_err(err)?;
        tmp.persist(self.path(key)).map_err(|e| err(e.error))?;
        Ok(())
    }
}

impl<B: Backend> Backend for CachedBackend<B> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError> {
        let id = self.inner.id();
        let key = cache_key(&id, req);
        if let Some(hit) = self.lookup(&id, &key, req) {
            debug!(%key, "cache hit");
            return Ok(hit);
        }
        let response = self.inner.generate(req)?;
        self.store(
            &key,
            &Entry {
                backend: id,
                request: req.clone(),
                response: response.clone(),
            },
        )?;
        Ok(response)
    }
}

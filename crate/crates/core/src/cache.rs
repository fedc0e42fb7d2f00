//! Content-addressed cache for expensive integral coefficients.
//!
//! Values are keyed by strings that encode every input that could change the
//! number (family, weight, tuple, quadrature settings), so a cache can be
//! reused across runs and shared between the different evaluation routes
//! that provably need the same integrals. The on-disk format carries a
//! per-record checksum; a corrupted file is reported with the offending key
//! rather than silently feeding bad numbers into a computation.

use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::RwLock;

const MAGIC: &[u8; 4] = b"CQC\0";
const VERSION: u32 = 1;

/// Thread-safe map from coefficient keys to `(value, error_bound)` pairs.
#[derive(Debug, Default)]
pub struct CoefficientCache {
    entries: RwLock<HashMap<String, (f64, f64)>>,
}

fn record_checksum(key: &str, value: f64, error: f64) -> [u8; 8] {
    let mut hasher = Sha256::new();
    hasher.update(key.as_bytes());
    hasher.update(value.to_le_bytes());
    hasher.update(error.to_le_bytes());
    let digest = hasher.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    out
}

impl CoefficientCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.read().unwrap().is_empty()
    }

    pub fn get(&self, key: &str) -> Option<(f64, f64)> {
        self.entries.read().unwrap().get(key).copied()
    }

    pub fn insert(&self, key: String, value: f64, error: f64) {
        self.entries.write().unwrap().insert(key, (value, error));
    }

    pub fn clear(&self) {
        self.entries.write().unwrap().clear();
    }

    /// Keys in sorted order (for inspection and deterministic output).
    pub fn sorted_keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.entries.read().unwrap().keys().cloned().collect();
        keys.sort();
        keys
    }

    /// Returns the cached pair or computes, stores, and returns it. Under
    /// contention a value may be computed more than once; all computations
    /// of one key are identical by construction, so the race is harmless.
    pub fn get_or_compute<F>(&self, key: &str, compute: F) -> Result<(f64, f64)>
    where
        F: FnOnce() -> Result<(f64, f64)>,
    {
        if let Some(hit) = self.get(key) {
            return Ok(hit);
        }
        let pair = compute()?;
        self.insert(key.to_string(), pair.0, pair.1);
        Ok(pair)
    }

    /// Serializes all entries, sorted by key so equal contents produce
    /// byte-identical files.
    pub fn save(&self, path: &Path) -> Result<()> {
        let entries = self.entries.read().unwrap();
        let mut keys: Vec<&String> = entries.keys().collect();
        keys.sort();
        let mut buf = Vec::with_capacity(16 + entries.len() * 48);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(entries.len() as u64).to_le_bytes());
        for key in keys {
            let (value, error) = entries[key];
            buf.extend_from_slice(&(key.len() as u32).to_le_bytes());
            buf.extend_from_slice(key.as_bytes());
            buf.extend_from_slice(&value.to_le_bytes());
            buf.extend_from_slice(&error.to_le_bytes());
            buf.extend_from_slice(&record_checksum(key, value, error));
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    /// Loads a cache file, verifying the header and every record checksum.
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cursor = 0usize;
        let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
            if *cursor + n > bytes.len() {
                return Err(Error::Cache(format!(
                    "cache file truncated at byte {} ({} wanted, {} available)",
                    cursor,
                    n,
                    bytes.len() - *cursor
                )));
            }
            let slice = &bytes[*cursor..*cursor + n];
            *cursor += n;
            Ok(slice)
        };
        if take(&mut cursor, 4)? != MAGIC {
            return Err(Error::Cache("not a coefficient cache file".into()));
        }
        let version = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Cache(format!(
                "unsupported cache version {version} (expected {VERSION})"
            )));
        }
        let count = u64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        let mut map = HashMap::with_capacity(count as usize);
        for _ in 0..count {
            let key_len = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
            let key = String::from_utf8(take(&mut cursor, key_len)?.to_vec())
                .map_err(|_| Error::Cache("cache record key is not valid UTF-8".into()))?;
            let value = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
            let error = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
            let checksum: [u8; 8] = take(&mut cursor, 8)?.try_into().unwrap();
            if checksum != record_checksum(&key, value, error) {
                return Err(Error::Cache(format!(
                    "checksum mismatch for cache key '{key}': file is corrupted"
                )));
            }
            map.insert(key, (value, error));
        }
        if cursor != bytes.len() {
            return Err(Error::Cache(format!(
                "{} trailing bytes after the last cache record",
                bytes.len() - cursor
            )));
        }
        Ok(Self {
            entries: RwLock::new(map),
        })
    }
}

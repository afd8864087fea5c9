//! On-disk partner memory.
//!
//! Layout under the store root: `<id>/<version>.params` snapshots plus an
//! `index.json` mapping each id to its latest version, hash and metadata.
//! Snapshots are never rewritten; storing again adds the next version.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tangram_core::learning::PartnerMeta;
use tangram_core::nn::ParameterSet;
use tangram_core::Error;

use crate::error::{SimError, SimResult};
use crate::formats::snapshot;
use crate::fsio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub latest: u64,
    pub hash: String,
    pub meta: PartnerMeta,
}

pub type PartnerIndex = BTreeMap<String, IndexEntry>;

#[derive(Debug, Clone)]
pub struct PartnerStore {
    root: PathBuf,
    base: ParameterSet,
}

fn check_id(id: &str) -> SimResult<()> {
    let ok = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(SimError::Config(format!("partner id {id:?} must be nonempty ASCII letters, digits, '-' or '_'")))
    }
}

impl PartnerStore {
    pub fn open(root: &Path, base: ParameterSet) -> SimResult<Self> {
        fsio::create_dir_all(root)?;
        Ok(PartnerStore { root: root.to_path_buf(), base })
    }

    pub fn base(&self) -> &ParameterSet {
        &self.base
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.json")
    }

    pub fn snapshot_path(&self, id: &str, version: u64) -> PathBuf {
        self.root.join(id).join(format!("{version}.params"))
    }

    pub fn index(&self) -> SimResult<PartnerIndex> {
        let path = self.index_path();
        if !path.exists() {
            return Ok(PartnerIndex::new());
        }
        serde_json::from_str(&fsio::read_string(&path)?).map_err(|e| SimError::format(&path, e))
    }

    /// Persist `params` as the next version for `id` and return that version.
    pub fn store(&self, id: &str, params: &ParameterSet, meta: PartnerMeta) -> SimResult<u64> {
        check_id(id)?;
        let mut index = self.index()?;
        let version = index.get(id).map_or(1, |e| e.latest + 1);
        let path = self.snapshot_path(id, version);
        if path.exists() {
            return Err(SimError::format(&path, "snapshot already exists; the index is out of date"));
        }
        let params = params.clone().with_version(version);
        snapshot::save(&params, &path)?;
        index.insert(id.to_string(), IndexEntry { latest: version, hash: params.hash().to_string(), meta });
        let mut json = serde_json::to_vec_pretty(&index).expect("index serializes");
        json.push(b'\n');
        fsio::write_atomic(&self.index_path(), &json)?;
        Ok(version)
    }

    /// Latest snapshot for `id`, or the base parameters for an unknown id.
    pub fn retrieve(&self, id: &str) -> SimResult<ParameterSet> {
        check_id(id)?;
        match self.index()?.get(id) {
            None => Ok(self.base.clone()),
            Some(entry) => self.load_checked(id, entry.latest, &entry.hash),
        }
    }

    fn load_checked(&self, id: &str, version: u64, expected: &str) -> SimResult<ParameterSet> {
        let params = snapshot::load(&self.snapshot_path(id, version))?;
        if params.hash() != expected {
            return Err(Error::SnapshotIntegrity { expected: expected.to_string(), found: params.hash().to_string() }.into());
        }
        Ok(params)
    }

    /// Stored versions of `id`, oldest first.
    pub fn versions(&self, id: &str) -> SimResult<Vec<u64>> {
        check_id(id)?;
        Ok(self.index()?.get(id).map_or_else(Vec::new, |e| (1..=e.latest).filter(|v| self.snapshot_path(id, *v).exists()).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tangram_core::nn::NetSpec;

    fn params(seed: u64) -> ParameterSet {
        ParameterSet::init(NetSpec::perceiver(4, 8, 16, 16), seed).unwrap()
    }

    fn meta() -> PartnerMeta {
        PartnerMeta { trials: 3, last_accuracy: Some(0.5) }
    }

    #[test]
    fn unknown_partner_falls_back_to_base() {
        let dir = tempfile::tempdir().unwrap();
        let store = PartnerStore::open(dir.path(), params(1)).unwrap();
        assert_eq!(store.retrieve("nobody").unwrap().hash(), params(1).hash());
    }

    #[test]
    fn versions_accumulate() {
        let dir = tempfile::tempdir().unwrap();
        let store = PartnerStore::open(dir.path(), params(1)).unwrap();
        assert_eq!(store.store("bob", &params(2), meta()).unwrap(), 1);
        assert_eq!(store.store("bob", &params(3), meta()).unwrap(), 2);
        assert_eq!(store.retrieve("bob").unwrap().hash(), params(3).hash());
        assert_eq!(store.versions("bob").unwrap(), vec![1, 2]);
        assert_eq!(snapshot::load(&store.snapshot_path("bob", 1)).unwrap().hash(), params(2).hash());
    }

    #[test]
    fn bad_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = PartnerStore::open(dir.path(), params(1)).unwrap();
        assert!(store.store("../x", &params(2), meta()).is_err());
        assert!(store.retrieve("").is_err());
    }
}

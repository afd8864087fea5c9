//! Binary parameter snapshots.
//!
//! Layout: the 8-byte magic `TGPARAMS`, a little-endian `u32` header length,
//! a JSON header, then every tensor value as a little-endian `f64` in header
//! order. The header hash is checked against the decoded values on load.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tangram_core::nn::{NetSpec, ParameterSet, Tensor};
use tangram_core::Error;

use crate::error::{SimError, SimResult};
use crate::fsio;

const MAGIC: &[u8; 8] = b"TGPARAMS";
pub const SNAPSHOT_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: u32,
    pub spec: NetSpec,
    pub names: Vec<String>,
    pub shapes: Vec<Vec<usize>>,
    pub version: u64,
    pub hash: String,
}

pub fn encode(params: &ParameterSet) -> Vec<u8> {
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT,
        spec: params.spec().clone(),
        names: params.names().to_vec(),
        shapes: params.tensors().iter().map(|t| t.shape.clone()).collect(),
        version: params.version(),
        hash: params.hash().to_string(),
    };
    let json = serde_json::to_vec(&header).expect("snapshot header serializes");
    let values: usize = params.tensors().iter().map(Tensor::len).sum();
    let mut out = Vec::with_capacity(12 + json.len() + 8 * values);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for t in params.tensors() {
        for v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8], origin: &Path) -> SimResult<ParameterSet> {
    let bad = |detail: &str| SimError::format(origin, format!("not a parameter snapshot: {detail}"));
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic"));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = bytes.get(12..12 + header_len).ok_or_else(|| bad("truncated header"))?;
    let header: SnapshotHeader = serde_json::from_slice(body).map_err(|e| SimError::format(origin, e))?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(bad(&format!("unsupported format {}", header.format)));
    }
    if header.names.len() != header.shapes.len() {
        return Err(bad("names and shapes differ in length"));
    }
    let mut rest = &bytes[12 + header_len..];
    let mut tensors = Vec::with_capacity(header.shapes.len());
    for shape in &header.shapes {
        let n: usize = shape.iter().product();
        if rest.len() < 8 * n {
            return Err(bad("truncated values"));
        }
        let data = rest[..8 * n].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        rest = &rest[8 * n..];
        tensors.push(Tensor::new(shape.clone(), data).map_err(SimError::Core)?);
    }
    if !rest.is_empty() {
        return Err(bad("trailing bytes"));
    }
    // no saved parameter set holds a non-finite value, so one here means corruption
    let params = ParameterSet::from_tensors(header.spec, tensors, header.version).map_err(|e| match e {
        Error::NumericalOverflow { layer } => {
            Error::SnapshotIntegrity { expected: header.hash.clone(), found: format!("non-finite value in {layer}") }
        }
        other => other,
    })?;
    if params.names() != header.names.as_slice() {
        return Err(bad("tensor names do not match the network"));
    }
    if params.hash() != header.hash {
        return Err(Error::SnapshotIntegrity { expected: header.hash, found: params.hash().to_string() }.into());
    }
    Ok(params)
}

pub fn save(params: &ParameterSet, path: &Path) -> SimResult<()> {
    fsio::write_atomic(path, &encode(params))
}

pub fn load(path: &Path) -> SimResult<ParameterSet> {
    decode(&fsio::read(path)?, path)
}

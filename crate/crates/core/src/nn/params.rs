use alloc::{format, string::String, vec::Vec};

use sha2::{Digest, Sha256};

use super::{NetSpec, Tensor};
use crate::{seed, Error, Result};

/// Immutable snapshot of perceiver weights.
///
/// Tensors are kept in the order given by [`NetSpec::param_shapes`]. The
/// content hash covers names, shapes and values, but not the version tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    spec: NetSpec,
    names: Vec<String>,
    tensors: Vec<Tensor>,
    version: u64,
    hash: String,
}

impl ParameterSet {
    pub fn from_tensors(spec: NetSpec, tensors: Vec<Tensor>, version: u64) -> Result<Self> {
        let shapes = spec.param_shapes()?;
        if shapes.len() != tensors.len() {
            return Err(Error::ShapeMismatch {
                layer: "parameters".into(),
                detail: format!("expected {} tensors, got {}", shapes.len(), tensors.len()),
            });
        }
        for ((name, shape), t) in shapes.iter().zip(&tensors) {
            if *shape != t.shape || t.data.len() != shape.iter().product::<usize>() {
                return Err(Error::ShapeMismatch {
                    layer: name.clone(),
                    detail: format!("expected {shape:?}, got {:?}", t.shape),
                });
            }
            if !t.all_finite() {
                return Err(Error::NumericalOverflow { layer: name.clone() });
            }
        }
        let names: Vec<String> = shapes.into_iter().map(|(n, _)| n).collect();
        let hash = content_hash(&names, &tensors);
        Ok(ParameterSet { spec, names, tensors, version, hash })
    }

    pub fn zeros(spec: NetSpec) -> Result<Self> {
        let tensors = spec.param_shapes()?.into_iter().map(|(_, s)| Tensor::zeros(s)).collect();
        Self::from_tensors(spec, tensors, 0)
    }

    /// Seeded uniform initialisation with bound √(6 / fan_in); biases start at zero.
    pub fn init(spec: NetSpec, seed: u64) -> Result<Self> {
        use rand::Rng;
        let mut rng = seed::rng(seed);
        let mut tensors = Vec::new();
        for (name, shape) in spec.param_shapes()? {
            let mut t = Tensor::zeros(shape.clone());
            if name.ends_with(".w") {
                let fan_in: usize = shape[1..].iter().product();
                let bound = libm::sqrt(6.0 / fan_in as f64);
                for v in &mut t.data {
                    *v = rng.gen_range(-bound..bound);
                }
            }
            tensors.push(t);
        }
        Self::from_tensors(spec, tensors, 0)
    }

    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn with_version(mut self, version: u64) -> Self {
        self.version = version;
        self
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub(crate) fn tensor_data(&self, i: usize) -> &[f64] {
        &self.tensors[i].data
    }
}

fn content_hash(names: &[String], tensors: &[Tensor]) -> String {
    let mut h = Sha256::new();
    for (name, t) in names.iter().zip(tensors) {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((t.shape.len() as u64).to_le_bytes());
        for d in &t.shape {
            h.update((*d as u64).to_le_bytes());
        }
        for v in &t.data {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded_and_hash_tracks_values() {
        let spec = NetSpec::perceiver(4, 8, 16, 16);
        let a = ParameterSet::init(spec.clone(), 3).unwrap();
        let b = ParameterSet::init(spec.clone(), 3).unwrap();
        let c = ParameterSet::init(spec.clone(), 4).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.clone().with_version(9).hash(), a.hash());
        let bound = libm::sqrt(6.0 / 9.0);
        assert!(a.get("conv1.w").unwrap().data.iter().all(|v| v.abs() <= bound));
        assert!(a.get("conv1.b").unwrap().data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_shapes_name_the_layer() {
        let spec = NetSpec::perceiver(4, 8, 16, 16);
        let mut tensors: Vec<Tensor> = ParameterSet::zeros(spec.clone()).unwrap().tensors().to_vec();
        tensors[2] = Tensor::zeros(alloc::vec![1]);
        match ParameterSet::from_tensors(spec, tensors, 0) {
            Err(Error::ShapeMismatch { layer, .. }) => assert_eq!(layer, "conv2.w"),
            other => panic!("unexpected {other:?}"),
        }
    }
}

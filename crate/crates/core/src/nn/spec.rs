use alloc::{format, string::String, vec, vec::Vec};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layer {
    /// Valid-padding, stride-1 square convolution.
    Conv { name: String, filters: usize, kernel: usize },
    Relu,
    /// Non-overlapping max pooling (stride = size, floor).
    MaxPool { size: usize },
    Flatten,
    Dense { name: String, units: usize },
    Softmax,
}

/// Layer list of a single-channel image classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_height: usize,
    pub input_width: usize,
    pub layers: Vec<Layer>,
}

/// A layer with its input geometry resolved.
#[derive(Debug, Clone)]
pub(crate) enum Op {
    Conv { name: String, param: usize, in_c: usize, in_h: usize, in_w: usize, out_c: usize, k: usize },
    Relu,
    Pool { c: usize, in_h: usize, in_w: usize, size: usize },
    Flatten,
    Dense { name: String, param: usize, inputs: usize, outputs: usize },
    Softmax,
}

impl Op {
    pub(crate) fn name(&self) -> &str {
        match self {
            Op::Conv { name, .. } | Op::Dense { name, .. } => name,
            Op::Relu => "relu",
            Op::Pool { .. } => "maxpool",
            Op::Flatten => "flatten",
            Op::Softmax => "softmax",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub ops: Vec<Op>,
    pub shapes: Vec<(String, Vec<usize>)>,
    /// Index of the op whose input is the feature vector (the final dense layer).
    pub feature_op: usize,
    pub labels: usize,
}

impl NetSpec {
    /// Four 3×3 convolutions (8, 8, 16, 16 filters) with max pooling after
    /// each pair, then a hidden dense layer and a `labels`-way output.
    pub fn perceiver(labels: usize, hidden: usize, input_height: usize, input_width: usize) -> Self {
        let conv = |name: &str, filters| Layer::Conv { name: name.into(), filters, kernel: 3 };
        NetSpec {
            input_height,
            input_width,
            layers: vec![
                conv("conv1", 8),
                Layer::Relu,
                conv("conv2", 8),
                Layer::Relu,
                Layer::MaxPool { size: 2 },
                conv("conv3", 16),
                Layer::Relu,
                conv("conv4", 16),
                Layer::Relu,
                Layer::MaxPool { size: 2 },
                Layer::Flatten,
                Layer::Dense { name: "dense1".into(), units: hidden },
                Layer::Relu,
                Layer::Dense { name: "dense2".into(), units: labels },
                Layer::Softmax,
            ],
        }
    }

    /// The default 64×64 perceiver with a 64-unit hidden layer.
    pub fn default_perceiver(labels: usize) -> Self {
        Self::perceiver(labels, 64, 64, 64)
    }

    pub fn labels(&self) -> Result<usize> {
        Ok(self.plan()?.labels)
    }

    /// Length of the feature vector (input of the output layer).
    pub fn feature_len(&self) -> Result<usize> {
        let plan = self.plan()?;
        match &plan.ops[plan.feature_op] {
            Op::Dense { inputs, .. } => Ok(*inputs),
            _ => unreachable!("feature op is the output dense layer"),
        }
    }

    /// Parameter names and shapes in declaration order
    /// (`<layer>.w` then `<layer>.b`).
    pub fn param_shapes(&self) -> Result<Vec<(String, Vec<usize>)>> {
        Ok(self.plan()?.shapes)
    }

    pub(crate) fn plan(&self) -> Result<Plan> {
        let bad = |layer: &str, detail: String| Error::ShapeMismatch { layer: layer.into(), detail };
        let (mut c, mut h, mut w) = (1usize, self.input_height, self.input_width);
        let mut flat: Option<usize> = None;
        let mut ops = Vec::new();
        let mut shapes: Vec<(String, Vec<usize>)> = Vec::new();
        let mut last_dense = None;
        for layer in &self.layers {
            match layer {
                Layer::Conv { name, filters, kernel } => {
                    if flat.is_some() {
                        return Err(bad(name, "convolution after flatten".into()));
                    }
                    if *kernel == 0 || *filters == 0 || *kernel > h || *kernel > w {
                        return Err(bad(name, format!("kernel {kernel} does not fit {h}x{w}")));
                    }
                    let param = shapes.len();
                    if shapes.iter().any(|(n, _)| n.starts_with(&format!("{name}."))) {
                        return Err(bad(name, "duplicate layer name".into()));
                    }
                    shapes.push((format!("{name}.w"), vec![*filters, c, *kernel, *kernel]));
                    shapes.push((format!("{name}.b"), vec![*filters]));
                    ops.push(Op::Conv { name: name.clone(), param, in_c: c, in_h: h, in_w: w, out_c: *filters, k: *kernel });
                    c = *filters;
                    h = h - kernel + 1;
                    w = w - kernel + 1;
                }
                Layer::Relu => ops.push(Op::Relu),
                Layer::MaxPool { size } => {
                    if flat.is_some() || *size == 0 || *size > h || *size > w {
                        return Err(bad("maxpool", format!("pool {size} does not fit {h}x{w}")));
                    }
                    ops.push(Op::Pool { c, in_h: h, in_w: w, size: *size });
                    h /= size;
                    w /= size;
                }
                Layer::Flatten => {
                    if flat.is_none() {
                        flat = Some(c * h * w);
                    }
                    ops.push(Op::Flatten);
                }
                Layer::Dense { name, units } => {
                    let inputs = flat.ok_or_else(|| bad(name, "dense layer needs a flatten first".into()))?;
                    if *units == 0 {
                        return Err(bad(name, "zero units".into()));
                    }
                    if shapes.iter().any(|(n, _)| n.starts_with(&format!("{name}."))) {
                        return Err(bad(name, "duplicate layer name".into()));
                    }
                    let param = shapes.len();
                    shapes.push((format!("{name}.w"), vec![*units, inputs]));
                    shapes.push((format!("{name}.b"), vec![*units]));
                    last_dense = Some(ops.len());
                    ops.push(Op::Dense { name: name.clone(), param, inputs, outputs: *units });
                    flat = Some(*units);
                }
                Layer::Softmax => ops.push(Op::Softmax),
            }
        }
        let Some(feature_op) = last_dense else {
            return Err(bad("output", "network has no dense layer".into()));
        };
        if !matches!(ops.last(), Some(Op::Softmax)) || feature_op + 2 != ops.len() {
            return Err(bad("output", "network must end with dense then softmax".into()));
        }
        let labels = flat.unwrap_or(0);
        if labels < 2 {
            return Err(bad("output", "need at least two labels".into()));
        }
        Ok(Plan { ops, shapes, feature_op, labels })
    }
}

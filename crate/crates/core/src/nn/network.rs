use alloc::{format, string::ToString, vec, vec::Vec};

use serde::{Deserialize, Serialize};

use super::spec::{Op, Plan};
use super::{ParameterSet, Tensor};
use crate::raster::RasterView;
use crate::{Error, Result};

/// Softmax output of the perceiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub probs: Vec<f64>,
    pub top_index: usize,
}

impl LabelDistribution {
    pub fn from_logits(logits: &[f64]) -> Self {
        let probs = softmax(logits);
        let top_index = argmax(&probs);
        LabelDistribution { probs, top_index }
    }

    /// Validate and wrap an explicit probability vector.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.len() < 2 || probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!("not a distribution (sum {sum})")));
        }
        let top_index = argmax(&probs);
        Ok(LabelDistribution { probs, top_index })
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub logits: Tensor,
    pub dist: LabelDistribution,
    /// Activations feeding the output layer.
    pub features: Tensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    CrossEntropy,
    /// Mean squared error between the output probabilities and the target.
    Mse,
}

/// One training example: an image and a length-K target vector.
#[derive(Debug, Clone, Copy)]
pub struct TrainingPair<'a> {
    pub image: &'a RasterView,
    pub target: &'a [f64],
}

/// Parameter-shaped gradient, in the same order as the parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Tensor>,
}

impl Gradients {
    pub fn zeros_like(params: &ParameterSet) -> Self {
        Gradients { tensors: params.tensors().iter().map(|t| Tensor::zeros(t.shape.clone())).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors.iter().flat_map(|t| t.data.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn raster_input(image: &RasterView) -> Vec<f64> {
    image.pixels.iter().map(|&p| if p != 0 { 1.0 } else { 0.0 }).collect()
}

pub fn forward(params: &ParameterSet, image: &RasterView) -> Result<ForwardOutput> {
    let spec = params.spec();
    if image.height != spec.input_height || image.width != spec.input_width {
        return Err(Error::ShapeMismatch {
            layer: "input".into(),
            detail: format!(
                "image {}x{} but network expects {}x{}",
                image.height, image.width, spec.input_height, spec.input_width
            ),
        });
    }
    forward_input(params, &raster_input(image))
}

pub fn forward_input(params: &ParameterSet, input: &[f64]) -> Result<ForwardOutput> {
    let plan = params.spec().plan()?;
    let trace = run(params, &plan, input)?;
    Ok(output_of(&plan, &trace))
}

fn output_of(plan: &Plan, trace: &Trace) -> ForwardOutput {
    let logits = trace.acts[plan.ops.len() - 1].clone();
    let features = trace.acts[plan.feature_op].clone();
    ForwardOutput {
        dist: LabelDistribution::from_logits(&logits),
        logits: Tensor { shape: vec![logits.len()], data: logits },
        features: Tensor { shape: vec![features.len()], data: features },
    }
}

struct Trace {
    /// `acts[i]` is the input of op `i`; the last entry is the softmax output.
    acts: Vec<Vec<f64>>,
    /// Argmax positions recorded by pooling ops.
    pool_idx: Vec<Vec<usize>>,
}

fn run(params: &ParameterSet, plan: &Plan, input: &[f64]) -> Result<Trace> {
    let expected = params.spec().input_height * params.spec().input_width;
    if input.len() != expected {
        return Err(Error::ShapeMismatch {
            layer: "input".into(),
            detail: format!("expected {expected} values, got {}", input.len()),
        });
    }
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(plan.ops.len() + 1);
    let mut pool_idx = vec![Vec::new(); plan.ops.len()];
    acts.push(input.to_vec());
    for (i, op) in plan.ops.iter().enumerate() {
        let x = &acts[i];
        let y = match op {
            Op::Conv { param, in_c, in_h, in_w, out_c, k, .. } => conv_forward(
                x,
                params.tensor_data(*param),
                params.tensor_data(param + 1),
                (*in_c, *in_h, *in_w),
                *out_c,
                *k,
            ),
            Op::Relu => x.iter().map(|v| v.max(0.0)).collect(),
            Op::Pool { c, in_h, in_w, size } => {
                let (y, idx) = pool_forward(x, *c, *in_h, *in_w, *size);
                pool_idx[i] = idx;
                y
            }
            Op::Flatten => x.clone(),
            Op::Dense { param, inputs, outputs, .. } => {
                dense_forward(x, params.tensor_data(*param), params.tensor_data(param + 1), *inputs, *outputs)
            }
            Op::Softmax => softmax(x),
        };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalOverflow { layer: op.name().to_string() });
        }
        acts.push(y);
    }
    Ok(Trace { acts, pool_idx })
}

fn conv_forward(x: &[f64], w: &[f64], b: &[f64], (ic, ih, iw): (usize, usize, usize), oc: usize, k: usize) -> Vec<f64> {
    let (oh, ow) = (ih - k + 1, iw - k + 1);
    let mut out = vec![0.0; oc * oh * ow];
    for o in 0..oc {
        let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
        plane.iter_mut().for_each(|v| *v = b[o]);
        for i in 0..ic {
            for ky in 0..k {
                for kx in 0..k {
                    let wv = w[((o * ic + i) * k + ky) * k + kx];
                    for y in 0..oh {
                        let src = &x[(i * ih + y + ky) * iw + kx..][..ow];
                        let dst = &mut plane[y * ow..(y + 1) * ow];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
    out
}

fn pool_forward(x: &[f64], c: usize, ih: usize, iw: usize, size: usize) -> (Vec<f64>, Vec<usize>) {
    let (oh, ow) = (ih / size, iw / size);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut idx = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = (ch * ih + oy * size) * iw + ox * size;
                for dy in 0..size {
                    for dx in 0..size {
                        let j = (ch * ih + oy * size + dy) * iw + ox * size + dx;
                        if x[j] > x[best] {
                            best = j;
                        }
                    }
                }
                out.push(x[best]);
                idx.push(best);
            }
        }
    }
    (out, idx)
}

fn dense_forward(x: &[f64], w: &[f64], b: &[f64], inputs: usize, outputs: usize) -> Vec<f64> {
    (0..outputs)
        .map(|j| b[j] + w[j * inputs..(j + 1) * inputs].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

/// Batch-mean loss and its gradient with respect to every parameter.
pub fn loss_and_grad(params: &ParameterSet, batch: &[TrainingPair<'_>], loss: LossKind) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let plan = params.spec().plan()?;
    let mut grads = Gradients::zeros_like(params);
    let mut total = 0.0;
    for pair in batch {
        if pair.target.len() != plan.labels {
            return Err(Error::ShapeMismatch {
                layer: "target".into(),
                detail: format!("expected {} values, got {}", plan.labels, pair.target.len()),
            });
        }
        if pair.image.height != params.spec().input_height || pair.image.width != params.spec().input_width {
            return Err(Error::ShapeMismatch { layer: "input".into(), detail: "image size".into() });
        }
        let trace = run(params, &plan, &raster_input(pair.image))?;
        let n = plan.ops.len();
        let (value, dlogits) = loss_terms(&trace.acts[n - 1], &trace.acts[n], pair.target, loss);
        if !value.is_finite() || dlogits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalOverflow { layer: "loss".into() });
        }
        total += value;
        backward(params, &plan, &trace, dlogits, &mut grads)?;
    }
    let scale = 1.0 / batch.len() as f64;
    for t in &mut grads.tensors {
        t.data.iter_mut().for_each(|v| *v *= scale);
    }
    Ok((total * scale, grads))
}

/// Per-sample loss and its gradient with respect to the logits.
fn loss_terms(logits: &[f64], probs: &[f64], target: &[f64], loss: LossKind) -> (f64, Vec<f64>) {
    match loss {
        LossKind::CrossEntropy => {
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + libm::log(logits.iter().map(|z| libm::exp(z - max)).sum::<f64>());
            let mass: f64 = target.iter().sum();
            let value = -target.iter().zip(logits).map(|(t, z)| t * (z - lse)).sum::<f64>();
            let grad = probs.iter().zip(target).map(|(q, t)| q * mass - t).collect();
            (value, grad)
        }
        LossKind::Mse => {
            let k = probs.len() as f64;
            let value = probs.iter().zip(target).map(|(q, t)| (q - t) * (q - t)).sum::<f64>() / k;
            let dq: Vec<f64> = probs.iter().zip(target).map(|(q, t)| 2.0 * (q - t) / k).collect();
            let dot: f64 = probs.iter().zip(&dq).map(|(q, g)| q * g).sum();
            let grad = probs.iter().zip(&dq).map(|(q, g)| q * (g - dot)).collect();
            (value, grad)
        }
    }
}

fn backward(params: &ParameterSet, plan: &Plan, trace: &Trace, dlogits: Vec<f64>, grads: &mut Gradients) -> Result<()> {
    let mut delta = dlogits;
    // ops[len-1] is the softmax, already folded into dlogits
    for i in (0..plan.ops.len() - 1).rev() {
        let x = &trace.acts[i];
        match &plan.ops[i] {
            Op::Dense { param, inputs, outputs, .. } => {
                let w = params.tensor_data(*param);
                let (gw, rest) = grads.tensors.split_at_mut(param + 1);
                let gw = &mut gw[*param].data;
                let gb = &mut rest[0].data;
                let mut dx = vec![0.0; *inputs];
                for j in 0..*outputs {
                    let d = delta[j];
                    gb[j] += d;
                    if d == 0.0 {
                        continue;
                    }
                    let row = &w[j * inputs..(j + 1) * inputs];
                    let grow = &mut gw[j * inputs..(j + 1) * inputs];
                    for ((g, xi), (dxi, wi)) in grow.iter_mut().zip(x).zip(dx.iter_mut().zip(row)) {
                        *g += d * xi;
                        *dxi += d * wi;
                    }
                }
                delta = dx;
            }
            Op::Relu => {
                for (d, xi) in delta.iter_mut().zip(x) {
                    if *xi <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Op::Flatten | Op::Softmax => {}
            Op::Pool { .. } => {
                let mut dx = vec![0.0; x.len()];
                for (d, &j) in delta.iter().zip(&trace.pool_idx[i]) {
                    dx[j] += d;
                }
                delta = dx;
            }
            Op::Conv { param, in_c, in_h, in_w, out_c, k, .. } => {
                let (ic, ih, iw, oc, k) = (*in_c, *in_h, *in_w, *out_c, *k);
                let (oh, ow) = (ih - k + 1, iw - k + 1);
                let w = params.tensor_data(*param);
                let need_dx = i > 0;
                let mut dx = if need_dx { vec![0.0; x.len()] } else { Vec::new() };
                let (gw, rest) = grads.tensors.split_at_mut(param + 1);
                let gw = &mut gw[*param].data;
                let gb = &mut rest[0].data;
                for o in 0..oc {
                    let dplane = &delta[o * oh * ow..(o + 1) * oh * ow];
                    gb[o] += dplane.iter().sum::<f64>();
                    for c in 0..ic {
                        for ky in 0..k {
                            for kx in 0..k {
                                let widx = ((o * ic + c) * k + ky) * k + kx;
                                let wv = w[widx];
                                let mut acc = 0.0;
                                for y in 0..oh {
                                    let drow = &dplane[y * ow..(y + 1) * ow];
                                    let base = (c * ih + y + ky) * iw + kx;
                                    let src = &x[base..base + ow];
                                    acc += drow.iter().zip(src).map(|(a, b)| a * b).sum::<f64>();
                                    if need_dx {
                                        for (t, d) in dx[base..base + ow].iter_mut().zip(drow) {
                                            *t += wv * d;
                                        }
                                    }
                                }
                                gw[widx] += acc;
                            }
                        }
                    }
                }
                delta = dx;
            }
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalOverflow { layer: plan.ops[i].name().to_string() });
        }
    }
    Ok(())
}

/// Plain gradient descent: `params - lr * grads`, version bumped.
pub fn sgd_step(params: &ParameterSet, grads: &Gradients, lr: f64) -> Result<ParameterSet> {
    if grads.tensors.len() != params.tensors().len() {
        return Err(Error::ShapeMismatch { layer: "gradients".into(), detail: "tensor count".into() });
    }
    let mut tensors = Vec::with_capacity(grads.tensors.len());
    for ((name, p), g) in params.iter().zip(&grads.tensors) {
        if p.shape != g.shape {
            return Err(Error::ShapeMismatch { layer: name.into(), detail: format!("{:?} vs {:?}", p.shape, g.shape) });
        }
        let data = p.data.iter().zip(&g.data).map(|(w, d)| w - lr * d).collect();
        tensors.push(Tensor { shape: p.shape.clone(), data });
    }
    ParameterSet::from_tensors(params.spec().clone(), tensors, params.version() + 1)
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch { layer: "cosine".into(), detail: format!("{} vs {}", a.len(), b.len()) });
    }
    let na = libm::sqrt(a.iter().map(|v| v * v).sum::<f64>());
    let nb = libm::sqrt(b.iter().map(|v| v * v).sum::<f64>());
    if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
        return Err(Error::UndefinedSimilarity);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetSpec;
    use approx::assert_abs_diff_eq;

    fn toy_image(seed: u64) -> RasterView {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed);
        let mut r = RasterView::blank(16, 16);
        r.pixels.iter_mut().for_each(|p| *p = rng.gen_range(0..2));
        r
    }

    #[test]
    fn zero_weights_give_uniform_distribution() {
        let params = ParameterSet::zeros(NetSpec::perceiver(16, 8, 16, 16)).unwrap();
        let out = forward(&params, &toy_image(1)).unwrap();
        for p in &out.dist.probs {
            assert_abs_diff_eq!(*p, 1.0 / 16.0, epsilon = 1e-15);
        }
        assert_eq!(out.dist.top_index, 0);
    }

    #[test]
    fn forward_is_deterministic_and_normalised() {
        let params = ParameterSet::init(NetSpec::perceiver(16, 8, 16, 16), 5).unwrap();
        let a = forward(&params, &toy_image(2)).unwrap();
        let b = forward(&params, &toy_image(2)).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.dist.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(a.features.len(), 8);
    }

    #[test]
    fn wrong_image_size_is_rejected() {
        let params = ParameterSet::zeros(NetSpec::perceiver(4, 8, 16, 16)).unwrap();
        let err = forward(&params, &RasterView::blank(20, 16)).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { ref layer, .. } if layer == "input"));
    }

    #[test]
    fn mse_fixed_point_has_zero_gradient() {
        let params = ParameterSet::init(NetSpec::perceiver(6, 8, 16, 16), 9).unwrap();
        let img = toy_image(3);
        let own = forward(&params, &img).unwrap().dist.probs;
        let (loss, grads) =
            loss_and_grad(&params, &[TrainingPair { image: &img, target: &own }], LossKind::Mse).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grads.max_abs(), 0.0);
    }

    #[test]
    fn uniform_cross_entropy_is_ln_k() {
        let params = ParameterSet::zeros(NetSpec::perceiver(16, 8, 16, 16)).unwrap();
        let img = toy_image(4);
        let mut target = vec![0.0; 16];
        target[5] = 1.0;
        let (loss, _) =
            loss_and_grad(&params, &[TrainingPair { image: &img, target: &target }], LossKind::CrossEntropy)
                .unwrap();
        assert_abs_diff_eq!(loss, libm::log(16.0), epsilon = 1e-12);
        assert_abs_diff_eq!(loss, 2.7726, epsilon = 1e-4);
    }

    #[test]
    fn sgd_identities() {
        let params = ParameterSet::init(NetSpec::perceiver(4, 8, 16, 16), 1).unwrap();
        let img = toy_image(5);
        let target = [1.0, 0.0, 0.0, 0.0];
        let (_, grads) =
            loss_and_grad(&params, &[TrainingPair { image: &img, target: &target }], LossKind::Mse).unwrap();
        assert_eq!(sgd_step(&params, &grads, 0.0).unwrap().hash(), params.hash());
        let zero = Gradients::zeros_like(&params);
        assert_eq!(sgd_step(&params, &zero, 0.5).unwrap().hash(), params.hash());
        assert_ne!(sgd_step(&params, &grads, 0.5).unwrap().hash(), params.hash());
    }

    #[test]
    fn sgd_on_scalar_quadratic() {
        // single output bias: loss w²/2 has gradient w
        let spec = NetSpec {
            input_height: 1,
            input_width: 1,
            layers: vec![
                crate::nn::Layer::Flatten,
                crate::nn::Layer::Dense { name: "d".into(), units: 2 },
                crate::nn::Layer::Softmax,
            ],
        };
        let params = ParameterSet::from_tensors(
            spec,
            vec![Tensor::zeros(vec![2, 1]), Tensor::new(vec![2], vec![1.0, 0.0]).unwrap()],
            0,
        )
        .unwrap();
        let mut grads = Gradients::zeros_like(&params);
        grads.tensors[1].data[0] = params.get("d.b").unwrap().data[0];
        let next = sgd_step(&params, &grads, 0.1).unwrap();
        assert_abs_diff_eq!(next.get("d.b").unwrap().data[0], 0.9, epsilon = 1e-15);
    }

    #[test]
    fn cosine_cases() {
        assert_abs_diff_eq!(cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap(), 0.70711, epsilon = 1e-5);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::UndefinedSimilarity));
    }

    #[test]
    fn label_distribution_rules() {
        let d = LabelDistribution::from_logits(&[1.0, 3.0, 3.0, 0.0]);
        assert_eq!(d.top_index, 1);
        assert!(LabelDistribution::from_probs(vec![0.5, 0.6]).is_err());
        assert_eq!(LabelDistribution::from_probs(vec![0.25, 0.75]).unwrap().top_index, 1);
    }
}

//! Analytic gradients against central finite differences on small random nets.
//! Shared with the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tangram_core::nn::{loss_and_grad, Layer, LossKind, NetSpec, ParameterSet, Tensor, TrainingPair};
use tangram_core::raster::RasterView;

pub const FIXTURES: u64 = 25;
const STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-6;
// gradients smaller than this are compared in absolute terms
const FLOOR: f64 = 1e-3;

fn small_spec(rng: &mut ChaCha8Rng) -> NetSpec {
    let size = rng.gen_range(8..=11);
    let mut layers = vec![
        Layer::Conv { name: "c1".into(), filters: rng.gen_range(1..=3), kernel: rng.gen_range(2..=3) },
        Layer::Relu,
    ];
    if rng.gen_bool(0.5) {
        layers.push(Layer::Conv { name: "c2".into(), filters: rng.gen_range(1..=3), kernel: 2 });
        layers.push(Layer::Relu);
    }
    layers.push(Layer::MaxPool { size: 2 });
    layers.push(Layer::Flatten);
    layers.push(Layer::Dense { name: "d1".into(), units: rng.gen_range(2..=5) });
    layers.push(Layer::Relu);
    layers.push(Layer::Dense { name: "d2".into(), units: rng.gen_range(2..=4) });
    layers.push(Layer::Softmax);
    NetSpec { input_height: size, input_width: size, layers }
}

fn random_params(spec: NetSpec, rng: &mut ChaCha8Rng) -> ParameterSet {
    // nonzero biases keep pre-activations of blank regions off the ReLU kink
    let tensors = spec
        .param_shapes()
        .unwrap()
        .into_iter()
        .map(|(_, shape)| {
            let n = shape.iter().product();
            Tensor::new(shape, (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect()).unwrap()
        })
        .collect();
    ParameterSet::from_tensors(spec, tensors, 0).unwrap()
}

fn random_raster(h: usize, w: usize, rng: &mut ChaCha8Rng) -> RasterView {
    let mut v = RasterView::blank(w, h);
    v.pixels.iter_mut().for_each(|p| *p = u8::from(rng.gen_bool(0.4)));
    v
}

fn random_target(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn with_value(params: &ParameterSet, tensor: usize, index: usize, value: f64) -> ParameterSet {
    let mut tensors = params.tensors().to_vec();
    tensors[tensor].data[index] = value;
    ParameterSet::from_tensors(params.spec().clone(), tensors, 0).unwrap()
}

/// Worst relative error over every parameter of fixture `seed`, and the
/// number of parameters checked.
fn check_fixture(seed: u64) -> Result<(f64, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = small_spec(&mut rng);
    let labels = spec.labels().unwrap();
    let params = random_params(spec.clone(), &mut rng);
    let images: Vec<RasterView> =
        (0..2).map(|_| random_raster(spec.input_height, spec.input_width, &mut rng)).collect();
    let targets: Vec<Vec<f64>> = (0..2).map(|_| random_target(labels, &mut rng)).collect();
    let batch: Vec<TrainingPair<'_>> =
        images.iter().zip(&targets).map(|(image, target)| TrainingPair { image, target }).collect();
    let loss = if seed % 2 == 0 { LossKind::Mse } else { LossKind::CrossEntropy };

    let (_, grads) = loss_and_grad(&params, &batch, loss).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (ti, t) in params.tensors().iter().enumerate() {
        for i in 0..t.data.len() {
            let x = t.data[i];
            let (plus, _) = loss_and_grad(&with_value(&params, ti, i, x + STEP), &batch, loss).unwrap();
            let (minus, _) = loss_and_grad(&with_value(&params, ti, i, x - STEP), &batch, loss).unwrap();
            let numeric = (plus - minus) / (2.0 * STEP);
            let analytic = grads.tensors[ti].data[i];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
            if !(rel < TOLERANCE) {
                return Err(format!(
                    "fixture {seed}: {}[{i}] analytic {analytic:e} numeric {numeric:e} rel {rel:e}",
                    params.names()[ti]
                ));
            }
            worst = worst.max(rel);
            count += 1;
        }
    }
    Ok((worst, count))
}

pub fn check() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for seed in 0..FIXTURES {
        let (w, c) = check_fixture(seed)?;
        worst = worst.max(w);
        count += c;
    }
    Ok(format!("{FIXTURES} fixtures, {count} parameters, worst relative error {worst:.2e}"))
}

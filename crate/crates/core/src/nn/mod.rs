//! From-scratch convolutional perceiver: forward pass, backpropagation, SGD
//! and pretraining, all in double precision.

mod network;
mod params;
mod spec;
mod tensor;
mod train;

pub use network::{
    argmax, cosine, forward, forward_input, loss_and_grad, raster_input, sgd_step, ForwardOutput, Gradients,
    LabelDistribution, LossKind, TrainingPair,
};
pub use params::ParameterSet;
pub use spec::{Layer, NetSpec};
pub use tensor::Tensor;
pub use train::{evaluate_accuracy, pretrain, LabeledRaster, PretrainConfig, PretrainOutcome};

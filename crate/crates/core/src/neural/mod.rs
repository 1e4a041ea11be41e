//! Dense feed-forward networks trained with softmax cross-entropy.
//!
//! Everything runs in `f64` on `ndarray` matrices; batches are rows.

mod activation;
pub mod checkpoint;
mod gradcheck;
mod loss;
mod mlp;
mod optim;

use ndarray::{Array2, ArrayView2};

pub use activation::{ActivationKind, DEFAULT_LEAKY_SLOPE, SELU_ALPHA, SELU_LAMBDA};
pub use gradcheck::{gradcheck, gradcheck_random, GradcheckReport, GRADCHECK_STEP, KINK_CLEARANCE};
pub use loss::{softmax, softmax_cross_entropy, softmax_cross_entropy_labels};
pub use mlp::{init_mlp, DenseLayer, ForwardCache, GradientSet, LayerGradient, Mlp};
pub use optim::{adam_step, sgd_step, AdamState, Optimizer, OptimizerKind};

use crate::error::Result;

pub fn activate(kind: ActivationKind, pre: ArrayView2<f64>) -> Array2<f64> {
    kind.apply(pre)
}

pub fn forward(net: &Mlp, batch: ArrayView2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
    net.forward(batch)
}

pub fn backward(net: &Mlp, cache: &ForwardCache, loss_grad: ArrayView2<f64>) -> Result<GradientSet> {
    net.backward(cache, loss_grad)
}

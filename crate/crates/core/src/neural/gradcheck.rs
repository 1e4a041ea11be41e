use ndarray::{Array2, ArrayView2};
use rand::Rng;

use super::activation::ActivationKind;
use super::loss::softmax_cross_entropy;
use super::mlp::{init_mlp, Mlp};
use crate::error::{Error, Result};

/// Central-difference step.
pub const GRADCHECK_STEP: f64 = 1e-5;

fn loss(net: &Mlp, batch: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<f64> {
    let logits = net.predict(batch)?;
    Ok(softmax_cross_entropy(logits.view(), targets)?.0)
}

/// Compares [`Mlp::backward`] on the softmax cross-entropy loss against
/// central finite differences for every weight and bias.
///
/// Returns the largest `|analytic − numeric| / max(|analytic|, |numeric|, 1e-8)`.
pub fn gradcheck(net: &Mlp, batch: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<f64> {
    let (logits, cache) = net.forward(batch)?;
    let (_, dlogits) = softmax_cross_entropy(logits.view(), targets)?;
    let analytic = net.backward(&cache, dlogits.view())?;

    let mut probe = net.clone();
    let h = GRADCHECK_STEP;
    let mut worst: f64 = 0.0;
    let mut compare = |a: f64, n: f64| {
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        worst = worst.max(rel);
    };

    for l in 0..net.layers().len() {
        let (rows, cols) = net.layers()[l].weights.dim();
        for r in 0..rows {
            for c in 0..cols {
                let orig = net.layers()[l].weights[[r, c]];
                probe.layers_mut()[l].weights[[r, c]] = orig + h;
                let up = loss(&probe, batch, targets)?;
                probe.layers_mut()[l].weights[[r, c]] = orig - h;
                let down = loss(&probe, batch, targets)?;
                probe.layers_mut()[l].weights[[r, c]] = orig;
                compare(analytic.layers[l].weights[[r, c]], (up - down) / (2.0 * h));
            }
        }
        for r in 0..rows {
            let orig = net.layers()[l].biases[r];
            probe.layers_mut()[l].biases[r] = orig + h;
            let up = loss(&probe, batch, targets)?;
            probe.layers_mut()[l].biases[r] = orig - h;
            let down = loss(&probe, batch, targets)?;
            probe.layers_mut()[l].biases[r] = orig;
            compare(analytic.layers[l].biases[r], (up - down) / (2.0 * h));
        }
    }
    Ok(worst)
}

/// Pre-activations must stay at least this far from a kink; far larger than
/// the finite-difference step times any input magnitude seen here.
pub const KINK_CLEARANCE: f64 = 1e-3;

/// Outcome of [`gradcheck_random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub activation: ActivationKind,
    pub max_rel_error: f64,
    pub kink_margin: f64,
}

/// Gradchecks a freshly drawn 4-layer network (3 hidden layers of `kind`,
/// identity output) with random biases on a random batch, redrawing the batch
/// until no pre-activation sits within [`KINK_CLEARANCE`] of a kink.
pub fn gradcheck_random<R: Rng + ?Sized>(kind: ActivationKind, rng: &mut R) -> Result<GradcheckReport> {
    const SIZES: [usize; 5] = [3, 6, 5, 4, 3];
    const BATCH: usize = 2;
    const INPUT_RANGE: f64 = 3.0;
    let mut net = init_mlp(&SIZES, kind, rng)?;
    for layer in net.layers_mut() {
        layer.biases.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    }
    let classes = SIZES[SIZES.len() - 1];
    let mut targets = Array2::zeros((BATCH, classes));
    for r in 0..BATCH {
        targets[[r, rng.random_range(0..classes)]] = 1.0;
    }
    for _ in 0..10_000 {
        let batch = Array2::from_shape_simple_fn((BATCH, SIZES[0]), || rng.random_range(-INPUT_RANGE..INPUT_RANGE));
        let kink_margin = net.kink_margin(batch.view())?;
        if kink_margin > KINK_CLEARANCE {
            return Ok(GradcheckReport {
                activation: kind,
                max_rel_error: gradcheck(&net, batch.view(), targets.view())?,
                kink_margin,
            });
        }
    }
    Err(Error::domain(format!("no kink-free batch found for {kind}")))
}

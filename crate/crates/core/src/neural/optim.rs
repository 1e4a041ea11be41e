use std::fmt;
use std::str::FromStr;

use ndarray::Zip;

use super::mlp::{GradientSet, Mlp};
use crate::error::{Error, Result};

/// Plain gradient descent `θ ← θ − lr·∇`.
pub fn sgd_step(net: &mut Mlp, grads: &GradientSet, learning_rate: f64) -> Result<()> {
    if !grads.matches(net) {
        return Err(Error::domain("gradient shapes do not match the network"));
    }
    for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
        layer.weights.scaled_add(-learning_rate, &g.weights);
        layer.biases.scaled_add(-learning_rate, &g.biases);
    }
    Ok(())
}

/// Adam moment estimates for one network.
#[derive(Debug, Clone)]
pub struct AdamState {
    first: GradientSet,
    second: GradientSet,
    step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub const DEFAULT_LEARNING_RATE: f64 = 0.005;

    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        Self {
            first: GradientSet::zeros_like(net),
            second: GradientSet::zeros_like(net),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }
}

/// One Adam update with bias-corrected moments.
pub fn adam_step(state: &mut AdamState, net: &mut Mlp, grads: &GradientSet) -> Result<()> {
    if !grads.matches(net) || !state.first.matches(net) {
        return Err(Error::domain("gradient or state shapes do not match the network"));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = state.learning_rate;

    let update = |theta: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *theta -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for (((layer, g), m), v) in net
        .layers_mut()
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.first.layers)
        .zip(&mut state.second.layers)
    {
        Zip::from(&mut layer.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .and(&g.weights)
            .for_each(|theta, m, v, &g| update(theta, m, v, g));
        Zip::from(&mut layer.biases)
            .and(&mut m.biases)
            .and(&mut v.biases)
            .and(&g.biases)
            .for_each(|theta, m, v, &g| update(theta, m, v, g));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sgd" | "gradient-descent" => Ok(Self::Sgd),
            "adam" => Ok(Self::Adam),
            other => Err(Error::config(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// Optimizer bound to one network.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd { learning_rate: f64 },
    Adam(AdamState),
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, net: &Mlp, learning_rate: f64) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { learning_rate },
            OptimizerKind::Adam => Optimizer::Adam(AdamState::new(net, learning_rate)),
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &GradientSet) -> Result<()> {
        match self {
            Optimizer::Sgd { learning_rate } => sgd_step(net, grads, *learning_rate),
            Optimizer::Adam(state) => adam_step(state, net, grads),
        }
    }
}

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::activation::ActivationKind;
use crate::error::{Error, Result};

/// Fully connected layer `a = act(x·Wᵀ + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out × in`.
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    pub activation: ActivationKind,
}

impl DenseLayer {
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Width of the activation output (twice the unit count for Crelu).
    pub fn output_dim(&self) -> usize {
        self.weights.nrows() * self.activation.width_factor()
    }

    fn pre_activation(&self, input: ArrayView2<f64>) -> Array2<f64> {
        let mut z = input.dot(&self.weights.t());
        z += &self.biases;
        z
    }
}

/// Feed-forward network: a chain of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Everything `backward` needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
}

/// Per-layer parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl GradientSet {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    biases: Array1::zeros(l.biases.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn matches(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.dim() == l.weights.dim() && g.biases.dim() == l.biases.dim()
            })
    }

    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|g| g.weights.iter().all(|&v| v == 0.0) && g.biases.iter().all(|&v| v == 0.0))
    }
}

impl Mlp {
    /// Builds a network from layers, checking that dimensions chain.
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("a network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.biases.len() != l.weights.nrows() {
                return Err(Error::config(format!("layer {i}: bias length mismatch")));
            }
            if l.weights.iter().chain(l.biases.iter()).any(|v| !v.is_finite()) {
                return Err(Error::config(format!("layer {i}: non-finite parameter")));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::config(format!(
                    "layer {i} emits {} values but layer {} expects {}",
                    pair[0].output_dim(),
                    i + 1,
                    pair[1].input_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-uniform initialised network.
    ///
    /// `sizes[0]` is the input width, the rest are the declared unit counts of
    /// each layer. `activations[i]` applies to layer `i`; a Crelu layer emits
    /// twice its unit count and the following layer's fan-in adjusts to match.
    pub fn with_activations<R: Rng + ?Sized>(
        sizes: &[usize],
        activations: &[ActivationKind],
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::config("layer sizes need an input and at least one layer"));
        }
        if sizes.contains(&0) {
            return Err(Error::config("layer sizes must be positive"));
        }
        if activations.len() != sizes.len() - 1 {
            return Err(Error::config("one activation per layer required"));
        }
        let mut fan_in = sizes[0];
        let mut layers = Vec::with_capacity(activations.len());
        for (&units, &activation) in sizes[1..].iter().zip(activations) {
            let limit = (6.0 / (fan_in + units) as f64).sqrt();
            let weights = Array2::from_shape_simple_fn((units, fan_in), || {
                rng.random_range(-limit..=limit)
            });
            let layer = DenseLayer {
                weights,
                biases: Array1::zeros(units),
                activation,
            };
            fan_in = layer.output_dim();
            layers.push(layer);
        }
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Forward pass that keeps the intermediate values for [`backward`].
    pub fn forward(&self, batch: ArrayView2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
        self.check_input(batch)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut current = batch.to_owned();
        for layer in &self.layers {
            let z = layer.pre_activation(current.view());
            let a = layer.activation.apply(z.view());
            inputs.push(current);
            pre.push(z);
            current = a;
        }
        Ok((current, ForwardCache { inputs, pre }))
    }

    /// Forward pass without a cache.
    pub fn predict(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(batch)?;
        let mut current = batch.to_owned();
        for layer in &self.layers {
            let z = layer.pre_activation(current.view());
            current = layer.activation.apply(z.view());
        }
        Ok(current)
    }

    fn check_input(&self, batch: ArrayView2<f64>) -> Result<()> {
        if batch.ncols() != self.input_dim() {
            return Err(Error::domain(format!(
                "batch has {} columns, network expects {}",
                batch.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Reverse-mode gradients of a scalar loss, plus the gradient with respect
    /// to the network input.
    pub fn backward_with_input(
        &self,
        cache: &ForwardCache,
        loss_grad: ArrayView2<f64>,
    ) -> Result<(GradientSet, Array2<f64>)> {
        let consistent = cache.pre.len() == self.layers.len()
            && cache.inputs.len() == self.layers.len()
            && self.layers.iter().zip(&cache.pre).zip(&cache.inputs).all(|((l, z), x)| {
                z.ncols() == l.weights.nrows() && x.ncols() == l.input_dim() && z.nrows() == x.nrows()
            });
        if !consistent {
            return Err(Error::domain("forward cache does not belong to this network"));
        }
        let rows = cache.pre[0].nrows();
        if loss_grad.dim() != (rows, self.output_dim()) {
            return Err(Error::domain(format!(
                "loss gradient is {:?}, expected ({rows}, {})",
                loss_grad.dim(),
                self.output_dim()
            )));
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = loss_grad.to_owned();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let dz = layer
                .activation
                .backward(cache.pre[l].view(), upstream.view());
            let dw = dz.t().dot(&cache.inputs[l]);
            let db = dz.sum_axis(Axis(0));
            upstream = dz.dot(&layer.weights);
            grads.push(LayerGradient {
                weights: dw,
                biases: db,
            });
        }
        grads.reverse();
        Ok((GradientSet { layers: grads }, upstream))
    }

    pub fn backward(&self, cache: &ForwardCache, loss_grad: ArrayView2<f64>) -> Result<GradientSet> {
        self.backward_with_input(cache, loss_grad).map(|(g, _)| g)
    }

    /// Smallest distance from any pre-activation to a kink of its layer's
    /// activation over `batch`; infinite when no layer has kinks.
    pub fn kink_margin(&self, batch: ArrayView2<f64>) -> Result<f64> {
        let (_, cache) = self.forward(batch)?;
        let mut margin = f64::INFINITY;
        for (layer, z) in self.layers.iter().zip(&cache.pre) {
            for &kink in layer.activation.kinks() {
                for &v in z.iter() {
                    margin = margin.min((v - kink).abs());
                }
            }
        }
        Ok(margin)
    }
}

/// Network with `activation` on every hidden layer and an identity output.
pub fn init_mlp<R: Rng + ?Sized>(
    sizes: &[usize],
    activation: ActivationKind,
    rng: &mut R,
) -> Result<Mlp> {
    if sizes.len() < 2 {
        return Err(Error::config("layer sizes need an input and at least one layer"));
    }
    let mut acts = vec![activation; sizes.len() - 1];
    *acts.last_mut().unwrap() = ActivationKind::Identity;
    Mlp::with_activations(sizes, &acts, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(17)
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = init_mlp(&[4, 8, 8, 3], ActivationKind::Relu, &mut rng()).unwrap();
        let b = init_mlp(&[4, 8, 8, 3], ActivationKind::Relu, &mut rng()).unwrap();
        assert_eq!(a, b);
        assert!(a.layers().iter().all(|l| l.biases.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn init_weight_variance() {
        let net = init_mlp(&[1000, 1000], ActivationKind::Identity, &mut rng()).unwrap();
        let w = &net.layers()[0].weights;
        let n = w.len() as f64;
        let mean = w.sum() / n;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let expected = 2.0 / 2000.0;
        assert!((var / expected - 1.0).abs() < 0.1, "{var}");
    }

    #[test]
    fn init_rejects_bad_sizes() {
        assert!(init_mlp(&[], ActivationKind::Relu, &mut rng()).is_err());
        assert!(init_mlp(&[3], ActivationKind::Relu, &mut rng()).is_err());
        assert!(init_mlp(&[3, 0, 2], ActivationKind::Relu, &mut rng()).is_err());
    }

    #[test]
    fn crelu_chains_doubled_width() {
        let net = init_mlp(&[2, 5, 5, 4], ActivationKind::Crelu, &mut rng()).unwrap();
        assert_eq!(net.layers()[1].input_dim(), 10);
        assert_eq!(net.layers()[2].input_dim(), 10);
        assert_eq!(net.output_dim(), 4);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let layer = DenseLayer {
            weights: Array2::eye(3),
            biases: Array1::zeros(3),
            activation: ActivationKind::Identity,
        };
        let net = Mlp::from_layers(vec![layer]).unwrap();
        let x = array![[1.0, -2.0, 3.5]];
        assert_eq!(net.predict(x.view()).unwrap(), x);
    }

    #[test]
    fn zero_input_relu_net_gives_zero() {
        let net = init_mlp(&[3, 6, 6, 2], ActivationKind::Relu, &mut rng()).unwrap();
        let out = net.predict(Array2::zeros((4, 3)).view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batched_equals_row_wise() {
        let net = init_mlp(&[3, 7, 7, 2], ActivationKind::Tanh, &mut rng()).unwrap();
        let batch = array![[0.1, -0.4, 2.0], [1.5, 0.3, -0.7]];
        let both = net.predict(batch.view()).unwrap();
        for r in 0..2 {
            let single = net.predict(batch.slice(ndarray::s![r..r + 1, ..])).unwrap();
            for c in 0..2 {
                assert_eq!(single[[0, c]], both[[r, c]]);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let net = init_mlp(&[3, 4, 2], ActivationKind::Relu, &mut rng()).unwrap();
        assert!(matches!(net.forward(Array2::zeros((1, 2)).view()), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_loss_gradient_gives_zero_gradients() {
        let net = init_mlp(&[3, 4, 4, 2], ActivationKind::Sigmoid, &mut rng()).unwrap();
        let (_, cache) = net.forward(array![[0.3, 0.1, -0.2]].view()).unwrap();
        let g = net.backward(&cache, Array2::zeros((1, 2)).view()).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn linear_layer_gradient_closed_form() {
        let layer = DenseLayer {
            weights: array![[0.5, -1.0], [2.0, 0.25], [0.0, 1.0]],
            biases: array![0.1, 0.2, 0.3],
            activation: ActivationKind::Identity,
        };
        let net = Mlp::from_layers(vec![layer]).unwrap();
        let x = array![[1.0, 2.0], [-1.0, 0.5]];
        let up = array![[0.3, -0.2, 1.0], [0.7, 0.4, -0.5]];
        let (_, cache) = net.forward(x.view()).unwrap();
        let (g, dx) = net.backward_with_input(&cache, up.view()).unwrap();
        // dL/dW = upstreamᵀ·x, dL/db = Σ rows, dL/dx = upstream·W
        assert_eq!(g.layers[0].weights, up.t().dot(&x));
        assert_eq!(g.layers[0].biases, up.sum_axis(Axis(0)));
        assert_eq!(dx, up.dot(&net.layers()[0].weights));
    }

    #[test]
    fn foreign_cache_is_rejected() {
        let a = init_mlp(&[3, 4, 2], ActivationKind::Relu, &mut rng()).unwrap();
        let b = init_mlp(&[3, 5, 2], ActivationKind::Relu, &mut rng()).unwrap();
        let (_, cache) = a.forward(Array2::zeros((1, 3)).view()).unwrap();
        assert!(b.backward(&cache, Array2::zeros((1, 2)).view()).is_err());
    }
}

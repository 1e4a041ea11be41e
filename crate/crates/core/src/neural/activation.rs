use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

/// Element-wise nonlinearities available to dense layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationKind {
    Relu,
    LeakyRelu(f64),
    /// Concatenated ReLU `[max(0, x), max(0, −x)]`; doubles the layer width.
    Crelu,
    Elu(f64),
    Selu,
    Relu6,
    Tanh,
    Sigmoid,
    Softsign,
    Softplus,
    Identity,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `max(x, 0)` that keeps NaN, unlike `f64::max`.
fn relu(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        x
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl ActivationKind {
    /// Every hidden-layer activation with its default parameter.
    pub const CATALOG: [ActivationKind; 10] = [
        ActivationKind::Relu,
        ActivationKind::LeakyRelu(DEFAULT_LEAKY_SLOPE),
        ActivationKind::Crelu,
        ActivationKind::Elu(1.0),
        ActivationKind::Selu,
        ActivationKind::Relu6,
        ActivationKind::Tanh,
        ActivationKind::Sigmoid,
        ActivationKind::Softsign,
        ActivationKind::Softplus,
    ];

    /// Output width per unit of pre-activation width.
    pub fn width_factor(&self) -> usize {
        match self {
            ActivationKind::Crelu => 2,
            _ => 1,
        }
    }

    /// Points where the derivative jumps.
    pub fn kinks(&self) -> &'static [f64] {
        match *self {
            ActivationKind::Relu
            | ActivationKind::LeakyRelu(_)
            | ActivationKind::Crelu
            | ActivationKind::Selu => &[0.0],
            ActivationKind::Elu(a) if a != 1.0 => &[0.0],
            ActivationKind::Relu6 => &[0.0, 6.0],
            _ => &[],
        }
    }

    fn scalar(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::Relu | ActivationKind::Crelu => relu(x),
            ActivationKind::LeakyRelu(slope) => {
                if x > 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            ActivationKind::Elu(a) => {
                if x > 0.0 {
                    x
                } else {
                    a * x.exp_m1()
                }
            }
            ActivationKind::Selu => {
                SELU_LAMBDA * if x > 0.0 { x } else { SELU_ALPHA * x.exp_m1() }
            }
            ActivationKind::Relu6 => x.clamp(0.0, 6.0),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Softsign => x / (1.0 + x.abs()),
            ActivationKind::Softplus => softplus(x),
            ActivationKind::Identity => x,
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::Relu | ActivationKind::Crelu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::LeakyRelu(slope) => {
                if x > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            ActivationKind::Elu(a) => {
                if x > 0.0 {
                    1.0
                } else {
                    a * x.exp()
                }
            }
            ActivationKind::Selu => {
                SELU_LAMBDA * if x > 0.0 { 1.0 } else { SELU_ALPHA * x.exp() }
            }
            ActivationKind::Relu6 => {
                if x > 0.0 && x < 6.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            ActivationKind::Softsign => {
                let d = 1.0 + x.abs();
                1.0 / (d * d)
            }
            ActivationKind::Softplus => sigmoid(x),
            ActivationKind::Identity => 1.0,
        }
    }

    /// Applies the activation row-wise to a batch of pre-activations.
    pub fn apply(&self, pre: ArrayView2<f64>) -> Array2<f64> {
        match self {
            ActivationKind::Identity => pre.to_owned(),
            ActivationKind::Crelu => {
                let pos = pre.mapv(relu);
                let neg = pre.mapv(|x| relu(-x));
                concatenate(Axis(1), &[pos.view(), neg.view()]).expect("same row count")
            }
            _ => pre.mapv(|x| self.scalar(x)),
        }
    }

    /// Gradient with respect to the pre-activations given the gradient with
    /// respect to the outputs.
    pub fn backward(&self, pre: ArrayView2<f64>, grad_out: ArrayView2<f64>) -> Array2<f64> {
        match self {
            ActivationKind::Identity => grad_out.to_owned(),
            ActivationKind::Crelu => {
                let width = pre.ncols();
                let g_pos = grad_out.slice(s![.., ..width]);
                let g_neg = grad_out.slice(s![.., width..]);
                let mut out = Array2::zeros(pre.raw_dim());
                Zip::from(&mut out)
                    .and(pre)
                    .and(g_pos)
                    .and(g_neg)
                    .for_each(|o, &x, &gp, &gn| {
                        *o = if x > 0.0 {
                            gp
                        } else if x < 0.0 {
                            -gn
                        } else {
                            0.0
                        };
                    });
                out
            }
            _ => {
                let mut out = grad_out.to_owned();
                Zip::from(&mut out)
                    .and(pre)
                    .for_each(|g, &x| *g *= self.derivative(x));
                out
            }
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationKind::Relu => f.write_str("relu"),
            ActivationKind::LeakyRelu(s) => write!(f, "leaky-relu:{s:?}"),
            ActivationKind::Crelu => f.write_str("crelu"),
            ActivationKind::Elu(a) => write!(f, "elu:{a:?}"),
            ActivationKind::Selu => f.write_str("selu"),
            ActivationKind::Relu6 => f.write_str("relu6"),
            ActivationKind::Tanh => f.write_str("tanh"),
            ActivationKind::Sigmoid => f.write_str("sigmoid"),
            ActivationKind::Softsign => f.write_str("softsign"),
            ActivationKind::Softplus => f.write_str("softplus"),
            ActivationKind::Identity => f.write_str("identity"),
        }
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    /// Accepts the names printed by `Display`; `leaky-relu` and `elu` may omit
    /// their parameter (defaults 0.2 and 1.0).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim().to_string(), Some(p.trim().to_string())),
            None => (s.clone(), None),
        };
        let parse_param = |default: f64| -> Result<f64> {
            match &param {
                None => Ok(default),
                Some(p) => p
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::config(format!("bad activation parameter '{p}'"))),
            }
        };
        let kind = match name.replace('_', "-").as_str() {
            "relu" => ActivationKind::Relu,
            "leaky-relu" | "leakyrelu" => ActivationKind::LeakyRelu(parse_param(DEFAULT_LEAKY_SLOPE)?),
            "crelu" => ActivationKind::Crelu,
            "elu" => ActivationKind::Elu(parse_param(1.0)?),
            "selu" => ActivationKind::Selu,
            "relu6" | "relu-6" => ActivationKind::Relu6,
            "tanh" => ActivationKind::Tanh,
            "sigmoid" => ActivationKind::Sigmoid,
            "softsign" => ActivationKind::Softsign,
            "softplus" => ActivationKind::Softplus,
            "identity" | "linear" => ActivationKind::Identity,
            other => return Err(Error::config(format!("unknown activation '{other}'"))),
        };
        let takes_param = matches!(kind, ActivationKind::LeakyRelu(_) | ActivationKind::Elu(_));
        if param.is_some() && !takes_param {
            return Err(Error::config(format!("activation '{name}' takes no parameter")));
        }
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn relu_values() {
        let out = ActivationKind::Relu.apply(array![[-1.0, 0.0, 2.0]].view());
        assert_eq!(out, array![[0.0, 0.0, 2.0]]);
    }

    #[test]
    fn centered_functions_at_zero() {
        let z = array![[0.0]];
        assert_eq!(ActivationKind::Sigmoid.apply(z.view())[[0, 0]], 0.5);
        assert_eq!(ActivationKind::Tanh.apply(z.view())[[0, 0]], 0.0);
        assert_eq!(ActivationKind::Softsign.apply(z.view())[[0, 0]], 0.0);
    }

    #[test]
    fn softplus_matches_direct_formula() {
        for i in 0..=4000 {
            let x = -20.0 + 40.0 * i as f64 / 4000.0;
            let direct = (1.0 + f64::exp(x)).ln();
            assert!((softplus(x) - direct).abs() < 1e-12, "x={x}");
        }
        // no overflow far out
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
    }

    #[test]
    fn nan_is_not_swallowed() {
        for kind in ActivationKind::CATALOG {
            let out = kind.apply(array![[f64::NAN]].view());
            assert!(out.iter().all(|v| v.is_nan()), "{kind}");
        }
    }

    #[test]
    fn crelu_doubles_width() {
        let out = ActivationKind::Crelu.apply(array![[-1.0, 2.0], [3.0, -4.0]].view());
        assert_eq!(out, array![[0.0, 2.0, 1.0, 0.0], [3.0, 0.0, 0.0, 4.0]]);
    }

    #[test]
    fn relu6_and_selu() {
        let out = ActivationKind::Relu6.apply(array![[-1.0, 3.0, 9.0]].view());
        assert_eq!(out, array![[0.0, 3.0, 6.0]]);
        let s = ActivationKind::Selu.apply(array![[1.0, -50.0]].view());
        assert!((s[[0, 0]] - SELU_LAMBDA).abs() < 1e-15);
        assert!((s[[0, 1]] + SELU_LAMBDA * SELU_ALPHA).abs() < 1e-12);
        assert!((SELU_LAMBDA - 1.0507).abs() < 1e-4 && (SELU_ALPHA - 1.6733).abs() < 1e-4);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let kinds = [
            ActivationKind::LeakyRelu(0.2),
            ActivationKind::Elu(0.7),
            ActivationKind::Selu,
            ActivationKind::Tanh,
            ActivationKind::Sigmoid,
            ActivationKind::Softsign,
            ActivationKind::Softplus,
            ActivationKind::Relu6,
        ];
        for kind in kinds {
            for &x in &[-3.1, -0.4, 0.3, 2.2, 7.5] {
                let h = 1e-6;
                let fd = (kind.scalar(x + h) - kind.scalar(x - h)) / (2.0 * h);
                assert!((fd - kind.derivative(x)).abs() < 1e-7, "{kind} at {x}");
            }
        }
    }

    #[test]
    fn names_round_trip() {
        let kinds = [
            ActivationKind::Relu,
            ActivationKind::LeakyRelu(0.2),
            ActivationKind::Crelu,
            ActivationKind::Elu(1.0),
            ActivationKind::Selu,
            ActivationKind::Relu6,
            ActivationKind::Tanh,
            ActivationKind::Sigmoid,
            ActivationKind::Softsign,
            ActivationKind::Softplus,
            ActivationKind::Identity,
        ];
        for k in kinds {
            assert_eq!(k.to_string().parse::<ActivationKind>().unwrap(), k);
        }
        assert_eq!("leaky-relu".parse::<ActivationKind>().unwrap(), ActivationKind::LeakyRelu(0.2));
        assert!("relu:3".parse::<ActivationKind>().is_err());
        assert!("swish".parse::<ActivationKind>().is_err());
    }
}

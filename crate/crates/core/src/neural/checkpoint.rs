//! Plain-text network checkpoints.
//!
//! ```text
//! fso-dnn-mlp 1
//! layers <count>
//! layer <inputs> <units> <activation>
//! <units lines of <inputs> weights, row-major>
//! <one line of <units> biases>
//! ...
//! ```
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so a
//! reload reproduces every parameter bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::activation::ActivationKind;
use super::mlp::{DenseLayer, Mlp};
use crate::error::{Error, Result};

const MAGIC: &str = "fso-dnn-mlp 1";

pub fn to_checkpoint(net: &Mlp) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "layers {}", net.layers().len()).unwrap();
    for layer in net.layers() {
        let (units, inputs) = layer.weights.dim();
        writeln!(out, "layer {inputs} {units} {}", layer.activation).unwrap();
        for row in layer.weights.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        let line: Vec<String> = layer.biases.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn from_checkpoint(text: &str) -> Result<Mlp> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: &str| Error::Parse {
        line,
        message: msg.to_string(),
    };
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, &format!("unexpected end of checkpoint, expected {what}")));

    let (n, magic) = next("header")?;
    if magic != MAGIC {
        return Err(err(n, "not an fso-dnn network checkpoint"));
    }
    let (n, count_line) = next("layer count")?;
    let count: usize = count_line
        .strip_prefix("layers ")
        .and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| err(n, "expected 'layers <count>'"))?;

    let parse_row = |n: usize, line: &str, len: usize| -> Result<Vec<f64>> {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(n, "bad number"))?;
        if vals.len() != len {
            return Err(err(n, &format!("expected {len} values, found {}", vals.len())));
        }
        Ok(vals)
    };

    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, header) = next("layer header")?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "layer" {
            return Err(err(n, "expected 'layer <inputs> <units> <activation>'"));
        }
        let inputs: usize = parts[1].parse().map_err(|_| err(n, "bad input count"))?;
        let units: usize = parts[2].parse().map_err(|_| err(n, "bad unit count"))?;
        let activation: ActivationKind = parts[3].parse().map_err(|e: Error| err(n, &e.to_string()))?;
        let mut weights = Vec::with_capacity(units * inputs);
        for _ in 0..units {
            let (n, line) = next("weight row")?;
            weights.extend(parse_row(n, line, inputs)?);
        }
        let (n, line) = next("bias row")?;
        let biases = parse_row(n, line, units)?;
        layers.push(DenseLayer {
            weights: Array2::from_shape_vec((units, inputs), weights).expect("sized above"),
            biases: Array1::from(biases),
            activation,
        });
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "trailing data after last layer"));
    }
    Mlp::from_layers(layers)
}

pub fn save(net: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_checkpoint(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Mlp> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_checkpoint(&text)
}

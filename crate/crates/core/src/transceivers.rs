//! The four transceiver variants and their training.
//!
//! | kind        | transmitter            | receiver                 |
//! |-------------|------------------------|--------------------------|
//! | `QamMl`     | square QAM             | ML on `(y, g)`           |
//! | `QamDnn`    | square QAM             | learned, softmax logits  |
//! | `DnnMl`     | learned shaper         | ML on `(y, g)`           |
//! | `EndToEnd`  | learned shaper         | learned, softmax logits  |
//!
//! Learned transmitters map a one-hot symbol to two outputs read as the real
//! and imaginary part of the point; the `M` points are projected to unit
//! average energy inside the training graph. Learned receivers read the real
//! and imaginary part of the combined observation, either raw or divided by
//! the combined gain (`CsiMode::Equalized`).
//!
//! Training is end to end: the channel is a per-symbol linear map
//! `z = a·x + w` with the sampled fading and noise held constant during
//! backpropagation, so `∂z/∂x = a` links the receiver input gradient to the
//! transmitter output. A `DnnMl` transceiver is trained exactly like an
//! `EndToEnd` one and then keeps only its constellation.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mimo::{equalize, ml_detect, noise_variance, CombinedObservation, CombinerKind, Link, LinkConfig};
use crate::modem::{min_pairwise_distance, normalize_power, qam_constellation, Constellation};
use crate::neural::{
    checkpoint, init_mlp, softmax_cross_entropy_labels, ActivationKind, Mlp, Optimizer, OptimizerKind,
};
use crate::seed::stream_rng;
use crate::stats::{wilson_interval, Z_95};

/// A learned constellation whose closest pair is nearer than this is rejected.
pub const COLLAPSE_DISTANCE: f64 = 1e-6;

/// Symbols per independently seeded evaluation block.
pub const EVAL_BLOCK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransceiverKind {
    QamMl,
    QamDnn,
    DnnMl,
    EndToEnd,
}

impl TransceiverKind {
    pub const ALL: [TransceiverKind; 4] = [Self::QamMl, Self::QamDnn, Self::DnnMl, Self::EndToEnd];

    pub fn learned_transmitter(self) -> bool {
        matches!(self, Self::DnnMl | Self::EndToEnd)
    }

    pub fn learned_receiver(self) -> bool {
        matches!(self, Self::QamDnn | Self::EndToEnd)
    }

    pub fn needs_training(self) -> bool {
        self != Self::QamMl
    }
}

impl fmt::Display for TransceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransceiverKind::QamMl => "qam-ml",
            TransceiverKind::QamDnn => "qam-dnn",
            TransceiverKind::DnnMl => "dnn-ml",
            TransceiverKind::EndToEnd => "end-to-end",
        })
    }
}

impl FromStr for TransceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "qam-ml" => Ok(Self::QamMl),
            "qam-dnn" => Ok(Self::QamDnn),
            "dnn-ml" => Ok(Self::DnnMl),
            "end-to-end" | "e2e" => Ok(Self::EndToEnd),
            other => Err(Error::config(format!("unknown transceiver kind '{other}'"))),
        }
    }
}

/// What a learned receiver is fed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsiMode {
    /// `(Re y, Im y)`.
    Raw,
    /// `(Re y/g, Im y/g)`.
    Equalized,
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsiMode::Raw => "raw",
            CsiMode::Equalized => "equalized",
        })
    }
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(Self::Raw),
            "equalized" | "equalised" => Ok(Self::Equalized),
            other => Err(Error::config(format!("unknown csi mode '{other}'"))),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    pub activation: ActivationKind,
    /// Symbols per iteration, freshly generated each time.
    pub batch_size: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub train_esn0_db: f64,
    pub csi_mode: CsiMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 4,
            neurons_per_layer: 40,
            activation: ActivationKind::Relu,
            batch_size: 4096,
            iterations: 1000,
            learning_rate: 0.005,
            optimizer: OptimizerKind::Adam,
            train_esn0_db: 20.0,
            csi_mode: CsiMode::Equalized,
        }
    }
}

impl TrainConfig {
    /// Defaults with the hidden activation picked for the link: Crelu when
    /// there is more than one aperture, Relu otherwise.
    pub fn for_link(link: &LinkConfig) -> Self {
        let activation = if link.n_t * link.n_r > 1 {
            ActivationKind::Crelu
        } else {
            ActivationKind::Relu
        };
        Self {
            activation,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.neurons_per_layer == 0 {
            return Err(Error::config("hidden layer count and width must be positive"));
        }
        if self.batch_size == 0 || self.iterations == 0 {
            return Err(Error::config("batch size and iteration count must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        if !self.train_esn0_db.is_finite() {
            return Err(Error::config("training Es/N0 must be finite"));
        }
        Ok(())
    }

    fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(std::iter::repeat_n(self.neurons_per_layer, self.hidden_layers));
        sizes.push(output);
        sizes
    }
}

/// One-hot in, `(re, im)` out.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedTransmitter {
    pub net: Mlp,
}

impl LearnedTransmitter {
    pub fn new<R: Rng + ?Sized>(order: usize, cfg: &TrainConfig, rng: &mut R) -> Result<Self> {
        Self::from_net(init_mlp(&cfg.layer_sizes(order, 2), cfg.activation, rng)?)
    }

    pub fn from_net(net: Mlp) -> Result<Self> {
        if net.output_dim() != 2 {
            return Err(Error::config("a transmitter network must have 2 outputs"));
        }
        Ok(Self { net })
    }

    pub fn order(&self) -> usize {
        self.net.input_dim()
    }

    /// Un-normalised points, one row per symbol.
    fn raw_points(&self) -> Result<Array2<f64>> {
        self.net.predict(Array2::eye(self.order()).view())
    }
}

/// Feeds every one-hot vector through the transmitter and normalises the
/// resulting points to unit average energy.
pub fn transmitter_constellation(tx: &LearnedTransmitter) -> Result<Constellation> {
    let raw = tx.raw_points()?;
    let points: Vec<Complex64> = raw.rows().into_iter().map(|r| Complex64::new(r[0], r[1])).collect();
    normalize_power(&points).map_err(|e| match e {
        Error::DegenerateConstellation(msg) => Error::TrainingFailure(format!("learned constellation is degenerate: {msg}")),
        other => other,
    })
}

/// `(re, im)` in, `M` logits out.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedReceiver {
    pub net: Mlp,
    pub csi_mode: CsiMode,
}

impl LearnedReceiver {
    pub fn new<R: Rng + ?Sized>(order: usize, cfg: &TrainConfig, rng: &mut R) -> Result<Self> {
        Self::from_net(init_mlp(&cfg.layer_sizes(2, order), cfg.activation, rng)?, cfg.csi_mode)
    }

    pub fn from_net(net: Mlp, csi_mode: CsiMode) -> Result<Self> {
        if net.input_dim() != 2 {
            return Err(Error::config("a receiver network must have 2 inputs"));
        }
        if net.layers().last().unwrap().activation != ActivationKind::Identity {
            return Err(Error::config("a receiver network must end in an identity layer"));
        }
        Ok(Self { net, csi_mode })
    }

    pub fn order(&self) -> usize {
        self.net.output_dim()
    }

    fn feature(&self, co: &CombinedObservation) -> Complex64 {
        match self.csi_mode {
            CsiMode::Raw => co.y,
            // combined gains are strictly positive for every fading draw
            CsiMode::Equalized => equalize(co).unwrap_or(co.y),
        }
    }

    /// Argmax decisions for a batch of observations.
    pub fn detect_batch(&self, obs: &[CombinedObservation]) -> Vec<usize> {
        let mut features = Array2::zeros((obs.len(), 2));
        for (row, co) in features.rows_mut().into_iter().zip(obs) {
            let z = self.feature(co);
            let mut row = row;
            row[0] = z.re;
            row[1] = z.im;
        }
        let logits = self.net.predict(features.view()).expect("receiver takes 2 inputs");
        logits
            .rows()
            .into_iter()
            .map(|r| {
                // first maximum wins, matching the ML tie rule
                let mut best = 0;
                for (k, &v) in r.iter().enumerate() {
                    if v > r[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }
}

/// A ready-to-use transceiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Transceiver {
    pub kind: TransceiverKind,
    pub constellation: Constellation,
    pub transmitter: Option<LearnedTransmitter>,
    pub receiver: Option<LearnedReceiver>,
}

impl Transceiver {
    /// The classical square-QAM transceiver with ML detection.
    pub fn qam_ml(order: usize) -> Result<Self> {
        Ok(Self {
            kind: TransceiverKind::QamMl,
            constellation: qam_constellation(order)?,
            transmitter: None,
            receiver: None,
        })
    }

    pub fn order(&self) -> usize {
        self.constellation.order()
    }

    pub fn detect(&self, co: &CombinedObservation) -> usize {
        detect(self, co)
    }

    pub fn detect_batch(&self, obs: &[CombinedObservation]) -> Vec<usize> {
        match &self.receiver {
            Some(rx) => rx.detect_batch(obs),
            None => obs.iter().map(|co| ml_detect(co, &self.constellation)).collect(),
        }
    }

    /// Writes `manifest.txt`, `constellation.csv` and any network checkpoints
    /// into `dir`, creating it if needed.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = format!("kind = {}\norder = {}\n", self.kind, self.order());
        if let Some(rx) = &self.receiver {
            manifest.push_str(&format!("csi_mode = {}\n", rx.csi_mode));
            checkpoint::save(&rx.net, dir.join("receiver.mlp"))?;
        }
        if let Some(tx) = &self.transmitter {
            checkpoint::save(&tx.net, dir.join("transmitter.mlp"))?;
        }
        self.constellation.write_csv(dir.join("constellation.csv"))?;
        let path = dir.join("manifest.txt");
        fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("manifest.txt");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut kind = None;
        let mut csi_mode = CsiMode::Equalized;
        for (i, line) in text.lines().enumerate() {
            let Some((k, v)) = line.split_once('=') else { continue };
            let wrap = |e: Error| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            };
            match k.trim() {
                "kind" => kind = Some(v.parse::<TransceiverKind>().map_err(wrap)?),
                "csi_mode" => csi_mode = v.parse().map_err(wrap)?,
                _ => {}
            }
        }
        let kind = kind.ok_or_else(|| Error::config(format!("{}: missing kind", path.display())))?;
        let constellation = Constellation::read_csv(dir.join("constellation.csv"))?;
        let transmitter = if kind.learned_transmitter() {
            Some(LearnedTransmitter::from_net(checkpoint::load(dir.join("transmitter.mlp"))?)?)
        } else {
            None
        };
        let receiver = if kind.learned_receiver() {
            Some(LearnedReceiver::from_net(checkpoint::load(dir.join("receiver.mlp"))?, csi_mode)?)
        } else {
            None
        };
        Ok(Self {
            kind,
            constellation,
            transmitter,
            receiver,
        })
    }
}

/// Symbol decision for one combined observation.
pub fn detect(tr: &Transceiver, co: &CombinedObservation) -> usize {
    match &tr.receiver {
        Some(rx) => rx.detect_batch(std::slice::from_ref(co))[0],
        None => ml_detect(co, &tr.constellation),
    }
}

/// A trained transceiver and its per-iteration training loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub transceiver: Transceiver,
    pub loss_history: Vec<f64>,
}

/// Trains a transceiver of the given kind over the simulated link.
pub fn train<R: Rng + ?Sized>(
    kind: TransceiverKind,
    order: usize,
    link: &LinkConfig,
    combiner: CombinerKind,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainOutcome> {
    if !kind.needs_training() {
        return Err(Error::config("the QAM-ML baseline has nothing to train"));
    }
    cfg.validate()?;
    let qam = qam_constellation(order)?;
    let mut transmitter = if kind.learned_transmitter() {
        Some(LearnedTransmitter::new(order, cfg, rng)?)
    } else {
        None
    };
    let mut receiver = LearnedReceiver::new(order, cfg, rng)?;
    let mut tx_opt = transmitter
        .as_ref()
        .map(|tx| Optimizer::new(cfg.optimizer, &tx.net, cfg.learning_rate));
    let mut rx_opt = Optimizer::new(cfg.optimizer, &receiver.net, cfg.learning_rate);

    let mut sim = Link::new(*link)?;
    let noise_var = noise_variance(cfg.train_esn0_db);
    let eye = Array2::<f64>::eye(order);
    let qam_points = Array2::from_shape_fn((order, 2), |(k, c)| {
        let p = qam.points()[k];
        if c == 0 {
            p.re
        } else {
            p.im
        }
    });

    let k = cfg.batch_size;
    let mut labels = vec![0usize; k];
    let mut features = Array2::<f64>::zeros((k, 2));
    let mut input_gain = vec![0.0; k];
    let mut history = Vec::with_capacity(cfg.iterations);

    for iteration in 0..cfg.iterations {
        // transmitter outputs for all M symbols, projected to unit energy
        let tx_pass = match &transmitter {
            Some(tx) => {
                let (raw, cache) = tx.net.forward(eye.view())?;
                let energy = raw.iter().map(|v| v * v).sum::<f64>() / order as f64;
                if !(energy > 0.0 && energy.is_finite()) {
                    return Err(Error::TrainingFailure(format!(
                        "transmitter output energy is {energy} at iteration {iteration}"
                    )));
                }
                let scale = energy.sqrt();
                let points = &raw / scale;
                Some((raw, cache, scale, points))
            }
            None => None,
        };
        let points = tx_pass.as_ref().map_or(&qam_points, |p| &p.3);

        for i in 0..k {
            let s = rng.random_range(0..order);
            labels[i] = s;
            let x = Complex64::new(points[[s, 0]], points[[s, 1]]);
            let obs = sim.observe(x, noise_var, combiner, rng);
            let (z, a) = match cfg.csi_mode {
                CsiMode::Raw => (obs.combined.y, obs.signal_gain),
                CsiMode::Equalized => (
                    obs.combined.y / obs.combined.gain,
                    obs.signal_gain / obs.combined.gain,
                ),
            };
            features[[i, 0]] = z.re;
            features[[i, 1]] = z.im;
            input_gain[i] = a;
        }

        let (logits, rx_cache) = receiver.net.forward(features.view())?;
        let (loss, dlogits) = softmax_cross_entropy_labels(logits.view(), &labels)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration, loss });
        }
        history.push(loss);
        let (rx_grads, dfeatures) = receiver.net.backward_with_input(&rx_cache, dlogits.view())?;

        if let (Some(tx), Some(opt), Some((raw, cache, scale, _))) =
            (transmitter.as_mut(), tx_opt.as_mut(), tx_pass.as_ref())
        {
            // gradient at each normalised point
            let mut dpoints = Array2::<f64>::zeros((order, 2));
            for i in 0..k {
                let s = labels[i];
                dpoints[[s, 0]] += input_gain[i] * dfeatures[[i, 0]];
                dpoints[[s, 1]] += input_gain[i] * dfeatures[[i, 1]];
            }
            // through p̂ = p / √(mean |p|²)
            let inner: f64 = (&dpoints * raw).sum();
            let coupling = inner / (order as f64 * scale.powi(3));
            let draw = &dpoints / *scale - &(raw * coupling);
            let tx_grads = tx.net.backward(cache, draw.view())?;
            opt.step(&mut tx.net, &tx_grads)?;
        }
        rx_opt.step(&mut receiver.net, &rx_grads)?;
    }

    let constellation = match &transmitter {
        Some(tx) => {
            let c = transmitter_constellation(tx)?;
            let d = min_pairwise_distance(c.points());
            if d < COLLAPSE_DISTANCE {
                return Err(Error::TrainingFailure(format!(
                    "learned constellation collapsed (min distance {d:e})"
                )));
            }
            c
        }
        None => qam,
    };
    let receiver = kind.learned_receiver().then_some(receiver);
    Ok(TrainOutcome {
        transceiver: Transceiver {
            kind,
            constellation,
            transmitter,
            receiver,
        },
        loss_history: history,
    })
}

/// Monte Carlo symbol error rate with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub ser: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_symbols: u64,
    pub n_errors: u64,
}

impl SerEstimate {
    pub fn from_counts(n_errors: u64, n_symbols: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(n_errors, n_symbols, Z_95);
        Self {
            ser: if n_symbols == 0 { 0.0 } else { n_errors as f64 / n_symbols as f64 },
            ci_low,
            ci_high,
            n_symbols,
            n_errors,
        }
    }
}

/// Estimates the SER with a fresh channel and noise draw per symbol.
///
/// Symbols are processed in blocks of [`EVAL_BLOCK`], each with its own
/// stream derived from one draw of `rng`, and the per-block error counts are
/// summed in block order; the result does not depend on thread scheduling.
pub fn evaluate_ser<R: Rng + ?Sized>(
    tr: &Transceiver,
    link: &LinkConfig,
    combiner: CombinerKind,
    esn0_db: f64,
    n_symbols: u64,
    rng: &mut R,
) -> Result<SerEstimate> {
    if n_symbols == 0 {
        return Err(Error::domain("at least one symbol is needed"));
    }
    link.validate()?;
    let key = rng.next_u64();
    let noise_var = noise_variance(esn0_db);
    let order = tr.order();
    let blocks = n_symbols.div_ceil(EVAL_BLOCK as u64);
    let errors: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(key, b);
            let mut sim = Link::new(*link).expect("validated above");
            let len = (n_symbols - b * EVAL_BLOCK as u64).min(EVAL_BLOCK as u64) as usize;
            let mut sent = Vec::with_capacity(len);
            let mut obs = Vec::with_capacity(len);
            for _ in 0..len {
                let s = rng.random_range(0..order);
                sent.push(s);
                obs.push(sim.observe(tr.constellation.points()[s], noise_var, combiner, &mut rng).combined);
            }
            let decided = tr.detect_batch(&obs);
            sent.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64
        })
        .collect();
    Ok(SerEstimate::from_counts(errors.iter().sum(), n_symbols))
}

/// Mean of the last `window` losses (or all, if fewer).
pub fn final_loss(history: &[f64], window: usize) -> f64 {
    let tail = &history[history.len().saturating_sub(window.max(1))..];
    if tail.is_empty() {
        return f64::NAN;
    }
    tail.iter().sum::<f64>() / tail.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimo::Fading;
    use crate::modem::qam_constellation;
    use crate::turbulence::TurbulenceRegime;
    use statrs::function::erf::erfc;

    fn small(iterations: usize) -> TrainConfig {
        TrainConfig {
            hidden_layers: 2,
            neurons_per_layer: 16,
            batch_size: 256,
            iterations,
            ..TrainConfig::default()
        }
    }

    fn strong_siso() -> LinkConfig {
        LinkConfig::siso(Fading::GammaGamma(TurbulenceRegime::Strong.params()))
    }

    #[test]
    fn kind_names_round_trip() {
        for k in TransceiverKind::ALL {
            assert_eq!(k.to_string().parse::<TransceiverKind>().unwrap(), k);
        }
        assert!("qam".parse::<TransceiverKind>().is_err());
        assert_eq!("raw".parse::<CsiMode>().unwrap(), CsiMode::Raw);
    }

    #[test]
    fn silent_transmitter_is_degenerate() {
        let mut tx = LearnedTransmitter::new(4, &small(1), &mut stream_rng(0, 0)).unwrap();
        tx.net.layers_mut().last_mut().unwrap().weights.fill(0.0);
        assert!(matches!(transmitter_constellation(&tx), Err(Error::TrainingFailure(_))));
    }

    #[test]
    fn transmitter_output_has_unit_energy() {
        for seed in 0..5 {
            let tx = LearnedTransmitter::new(16, &small(1), &mut stream_rng(seed, 0)).unwrap();
            let c = transmitter_constellation(&tx).unwrap();
            assert!((c.average_energy() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn training_starts_near_ln_m_and_is_deterministic() {
        let link = strong_siso();
        let run = |seed| {
            train(TransceiverKind::EndToEnd, 4, &link, CombinerKind::Mrc, &small(20), &mut stream_rng(seed, 0)).unwrap()
        };
        let a = run(3);
        let b = run(3);
        assert_eq!(a.loss_history, b.loss_history);
        assert_eq!(a.transceiver, b.transceiver);
        let ln_m = 4f64.ln();
        assert!((a.loss_history[0] - ln_m).abs() < 0.5 * ln_m, "{}", a.loss_history[0]);
        assert!((a.transceiver.constellation.average_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variants_carry_the_right_parts() {
        let link = strong_siso();
        let mut rng = stream_rng(5, 0);
        for kind in [TransceiverKind::QamDnn, TransceiverKind::DnnMl, TransceiverKind::EndToEnd] {
            let tr = train(kind, 4, &link, CombinerKind::Mrc, &small(3), &mut rng).unwrap().transceiver;
            assert_eq!(tr.receiver.is_some(), kind.learned_receiver());
            assert_eq!(tr.transmitter.is_some(), kind.learned_transmitter());
            if kind == TransceiverKind::QamDnn {
                assert_eq!(tr.constellation, qam_constellation(4).unwrap());
            }
        }
        assert!(train(TransceiverKind::QamMl, 4, &link, CombinerKind::Mrc, &small(3), &mut rng).is_err());
    }

    #[test]
    fn dnn_ml_shares_the_end_to_end_constellation() {
        let link = strong_siso();
        let e2e = train(TransceiverKind::EndToEnd, 4, &link, CombinerKind::Mrc, &small(10), &mut stream_rng(9, 0)).unwrap();
        let dml = train(TransceiverKind::DnnMl, 4, &link, CombinerKind::Mrc, &small(10), &mut stream_rng(9, 0)).unwrap();
        assert_eq!(e2e.transceiver.constellation, dml.transceiver.constellation);
        assert_eq!(e2e.loss_history, dml.loss_history);
    }

    #[test]
    fn divergence_names_the_iteration() {
        let cfg = TrainConfig {
            learning_rate: 1e300,
            ..small(50)
        };
        let r = train(TransceiverKind::QamDnn, 4, &strong_siso(), CombinerKind::Mrc, &cfg, &mut stream_rng(1, 0));
        assert!(matches!(r, Err(Error::Divergence { iteration, .. }) if iteration > 0), "{r:?}");
    }

    #[test]
    fn qam_ml_recovers_noiseless_symbols_and_is_pure() {
        let tr = Transceiver::qam_ml(16).unwrap();
        for (k, &x) in tr.constellation.points().iter().enumerate() {
            let co = CombinedObservation { y: x * 0.7, gain: 0.7 };
            assert_eq!(tr.detect(&co), k);
            assert_eq!(tr.detect(&co), tr.detect(&co));
        }
    }

    #[test]
    fn high_snr_ser_is_zero() {
        let tr = Transceiver::qam_ml(16).unwrap();
        let awgn = LinkConfig::siso(Fading::None);
        let est = evaluate_ser(&tr, &awgn, CombinerKind::Mrc, 60.0, 10_000, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(est.n_errors, 0);
    }

    #[test]
    fn qpsk_over_awgn_matches_closed_form() {
        let tr = Transceiver::qam_ml(4).unwrap();
        let link = LinkConfig::siso(Fading::None);
        for db in [4.0, 8.0] {
            let gamma = 10f64.powf(db / 10.0);
            let q = 0.5 * erfc((gamma / 2.0).sqrt());
            // per-dimension SNR is Es/N0 with σ² = N0 split over I and Q
            let theory = 2.0 * q - q * q;
            let est = evaluate_ser(&tr, &link, CombinerKind::Mrc, db, 100_000, &mut stream_rng(0, 0)).unwrap();
            assert!(est.ci_low <= theory && theory <= est.ci_high, "{db} dB: {est:?} vs {theory}");
        }
    }

    #[test]
    fn ci_shrinks_with_more_symbols() {
        let tr = Transceiver::qam_ml(4).unwrap();
        let link = strong_siso();
        let a = evaluate_ser(&tr, &link, CombinerKind::Mrc, 10.0, 40_000, &mut stream_rng(1, 0)).unwrap();
        let b = evaluate_ser(&tr, &link, CombinerKind::Mrc, 10.0, 80_000, &mut stream_rng(2, 0)).unwrap();
        let ratio = (b.ci_high - b.ci_low) / (a.ci_high - a.ci_low);
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn single_branch_combiners_agree() {
        let tr = Transceiver::qam_ml(16).unwrap();
        let link = strong_siso();
        let sers: Vec<u64> = CombinerKind::ALL
            .iter()
            .map(|&c| evaluate_ser(&tr, &link, c, 20.0, 20_000, &mut stream_rng(8, 0)).unwrap().n_errors)
            .collect();
        assert!(sers.iter().all(|&e| e.abs_diff(sers[0]) <= 2), "{sers:?}");
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let link = strong_siso();
        for kind in [TransceiverKind::QamDnn, TransceiverKind::DnnMl, TransceiverKind::EndToEnd] {
            let tr = train(kind, 4, &link, CombinerKind::Mrc, &small(2), &mut stream_rng(2, 0)).unwrap().transceiver;
            let path = dir.path().join(kind.to_string());
            tr.save(&path).unwrap();
            assert_eq!(Transceiver::load(&path).unwrap(), tr);
        }
        let qam = Transceiver::qam_ml(16).unwrap();
        qam.save(dir.path().join("qam")).unwrap();
        assert_eq!(Transceiver::load(dir.path().join("qam")).unwrap(), qam);
    }

    #[test]
    fn final_loss_windows() {
        assert_eq!(final_loss(&[4.0, 2.0, 1.0], 2), 1.5);
        assert_eq!(final_loss(&[3.0], 10), 3.0);
        assert!(final_loss(&[], 3).is_nan());
    }
}

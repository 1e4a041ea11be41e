//! Es/N0 sweeps.

use std::time::Instant;

use crate::error::Result;
use crate::seed::stream_rng;
use crate::transceivers::{evaluate_ser, final_loss, train, Transceiver, TransceiverKind};

use super::config::SimConfig;
use super::csv::emit_csv;

/// Losses averaged for the reported final training loss.
pub const FINAL_LOSS_WINDOW: usize = 10;

/// What a point's sub-stream is used for. Point `i` uses stream
/// `4·i + purpose` of the master seed; the spare slots are reserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Train = 0,
    Eval = 1,
}

pub fn point_stream(point: usize, purpose: Purpose) -> u64 {
    4 * point as u64 + purpose as u64
}

/// One CSV row. Failed points carry `nan` statistics and zero counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub esn0_db: f64,
    pub ser: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_symbols: u64,
    pub n_errors: u64,
    /// `nan` when nothing was trained.
    pub final_train_loss: f64,
}

impl SweepRow {
    fn failed(esn0_db: f64) -> Self {
        Self {
            esn0_db,
            ser: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            n_symbols: 0,
            n_errors: 0,
            final_train_loss: f64::NAN,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.ser.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub config_echo: String,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `(grid index, message)` for every point that did not complete.
    pub failures: Vec<(usize, String)>,
    pub metadata: RunMetadata,
}

impl SweepResult {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    /// Lines written as `#` comments ahead of the CSV header.
    pub fn metadata_lines(&self) -> Vec<String> {
        let m = &self.metadata;
        let mut lines = vec![
            format!("fso-dnn {}", m.version),
            format!("seed = {}", m.seed),
            format!("wall_time_s = {:.3}", m.wall_time_s),
        ];
        lines.extend(m.config_echo.lines().map(|l| format!("config: {l}")));
        lines.extend(
            self.failures
                .iter()
                .map(|(i, msg)| format!("failure: point {i}: {msg}")),
        );
        lines
    }
}

fn run_point(cfg: &SimConfig, index: usize, esn0_db: f64) -> Result<SweepRow> {
    let link = cfg.link();
    let (transceiver, loss) = if cfg.kind == TransceiverKind::QamMl {
        (Transceiver::qam_ml(cfg.order)?, f64::NAN)
    } else {
        let train_cfg = cfg.train_config_at(esn0_db);
        let mut rng = stream_rng(cfg.seed, point_stream(index, Purpose::Train));
        let outcome = train(cfg.kind, cfg.order, &link, cfg.combiner, &train_cfg, &mut rng)?;
        let loss = final_loss(&outcome.loss_history, FINAL_LOSS_WINDOW);
        (outcome.transceiver, loss)
    };
    let mut rng = stream_rng(cfg.seed, point_stream(index, Purpose::Eval));
    let est = evaluate_ser(&transceiver, &link, cfg.combiner, esn0_db, cfg.symbols_per_point, &mut rng)?;
    Ok(SweepRow {
        esn0_db,
        ser: est.ser,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        n_symbols: est.n_symbols,
        n_errors: est.n_errors,
        final_train_loss: loss,
    })
}

/// Runs the sweep, calling `progress` after every finished point with the
/// result so far. A failing point is recorded and the sweep moves on.
pub fn run_sweep_with(cfg: &SimConfig, mut progress: impl FnMut(&SweepResult) -> Result<()>) -> Result<SweepResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut result = SweepResult {
        rows: Vec::with_capacity(cfg.esn0_grid_db.len()),
        failures: Vec::new(),
        metadata: RunMetadata {
            config_echo: cfg.to_config_text(),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
        },
    };
    for (i, &db) in cfg.esn0_grid_db.iter().enumerate() {
        match run_point(cfg, i, db) {
            Ok(row) => result.rows.push(row),
            Err(e) => {
                result.rows.push(SweepRow::failed(db));
                result.failures.push((i, e.to_string()));
            }
        }
        result.metadata.wall_time_s = started.elapsed().as_secs_f64();
        progress(&result)?;
    }
    Ok(result)
}

/// [`run_sweep_with`], rewriting `cfg.output` (if set) after every point.
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, |partial| match &cfg.output {
        Some(path) => emit_csv(partial, path),
        None => Ok(()),
    })
}

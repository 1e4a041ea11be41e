//! Command-line front end. Exit codes: 0 success, 1 validation or training
//! failure, 2 usage or configuration error.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::modem::qam_constellation;
use crate::neural::{gradcheck_random, ActivationKind};
use crate::seed::stream_rng;
use crate::transceivers::{final_loss, train, Transceiver, TransceiverKind};
use crate::turbulence::{GammaGammaParams, TurbulenceRegime};

use super::config::{parse_config, SimConfig, FULL_SCALE_BATCH_SIZE};
use super::csv::emit_csv;
use super::sweep::{run_sweep_with, FINAL_LOSS_WINDOW};
use super::validate::validate_channel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest acceptable gradcheck relative error.
pub const GRADCHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "fso-dnn", version, about = "Gamma-Gamma FSO link simulator with learned transceivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an Es/N0 sweep and write the SER table as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override symbols_per_point.
        #[arg(long)]
        symbols: Option<u64>,
        /// Train with full-scale 65536-symbol batches.
        #[arg(long)]
        full_scale: bool,
    },
    /// Train one transceiver and save it to a directory.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Training Es/N0 in dB; defaults to the config's train_esn0_db.
        #[arg(long, allow_hyphen_values = true)]
        esn0_db: Option<f64>,
        #[arg(long)]
        full_scale: bool,
    },
    /// Check the turbulence sampler and density against theory.
    ValidateChannel {
        /// weak, moderate or strong; alternative to --alpha/--beta.
        #[arg(long, conflicts_with_all = ["alpha", "beta"])]
        regime: Option<TurbulenceRegime>,
        #[arg(long, requires = "beta")]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha")]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare backpropagation with finite differences.
    Gradcheck {
        /// One activation (e.g. tanh, leaky-relu:0.2) or all of them.
        #[arg(long, default_value = "all")]
        activation: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a constellation as CSV (index,re,im).
    Constellation {
        /// Square QAM of this order.
        #[arg(long, conflicts_with = "from")]
        order: Option<usize>,
        /// Directory written by `train`.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn load_config(path: &PathBuf, full_scale: bool) -> Result<SimConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if full_scale {
        cfg.train.batch_size = FULL_SCALE_BATCH_SIZE;
    }
    Ok(cfg)
}

fn sweep(config: PathBuf, out: Option<PathBuf>, symbols: Option<u64>, full_scale: bool) -> Result<(), Failure> {
    let mut cfg = load_config(&config, full_scale)?;
    if let Some(n) = symbols {
        cfg.symbols_per_point = n;
    }
    if out.is_some() {
        cfg.output = out;
    }
    let result = run_sweep_with(&cfg, |partial| {
        let last = partial.rows.last().expect("called after each point");
        match partial.failures.last() {
            Some((i, msg)) if *i + 1 == partial.rows.len() => {
                eprintln!("Es/N0 {:>6} dB  FAILED: {msg}", last.esn0_db)
            }
            _ => eprintln!(
                "Es/N0 {:>6} dB  SER {:.4e}  [{:.4e}, {:.4e}]",
                last.esn0_db, last.ser, last.ci_low, last.ci_high
            ),
        }
        match &cfg.output {
            Some(path) => emit_csv(partial, path),
            None => Ok(()),
        }
    })?;
    if cfg.output.is_none() {
        print!("{}", super::csv::to_csv(&result));
    }
    if result.succeeded() {
        Ok(())
    } else {
        Err(Failure::Run(format!("{} grid point(s) failed", result.failures.len())))
    }
}

fn train_cmd(config: PathBuf, out: PathBuf, esn0_db: Option<f64>, full_scale: bool) -> Result<(), Failure> {
    let cfg = load_config(&config, full_scale)?;
    if cfg.kind == TransceiverKind::QamMl {
        Transceiver::qam_ml(cfg.order)?.save(&out)?;
        println!("saved the untrained QAM-ML transceiver to {}", out.display());
        return Ok(());
    }
    let db = esn0_db.or(cfg.train_esn0_db).ok_or_else(|| {
        Failure::Usage("no training Es/N0: pass --esn0-db or set train_esn0_db".into())
    })?;
    let train_cfg = crate::transceivers::TrainConfig {
        train_esn0_db: db,
        ..cfg.train
    };
    let mut rng = stream_rng(cfg.seed, 0);
    let outcome = train(cfg.kind, cfg.order, &cfg.link(), cfg.combiner, &train_cfg, &mut rng)?;
    outcome.transceiver.save(&out)?;
    let h = &outcome.loss_history;
    println!(
        "trained {} at {db} dB for {} iterations: loss {:.5} -> {:.5}; saved to {}",
        cfg.kind,
        h.len(),
        h[0],
        final_loss(h, FINAL_LOSS_WINDOW),
        out.display()
    );
    Ok(())
}

fn validate_cmd(
    regime: Option<TurbulenceRegime>,
    alpha: Option<f64>,
    beta: Option<f64>,
    samples: usize,
    seed: u64,
) -> Result<(), Failure> {
    let params = match (regime, alpha, beta) {
        (Some(r), _, _) => r.params(),
        (None, Some(a), Some(b)) => GammaGammaParams::new(a, b).map_err(|e| Failure::Usage(e.to_string()))?,
        _ => return Err(Failure::Usage("give --regime or both --alpha and --beta".into())),
    };
    if samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    println!("alpha = {}, beta = {}, {samples} samples", params.alpha, params.beta);
    let checks = validate_channel(params, samples, seed)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Run(format!("{failed} channel check(s) failed")))
    }
}

fn gradcheck_cmd(activation: &str, seed: u64) -> Result<(), Failure> {
    let kinds: Vec<ActivationKind> = if activation.eq_ignore_ascii_case("all") {
        ActivationKind::CATALOG.to_vec()
    } else {
        vec![activation.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?]
    };
    let mut failed = 0;
    for kind in kinds {
        let report = gradcheck_random(kind, &mut stream_rng(seed, 0))?;
        let ok = report.max_rel_error < GRADCHECK_TOLERANCE;
        failed += usize::from(!ok);
        println!(
            "{} {:<16} max relative error {:.3e}",
            if ok { "PASS" } else { "FAIL" },
            kind.to_string(),
            report.max_rel_error
        );
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Run(format!("{failed} activation(s) exceeded {GRADCHECK_TOLERANCE:e}")))
    }
}

fn constellation_cmd(order: Option<usize>, from: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), Failure> {
    let constellation = match (order, from) {
        (_, Some(dir)) => Transceiver::load(dir)?.constellation,
        (Some(m), None) => qam_constellation(m)?,
        (None, None) => return Err(Failure::Usage("give --order or --from".into())),
    };
    match out {
        Some(path) => constellation.write_csv(path)?,
        None => print!("{}", constellation.to_csv()),
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Sweep {
            config,
            out,
            symbols,
            full_scale,
        } => sweep(config, out, symbols, full_scale),
        Command::Train {
            config,
            out,
            esn0_db,
            full_scale,
        } => train_cmd(config, out, esn0_db, full_scale),
        Command::ValidateChannel {
            regime,
            alpha,
            beta,
            samples,
            seed,
        } => validate_cmd(regime, alpha, beta, samples, seed),
        Command::Gradcheck { activation, seed } => gradcheck_cmd(&activation, seed),
        Command::Constellation { order, from, out } => constellation_cmd(order, from, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

//! Runs a sweep described by a config file and prints the CSV.
//!
//! ```text
//! cargo run --release --example sweep_from_config -- [config] [symbols_per_point]
//! ```
//!
//! Without arguments a small QAM-ML sweep over moderate turbulence is used.

use fso_dnn::harness::csv::to_csv;
use fso_dnn::harness::{parse_config, run_sweep_with};

const INLINE: &str = "\
modulation_order = 4
regime = moderate
kind = qam-ml
esn0_grid_db = 0, 10, 20, 30
symbols_per_point = 20000
seed = 1
";

fn main() -> fso_dnn::Result<()> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(&path).map_err(|source| fso_dnn::Error::Io {
            path: path.into(),
            source,
        })?,
        None => INLINE.to_string(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(n) = args.next().and_then(|s| s.parse().ok()) {
        cfg.symbols_per_point = n;
    }
    let result = run_sweep_with(&cfg, |partial| {
        let row = partial.rows.last().expect("one row per finished point");
        eprintln!("{:>6} dB done ({:.1} s)", row.esn0_db, partial.metadata.wall_time_s);
        Ok(())
    })?;
    print!("{}", to_csv(&result));
    for (i, msg) in &result.failures {
        eprintln!("point {i} failed: {msg}");
    }
    Ok(())
}

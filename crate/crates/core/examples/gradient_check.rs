//! Finite-difference check of backpropagation for every hidden activation.
//!
//! ```text
//! cargo run --release --example gradient_check -- [seeds]
//! ```

use fso_dnn::neural::{gradcheck_random, ActivationKind};
use fso_dnn::seed::stream_rng;

fn main() -> fso_dnn::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for kind in ActivationKind::CATALOG {
        let mut worst: f64 = 0.0;
        for seed in 0..seeds {
            let report = gradcheck_random(kind, &mut stream_rng(seed, 0))?;
            worst = worst.max(report.max_rel_error);
        }
        println!("{:<16} max relative error {worst:.3e}", kind.to_string());
    }
    Ok(())
}

//! Square QAM with maximum-likelihood detection over plain AWGN, checked
//! against the closed-form QPSK symbol error rate.
//!
//! ```text
//! cargo run --release --example qam_awgn_reference -- [order]
//! ```

use fso_dnn::mimo::{CombinerKind, Fading, LinkConfig};
use fso_dnn::seed::stream_rng;
use fso_dnn::transceivers::{evaluate_ser, Transceiver};
use statrs::function::erf::erfc;

fn q(x: f64) -> f64 {
    0.5 * erfc(x / 2f64.sqrt())
}

fn main() -> fso_dnn::Result<()> {
    let order: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let qam = Transceiver::qam_ml(order)?;
    let link = LinkConfig::siso(Fading::None);
    println!("{order}-QAM, min distance {:.4}", qam.constellation.min_distance());
    println!("Es/N0 dB        SER   95% interval             QPSK theory");
    for db in (0..=14).step_by(2) {
        let db = f64::from(db);
        let est = evaluate_ser(&qam, &link, CombinerKind::Mrc, db, 200_000, &mut stream_rng(0, db as u64))?;
        let gamma = 10f64.powf(db / 10.0);
        let theory = if order == 4 {
            format!("{:.4e}", 2.0 * q(gamma.sqrt()) - q(gamma.sqrt()).powi(2))
        } else {
            "-".into()
        };
        println!("{db:>8}  {:.4e}  [{:.4e}, {:.4e}]  {theory}", est.ser, est.ci_low, est.ci_high);
    }
    Ok(())
}

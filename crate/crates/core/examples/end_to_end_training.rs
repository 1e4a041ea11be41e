//! Trains an end-to-end transceiver over strong turbulence and compares its
//! symbol error rate with square QAM.
//!
//! ```text
//! cargo run --release --example end_to_end_training -- [order] [iterations] [batch]
//! ```

use std::time::Instant;

use fso_dnn::mimo::{CombinerKind, Fading, LinkConfig};
use fso_dnn::seed::stream_rng;
use fso_dnn::transceivers::{evaluate_ser, final_loss, train, TrainConfig, Transceiver, TransceiverKind};
use fso_dnn::turbulence::TurbulenceRegime;

fn arg(i: usize, default: usize) -> usize {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> fso_dnn::Result<()> {
    let order = arg(1, 4);
    let link = LinkConfig::siso(Fading::GammaGamma(TurbulenceRegime::Strong.params()));
    let cfg = TrainConfig {
        iterations: arg(2, 300),
        batch_size: arg(3, 1024),
        train_esn0_db: 25.0,
        ..TrainConfig::for_link(&link)
    };

    let started = Instant::now();
    let outcome = train(TransceiverKind::EndToEnd, order, &link, CombinerKind::Mrc, &cfg, &mut stream_rng(1, 0))?;
    let h = &outcome.loss_history;
    println!(
        "trained {} iterations in {:.2?}: loss {:.4} -> {:.4}",
        h.len(),
        started.elapsed(),
        h[0],
        final_loss(h, 20)
    );
    for (k, p) in outcome.transceiver.constellation.points().iter().enumerate() {
        println!("  symbol {k}: {:+.4} {:+.4}i", p.re, p.im);
    }

    let qam = Transceiver::qam_ml(order)?;
    for db in [15.0, 25.0, 35.0] {
        let learned = evaluate_ser(&outcome.transceiver, &link, CombinerKind::Mrc, db, 100_000, &mut stream_rng(2, 0))?;
        let reference = evaluate_ser(&qam, &link, CombinerKind::Mrc, db, 100_000, &mut stream_rng(2, 0))?;
        println!("Es/N0 {db:>4} dB  end-to-end SER {:.3e}  QAM-ML SER {:.3e}", learned.ser, reference.ser);
    }
    Ok(())
}

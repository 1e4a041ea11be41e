//! Learns a transmitter constellation for a fading link, plots it in the
//! terminal, and compares ML detection on it with square QAM (the DNN-ML
//! transceiver).
//!
//! ```text
//! cargo run --release --example constellation_shaping -- [order] [esn0_db]
//! ```

use fso_dnn::mimo::{CombinerKind, Fading, LinkConfig};
use fso_dnn::modem::Constellation;
use fso_dnn::seed::stream_rng;
use fso_dnn::transceivers::{evaluate_ser, train, TrainConfig, Transceiver, TransceiverKind};
use fso_dnn::turbulence::TurbulenceRegime;

fn plot(c: &Constellation) {
    const SIZE: usize = 21;
    let mut grid = vec![vec![' '; SIZE * 2]; SIZE];
    let scale = c.points().iter().map(|p| p.norm()).fold(0.0, f64::max) * 1.1;
    for (k, p) in c.points().iter().enumerate() {
        let col = ((p.re / scale + 1.0) / 2.0 * (SIZE * 2 - 1) as f64).round() as usize;
        let row = ((1.0 - p.im / scale) / 2.0 * (SIZE - 1) as f64).round() as usize;
        grid[row][col] = char::from_digit((k % 36) as u32, 36).unwrap_or('*');
    }
    for line in grid {
        println!("  |{}", line.into_iter().collect::<String>());
    }
}

fn main() -> fso_dnn::Result<()> {
    let mut args = std::env::args().skip(1);
    let order: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(16);
    let db: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(25.0);
    let link = LinkConfig::siso(Fading::GammaGamma(TurbulenceRegime::Strong.params()));
    let cfg = TrainConfig {
        batch_size: 1024,
        train_esn0_db: db,
        ..TrainConfig::for_link(&link)
    };

    let learned = train(TransceiverKind::DnnMl, order, &link, CombinerKind::Mrc, &cfg, &mut stream_rng(5, 0))?.transceiver;
    let qam = Transceiver::qam_ml(order)?;
    println!("learned constellation at {db} dB (min distance {:.4}):", learned.constellation.min_distance());
    plot(&learned.constellation);
    println!("square QAM (min distance {:.4}):", qam.constellation.min_distance());
    plot(&qam.constellation);

    for (name, tr) in [("DNN-ML", &learned), ("QAM-ML", &qam)] {
        let est = evaluate_ser(tr, &link, CombinerKind::Mrc, db, 200_000, &mut stream_rng(6, 0))?;
        println!("{name}: SER {:.4e} [{:.4e}, {:.4e}]", est.ser, est.ci_low, est.ci_high);
    }
    Ok(())
}

//! Selection, equal-gain and maximal-ratio combining of a 2x2 link under
//! strong turbulence, next to the single-aperture baseline.
//!
//! ```text
//! cargo run --release --example diversity_combining -- [order]
//! ```

use fso_dnn::mimo::{CombinerKind, Fading, LinkConfig};
use fso_dnn::seed::stream_rng;
use fso_dnn::transceivers::{evaluate_ser, Transceiver};
use fso_dnn::turbulence::TurbulenceRegime;

fn main() -> fso_dnn::Result<()> {
    let order: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let fading = Fading::GammaGamma(TurbulenceRegime::Strong.params());
    let qam = Transceiver::qam_ml(order)?;
    let siso = LinkConfig::siso(fading);
    let mimo = LinkConfig::new(2, 2, fading)?;

    println!("{order}-QAM, strong turbulence, 1e5 symbols per point");
    println!("Es/N0 dB      SISO    2x2 SC   2x2 EGC   2x2 MRC");
    for db in (0..=30).step_by(5) {
        let db = f64::from(db);
        let mut rng = stream_rng(3, db as u64);
        let mut row = vec![evaluate_ser(&qam, &siso, CombinerKind::Mrc, db, 100_000, &mut rng)?.ser];
        for combiner in [CombinerKind::Sc, CombinerKind::Egc, CombinerKind::Mrc] {
            row.push(evaluate_ser(&qam, &mimo, combiner, db, 100_000, &mut rng)?.ser);
        }
        let cells: Vec<String> = row.iter().map(|s| format!("{s:9.2e}")).collect();
        println!("{db:>8} {}", cells.join(" "));
    }
    Ok(())
}

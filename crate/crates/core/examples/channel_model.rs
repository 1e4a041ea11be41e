//! From atmosphere to Gamma-Gamma fading: Hufnagel-Valley turbulence profile,
//! Rytov variance over a 1550 nm link, the resulting (α, β), and a sampled
//! histogram against the density.
//!
//! ```text
//! cargo run --release --example channel_model -- [distance_m]
//! ```

use fso_dnn::seed::stream_rng;
use fso_dnn::stats::mean_and_scintillation;
use fso_dnn::turbulence::{
    gg_params_from_rytov, gg_pdf, hufnagel_valley, rytov_variance, sample_intensity, AtmosphericProfile,
    LinkGeometry, TurbulenceRegime,
};

fn main() -> fso_dnn::Result<()> {
    let distance: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000.0);

    let cn2 = hufnagel_valley(&AtmosphericProfile::new(0.0, 21.0, 1.7e-14)?)?;
    let sigma_r2 = rytov_variance(&LinkGeometry::new(1550e-9, distance, cn2)?);
    let params = gg_params_from_rytov(sigma_r2)?;
    println!("ground-level cn2 {cn2:.3e} m^-2/3, {distance} m link: Rytov variance {sigma_r2:.3}");
    println!("alpha {:.3}, beta {:.3}, scintillation index {:.4}", params.alpha, params.beta, params.scintillation_index());

    for regime in TurbulenceRegime::ALL {
        let p = regime.params();
        let draws = sample_intensity(p, 200_000, &mut stream_rng(0, 0));
        let (mean, si) = mean_and_scintillation(&draws);
        println!(
            "\n{regime}: alpha {} beta {}  sample mean {mean:.4}  SI {si:.4} (theory {:.4})",
            p.alpha,
            p.beta,
            p.scintillation_index()
        );
        let width = 0.25;
        for bin in 0..12 {
            let lo = bin as f64 * width;
            let frac = draws.iter().filter(|&&x| x >= lo && x < lo + width).count() as f64 / draws.len() as f64;
            let density = gg_pdf(p, lo + width / 2.0)?;
            println!(
                "  [{lo:4.2}, {:4.2})  histogram {:.3}  pdf {:.3}  {}",
                lo + width,
                frac / width,
                density,
                "#".repeat((frac / width * 40.0).round() as usize)
            );
        }
    }
    Ok(())
}

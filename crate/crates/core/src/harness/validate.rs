//! Statistical self-test of the turbulence sampler and density.

use std::fmt;

use crate::error::Result;
use crate::seed::stream_rng;
use crate::stats::{ks_critical_value, ks_statistic, mean_and_scintillation};
use crate::turbulence::{pdf_moment, sample_intensity, GammaGammaParams, IntensityCdf};

pub const MEAN_TOLERANCE: f64 = 0.01;
pub const SCINTILLATION_REL_TOLERANCE: f64 = 0.02;
pub const PDF_TOLERANCE: f64 = 1e-4;
pub const KS_ALPHA: f64 = 0.01;
/// Nodes of the tabulated CDF used by the KS check.
pub const CDF_NODES: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    /// Largest acceptable `|value − expected|`.
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        (self.value - self.expected).abs() < self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} value {:.6} expected {:.6} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.expected,
            self.tolerance
        )
    }
}

/// Sample mean, scintillation index, pdf normalisation and first moment, and
/// a Kolmogorov–Smirnov test of the sampler against the integrated density.
pub fn validate_channel(params: GammaGammaParams, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream_rng(seed, 0);
    let mut draws = sample_intensity(params, samples, &mut rng);
    let (mean, si) = mean_and_scintillation(&draws);
    let si_theory = params.scintillation_index();

    let cdf = IntensityCdf::new(params, CDF_NODES)?;
    let d = ks_statistic(&mut draws, |x| cdf.cdf(x));
    let critical = ks_critical_value(samples, KS_ALPHA);

    Ok(vec![
        Check {
            name: "sample mean",
            value: mean,
            expected: 1.0,
            tolerance: MEAN_TOLERANCE,
        },
        Check {
            name: "scintillation index",
            value: si,
            expected: si_theory,
            tolerance: SCINTILLATION_REL_TOLERANCE * si_theory,
        },
        Check {
            name: "pdf mass",
            value: pdf_moment(params, 0.0)?,
            expected: 1.0,
            tolerance: PDF_TOLERANCE,
        },
        Check {
            name: "pdf first moment",
            value: pdf_moment(params, 1.0)?,
            expected: 1.0,
            tolerance: PDF_TOLERANCE,
        },
        Check {
            name: "ks statistic",
            value: d,
            expected: 0.0,
            tolerance: critical,
        },
    ])
}

//! Repetition MIMO propagation, diversity combining and ML detection.
//!
//! The same complex symbol leaves every transmit aperture. Receive branch `i`
//! sees `y_i = η(r_i x + n_i)` where `r_i = Σ_j I_{i,j}` is the branch gain and
//! `n_i` is circular complex Gaussian noise of total variance σ². Combining
//! reduces the branches to one observation `y = g·x + noise` that the ML
//! detector (or a learned receiver) consumes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::modem::Constellation;
use crate::turbulence::{GammaGammaParams, GammaGammaSampler};

/// Fading law applied to each aperture pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    GammaGamma(GammaGammaParams),
    /// Every intensity fixed to 1 (pure AWGN link).
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub n_t: usize,
    pub n_r: usize,
    /// Photodetector conversion efficiency η.
    pub eta: f64,
    pub fading: Fading,
    /// Scale each aperture's amplitude by `1/√n_t` so total transmit energy is
    /// `Es` regardless of the aperture count. Off by default.
    pub normalize_tx_power: bool,
}

impl LinkConfig {
    pub fn new(n_t: usize, n_r: usize, fading: Fading) -> Result<Self> {
        let cfg = Self {
            n_t,
            n_r,
            eta: 1.0,
            fading,
            normalize_tx_power: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn siso(fading: Fading) -> Self {
        Self {
            n_t: 1,
            n_r: 1,
            eta: 1.0,
            fading,
            normalize_tx_power: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::config("aperture counts must be at least 1"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("η must be positive, got {}", self.eta)));
        }
        Ok(())
    }

    fn amplitude_scale(&self) -> f64 {
        if self.normalize_tx_power {
            (self.n_t as f64).sqrt().recip()
        } else {
            1.0
        }
    }
}

/// One draw of the `n_r × n_t` intensity matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    n_r: usize,
    n_t: usize,
    intensities: Vec<f64>,
}

impl ChannelRealization {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_r = rows.len();
        let n_t = rows.first().map_or(0, Vec::len);
        if n_r == 0 || n_t == 0 || rows.iter().any(|r| r.len() != n_t) {
            return Err(Error::domain("intensity matrix must be rectangular and non-empty"));
        }
        let intensities: Vec<f64> = rows.iter().flatten().copied().collect();
        if intensities.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::domain("intensities must be positive and finite"));
        }
        Ok(Self {
            n_r,
            n_t,
            intensities,
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.intensities[i * self.n_t + j]
    }

    /// `Σ_j I_{i,j}`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.intensities[i * self.n_t..(i + 1) * self.n_t].iter().sum()
    }

    fn branch_gain(&self, i: usize, cfg: &LinkConfig) -> f64 {
        self.row_sum(i) * cfg.amplitude_scale()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    /// Selection combining: the branch with the largest gain.
    Sc,
    /// Equal-gain combining: unweighted sum.
    Egc,
    /// Maximal-ratio combining: gain-weighted sum.
    Mrc,
}

impl CombinerKind {
    pub const ALL: [CombinerKind; 3] = [Self::Sc, Self::Egc, Self::Mrc];
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombinerKind::Sc => "sc",
            CombinerKind::Egc => "egc",
            CombinerKind::Mrc => "mrc",
        })
    }
}

impl FromStr for CombinerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sc" => Ok(Self::Sc),
            "egc" => Ok(Self::Egc),
            "mrc" => Ok(Self::Mrc),
            other => Err(Error::config(format!("unknown combiner '{other}'"))),
        }
    }
}

/// Combined signal `y` and the gain `g` the ML metric compares it against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedObservation {
    pub y: Complex64,
    pub gain: f64,
}

/// Noise variance `N0` for unit symbol energy at the given Es/N0 in dB.
pub fn noise_variance(esn0_db: f64) -> f64 {
    10f64.powf(-esn0_db / 10.0)
}

pub fn sample_channel<R: Rng + ?Sized>(cfg: &LinkConfig, rng: &mut R) -> ChannelRealization {
    let mut ch = ChannelRealization {
        n_r: cfg.n_r,
        n_t: cfg.n_t,
        intensities: vec![1.0; cfg.n_r * cfg.n_t],
    };
    if let Fading::GammaGamma(params) = cfg.fading {
        let sampler = GammaGammaSampler::new(params);
        fill_intensities(&mut ch, &sampler, rng);
    }
    ch
}

fn fill_intensities<R: Rng + ?Sized>(
    ch: &mut ChannelRealization,
    sampler: &GammaGammaSampler,
    rng: &mut R,
) {
    for v in ch.intensities.iter_mut() {
        *v = sampler.sample(rng);
    }
}

fn complex_noise<R: Rng + ?Sized>(std_per_dim: f64, rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * std_per_dim, im * std_per_dim)
}

/// Received branch signals `y_i = η(r_i x + n_i)` for one symbol.
pub fn propagate<R: Rng + ?Sized>(
    x: Complex64,
    ch: &ChannelRealization,
    cfg: &LinkConfig,
    noise_var: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); ch.n_r];
    propagate_into(x, ch, cfg, noise_var, rng, &mut out);
    out
}

fn propagate_into<R: Rng + ?Sized>(
    x: Complex64,
    ch: &ChannelRealization,
    cfg: &LinkConfig,
    noise_var: f64,
    rng: &mut R,
    out: &mut [Complex64],
) {
    let std = (noise_var.max(0.0) / 2.0).sqrt();
    for (i, y) in out.iter_mut().enumerate() {
        let noise = if std > 0.0 {
            complex_noise(std, rng)
        } else {
            Complex64::new(0.0, 0.0)
        };
        *y = cfg.eta * (x * ch.branch_gain(i, cfg) + noise);
    }
}

fn selected_branch(ch: &ChannelRealization) -> usize {
    // strict comparison keeps the lowest index on ties
    let mut best = 0;
    let mut best_gain = ch.row_sum(0);
    for i in 1..ch.n_r {
        let g = ch.row_sum(i);
        if g > best_gain {
            best = i;
            best_gain = g;
        }
    }
    best
}

/// Reduces the per-branch observations to a single combined observation.
pub fn combine(
    obs: &[Complex64],
    ch: &ChannelRealization,
    cfg: &LinkConfig,
    kind: CombinerKind,
) -> Result<CombinedObservation> {
    if obs.len() != ch.n_r {
        return Err(Error::domain(format!(
            "{} observations for {} receive branches",
            obs.len(),
            ch.n_r
        )));
    }
    let eta = cfg.eta;
    Ok(match kind {
        CombinerKind::Sc => {
            let p = selected_branch(ch);
            CombinedObservation {
                y: obs[p],
                gain: eta * ch.branch_gain(p, cfg),
            }
        }
        CombinerKind::Egc => CombinedObservation {
            y: obs.iter().sum(),
            gain: eta * (0..ch.n_r).map(|i| ch.branch_gain(i, cfg)).sum::<f64>(),
        },
        CombinerKind::Mrc => {
            let mut y = Complex64::new(0.0, 0.0);
            let mut energy = 0.0;
            for (i, o) in obs.iter().enumerate() {
                let r = ch.branch_gain(i, cfg);
                y += o * r;
                energy += r * r;
            }
            // η² as in the printed MRC metric; equals the true signal gain only for η = 1
            CombinedObservation {
                y,
                gain: eta * eta * energy,
            }
        }
    })
}

/// Actual coefficient of `x` in the combined `y` (noise excluded).
///
/// Matches [`CombinedObservation::gain`] except for MRC with `η ≠ 1`.
pub fn signal_gain(ch: &ChannelRealization, cfg: &LinkConfig, kind: CombinerKind) -> f64 {
    let eta = cfg.eta;
    match kind {
        CombinerKind::Sc => eta * ch.branch_gain(selected_branch(ch), cfg),
        CombinerKind::Egc => eta * (0..ch.n_r).map(|i| ch.branch_gain(i, cfg)).sum::<f64>(),
        CombinerKind::Mrc => eta * (0..ch.n_r).map(|i| ch.branch_gain(i, cfg).powi(2)).sum::<f64>(),
    }
}

/// Maximum-likelihood decision `argmin_k |y − g·x_k|²`, ties to the lowest index.
pub fn ml_detect(co: &CombinedObservation, constellation: &Constellation) -> usize {
    let mut best = 0;
    let mut best_metric = f64::INFINITY;
    for (k, p) in constellation.points().iter().enumerate() {
        let metric = (co.y - p * co.gain).norm_sqr();
        if metric < best_metric {
            best = k;
            best_metric = metric;
        }
    }
    best
}

/// `y / g`.
pub fn equalize(co: &CombinedObservation) -> Result<Complex64> {
    if !(co.gain > 0.0) {
        return Err(Error::domain(format!(
            "cannot equalize with gain {}",
            co.gain
        )));
    }
    Ok(co.y / co.gain)
}

/// One symbol's trip through the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub combined: CombinedObservation,
    /// See [`signal_gain`].
    pub signal_gain: f64,
}

/// Reusable per-thread link simulator: fading sampler plus scratch buffers.
#[derive(Debug, Clone)]
pub struct Link {
    cfg: LinkConfig,
    sampler: Option<GammaGammaSampler>,
    channel: ChannelRealization,
    branches: Vec<Complex64>,
}

impl Link {
    pub fn new(cfg: LinkConfig) -> Result<Self> {
        cfg.validate()?;
        let sampler = match cfg.fading {
            Fading::GammaGamma(p) => Some(GammaGammaSampler::new(p)),
            Fading::None => None,
        };
        Ok(Self {
            cfg,
            sampler,
            channel: ChannelRealization {
                n_r: cfg.n_r,
                n_t: cfg.n_t,
                intensities: vec![1.0; cfg.n_r * cfg.n_t],
            },
            branches: vec![Complex64::new(0.0, 0.0); cfg.n_r],
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    /// Fresh channel, fresh noise, combined.
    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        x: Complex64,
        noise_var: f64,
        kind: CombinerKind,
        rng: &mut R,
    ) -> Observation {
        if let Some(sampler) = &self.sampler {
            fill_intensities(&mut self.channel, sampler, rng);
        }
        propagate_into(x, &self.channel, &self.cfg, noise_var, rng, &mut self.branches);
        let combined = combine(&self.branches, &self.channel, &self.cfg, kind)
            .expect("branch buffer sized to n_r");
        Observation {
            combined,
            signal_gain: signal_gain(&self.channel, &self.cfg, kind),
        }
    }
}

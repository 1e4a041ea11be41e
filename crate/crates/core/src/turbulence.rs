//! Atmospheric channel model.
//!
//! The chain runs from an altitude profile of the refractive-index structure
//! parameter `c_n²` (Hufnagel–Valley), through the plane-wave Rytov variance of
//! a horizontal link, to the Gamma-Gamma shaping pair `(α, β)` and finally the
//! irradiance law itself.
//!
//! Intensities are normalised to unit mean: `I = X·Y` with
//! `X ~ Gamma(α, 1/α)` and `Y ~ Gamma(β, 1/β)` independent. That product has
//! exactly the Gamma-Gamma density
//!
//! ```text
//! f(I) = 2(αβ)^((α+β)/2) / (Γ(α)Γ(β)) · I^((α+β)/2 − 1) · K_{α−β}(2√(αβI))
//! ```
//!
//! so sampling never touches the Bessel function. The density itself is
//! evaluated as the mixing integral `f(I) = ∫ f_X(I/y) f_Y(y) dy/y`, which is
//! the same function written without `K_ν`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad;

/// Inputs of the Hufnagel–Valley profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericProfile {
    /// Altitude in metres.
    pub altitude_h: f64,
    /// RMS wind speed in m/s.
    pub wind_v: f64,
    /// Ground-level turbulence strength in m^(−2/3).
    pub ground_turbulence_a0: f64,
}

impl AtmosphericProfile {
    pub fn new(altitude_h: f64, wind_v: f64, ground_turbulence_a0: f64) -> Result<Self> {
        if !(altitude_h.is_finite() && wind_v.is_finite() && ground_turbulence_a0.is_finite()) {
            return Err(Error::domain("atmospheric profile fields must be finite"));
        }
        if altitude_h < 0.0 || wind_v < 0.0 {
            return Err(Error::domain("altitude and wind speed must be nonnegative"));
        }
        if ground_turbulence_a0 <= 0.0 {
            return Err(Error::domain("A0 must be strictly positive"));
        }
        Ok(Self {
            altitude_h,
            wind_v,
            ground_turbulence_a0,
        })
    }
}

/// Horizontal link geometry with a quasi-constant `c_n²` along the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Optical wavelength in metres.
    pub wavelength: f64,
    /// Link distance in metres.
    pub distance: f64,
    /// Refractive-index structure parameter in m^(−2/3).
    pub cn2: f64,
}

impl LinkGeometry {
    pub fn new(wavelength: f64, distance: f64, cn2: f64) -> Result<Self> {
        if !(wavelength > 100e-9 && wavelength < 100e-6) {
            return Err(Error::domain(format!(
                "wavelength {wavelength} m outside (100 nm, 100 µm)"
            )));
        }
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::domain("link distance must be positive"));
        }
        if !(cn2 > 0.0 && cn2.is_finite()) {
            return Err(Error::domain("c_n² must be positive"));
        }
        Ok(Self {
            wavelength,
            distance,
            cn2,
        })
    }

    /// Optical wave number `k = 2π/λ`.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Shaping pair of the Gamma-Gamma law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaGammaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!(
                "Gamma-Gamma parameters must be positive and finite (α={alpha}, β={beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Theoretical scintillation index `1/α + 1/β + 1/(αβ)` of the unit-mean law.
    pub fn scintillation_index(&self) -> f64 {
        1.0 / self.alpha + 1.0 / self.beta + 1.0 / (self.alpha * self.beta)
    }
}

/// Named turbulence strengths with their tabulated `(α, β)` presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurbulenceRegime {
    Weak,
    Moderate,
    Strong,
}

impl TurbulenceRegime {
    pub const ALL: [TurbulenceRegime; 3] = [Self::Weak, Self::Moderate, Self::Strong];

    pub fn params(self) -> GammaGammaParams {
        match self {
            TurbulenceRegime::Weak => GammaGammaParams {
                alpha: 11.6,
                beta: 10.1,
            },
            TurbulenceRegime::Moderate => GammaGammaParams {
                alpha: 4.0,
                beta: 1.9,
            },
            TurbulenceRegime::Strong => GammaGammaParams {
                alpha: 4.2,
                beta: 1.4,
            },
        }
    }

    /// Preset whose parameters equal `params` exactly, if any.
    pub fn from_params(params: GammaGammaParams) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.params() == params)
    }
}

impl fmt::Display for TurbulenceRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TurbulenceRegime::Weak => "weak",
            TurbulenceRegime::Moderate => "moderate",
            TurbulenceRegime::Strong => "strong",
        })
    }
}

impl FromStr for TurbulenceRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weak" => Ok(Self::Weak),
            "moderate" => Ok(Self::Moderate),
            "strong" => Ok(Self::Strong),
            other => Err(Error::config(format!("unknown turbulence regime '{other}'"))),
        }
    }
}

/// Hufnagel–Valley `c_n²` at the given altitude:
/// `0.00594 (v/27)² (10⁻⁵h)¹⁰ e^(−h/1000) + 2.7·10⁻¹⁶ e^(−h/1500) + A₀ e^(−h/100)`.
pub fn hufnagel_valley(profile: &AtmosphericProfile) -> Result<f64> {
    let h = profile.altitude_h;
    let wind = profile.wind_v / 27.0;
    let high = 0.00594 * wind * wind * (1e-5 * h).powi(10) * (-h / 1000.0).exp();
    let mid = 2.7e-16 * (-h / 1500.0).exp();
    let ground = profile.ground_turbulence_a0 * (-h / 100.0).exp();
    let cn2 = high + mid + ground;
    if !cn2.is_finite() {
        return Err(Error::domain(format!("c_n² overflowed for {profile:?}")));
    }
    Ok(cn2)
}

/// Plane-wave Rytov variance `1.23 c_n² k^(7/6) l^(11/6)`.
pub fn rytov_variance(geometry: &LinkGeometry) -> f64 {
    1.23 * geometry.cn2
        * geometry.wave_number().powf(7.0 / 6.0)
        * geometry.distance.powf(11.0 / 6.0)
}

/// Gamma-Gamma `(α, β)` for plane-wave propagation at Rytov variance `sigma_r2`.
pub fn gg_params_from_rytov(sigma_r2: f64) -> Result<GammaGammaParams> {
    if !(sigma_r2 > 0.0 && sigma_r2.is_finite()) {
        return Err(Error::domain(format!(
            "Rytov variance must be positive, got {sigma_r2}"
        )));
    }
    let s125 = sigma_r2.powf(12.0 / 5.0);
    let alpha_arg = 0.49 * sigma_r2 / (1.0 + 1.11 * s125).powf(7.0 / 6.0);
    let beta_arg = 0.51 * sigma_r2 / (1.0 + 0.69 * s125).powf(5.0 / 6.0);
    // expm1 keeps the small-σ² limit accurate
    GammaGammaParams::new(1.0 / alpha_arg.exp_m1(), 1.0 / beta_arg.exp_m1())
}

/// Unit-mean Gamma-Gamma intensity sampler.
#[derive(Debug, Clone, Copy)]
pub struct GammaGammaSampler {
    large: Gamma<f64>,
    small: Gamma<f64>,
}

impl GammaGammaSampler {
    pub fn new(params: GammaGammaParams) -> Self {
        // both shapes and scales are positive and finite by construction
        Self {
            large: Gamma::new(params.alpha, 1.0 / params.alpha).unwrap(),
            small: Gamma::new(params.beta, 1.0 / params.beta).unwrap(),
        }
    }
}

impl Distribution<f64> for GammaGammaSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = self.large.sample(rng);
        let y = self.small.sample(rng);
        // Marsaglia–Tsang can return an exact 0.0 for tiny shapes; keep I > 0
        (x * y).max(f64::MIN_POSITIVE)
    }
}

/// Draws `count` independent unit-mean intensities.
pub fn sample_intensity<R: Rng + ?Sized>(
    params: GammaGammaParams,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    let sampler = GammaGammaSampler::new(params);
    (0..count).map(|_| sampler.sample(rng)).collect()
}

/// Log of the integrand of the mixing integral in `u = ln y`, normalisers
/// included.
#[derive(Debug, Clone, Copy)]
struct MixingIntegrand {
    alpha: f64,
    beta: f64,
    intensity: f64,
    ln_intensity: f64,
}

/// `k ln k − k − lnΓ(k)`: the Gamma(k, 1/k) log-normaliser with its `e^-k`
/// pulled out, which keeps it O(ln k) for large `k`.
fn reduced_ln_norm(k: f64) -> f64 {
    k * k.ln() - k - ln_gamma(k)
}

impl MixingIntegrand {
    /// Log of `f_X(I e^-u) f_Y(e^u)`, normalisers included; written with
    /// `e^t − 1 − t` so nothing large cancels when a shape parameter is huge.
    fn ln_value(&self, u: f64) -> f64 {
        let w = self.ln_intensity - u;
        reduced_ln_norm(self.alpha) + reduced_ln_norm(self.beta)
            - self.ln_intensity
            - self.alpha * (w.exp_m1() - w)
            - self.beta * (u.exp_m1() - u)
    }

    fn slope(&self, u: f64) -> f64 {
        self.alpha * (self.ln_intensity - u).exp_m1() - self.beta * u.exp_m1()
    }

    fn curvature(&self, u: f64) -> f64 {
        self.alpha * self.intensity * (-u).exp() + self.beta * u.exp()
    }

    /// The log-integrand is strictly concave, so its slope has a single root.
    fn mode(&self) -> f64 {
        let mut lo = 0.5 * self.ln_intensity - 1.0;
        while self.slope(lo) < 0.0 {
            lo -= 2.0 * (lo.abs() + 1.0);
        }
        let mut hi = 0.5 * self.ln_intensity + 1.0;
        while self.slope(hi) > 0.0 {
            hi += 2.0 * (hi.abs() + 1.0);
        }
        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let s = self.slope(u);
            if s == 0.0 {
                return u;
            }
            if s > 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let newton = u + s / self.curvature(u);
            u = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo) < 1e-13 * (1.0 + u.abs()) || s.abs() < 1e-14 {
                break;
            }
        }
        u
    }
}

/// Gamma-Gamma density at intensity `intensity > 0`.
pub fn gg_pdf(params: GammaGammaParams, intensity: f64) -> Result<f64> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::domain(format!(
            "density requires I > 0, got {intensity}"
        )));
    }
    let (a, b) = (params.alpha, params.beta);
    let integrand = MixingIntegrand {
        alpha: a,
        beta: b,
        intensity,
        ln_intensity: intensity.ln(),
    };
    let mode = integrand.mode();
    let peak = integrand.ln_value(mode);

    // walk outward until the integrand is e^-50 below its peak
    let step0 = 1.0 / integrand.curvature(mode).sqrt();
    let edge = |dir: f64| {
        let mut step = step0;
        let mut u = mode + dir * step;
        while integrand.ln_value(u) - peak > -50.0 {
            step *= 2.0;
            u = mode + dir * step;
        }
        u
    };
    let (lo, hi) = (edge(-1.0), edge(1.0));

    let scaled = quad::integrate(
        |u| (integrand.ln_value(u) - peak).exp(),
        lo,
        hi,
        8,
        0.0,
        1e-13,
    );
    Ok(scaled.value * peak.exp())
}

/// Tabulated cumulative distribution obtained by integrating [`gg_pdf`].
///
/// Nodes are log-spaced; values between nodes are linearly interpolated.
#[derive(Debug, Clone)]
pub struct IntensityCdf {
    ln_lo: f64,
    ln_step: f64,
    lo: f64,
    values: Vec<f64>,
}

impl IntensityCdf {
    pub fn new(params: GammaGammaParams, nodes: usize) -> Result<Self> {
        let nodes = nodes.max(16);
        let pdf = |x: f64| gg_pdf(params, x).unwrap_or(0.0);
        // tail bound: past the mean, stop once x·f(x) is negligible
        let mut hi = 4.0;
        while hi * pdf(hi) > 1e-14 {
            hi *= 1.5;
        }
        let lo = 1e-8_f64.min(hi * 1e-9);
        let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
        let ln_step = (ln_hi - ln_lo) / (nodes - 1) as f64;

        let mut values = Vec::with_capacity(nodes);
        let mut acc = quad::integrate(pdf, 0.0, lo, 1, 0.0, 1e-8).value;
        values.push(acc);
        for i in 1..nodes {
            let a = (ln_lo + ln_step * (i - 1) as f64).exp();
            let b = (ln_lo + ln_step * i as f64).exp();
            acc += quad::integrate(pdf, a, b, 1, 1e-16, 1e-10).value;
            values.push(acc);
        }
        Ok(Self {
            ln_lo,
            ln_step,
            lo,
            values,
        })
    }

    /// `P(I ≤ intensity)`.
    pub fn cdf(&self, intensity: f64) -> f64 {
        if intensity <= 0.0 {
            return 0.0;
        }
        if intensity < self.lo {
            return self.values[0] * intensity / self.lo;
        }
        let pos = (intensity.ln() - self.ln_lo) / self.ln_step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Total probability mass captured by the table.
    pub fn total_mass(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// `∫₀^∞ Iᵏ f(I) dI` by quadrature of [`gg_pdf`] in `u = ln I`.
pub fn pdf_moment(params: GammaGammaParams, k: f64) -> Result<f64> {
    let weighted = |u: f64| {
        let x = u.exp();
        gg_pdf(params, x).map(|f| f * x.powf(k + 1.0)).unwrap_or(0.0)
    };
    // extend the upper limit until the tail contributes nothing
    let mut hi = 2.0_f64;
    while weighted(hi) > 1e-18 {
        hi += 1.0;
    }
    let lo = -60.0 / params.alpha.min(params.beta).min(1.0);
    Ok(quad::integrate(weighted, lo, hi, 64, 1e-14, 1e-12).value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hv_at_ground_level() {
        let p = AtmosphericProfile::new(0.0, 21.0, 1.7e-14).unwrap();
        let cn2 = hufnagel_valley(&p).unwrap();
        assert!((cn2 - 1.727e-14).abs() < 1e-26);
    }

    #[test]
    fn hv_at_one_km_matches_high_precision() {
        // evaluated term-by-term at 40 significant digits
        let p = AtmosphericProfile::new(1000.0, 27.0, 1.7e-14).unwrap();
        let cn2 = hufnagel_valley(&p).unwrap();
        let expected = 1.393_944_427_968_009e-16;
        assert!(((cn2 - expected) / expected).abs() < 1e-13);
    }

    #[test]
    fn hv_tail_decays_monotonically() {
        let mut prev = f64::INFINITY;
        for h in (20..200).map(|k| k as f64 * 1000.0) {
            let cn2 = hufnagel_valley(&AtmosphericProfile::new(h, 21.0, 1.7e-14).unwrap()).unwrap();
            assert!(cn2 < prev && cn2 > 0.0);
            prev = cn2;
        }
        assert!(prev < 1e-30);
    }

    #[test]
    fn hv_overflow_is_domain_error() {
        let p = AtmosphericProfile::new(1e5, 1e300, 1.7e-14).unwrap();
        assert!(matches!(hufnagel_valley(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn profile_validation() {
        assert!(AtmosphericProfile::new(-1.0, 1.0, 1e-14).is_err());
        assert!(AtmosphericProfile::new(1.0, 1.0, 0.0).is_err());
        assert!(AtmosphericProfile::new(f64::NAN, 1.0, 1e-14).is_err());
    }

    #[test]
    fn rytov_reference_value() {
        // 1.23·1e−14·(2π/1.55e−6)^(7/6)·1000^(11/6) at 40 digits
        let g = LinkGeometry::new(1550e-9, 1000.0, 1e-14).unwrap();
        let s = rytov_variance(&g);
        assert!((s - 0.199_095_438_511_270_26).abs() < 1e-13);
    }

    #[test]
    fn rytov_scaling() {
        let g1 = LinkGeometry::new(1550e-9, 1000.0, 1e-14).unwrap();
        let g2 = LinkGeometry::new(1550e-9, 2000.0, 1e-14).unwrap();
        let ratio = rytov_variance(&g2) / rytov_variance(&g1);
        assert!((ratio - 2f64.powf(11.0 / 6.0)).abs() < 1e-12);
        // linear in c_n², vanishing with it
        let tiny = LinkGeometry::new(1550e-9, 1000.0, 1e-300).unwrap();
        assert!(rytov_variance(&tiny) < 1e-285);
    }

    #[test]
    fn geometry_validation() {
        assert!(LinkGeometry::new(50e-9, 1000.0, 1e-14).is_err());
        assert!(LinkGeometry::new(1550e-9, 0.0, 1e-14).is_err());
        assert!(LinkGeometry::new(1550e-9, 1.0, -1e-14).is_err());
    }

    #[test]
    fn gg_params_reference_value() {
        // σ_R² = 1, both formulas at 40 digits
        let p = gg_params_from_rytov(1.0).unwrap();
        assert!((p.alpha - 4.393_859_025_392_147).abs() < 1e-12);
        assert!((p.beta - 2.563_631_979_503_695).abs() < 1e-12);
        // second route: the textbook exp(x) − 1 form
        let a2 = 1.0 / ((0.49 / 2.11f64.powf(7.0 / 6.0)).exp() - 1.0);
        let b2 = 1.0 / ((0.51 / 1.69f64.powf(5.0 / 6.0)).exp() - 1.0);
        assert!((p.alpha - a2).abs() < 1e-12 && (p.beta - b2).abs() < 1e-12);
    }

    #[test]
    fn gg_params_blow_up_near_zero() {
        let p = gg_params_from_rytov(1e-9).unwrap();
        assert!(p.alpha > 1e8 && p.beta > 1e8);
    }

    #[test]
    fn gg_params_reject_nonpositive() {
        assert!(gg_params_from_rytov(0.0).is_err());
        assert!(gg_params_from_rytov(-1.0).is_err());
    }

    #[test]
    fn alpha_dominates_beta_on_log_grid() {
        for i in 0..=500 {
            let s = 10f64.powf(-3.0 + 5.0 * i as f64 / 500.0);
            let p = gg_params_from_rytov(s).unwrap();
            assert!(p.alpha >= p.beta, "σ²={s}: α={} β={}", p.alpha, p.beta);
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let params = TurbulenceRegime::Strong.params();
        let a = sample_intensity(params, 1000, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_intensity(params, 1000, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn sampler_handles_small_shapes() {
        let params = GammaGammaParams::new(0.3, 0.6).unwrap();
        let xs = sample_intensity(params, 200_000, &mut ChaCha8Rng::seed_from_u64(9));
        assert!(xs.iter().all(|&x| x > 0.0));
        let (mean, _) = crate::stats::mean_and_scintillation(&xs);
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn regimes_order_by_scintillation() {
        let si = |r: TurbulenceRegime| {
            let xs = sample_intensity(r.params(), 200_000, &mut ChaCha8Rng::seed_from_u64(1));
            crate::stats::mean_and_scintillation(&xs).1
        };
        let (s, m, w) = (
            si(TurbulenceRegime::Strong),
            si(TurbulenceRegime::Moderate),
            si(TurbulenceRegime::Weak),
        );
        assert!(s > m && m > w, "{s} {m} {w}");
    }

    #[test]
    fn pdf_rejects_nonpositive() {
        let p = TurbulenceRegime::Strong.params();
        assert!(gg_pdf(p, 0.0).is_err());
        assert!(gg_pdf(p, -1.0).is_err());
    }

    #[test]
    fn pdf_matches_gamma_when_one_shape_is_huge() {
        // β → ∞ collapses Y to 1, leaving a Gamma(α, 1/α) density
        let p = GammaGammaParams::new(3.0, 1e7).unwrap();
        for &x in &[0.2, 0.7, 1.0, 2.5] {
            let exact = (3.0 * 3f64.ln() - ln_gamma(3.0) + 2.0 * f64::ln(x) - 3.0 * x).exp();
            let got = gg_pdf(p, x).unwrap();
            assert!((got - exact).abs() < 1e-3 * exact, "x={x}: {got} vs {exact}");
        }
    }

    #[test]
    fn regime_names_round_trip() {
        for r in TurbulenceRegime::ALL {
            assert_eq!(r.to_string().parse::<TurbulenceRegime>().unwrap(), r);
            assert_eq!(TurbulenceRegime::from_params(r.params()), Some(r));
        }
        assert!("hurricane".parse::<TurbulenceRegime>().is_err());
    }
}

//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.
//!
//! Used for density validation only, never in Monte Carlo loops.

/// Kronrod abscissae, descending; odd positions are shared with the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of a quadrature: value and estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]`, starting from `pieces` equal sub-intervals and
/// bisecting the worst segment until the total error estimate falls below
/// `max(abs_tol, rel_tol * |value|)` or the segment budget runs out.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    pieces: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Estimate {
    const MAX_SEGMENTS: usize = 2000;
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut segments: Vec<Segment> = (0..pieces)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + width };
            kronrod(&mut f, lo, hi)
        })
        .collect();

    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || segments.len() >= MAX_SEGMENTS {
            return Estimate { value, error };
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval exhausted at machine precision; keep it as is
            segments.push(Segment { error: 0.0, ..s });
            continue;
        }
        segments.push(kronrod(&mut f, s.a, mid));
        segments.push(kronrod(&mut f, mid, s.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| 3.0 * x * x + 2.0 * x, 0.0, 2.0, 1, 1e-14, 0.0);
        assert!((est.value - 12.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let est = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, 4, 1e-13, 1e-13);
        assert!((est.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let est = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1, 1e-9, 1e-10);
        assert!((est.value - 2.0).abs() < 1e-6, "{est:?}");
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 3, 1e-9, 0.0).value, 0.0);
    }
}

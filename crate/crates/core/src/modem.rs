//! Constellations, symbol mapping and one-hot encoding.
//!
//! Every constellation, fixed or learned, is held at unit average energy so an
//! Es/N0 value means the same thing for all transceivers.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Minimum separation between two distinct points after normalisation.
pub const MIN_POINT_SEPARATION: f64 = 1e-9;

/// An ordered set of `M` complex points with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Modulation order `M`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn average_energy(&self) -> f64 {
        average_energy(&self.points)
    }

    pub fn min_distance(&self) -> f64 {
        min_pairwise_distance(&self.points)
    }

    /// Index of the point closest to `z`; ties go to the lowest index.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_metric = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let metric = (z - p).norm_sqr();
            if metric < best_metric {
                best = k;
                best_metric = metric;
            }
        }
        best
    }

    /// `index,re,im` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (k, p) in self.points.iter().enumerate() {
            out.push_str(&format!("{k},{:?},{:?}\n", p.re, p.im));
        }
        out
    }

    /// Parses [`Constellation::to_csv`] output. Points are rescaled to unit
    /// energy unless they already have it.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                line: lineno + 1,
                message: msg.to_string(),
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad("expected index,re,im"));
            }
            let index: usize = fields[0].parse().map_err(|_| bad("bad index"))?;
            if index != points.len() {
                return Err(bad("indices must be 0, 1, 2, ... in order"));
            }
            let re: f64 = fields[1].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = fields[2].parse().map_err(|_| bad("bad imaginary part"))?;
            points.push(Complex64::new(re, im));
        }
        let normalized = normalize_power(&points)?;
        // keep already-normalised files bit-exact
        if (average_energy(&points) - 1.0).abs() <= 1e-12 {
            Ok(Constellation { points })
        } else {
            Ok(normalized)
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

fn average_energy(points: &[Complex64]) -> f64 {
    points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64
}

pub(crate) fn min_pairwise_distance(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

fn gray(n: usize) -> usize {
    n ^ (n >> 1)
}

/// Gray-coded square QAM of order `m` scaled to unit average energy.
///
/// The upper half of the index bits selects the in-phase level and the lower
/// half the quadrature level, each Gray-coded over the odd levels
/// `−(L−1), …, −1, 1, …, L−1`, so minimum-distance neighbours differ in one bit.
pub fn qam_constellation(m: usize) -> Result<Constellation> {
    let side = (m as f64).sqrt().round() as usize;
    if m < 4 || side * side != m || !side.is_power_of_two() {
        return Err(Error::config(format!(
            "square QAM needs M = 4, 16, 64, ...; got {m}"
        )));
    }
    let bits = side.trailing_zeros();
    // position along an axis for each Gray label
    let mut level_of = vec![0.0; side];
    for pos in 0..side {
        level_of[gray(pos)] = (2 * pos) as f64 - (side - 1) as f64;
    }
    let points: Vec<Complex64> = (0..m)
        .map(|k| Complex64::new(level_of[k >> bits], level_of[k & (side - 1)]))
        .collect();
    normalize_power(&points)
}

/// Maps symbol indices onto constellation points.
pub fn modulate(indices: &[usize], constellation: &Constellation) -> Result<Vec<Complex64>> {
    indices
        .iter()
        .map(|&k| {
            constellation.points.get(k).copied().ok_or_else(|| {
                Error::domain(format!(
                    "symbol {k} out of range for M = {}",
                    constellation.order()
                ))
            })
        })
        .collect()
}

/// Length-`m` indicator vector for `index`.
pub fn one_hot(index: usize, m: usize) -> Result<Vec<f64>> {
    if index >= m {
        return Err(Error::domain(format!("one-hot index {index} >= M = {m}")));
    }
    let mut v = vec![0.0; m];
    v[index] = 1.0;
    Ok(v)
}

/// `n` symbols drawn uniformly from `[0, m)`.
pub fn random_symbols<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..m)).collect()
}

/// Rescales `points` by a single positive factor to unit average energy.
pub fn normalize_power(points: &[Complex64]) -> Result<Constellation> {
    if points.is_empty() {
        return Err(Error::DegenerateConstellation("no points".into()));
    }
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::DegenerateConstellation("non-finite point".into()));
    }
    let energy = average_energy(points);
    if energy <= 0.0 {
        return Err(Error::DegenerateConstellation(
            "all points are at the origin".into(),
        ));
    }
    let scale = energy.sqrt().recip();
    let points: Vec<Complex64> = points.iter().map(|p| p * scale).collect();
    let d = min_pairwise_distance(&points);
    if d <= MIN_POINT_SEPARATION {
        return Err(Error::DegenerateConstellation(format!(
            "points coincide (min distance {d:e})"
        )));
    }
    Ok(Constellation { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn qpsk_points() {
        let c = qam_constellation(4).unwrap();
        for p in c.points() {
            assert!((p.norm() - 1.0).abs() < 1e-15);
            assert!((p.re.abs() - 0.5f64.sqrt()).abs() < 1e-15);
            assert!((p.im.abs() - 0.5f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn qam16_grid_and_distance() {
        let c = qam_constellation(16).unwrap();
        let s = 10f64.sqrt();
        for p in c.points() {
            let (i, q) = (p.re * s, p.im * s);
            assert!([-3.0, -1.0, 1.0, 3.0].iter().any(|l| (l - i).abs() < 1e-12));
            assert!([-3.0, -1.0, 1.0, 3.0].iter().any(|l| (l - q).abs() < 1e-12));
        }
        assert!((c.average_energy() - 1.0).abs() < 1e-12);
        assert!((c.min_distance() - 2.0 / s).abs() < 1e-12);
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for m in [4, 16, 64] {
            let c = qam_constellation(m).unwrap();
            let d = c.min_distance();
            for i in 0..m {
                for j in i + 1..m {
                    if (c.points()[i] - c.points()[j]).norm() < d * (1.0 + 1e-9) {
                        assert_eq!((i ^ j).count_ones(), 1, "M={m}: {i} vs {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        for m in [0, 1, 2, 8, 32, 12] {
            assert!(matches!(qam_constellation(m), Err(Error::Config(_))), "{m}");
        }
    }

    #[test]
    fn modulate_edge_cases() {
        let c = qam_constellation(4).unwrap();
        assert!(modulate(&[], &c).unwrap().is_empty());
        let out = modulate(&[0, 0, 0], &c).unwrap();
        assert!(out.iter().all(|&x| x == c.points()[0]));
        assert!(matches!(modulate(&[4], &c), Err(Error::Domain(_))));
    }

    #[test]
    fn noiseless_round_trip_is_exhaustive() {
        for m in [4, 16] {
            let c = qam_constellation(m).unwrap();
            let idx: Vec<usize> = (0..m).collect();
            let back: Vec<usize> = modulate(&idx, &c)
                .unwrap()
                .into_iter()
                .map(|z| c.nearest(z))
                .collect();
            assert_eq!(back, idx);
        }
    }

    #[test]
    fn one_hot_cases() {
        assert_eq!(one_hot(0, 4).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(one_hot(3, 4).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        assert!(one_hot(4, 4).is_err());
    }

    #[test]
    fn normalize_rejects_degenerate() {
        let zeros = vec![Complex64::new(0.0, 0.0); 4];
        assert!(matches!(
            normalize_power(&zeros),
            Err(Error::DegenerateConstellation(_))
        ));
        let same = vec![Complex64::new(1.0, 1.0); 4];
        assert!(normalize_power(&same).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = qam_constellation(16).unwrap();
        let back = Constellation::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
    }

    fn cloud() -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 2..32).prop_map(|v| {
            v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()
        })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent_and_scale_invariant(points in cloud(), scale in 0.01..100.0f64) {
            if let Ok(c) = normalize_power(&points) {
                prop_assert!((c.average_energy() - 1.0).abs() < 1e-12);
                let again = normalize_power(c.points()).unwrap();
                for (a, b) in again.points().iter().zip(c.points()) {
                    prop_assert!((a - b).norm() < 1e-12);
                }
                let scaled: Vec<Complex64> = points.iter().map(|p| p * scale).collect();
                let s = normalize_power(&scaled).unwrap();
                for (a, b) in s.points().iter().zip(c.points()) {
                    prop_assert!((a - b).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn one_hot_argmax_is_identity(m in 1usize..64, k in 0usize..64) {
            prop_assume!(k < m);
            let v = one_hot(k, m).unwrap();
            let argmax = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            prop_assert_eq!(argmax, k);
            prop_assert_eq!(v.iter().sum::<f64>(), 1.0);
        }
    }
}

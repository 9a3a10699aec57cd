//! Sample points on which the power-log monomials of a set `K` are independent,
//! and the resulting norm-equivalence constant.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::sigma_min;
use crate::termalg::{power_log_monomial, ExponentTriple};

pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Monomial `y^(freq i + beta) (log y)^gamma` with a real frequency of any sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Species {
    pub freq: f64,
    pub beta: f64,
    pub gamma: u32,
}

impl Species {
    pub fn eval(&self, y: f64) -> Complex64 {
        power_log_monomial(self.freq, self.beta, self.gamma, y.ln())
    }
}

impl From<&ExponentTriple> for Species {
    fn from(t: &ExponentTriple) -> Self {
        Self {
            freq: t.alpha(),
            beta: t.beta_f64(),
            gamma: t.gamma(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePlan {
    pub points: Vec<f64>,
    /// Smallest singular value of the evaluation matrix.
    pub matrix_condition: f64,
    /// `C` with `||c||_1 <= C max_j |g_c(d_j)|`.
    pub equivalence_constant: f64,
}

fn sorted_set(k: &[ExponentTriple]) -> Vec<ExponentTriple> {
    let mut v = k.to_vec();
    v.sort();
    v.dedup();
    v
}

/// `M[j][t] = l_t(d_j)`, columns in canonical triple order.
pub fn evaluation_matrix(k: &[ExponentTriple], pts: &[f64]) -> Result<DMatrix<Complex64>> {
    let set = sorted_set(k);
    let species: Vec<Species> = set.iter().map(Species::from).collect();
    species_matrix(&species, pts)
}

/// Evaluation matrix for arbitrary species, columns in the given order.
pub fn species_matrix(species: &[Species], pts: &[f64]) -> Result<DMatrix<Complex64>> {
    if pts.len() != species.len() {
        return Err(Error::Dimension {
            expected: species.len(),
            got: pts.len(),
        });
    }
    if pts.iter().any(|&p| !(p > 1.0) || !p.is_finite()) {
        return Err(Error::InvalidArgument("sample points must be finite and > 1".into()));
    }
    let mut sorted = pts.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("sample points must be pairwise distinct".into()));
    }
    Ok(DMatrix::from_fn(pts.len(), species.len(), |j, t| {
        species[t].eval(pts[j])
    }))
}

/// `k / sigma_min(M)`.
pub fn equivalence_constant(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let s = sigma_min(m);
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Singular);
    }
    Ok(m.nrows() as f64 / s)
}

/// Chebyshev nodes of the first kind on `(lo, hi)`, increasing.
fn chebyshev(k: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..k)
        .rev()
        .map(|j| mid + half * ((2 * j + 1) as f64 * PI / (2 * k) as f64).cos())
        .collect()
}

fn candidate<R: Rng>(rng: &mut R, trial: usize, seed: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let k = seed.len();
    if trial == 0 {
        return seed.to_vec();
    }
    let mut pts: Vec<f64> = if trial % 2 == 1 {
        // jitter each node within its neighbours' gaps
        (0..k)
            .map(|j| {
                let left = if j == 0 { lo } else { seed[j - 1] };
                let right = if j + 1 == k { hi } else { seed[j + 1] };
                let (a, b) = (0.5 * (left + seed[j]), 0.5 * (seed[j] + right));
                rng.random_range(a..b)
            })
            .collect()
    } else {
        (0..k).map(|_| rng.random_range(lo..hi)).collect()
    };
    pts.sort_by(f64::total_cmp);
    pts
}

/// Best-conditioned point set for `K` on `[lo, hi]` over `trials` candidates.
///
/// Candidate 0 is the Chebyshev set; the rest jitter it or draw uniformly.
/// Ties in the smallest singular value go to the lexicographically smaller list.
pub fn find_sample_points<R: Rng>(
    k: &[ExponentTriple],
    lo: f64,
    hi: f64,
    trials: usize,
    rng: &mut R,
) -> Result<SamplePlan> {
    let set = sorted_set(k);
    let species: Vec<Species> = set.iter().map(Species::from).collect();
    find_species_points(&species, lo, hi, trials, rng)
}

/// `find_sample_points` for species given in column order.
pub fn find_species_points<R: Rng>(
    species: &[Species],
    lo: f64,
    hi: f64,
    trials: usize,
    rng: &mut R,
) -> Result<SamplePlan> {
    if species.is_empty() {
        return Err(Error::Empty);
    }
    if !(lo >= 1.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sample interval [{lo}, {hi}] must be a nonempty bounded subset of [1, inf)"
        )));
    }
    let k = species.len();
    let seed = chebyshev(k, lo, hi);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for trial in 0..trials.max(1) {
        let pts = candidate(rng, trial, &seed, lo, hi);
        if pts.iter().any(|&p| !(p > lo.max(1.0)) || !(p < hi)) {
            continue;
        }
        let Ok(m) = species_matrix(species, &pts) else {
            continue;
        };
        let s = sigma_min(&m);
        if !s.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bs, bp)) => s > *bs || (s == *bs && pts.partial_cmp(bp) == Some(std::cmp::Ordering::Less)),
        };
        if better {
            best = Some((s, pts));
        }
    }
    let (s, points) = best.ok_or(Error::Degenerate {
        sigma: 0.0,
        threshold: DEGENERACY_THRESHOLD,
    })?;
    if s < DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate {
            sigma: s,
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    Ok(SamplePlan {
        points,
        matrix_condition: s,
        equivalence_constant: k as f64 / s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn t(alpha: f64, beta: i64, gamma: u32) -> ExponentTriple {
        ExponentTriple::new(alpha, Rational64::from_integer(beta), gamma).unwrap()
    }

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-15
    }

    #[test]
    fn matrix_examples() {
        let m = evaluation_matrix(&[t(0.0, 0, 0)], &[2.0]).unwrap();
        assert!(close(m[(0, 0)], 1.0));

        let m = evaluation_matrix(&[t(0.0, 0, 0), t(0.0, 0, 1)], &[E, E * E]).unwrap();
        // canonical order puts gamma = 1 first
        assert!(close(m[(0, 0)], 1.0) && close(m[(0, 1)], 1.0));
        assert!(close(m[(1, 0)], 2.0) && close(m[(1, 1)], 1.0));

        let m = evaluation_matrix(&[t(0.0, -1, 0), t(0.0, -2, 0)], &[2.0, 4.0]).unwrap();
        assert!(close(m[(0, 0)], 0.5) && close(m[(0, 1)], 0.25));
        assert!(close(m[(1, 0)], 0.25) && close(m[(1, 1)], 1.0 / 16.0));
    }

    #[test]
    fn matrix_size_mismatch() {
        let err = evaluation_matrix(&[t(0.0, 0, 0)], &[2.0, 3.0]).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 1, got: 2 });
    }

    #[test]
    fn equivalence_examples() {
        let one = Complex64::new(1.0, 0.0);
        let m = DMatrix::from_element(1, 1, one);
        assert_eq!(equivalence_constant(&m).unwrap(), 1.0);
        let m = DMatrix::<Complex64>::identity(2, 2);
        assert_eq!(equivalence_constant(&m).unwrap(), 2.0);
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        assert!((equivalence_constant(&m).unwrap() - 4.0).abs() < 1e-14);
        let z = DMatrix::<Complex64>::zeros(2, 2);
        assert_eq!(equivalence_constant(&z), Err(Error::Singular));
    }

    #[test]
    fn single_constant_plan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plan = find_sample_points(&[t(0.0, 0, 0)], 1.0, 2.0, 8, &mut rng).unwrap();
        assert_eq!(plan.points.len(), 1);
        assert!(plan.points[0] > 1.0 && plan.points[0] <= 2.0);
        assert!((plan.matrix_condition - 1.0).abs() < 1e-15);
        assert!((plan.equivalence_constant - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_beta_distinct_alpha_is_nonsingular() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = [t(0.0, -1, 0), t(PI, -1, 0)];
        let plan = find_sample_points(&k, 1.0, 2.0, 64, &mut rng).unwrap();
        let m = evaluation_matrix(&k, &plan.points).unwrap();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!(det.norm() > 1e-3);
    }

    #[test]
    fn repeated_species_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Species {
            freq: 0.0,
            beta: 0.0,
            gamma: 0,
        };
        let err = find_species_points(&[s, s], 1.0, 2.0, 16, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }
}

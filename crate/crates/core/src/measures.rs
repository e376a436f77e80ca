//! Scalar identities for measure affinities.
//!
//! Discrete pairs carry the Hellinger affinity `Σ √(p_i q_i)` and the total
//! variation `Σ |p_i - q_i|`, sandwiched by
//! `(‖P-Q‖/2)² ≤ 1 - affinity ≤ ‖P-Q‖/2`. For infinite Gaussian products
//! the affinity is `∏ ((λ_k^{-1/2} + λ_k^{1/2})/2)^{-1/2}` in the norm
//! ratios `λ_k`, finite exactly when `Σ (λ_k - 1)²` converges, and shifting
//! a Gaussian by a vector of norm `‖x‖` costs `exp(-‖x‖²/8)` in affinity
//! (`exp(-‖y‖²/2)` for the phase-modulated version).

use crate::{Error, Result};
use serde::Serialize;

/// A pair of discrete probability vectors on a common support.
#[derive(Debug, Clone)]
pub struct DiscreteMeasurePair {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl DiscreteMeasurePair {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::parameter("weight vectors must be non-empty and equal-length"));
        }
        for &w in p.iter().chain(q.iter()) {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::parameter(format!("negative or non-finite weight {w}")));
            }
        }
        let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
        if (sp - 1.0).abs() > 1e-12 || (sq - 1.0).abs() > 1e-12 {
            return Err(Error::parameter(format!(
                "weights must sum to 1 (got {sp} and {sq})"
            )));
        }
        Ok(DiscreteMeasurePair { p, q })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Hellinger affinity `Σ √(p_i q_i)`.
pub fn hellinger_affinity(pair: &DiscreteMeasurePair) -> f64 {
    pair.p
        .iter()
        .zip(&pair.q)
        .map(|(&a, &b)| (a * b).sqrt())
        .sum()
}

/// Total variation `Σ |p_i - q_i|`.
pub fn variation_distance(pair: &DiscreteMeasurePair) -> f64 {
    pair.p.iter().zip(&pair.q).map(|(&a, &b)| (a - b).abs()).sum()
}

/// Both halves of the affinity/variation sandwich, with `1e-12` slack.
pub fn sandwich_check(pair: &DiscreteMeasurePair) -> bool {
    let aff = hellinger_affinity(pair);
    let half_dist = variation_distance(pair) / 2.0;
    let lower = half_dist * half_dist;
    let gap = 1.0 - aff;
    lower <= gap + 1e-12 && gap <= half_dist + 1e-12
}

/// Norm-ratio data of two Gaussian measures sharing a mean.
#[derive(Debug, Clone)]
pub struct SpectralRatios {
    lambdas: Vec<f64>,
}

impl SpectralRatios {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        for &l in &lambdas {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::parameter(format!("norm ratio must be positive, got {l}")));
            }
        }
        Ok(SpectralRatios { lambdas })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.lambdas
    }

    /// Concatenation (product structure of independent blocks).
    pub fn concat(&self, other: &SpectralRatios) -> SpectralRatios {
        let mut lambdas = self.lambdas.clone();
        lambdas.extend_from_slice(&other.lambdas);
        SpectralRatios { lambdas }
    }
}

/// Gaussian affinity `∏_k ((λ_k^{-1/2} + λ_k^{1/2})/2)^{-1/2}`, accumulated
/// in log space; returns 0 once the log-product passes the underflow floor
/// `e^{-700}`.
pub fn gaussian_affinity(r: &SpectralRatios) -> f64 {
    let mut log_aff = 0.0;
    for &l in &r.lambdas {
        let s = l.sqrt();
        log_aff -= 0.5 * ((1.0 / s + s) / 2.0).ln();
        if log_aff < -700.0 {
            return 0.0;
        }
    }
    log_aff.exp()
}

/// Convergence verdict for truncated Gaussian-product sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KakutaniVerdict {
    EquivalentSignature,
    SingularSignature,
    Inconclusive,
}

/// Partial sums of `Σ (σ_k - 1)²` and `Σ m_k²` at truncation `K` plus a
/// doubling-increment trend verdict.
#[derive(Debug, Clone, Serialize)]
pub struct KakutaniReport {
    pub truncation: usize,
    pub sum_sq_sigma: f64,
    pub sum_sq_mean: f64,
    pub verdict: KakutaniVerdict,
}

/// Trend thresholds: increments shrinking by the `equivalent` factor per
/// doubling signal convergence; staying above the `singular` factor signals
/// divergence.
const KAKUTANI_EQUIV_RATIO: f64 = 0.8;
const KAKUTANI_SINGULAR_RATIO: f64 = 0.95;

pub fn kakutani_check(
    sigmas: impl Fn(usize) -> f64,
    means: impl Fn(usize) -> f64,
    truncation: usize,
) -> Result<KakutaniReport> {
    if truncation < 8 {
        return Err(Error::parameter("need truncation >= 8"));
    }
    let total = |upto: usize| -> Result<(f64, f64)> {
        let mut s = 0.0;
        let mut m = 0.0;
        for k in 1..=upto {
            let sk = sigmas(k);
            if !(sk > 0.0) {
                return Err(Error::parameter(format!("sigma_{k} must be positive")));
            }
            s += (sk - 1.0) * (sk - 1.0);
            m += means(k) * means(k);
        }
        Ok((s, m))
    };
    let (s_full, m_full) = total(truncation)?;
    let (s_half, m_half) = total(truncation / 2)?;
    let (s_quarter, m_quarter) = total(truncation / 4)?;
    let inc_recent = (s_full - s_half) + (m_full - m_half);
    let inc_earlier = (s_half - s_quarter) + (m_half - m_quarter);

    let verdict = if inc_recent <= 1e-15 && inc_earlier <= 1e-15 {
        KakutaniVerdict::EquivalentSignature
    } else if inc_earlier <= 1e-300 {
        KakutaniVerdict::Inconclusive
    } else {
        let ratio = inc_recent / inc_earlier;
        if ratio < KAKUTANI_EQUIV_RATIO {
            KakutaniVerdict::EquivalentSignature
        } else if ratio >= KAKUTANI_SINGULAR_RATIO {
            KakutaniVerdict::SingularSignature
        } else {
            KakutaniVerdict::Inconclusive
        }
    };
    Ok(KakutaniReport {
        truncation,
        sum_sq_sigma: s_full,
        sum_sq_mean: m_full,
        verdict,
    })
}

/// Affinity cost of shifting a Gaussian by a vector of norm `‖x‖`:
/// `exp(-‖x‖²/8)`.
pub fn shift_affinity(norm_x: f64) -> Result<f64> {
    if norm_x < 0.0 {
        return Err(Error::parameter("norm must be nonnegative"));
    }
    Ok((-norm_x * norm_x / 8.0).exp())
}

/// Overlap of a phase-modulated Gaussian with itself: `exp(-‖y‖²/2)`.
pub fn coherent_overlap(norm_y: f64) -> Result<f64> {
    if norm_y < 0.0 {
        return Err(Error::parameter("norm must be nonnegative"));
    }
    Ok((-norm_y * norm_y / 2.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    fn pair(p: Vec<f64>, q: Vec<f64>) -> DiscreteMeasurePair {
        DiscreteMeasurePair::new(p, q).unwrap()
    }

    #[test]
    fn equal_measures() {
        let pr = pair(vec![0.25, 0.25, 0.5], vec![0.25, 0.25, 0.5]);
        assert!((hellinger_affinity(&pr) - 1.0).abs() < 1e-14);
        assert_eq!(variation_distance(&pr), 0.0);
        assert!(sandwich_check(&pr));
    }

    #[test]
    fn disjoint_supports_are_tight() {
        let pr = pair(vec![1.0, 0.0], vec![0.0, 1.0]);
        assert_eq!(hellinger_affinity(&pr), 0.0);
        assert_eq!(variation_distance(&pr), 2.0);
        assert!(sandwich_check(&pr)); // 1 <= 1 <= 1
    }

    #[test]
    fn sandwich_on_random_dirichlet_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut uniform = || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        for _ in 0..1000 {
            let n = 2 + (uniform() * 8.0) as usize;
            let sample = |u: &mut dyn FnMut() -> f64| -> Vec<f64> {
                let mut w: Vec<f64> = (0..n).map(|_| -((u)()).max(1e-300).ln()).collect();
                let s: f64 = w.iter().sum();
                for x in &mut w {
                    *x /= s;
                }
                // Renormalize exactly to the 1e-12 gate.
                let s2: f64 = w.iter().sum();
                w[0] += 1.0 - s2;
                w
            };
            let p = sample(&mut uniform);
            let q = sample(&mut uniform);
            let pr = pair(p, q);
            assert!(sandwich_check(&pr));
        }
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DiscreteMeasurePair::new(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasurePair::new(vec![-0.1, 1.1], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasurePair::new(vec![0.5, 0.5], vec![1.0]).is_err());
    }

    #[test]
    fn gaussian_affinity_values() {
        let one = SpectralRatios::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(gaussian_affinity(&one), 1.0);
        let four = SpectralRatios::new(vec![4.0]).unwrap();
        // ((1/2 + 2)/2)^{-1/2} = 1.25^{-1/2}
        assert!((gaussian_affinity(&four) - 1.25f64.powf(-0.5)).abs() < 1e-15);
        assert!((gaussian_affinity(&four) - 0.894427).abs() < 1e-6);
        assert!(SpectralRatios::new(vec![0.0]).is_err());
    }

    #[test]
    fn affinity_symmetry_under_inversion() {
        let r = SpectralRatios::new(vec![0.3, 2.0, 7.5]).unwrap();
        let inv = SpectralRatios::new(r.ratios().iter().map(|l| 1.0 / l).collect()).unwrap();
        assert_eq!(gaussian_affinity(&r), gaussian_affinity(&inv));
    }

    #[test]
    fn affinity_multiplies_over_concatenation() {
        let r1 = SpectralRatios::new(vec![1.5, 0.7]).unwrap();
        let r2 = SpectralRatios::new(vec![3.0, 1.1, 0.4]).unwrap();
        let joint = gaussian_affinity(&r1.concat(&r2));
        let prod = gaussian_affinity(&r1) * gaussian_affinity(&r2);
        assert!((joint - prod).abs() < 1e-12);
    }

    #[test]
    fn affinity_tail_behaviour() {
        // Σ (λ_k - 1)² < ∞: affinity decreasing in K but bounded away from 0.
        let conv = |kmax: usize| {
            let l: Vec<f64> = (1..=kmax).map(|k| 1.0 + 1.0 / k as f64).collect();
            gaussian_affinity(&SpectralRatios::new(l).unwrap())
        };
        assert!(conv(2000) < conv(200));
        assert!(conv(2000) > 0.5 * conv(200), "should converge");
        // Σ (λ_k - 1)² = ∞: affinity drives to 0.
        let div = |kmax: usize| {
            let l: Vec<f64> = (1..=kmax)
                .map(|k| 1.0 + 1.0 / (k as f64).sqrt())
                .collect();
            gaussian_affinity(&SpectralRatios::new(l).unwrap())
        };
        assert!(div(20000) < 0.2 * div(200), "should head to zero");
    }

    #[test]
    fn kakutani_verdicts() {
        let rep = kakutani_check(|_| 1.0, |_| 0.0, 1024).unwrap();
        assert_eq!(rep.verdict, KakutaniVerdict::EquivalentSignature);
        assert_eq!(rep.sum_sq_sigma, 0.0);

        let rep = kakutani_check(|k| 1.0 + 0.5f64.powi(k as i32), |_| 0.0, 1024).unwrap();
        assert_eq!(rep.verdict, KakutaniVerdict::EquivalentSignature);

        let rep = kakutani_check(|k| 1.0 + 1.0 / (k as f64).sqrt(), |_| 0.0, 1024).unwrap();
        assert_eq!(rep.verdict, KakutaniVerdict::SingularSignature);

        // Divergence through the means alone.
        let rep = kakutani_check(|_| 1.0, |k| 1.0 / (k as f64).sqrt(), 1024).unwrap();
        assert_eq!(rep.verdict, KakutaniVerdict::SingularSignature);

        assert!(kakutani_check(|_| 0.0, |_| 0.0, 1024).is_err());
        assert!(kakutani_check(|_| 1.0, |_| 0.0, 4).is_err());
    }

    #[test]
    fn displacement_overlaps() {
        assert_eq!(shift_affinity(0.0).unwrap(), 1.0);
        assert_eq!(coherent_overlap(0.0).unwrap(), 1.0);
        assert!((shift_affinity(2.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((shift_affinity(2.0).unwrap() - 0.606531).abs() < 1e-6);
        assert!((coherent_overlap(1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        // coherent_overlap(r) = shift_affinity(2r)
        for &r in &[0.1, 0.9, 2.3] {
            assert!(
                (coherent_overlap(r).unwrap() - shift_affinity(2.0 * r).unwrap()).abs() < 1e-15
            );
        }
        // exp(-x²/8) = 1/2 at x = sqrt(8 ln 2)
        let x = (8.0 * 2f64.ln()).sqrt();
        assert!((shift_affinity(x).unwrap() - 0.5).abs() < 1e-15);
        assert!(shift_affinity(-1.0).is_err());
        assert!(coherent_overlap(-0.5).is_err());
    }
}

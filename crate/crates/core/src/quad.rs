//! Adaptive Gauss–Legendre quadrature.
//!
//! Panels are bisected until an embedded 8/16-point error estimate meets a
//! local absolute tolerance. Nodes and weights are generated at first use by
//! Newton iteration on the Legendre polynomials, so there are no baked-in
//! tables to mistype. The integrator is deterministic: the subdivision rule
//! depends only on the integrand values, never on evaluation order.

use crate::{Complex64, Error, Result};
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on [-1, 1].
fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-flavoured initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn rule8() -> &'static [(f64, f64)] {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| legendre_rule(8))
}

pub(crate) fn rule16() -> &'static [(f64, f64)] {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| legendre_rule(16))
}

/// Values an adaptive integrator can accumulate.
pub trait QuadValue: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

fn panel<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64, rule: &[(f64, f64)]) -> V {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = V::zero();
    for &(x, w) in rule {
        acc = acc + f(c + h * x).scale(w);
    }
    acc.scale(h)
}

struct Adaptive<'a, V: QuadValue, F: FnMut(f64) -> V> {
    f: &'a mut F,
    err: f64,
    evals: usize,
    max_evals: usize,
}

impl<V: QuadValue, F: FnMut(f64) -> V> Adaptive<'_, V, F> {
    fn run(&mut self, a: f64, b: f64, tol: f64, depth: usize) -> Result<V> {
        let coarse = panel(self.f, a, b, rule8());
        let fine = panel(self.f, a, b, rule16());
        self.evals += 24;
        let e = (fine - coarse).magnitude();
        let floor = 1e-15 * fine.magnitude();
        if e <= tol.max(floor) || depth >= 48 {
            self.err += e;
            return Ok(fine);
        }
        if self.evals > self.max_evals {
            return Err(Error::numeric(tol, e, "adaptive quadrature eval budget"));
        }
        let m = 0.5 * (a + b);
        let left = self.run(a, m, 0.5 * tol, depth + 1)?;
        let right = self.run(m, b, 0.5 * tol, depth + 1)?;
        Ok(left + right)
    }
}

/// Integral of `f` over `[a, b]` to absolute tolerance `abs_tol`, together
/// with the accumulated error estimate.
pub fn integrate<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<(V, f64)> {
    if a == b {
        return Ok((V::zero(), 0.0));
    }
    let mut state = Adaptive {
        f: &mut f,
        err: 0.0,
        evals: 0,
        max_evals: 40_000_000,
    };
    let v = state.run(a, b, abs_tol, 0)?;
    Ok((v, state.err))
}

/// Like [`integrate`], but the domain is split at the given interior points
/// first (for integrands with kinks at known locations).
pub fn integrate_split<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_tol: f64,
) -> Result<(V, f64)> {
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(splits.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let n = edges.len() - 1;
    let mut total = V::zero();
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (v, e) = integrate(&mut f, w[0], w[1], abs_tol / n as f64)?;
        total = total + v;
        err += e;
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        // GL8 is exact through degree 15.
        let r = rule8();
        let val: f64 = r.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert!((val - 2.0 / 15.0).abs() < 1e-14, "got {val}");
        let w_sum: f64 = r.iter().map(|&(_, w)| w).sum();
        assert!((w_sum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integral() {
        let (v, e) = integrate(|t: f64| t.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12, "err est {e}");
    }

    #[test]
    fn oscillatory_but_resolvable() {
        // \int_0^1 cos(40 t) dt = sin(40)/40
        let (v, _) = integrate(|t: f64| (40.0 * t).cos(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (40f64).sin() / 40.0).abs() < 1e-11);
    }

    #[test]
    fn complex_integrand() {
        // \int_0^1 e^{i t} dt = (e^{i} - 1)/i
        let (v, _) = integrate(
            |t: f64| Complex64::new(t.cos(), t.sin()),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        let want = (Complex64::new(1f64.cos(), 1f64.sin()) - Complex64::new(1.0, 0.0))
            / Complex64::new(0.0, 1.0);
        assert!((v - want).norm() < 1e-12);
    }

    #[test]
    fn split_handles_kinks() {
        let (v, _) = integrate_split(|t: f64| (t - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-13).unwrap();
        let want = 0.3f64.powi(2) / 2.0 + 0.7f64.powi(2) / 2.0;
        assert!((v - want).abs() < 1e-13);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // \int_0^1 t^{-1/2} dt = 2, graded panels reach it adaptively.
        let (v, _) = integrate(|t: f64| t.max(1e-300).powf(-0.5), 1e-14, 1.0, 1e-9).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "got {v}");
    }
}

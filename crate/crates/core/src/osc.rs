//! Oscillation-aware panel integration for `∫ f(t) e^{iωt} dt`.
//!
//! On each panel the envelope `f` is replaced by its degree-5 interpolant at
//! Chebyshev–Lobatto nodes and the products `x^k e^{iθx}` are integrated in
//! closed form, so the cost per panel is independent of `ω`. Panels are laid
//! out geometrically from the left edge when the caller flags a steep
//! envelope there (kernels with a singular germ), then bisected adaptively
//! against a two-half comparison. The subdivision rule is deterministic.

use crate::special::cis;
use crate::{Complex64, Error, Result};
use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;

const DEG: usize = 5;
const NODES: usize = DEG + 1;

/// Chebyshev–Lobatto nodes on [-1, 1], ascending.
fn nodes() -> &'static [f64; NODES] {
    static N: OnceLock<[f64; NODES]> = OnceLock::new();
    N.get_or_init(|| {
        let mut xs = [0.0; NODES];
        for (i, x) in xs.iter_mut().enumerate() {
            *x = -(std::f64::consts::PI * i as f64 / DEG as f64).cos();
        }
        xs
    })
}

/// Inverse Vandermonde taking node values to monomial coefficients.
fn vinv() -> &'static DMatrix<f64> {
    static V: OnceLock<DMatrix<f64>> = OnceLock::new();
    V.get_or_init(|| {
        let xs = nodes();
        let v = DMatrix::from_fn(NODES, NODES, |i, k| xs[i].powi(k as i32));
        v.try_inverse().expect("Vandermonde at distinct nodes")
    })
}

/// `M_k(θ) = ∫_{-1}^{1} x^k e^{iθx} dx` for `k = 0..=5`.
///
/// Power series for small `|θ|`, integration-by-parts recurrence above it;
/// the recurrence amplifies errors by `k/θ < 1` there, so both branches are
/// stable.
pub fn moments(theta: f64) -> [Complex64; NODES] {
    let mut m = [Complex64::new(0.0, 0.0); NODES];
    if theta.abs() <= 8.0 {
        let it = Complex64::new(0.0, theta);
        for (k, mk) in m.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0); // (iθ)^j / j!
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..130 {
                if (k + j) % 2 == 0 {
                    acc += term * (2.0 / (k + j + 1) as f64);
                }
                term *= it / (j + 1) as f64;
                if term.norm() < 1e-20 {
                    break;
                }
            }
            *mk = acc;
        }
    } else {
        let it = Complex64::new(0.0, theta);
        let e_plus = cis(theta);
        let e_minus = e_plus.conj();
        m[0] = Complex64::new(2.0 * theta.sin() / theta, 0.0);
        for k in 1..NODES {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            m[k] = (e_plus - e_minus * sign) / it - m[k - 1] * (k as f64) / it;
        }
    }
    m
}

fn panel(f: &mut impl FnMut(f64) -> f64, p: f64, q: f64, omega: f64) -> Complex64 {
    let c = 0.5 * (p + q);
    let h2 = 0.5 * (q - p);
    let xs = nodes();
    let vals = DVector::from_iterator(NODES, xs.iter().map(|&x| f(c + h2 * x)));
    let coeffs = vinv() * vals;
    let ms = moments(omega * h2);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..NODES {
        acc += ms[k] * coeffs[k];
    }
    cis(omega * c) * acc * h2
}

struct Osc<'a, F: FnMut(f64) -> f64> {
    f: &'a mut F,
    omega: f64,
    err: f64,
    evals: usize,
}

impl<F: FnMut(f64) -> f64> Osc<'_, F> {
    fn refine(&mut self, p: f64, q: f64, whole: Complex64, tol: f64, depth: usize) -> Result<Complex64> {
        let m = 0.5 * (p + q);
        let left = panel(self.f, p, m, self.omega);
        let right = panel(self.f, m, q, self.omega);
        self.evals += 2 * NODES;
        let split = left + right;
        let e = (whole - split).norm();
        if e <= tol.max(1e-16 * split.norm()) || depth >= 44 {
            self.err += e;
            return Ok(split);
        }
        if self.evals > 40_000_000 {
            return Err(Error::numeric(tol, e, "oscillatory panel eval budget"));
        }
        let l = self.refine(p, m, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, q, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// `∫_a^b f(t) e^{iωt} dt` to absolute tolerance `abs_tol`.
///
/// `grade_left` lays the initial panels geometrically from `a` (doubling
/// width), for envelopes that vary on a scale proportional to `t`. The
/// integrand must be smooth on `[a, b]`; split at kinks before calling.
pub fn fourier_integral(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    omega: f64,
    abs_tol: f64,
    grade_left: bool,
) -> Result<(Complex64, f64)> {
    if !(b >= a) {
        return Err(Error::parameter(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let mut edges = vec![a];
    if grade_left && a > 0.0 && b / a > 8.0 {
        let mut x = 2.0 * a;
        while x < b / 2.0 && edges.len() < 4000 {
            edges.push(x);
            x *= 2.0;
        }
    }
    edges.push(b);

    let mut state = Osc {
        f: &mut f,
        omega,
        err: 0.0,
        evals: 0,
    };
    let per_panel = abs_tol / edges.len() as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for w in edges.windows(2) {
        let whole = panel(state.f, w[0], w[1], omega);
        state.evals += NODES;
        total += state.refine(w[0], w[1], whole, per_panel, 0)?;
    }
    Ok((total, state.err))
}

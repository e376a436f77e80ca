//! The covariance kernel family.
//!
//! A kernel is even, positive, decreasing and convex on its support, equals
//! `1/(t ln^a(1/t))` exactly on `(0, eps_cut]`, and continues as the tangent
//! line at `eps_cut` down to zero (a triangle tail). The tail choice keeps
//! convexity and monotonicity with a one-line formula and gives compact
//! support `[0, t_zero]`; any convex decreasing continuation would do for
//! the asymptotic quantities, which only see the germ at the origin.
//!
//! Alongside pointwise evaluation the kernel exposes its first and second
//! antiderivatives in closed form (the germ integrates to a power of the
//! logarithm, and once more to an upper incomplete gamma). Double integrals
//! of the kernel over rectangles — the workhorse of every inner product on
//! step functions — reduce to four evaluations of the second antiderivative.
//!
//! The cosine transform (`spectral_density`) is computed by splitting at
//! `1/λ`: analytic value plus a non-oscillatory residual below the split
//! (after the substitution `t = e^{-u}` the germ integrand is a plain power
//! `u^{-a}`), oscillation-aware panels above it. Cost is independent of `λ`.

use crate::special::upper_gamma;
use crate::{osc, quad, Complex64, Error, Result};
use serde::{Deserialize, Serialize};

/// Default relative tolerance for spectral-density quadrature.
pub const SPECTRAL_REL_TOL: f64 = 1e-8;

/// Evenly extended covariance kernel with log-singular germ and tangent tail.
#[derive(Debug, Clone)]
pub struct Kernel {
    alpha: f64,
    eps_cut: f64,
    support_t: f64,
    t_zero: f64,
    /// Kernel value at the cut, start of the tangent tail.
    b_at_cut: f64,
    /// Tangent slope at the cut (negative).
    slope_at_cut: f64,
    k_at_cut: f64,
    l_at_cut: f64,
    /// `∫_0^∞ B`, reached at `t_zero`.
    k_total: f64,
    l_at_support_end: f64,
}

/// Serialized form: the constructor arguments plus the derived support end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSpecJson {
    pub alpha: f64,
    pub eps_cut: f64,
    pub t_zero: f64,
    #[serde(rename = "support_T")]
    pub support_t: f64,
}

/// Shape diagnostics on a grid, plus the minimum of the spectral density
/// over a frequency sweep (a positive-definiteness proxy).
#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    pub n_grid: usize,
    pub positive: bool,
    pub decreasing: bool,
    pub convex: bool,
    pub min_spectral_density: f64,
    pub argmin_lambda: f64,
}

/// `∫_0^x dt/(t ln^a(1/t))` for `0 ≤ x < 1`; the germ's antiderivative.
pub(crate) fn germ_primitive(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = (1.0 / x).ln();
    z.powf(1.0 - a) / (a - 1.0)
}

/// Monotonicity/convexity flags of `f` sampled on a log-graded grid of
/// `n` points in `(lo, hi)`. Slopes must be `≤ tol` and nondecreasing up
/// to `tol` for the `decreasing`/`convex` flags.
pub fn grid_shape_flags(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> (bool, bool, bool) {
    assert!(n >= 3 && hi > lo && lo > 0.0);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let ts: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let positive = vals.iter().all(|&v| v > 0.0);
    let tol = 1e-10;
    let slopes: Vec<f64> = ts
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
        .collect();
    let decreasing = slopes.iter().all(|&s| s <= tol);
    let convex = slopes.windows(2).all(|s| s[1] >= s[0] - tol);
    (positive, decreasing, convex)
}

impl Kernel {
    /// Kernel with default cut `min(e^{-(alpha+2)}, 0.05)` and unit horizon.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_params(alpha, None, None)
    }

    /// Fully parameterized constructor. The cut must satisfy
    /// `0 < eps_cut < e^{-alpha}` so the closed form is decreasing there;
    /// shape (decreasing, convex, positive) is re-checked on a 10^4-point
    /// grid regardless.
    pub fn with_params(alpha: f64, eps_cut: Option<f64>, support_t: Option<f64>) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::parameter(format!("alpha must exceed 1, got {alpha}")));
        }
        let eps_default = (-(alpha + 2.0)).exp().min(0.05);
        let eps = eps_cut.unwrap_or(eps_default);
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::parameter(format!("eps_cut must be positive, got {eps}")));
        }
        if eps >= (-alpha).exp() {
            return Err(Error::Shape(format!(
                "eps_cut {eps:.6e} is not below e^-alpha = {:.6e}; closed form would not be decreasing",
                (-alpha).exp()
            )));
        }
        let support_t = support_t.unwrap_or(1.0);
        if !(support_t > 0.0) {
            return Err(Error::parameter("support_T must be positive"));
        }

        let log_inv = (1.0 / eps).ln();
        let b_at_cut = 1.0 / (eps * log_inv.powf(alpha));
        // B'(t) = -(1/(t^2 L^a)) (1 - a/L), L = ln(1/t)
        let slope_at_cut = -(1.0 / (eps * eps * log_inv.powf(alpha))) * (1.0 - alpha / log_inv);
        if !(slope_at_cut < 0.0) {
            return Err(Error::Shape(format!(
                "kernel not decreasing at the cut (slope {slope_at_cut:.3e})"
            )));
        }
        let t_zero = eps + b_at_cut / slope_at_cut.abs();

        let k_at_cut = germ_primitive(alpha, eps);
        let l_at_cut = second_primitive_germ(alpha, eps)?;
        let w = t_zero - eps;
        let k_total = k_at_cut + b_at_cut * w + slope_at_cut * w * w / 2.0;
        let l_at_support_end =
            l_at_cut + k_at_cut * w + b_at_cut * w * w / 2.0 + slope_at_cut * w * w * w / 6.0;

        let kernel = Kernel {
            alpha,
            eps_cut: eps,
            support_t,
            t_zero,
            b_at_cut,
            slope_at_cut,
            k_at_cut,
            l_at_cut,
            k_total,
            l_at_support_end,
        };

        let (positive, decreasing, convex) =
            grid_shape_flags(|t| kernel.b(t), t_zero * 1e-8, t_zero * (1.0 - 1e-9), 10_000);
        if !(positive && decreasing && convex) {
            return Err(Error::Shape(format!(
                "construction grid check failed: positive={positive} decreasing={decreasing} convex={convex}"
            )));
        }
        Ok(kernel)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn eps_cut(&self) -> f64 {
        self.eps_cut
    }
    pub fn t_zero(&self) -> f64 {
        self.t_zero
    }
    pub fn support_t(&self) -> f64 {
        self.support_t
    }
    pub fn slope_at_cut(&self) -> f64 {
        self.slope_at_cut
    }
    /// `∫_0^∞ B(t) dt`.
    pub fn total_mass(&self) -> f64 {
        self.k_total
    }

    /// Kernel value; the origin is a genuine singularity.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Err(Error::Domain("kernel is singular at t = 0".into()));
        }
        Ok(self.b(t))
    }

    /// Unchecked evaluation used by the quadrature layers (`+inf` at 0).
    pub(crate) fn b(&self, t: f64) -> f64 {
        let u = t.abs();
        if u == 0.0 {
            return f64::INFINITY;
        }
        if u <= self.eps_cut {
            let l = (1.0 / u).ln();
            1.0 / (u * l.powf(self.alpha))
        } else if u < self.t_zero {
            (self.b_at_cut + self.slope_at_cut * (u - self.eps_cut)).max(0.0)
        } else {
            0.0
        }
    }

    /// One-sided derivative for `t > 0`; kink only at `t_zero`.
    pub(crate) fn b_slope(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        if t <= self.eps_cut {
            let l = (1.0 / t).ln();
            -(1.0 / (t * t * l.powf(self.alpha))) * (1.0 - self.alpha / l)
        } else if t < self.t_zero {
            self.slope_at_cut
        } else {
            0.0
        }
    }

    /// First antiderivative `K(x) = ∫_0^x B`, extended oddly.
    pub fn primitive(&self, x: f64) -> f64 {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let u = x.abs();
        let val = if u <= self.eps_cut {
            germ_primitive(self.alpha, u)
        } else if u <= self.t_zero {
            let w = u - self.eps_cut;
            self.k_at_cut + self.b_at_cut * w + self.slope_at_cut * w * w / 2.0
        } else {
            self.k_total
        };
        sign * val
    }

    /// Second antiderivative `L(x) = ∫_0^x K`, extended evenly. Satisfies
    /// `∬_{(a,b)×(c,d)} B(s-t) ds dt = L(b-c) + L(a-d) - L(b-d) - L(a-c)`.
    pub fn second_primitive(&self, x: f64) -> f64 {
        let u = x.abs();
        if u == 0.0 {
            return 0.0;
        }
        if u <= self.eps_cut {
            second_primitive_germ(self.alpha, u).expect("germ antiderivative in range")
        } else if u <= self.t_zero {
            let w = u - self.eps_cut;
            self.l_at_cut
                + self.k_at_cut * w
                + self.b_at_cut * w * w / 2.0
                + self.slope_at_cut * w * w * w / 6.0
        } else {
            self.l_at_support_end + self.k_total * (u - self.t_zero)
        }
    }

    /// `∬_{(a,b)×(c,d)} B(s-t) ds dt`, exact up to the antiderivative.
    pub fn rect_integral(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        // Rectangles separated by more than the support: exactly zero, and
        // skipping the evaluation avoids cancellation of the linear ramps.
        let gap = (c - b).max(a - d);
        if gap >= self.t_zero {
            return 0.0;
        }
        self.second_primitive(b - c) + self.second_primitive(a - d)
            - self.second_primitive(b - d)
            - self.second_primitive(a - c)
    }

    /// The same rectangle integral through the overlap-weight reduction
    /// `∫ w(u) B(u) du` with explicit quadrature (analytic head at the
    /// diagonal). Slower than [`Kernel::rect_integral`] and independent of
    /// the second antiderivative; the simulation module builds its bin
    /// covariances through this route so the two paths cross-check.
    pub fn rect_integral_quad(&self, a: f64, b: f64, c: f64, d: f64, abs_tol: f64) -> Result<f64> {
        assert!(b > a && d > c);
        let lo = (a - d).max(-self.t_zero);
        let hi = (b - c).min(self.t_zero);
        if hi <= lo {
            return Ok(0.0);
        }
        // Overlap of (a,b) with the shifted (c+u, d+u).
        let w = |u: f64| (b.min(d + u) - a.max(c + u)).max(0.0);
        let breaks = [a - d, a - c, b - d, b - c];

        let mut total = 0.0;
        if lo < 0.0 && hi > 0.0 {
            // Diagonal neighbourhood: analytic head for the constant part of
            // the weight, plain quadrature for the Lipschitz remainder.
            let mut delta = self.eps_cut.min(-lo).min(hi) / 2.0;
            for &p in &breaks {
                if p.abs() > 1e-300 {
                    delta = delta.min(p.abs() / 2.0);
                }
            }
            let w0 = w(0.0);
            total += 2.0 * w0 * germ_primitive(self.alpha, delta);
            let (near, _) = quad::integrate(
                |u: f64| if u == 0.0 { 0.0 } else { (w(u) - w0) * self.b(u) },
                -delta,
                delta,
                abs_tol / 3.0,
            )?;
            total += near;
            let (left, _) = quad::integrate_split(
                |u: f64| w(u) * self.b(u),
                lo,
                -delta,
                &breaks,
                abs_tol / 3.0,
            )?;
            let (right, _) = quad::integrate_split(
                |u: f64| w(u) * self.b(u),
                delta,
                hi,
                &breaks,
                abs_tol / 3.0,
            )?;
            total += left + right;
        } else {
            let (v, _) =
                quad::integrate_split(|u: f64| w(u) * self.b(u), lo, hi, &breaks, abs_tol)?;
            total += v;
        }
        Ok(total)
    }

    /// `∫_0^{min(upper, t_zero)} B(t) e^{iλt} dt` with error estimate.
    pub(crate) fn fourier_up_to(
        &self,
        upper: f64,
        lambda: f64,
        rel_tol: f64,
    ) -> Result<(Complex64, f64)> {
        let cap = upper.min(self.t_zero);
        if cap <= 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let germ_cap = cap.min(self.eps_cut);
        let scale = germ_primitive(self.alpha, germ_cap) + self.k_total;
        let abs_tol = (rel_tol * scale).max(1e-16);
        let (mut total, mut err) = germ_fourier(self.alpha, germ_cap, lambda, abs_tol / 2.0)?;
        if cap > self.eps_cut {
            let (tail, e) = osc::fourier_integral(
                |t| self.b(t),
                self.eps_cut,
                cap,
                lambda,
                abs_tol / 2.0,
                false,
            )?;
            total += tail;
            err += e;
        }
        Ok((total, err))
    }

    /// `∫_0^{min(upper, t_zero)} t B(t) e^{iλt} dt`. The weight removes the
    /// singularity, so this is pure panel work.
    pub(crate) fn fourier_weighted_t(
        &self,
        upper: f64,
        lambda: f64,
        rel_tol: f64,
    ) -> Result<(Complex64, f64)> {
        let cap = upper.min(self.t_zero);
        if cap <= 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let abs_tol = (rel_tol * self.k_total * cap).max(1e-16);
        let t_min = (cap * 1e-14).min(1e-14);
        let germ_cap = cap.min(self.eps_cut);
        let (mut total, mut err) = osc::fourier_integral(
            |t| t * self.b(t),
            t_min,
            germ_cap,
            lambda,
            abs_tol / 2.0,
            true,
        )?;
        err += t_min; // |t B(t)| ≤ 1 near the origin
        if cap > self.eps_cut {
            let (tail, e) = osc::fourier_integral(
                |t| t * self.b(t),
                self.eps_cut,
                cap,
                lambda,
                abs_tol / 2.0,
                false,
            )?;
            total += tail;
            err += e;
        }
        Ok((total, err))
    }

    /// Spectral density `B̂(λ) = ∫ e^{iλt} B(t) dt = 2 ∫_0^∞ cos(λt) B(t) dt`
    /// at the stated relative tolerance.
    pub fn spectral_density_tol(&self, lambda: f64, rel_tol: f64) -> Result<f64> {
        if !lambda.is_finite() {
            return Err(Error::parameter("lambda must be finite"));
        }
        if lambda == 0.0 {
            return Ok(2.0 * self.k_total);
        }
        let (v, err) = self.fourier_up_to(self.t_zero, lambda.abs(), rel_tol / 4.0)?;
        let value = 2.0 * v.re;
        if 2.0 * err > rel_tol * value.abs().max(1e-12) {
            return Err(Error::numeric(
                rel_tol * value.abs(),
                2.0 * err,
                format!("spectral density at lambda={lambda:.3e}"),
            ));
        }
        Ok(value)
    }

    /// Spectral density at the default tolerance.
    pub fn spectral_density(&self, lambda: f64) -> Result<f64> {
        self.spectral_density_tol(lambda, SPECTRAL_REL_TOL)
    }

    /// Rigorous upper bound on `B̂(λ)` for `λ ≥ 1/eps_cut`, from the split
    /// at `1/λ` and the Dirichlet bound for decreasing integrands.
    pub fn spectral_upper_bound(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        assert!(l * self.eps_cut >= 1.0, "bound valid only past 1/eps_cut");
        let ll = l.ln();
        2.0 * germ_primitive(self.alpha, 1.0 / l) + 4.0 / ll.powf(self.alpha)
    }

    /// Grid shape flags plus the minimum of `B̂` over `{0} ∪ 10^{k/8}`,
    /// `k = 0..=64`.
    pub fn shape_report(&self, n_grid: usize) -> Result<ShapeReport> {
        if n_grid < 100 {
            return Err(Error::parameter("shape report needs n_grid >= 100"));
        }
        let (positive, decreasing, convex) = grid_shape_flags(
            |t| self.b(t),
            self.t_zero * 1e-8,
            self.t_zero * (1.0 - 1e-9),
            n_grid,
        );
        let mut min_bhat = f64::INFINITY;
        let mut argmin = 0.0;
        for k in 0..=65 {
            let lambda = if k == 0 {
                0.0
            } else {
                10f64.powf((k - 1) as f64 / 8.0)
            };
            let v = self.spectral_density(lambda)?;
            if v < min_bhat {
                min_bhat = v;
                argmin = lambda;
            }
        }
        Ok(ShapeReport {
            n_grid,
            positive,
            decreasing,
            convex,
            min_spectral_density: min_bhat,
            argmin_lambda: argmin,
        })
    }

    pub fn to_spec_json(&self) -> KernelSpecJson {
        KernelSpecJson {
            alpha: self.alpha,
            eps_cut: self.eps_cut,
            t_zero: self.t_zero,
            support_t: self.support_t,
        }
    }
}

/// Tabulated spectral density with cubic-Hermite interpolation.
///
/// The transform carries wiggles of constant period `2π/t_zero` from the
/// support edge; their relative size decays like `1/λ²`, so the knots are
/// uniform (step 4) up to `λ = 10^4`, where the wiggles still matter, and
/// log-graded (32 per decade) beyond, where only the slow log decay is
/// left. Past the table the fitted `c/ln^(a-1) λ` asymptote is used, and a
/// quadratic even blend covers `λ` below the first knot.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    alpha: f64,
    bhat0: f64,
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    tail_coef: f64,
}

impl SpectrumTable {
    pub fn build(kernel: &Kernel, lambda_max: f64, per_decade: usize) -> Result<Self> {
        if !(lambda_max > 2e4) || per_decade < 4 {
            return Err(Error::parameter("need lambda_max > 2e4 and >= 4 points/decade"));
        }
        let uni_step = 4.0;
        let uni_end = 1.0e4;
        let mut knots: Vec<f64> = Vec::new();
        let mut x = uni_step;
        while x <= uni_end {
            knots.push(x);
            x += uni_step;
        }
        let log_step = std::f64::consts::LN_10 / per_decade as f64;
        let mut y = uni_end * log_step.exp();
        while y < lambda_max {
            knots.push(y);
            y *= log_step.exp();
        }
        knots.push(lambda_max);

        use rayon::prelude::*;
        let values: Result<Vec<f64>> = knots
            .par_iter()
            .map(|&l| kernel.spectral_density(l))
            .collect();
        let values = values?;
        let n = knots.len();
        let mut slopes = vec![0.0; n];
        for i in 0..n {
            slopes[i] = if i == 0 {
                (values[1] - values[0]) / (knots[1] - knots[0])
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / (knots[n - 1] - knots[n - 2])
            } else {
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                let d0 = (values[i] - values[i - 1]) / h0;
                let d1 = (values[i + 1] - values[i]) / h1;
                (d0 * h1 + d1 * h0) / (h0 + h1)
            };
        }
        let tail_coef = values[n - 1] * knots[n - 1].ln().powf(kernel.alpha() - 1.0);
        Ok(SpectrumTable {
            alpha: kernel.alpha(),
            bhat0: 2.0 * kernel.total_mass(),
            knots,
            values,
            slopes,
            tail_coef,
        })
    }

    pub fn max_lambda(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Interpolated `B̂(λ)` (even in `λ`).
    pub fn bhat(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        let first = self.knots[0];
        if l <= first {
            let r = l / first;
            return self.bhat0 + (self.values[0] - self.bhat0) * r * r;
        }
        let n = self.knots.len();
        if l >= self.knots[n - 1] {
            return self.tail_coef / l.ln().powf(self.alpha - 1.0);
        }
        let j = match self.knots.binary_search_by(|k| k.total_cmp(&l)) {
            Ok(j) => return self.values[j],
            Err(j) => j - 1,
        };
        let h = self.knots[j + 1] - self.knots[j];
        let t = (l - self.knots[j]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[j]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[j]
            + (-2.0 * t3 + 3.0 * t2) * self.values[j + 1]
            + (t3 - t2) * h * self.slopes[j + 1]
    }

    /// `(λ, B̂)` rows for serialization, the zero frequency first.
    pub fn rows(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.knots.len() + 1);
        out.push((0.0, self.bhat0));
        out.extend(self.knots.iter().copied().zip(self.values.iter().copied()));
        out
    }
}

impl TryFrom<KernelSpecJson> for Kernel {
    type Error = Error;

    fn try_from(spec: KernelSpecJson) -> Result<Self> {
        let k = Kernel::with_params(spec.alpha, Some(spec.eps_cut), Some(spec.support_t))?;
        if (k.t_zero - spec.t_zero).abs() > 1e-9 * spec.t_zero.max(1.0) {
            return Err(Error::parameter(format!(
                "t_zero {} inconsistent with alpha/eps_cut (recomputed {})",
                spec.t_zero, k.t_zero
            )));
        }
        Ok(k)
    }
}

/// `L` on the germ: `∫_0^x κ_a(y) dy = Γ(2-a, ln(1/x)) / (a-1)`, with a
/// quadrature fallback when the continued fraction is out of its region.
fn second_primitive_germ(a: f64, x: f64) -> Result<f64> {
    debug_assert!(x > 0.0 && x < 1.0);
    let z = (1.0 / x).ln();
    match upper_gamma(2.0 - a, z) {
        Ok(g) => Ok(g / (a - 1.0)),
        Err(_) => {
            let (v, _) = quad::integrate(|y: f64| germ_primitive(a, y), 0.0, x, 1e-14)?;
            Ok(v)
        }
    }
}

/// `∫_0^eps e^{iλt} / (t ln^a(1/t)) dt`: analytic head below the split
/// `t₁ = min(1/|λ|, eps)`, a bounded non-oscillatory residual there (in
/// `u = ln(1/t)` coordinates), and oscillation panels above the split.
pub(crate) fn germ_fourier(
    a: f64,
    eps: f64,
    lambda: f64,
    abs_tol: f64,
) -> Result<(Complex64, f64)> {
    debug_assert!(eps > 0.0 && eps < 1.0);
    let lam = lambda.abs();
    let t1 = if lam * eps > 1.0 { 1.0 / lam } else { eps };

    let head = germ_primitive(a, t1);
    let u1 = (1.0 / t1).ln();
    // ∫_0^{t1} (e^{iλt} - 1) B dt; integrand decays like e^{-(u - u1)} in u.
    let (residual, mut err) = quad::integrate(
        |u: f64| {
            let t = (-u).exp();
            let phase = lam * t;
            let (s, c) = phase.sin_cos();
            Complex64::new(c - 1.0, s) * u.powf(-a)
        },
        u1,
        u1 + 45.0,
        abs_tol / 3.0,
    )?;
    err += 1e-19 * u1.powf(-a); // discarded u-tail, |e^{ix}-1| ≤ x

    let mut total = Complex64::new(head, 0.0) + residual;
    if t1 < eps {
        let (osc_part, e) = osc::fourier_integral(
            |t| {
                let l = (1.0 / t).ln();
                1.0 / (t * l.powf(a))
            },
            t1,
            eps,
            lam,
            abs_tol / 3.0,
            true,
        )?;
        total += osc_part;
        err += e;
    }
    if lambda < 0.0 {
        total = total.conj();
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(alpha: f64) -> Kernel {
        Kernel::new(alpha).unwrap()
    }

    #[test]
    fn construction_defaults() {
        let k = kernel(2.0);
        assert!((k.eps_cut() - (-4.0f64).exp()).abs() < 1e-15);
        assert!(k.t_zero() > k.eps_cut());
        assert!(kernel(1.5).t_zero() > 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(Kernel::new(0.9), Err(Error::Parameter(_))));
        assert!(matches!(Kernel::new(1.0), Err(Error::Parameter(_))));
        // eps_cut at or above e^-alpha: the closed form stops decreasing.
        assert!(matches!(
            Kernel::with_params(2.0, Some(0.14), None),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn closed_form_on_the_germ() {
        let k = kernel(2.0);
        let t = (-5.0f64).exp();
        let b = k.eval(t).unwrap();
        assert!((b - 5f64.exp() / 25.0).abs() < 1e-12 * b);
        // identity B(t) t ln^a(1/t) = 1 on a germ grid
        for i in 1..200 {
            let t = k.eps_cut() * i as f64 / 200.0;
            let res = k.eval(t).unwrap() * t * (1.0 / t).ln().powf(2.0);
            assert!((res - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn evenness_and_domain() {
        let k = kernel(2.0);
        let t = (-5.0f64).exp();
        assert_eq!(k.eval(t).unwrap(), k.eval(-t).unwrap());
        assert!(matches!(k.eval(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn compact_support() {
        let k = kernel(2.0);
        assert_eq!(k.eval(k.t_zero() + 1.0).unwrap(), 0.0);
        assert_eq!(k.eval(k.t_zero()).unwrap(), 0.0);
        assert!(k.eval(k.t_zero() * 0.999).unwrap() > 0.0);
    }

    #[test]
    fn monotone_convex_on_sorted_grid() {
        for &alpha in &[1.5, 2.0, 3.0] {
            let k = kernel(alpha);
            let (pos, dec, cvx) =
                grid_shape_flags(|t| k.b(t), k.t_zero() * 1e-7, k.t_zero() * 0.999999, 4000);
            assert!(pos && dec && cvx, "alpha={alpha}");
        }
    }

    #[test]
    fn primitive_increments_match_quadrature() {
        // K(x2) - K(x1) = ∫_{x1}^{x2} B, away from the singular endpoint;
        // validates the germ closed form and the tangent polynomials.
        let k = kernel(2.0);
        let pts = [
            k.eps_cut() * 0.05,
            k.eps_cut() * 0.3,
            k.eps_cut(),
            k.t_zero() * 0.7,
            k.t_zero() * 2.0,
        ];
        for w in pts.windows(2) {
            let (q, _) = quad::integrate(|t: f64| k.b(t), w[0], w[1], 1e-14).unwrap();
            let got = k.primitive(w[1]) - k.primitive(w[0]);
            assert!(
                (got - q).abs() < 1e-11 * q.abs().max(1e-10),
                "[{},{}]: {got} vs {q}",
                w[0],
                w[1]
            );
        }
        assert_eq!(k.primitive(-0.01), -k.primitive(0.01));
    }

    #[test]
    fn second_primitive_matches_quadrature() {
        let k = kernel(1.7);
        for &x in &[k.eps_cut() * 0.5, k.t_zero() * 0.8, 0.5, 1.5] {
            let (q, _) = quad::integrate(|y: f64| k.primitive(y), 0.0, x, 1e-13).unwrap();
            let got = k.second_primitive(x);
            assert!(
                (got - q).abs() < 1e-10 * q.abs().max(1e-8),
                "x={x}: {got} vs {q}"
            );
        }
        assert_eq!(k.second_primitive(-0.3), k.second_primitive(0.3));
    }

    #[test]
    fn rect_integral_matches_overlap_quadrature() {
        let k = kernel(2.0);
        let cases = [
            (0.0, 0.04, 0.01, 0.05),  // straddles the diagonal
            (0.0, 0.5, 0.0, 0.5),     // self-rectangle
            (0.0, 0.02, 0.03, 0.06),  // near but disjoint
            (0.1, 0.2, 0.19, 0.45),   // touching corner region
            (0.0, 1.0, -1.0, 0.0),    // adjacent unit intervals
        ];
        for &(a, b, c, d) in &cases {
            let got = k.rect_integral(a, b, c, d);
            let oracle = k.rect_integral_quad(a, b, c, d, 1e-12).unwrap();
            assert!(
                (got - oracle).abs() < 1e-8 * oracle.abs().max(1e-9),
                "({a},{b})x({c},{d}): {got} vs {oracle}"
            );
        }
        // Disjoint far rectangles: exactly zero.
        assert_eq!(k.rect_integral(0.0, 0.1, 0.5, 0.9), 0.0);
    }

    #[test]
    fn spectral_density_at_zero_matches_log_substituted_oracle() {
        let k = kernel(2.0);
        // Germ part in u = ln(1/t) coordinates plus the tangent tail.
        let u0 = (1.0 / k.eps_cut()).ln();
        let (germ, _) = quad::integrate(|u: f64| u.powf(-2.0), u0, u0 + 60.0, 1e-14).unwrap();
        let germ_tail = (u0 + 60.0f64).powf(-1.0); // ∫_U^∞ u^{-2} du
        let (tail, _) = quad::integrate(|t: f64| k.b(t), k.eps_cut(), k.t_zero(), 1e-14).unwrap();
        let oracle = 2.0 * (germ + germ_tail + tail);
        let got = k.spectral_density(0.0).unwrap();
        assert!(got > 0.0);
        assert!((got - oracle).abs() < 1e-9 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn spectral_density_is_even_and_positive_high_up() {
        let k = kernel(2.0);
        let l0 = 31.4;
        let a = k.spectral_density(l0).unwrap();
        let b = k.spectral_density(-l0).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
        for &lam in &[1.0, 1e2, 1e4, 1e6, 1e8] {
            assert!(k.spectral_density(lam).unwrap() > 0.0, "lambda={lam}");
        }
    }

    #[test]
    fn spectral_density_matches_resolved_quadrature_at_moderate_frequency() {
        let k = kernel(2.0);
        let lam = 200.0;
        // Analytic head below delta (where cos(λt) = 1 to 2e-20), resolved
        // quadrature above it.
        let delta = 1e-12;
        let head = germ_primitive(2.0, delta);
        let (tail, _) =
            quad::integrate(|t: f64| (lam * t).cos() * k.b(t), delta, k.t_zero(), 1e-13).unwrap();
        let oracle = 2.0 * (head + tail);
        let got = k.spectral_density(lam).unwrap();
        assert!((got - oracle).abs() < 1e-7 * got.abs(), "{got} vs {oracle}");
    }

    #[test]
    fn spectral_decay_consistent_with_log_asymptote() {
        let k = kernel(2.0);
        let b4 = k.spectral_density(1e4).unwrap();
        let b5 = k.spectral_density(1e5).unwrap();
        assert!(b5 < b4);
        // ratio should resemble ln(1e4)/ln(1e5) = 0.8 rather than a power law
        let ratio = b5 / b4;
        assert!(ratio > 0.7 && ratio < 0.95, "ratio {ratio}");
    }

    #[test]
    fn shape_report_flags() {
        let rep = kernel(2.0).shape_report(500).unwrap();
        assert!(rep.positive && rep.decreasing && rep.convex);
        assert!(rep.min_spectral_density >= -1e-9);
        let rep3 = kernel(3.0).shape_report(500).unwrap();
        assert!(rep3.positive && rep3.decreasing && rep3.convex);
        assert!(matches!(
            kernel(2.0).shape_report(10),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn non_convex_negative_control() {
        // A bump that first decays then flattens: decreasing but not convex.
        let f = |t: f64| (-t).exp() * (1.0 + 0.3 * (6.0 * t).sin());
        let (_, _, convex) = grid_shape_flags(f, 0.01, 2.0, 800);
        assert!(!convex);
    }

    #[test]
    fn spec_json_round_trip() {
        let k = Kernel::with_params(2.5, Some(0.008), Some(2.0)).unwrap();
        let js = serde_json::to_string(&k.to_spec_json()).unwrap();
        let parsed: KernelSpecJson = serde_json::from_str(&js).unwrap();
        let k2 = Kernel::try_from(parsed).unwrap();
        assert_eq!(k2.alpha(), k.alpha());
        assert_eq!(k2.eps_cut(), k.eps_cut());
        assert_eq!(k2.support_t(), k.support_t());
        assert!((k2.t_zero() - k.t_zero()).abs() < 1e-14);
    }

    #[test]
    fn spectrum_table_interpolates_to_high_accuracy() {
        let k = kernel(2.0);
        let table = SpectrumTable::build(&k, 1e6, 32).unwrap();
        for &lam in &[0.0, 5e-3, 0.7, 13.3, 471.0, 9.4e4, 7.7e5] {
            let want = k.spectral_density(lam).unwrap();
            let got = table.bhat(lam);
            assert!(
                (got - want).abs() < 3e-6 * want.abs().max(1e-12),
                "lambda={lam}: {got} vs {want}"
            );
        }
        // Past the table: asymptote extension stays positive and decreasing.
        let hi = table.max_lambda();
        assert!(table.bhat(hi * 5.0) > 0.0);
        assert!(table.bhat(hi * 5.0) < table.bhat(hi * 0.9));
        assert_eq!(table.rows()[0].0, 0.0);
    }

    #[test]
    fn germ_fourier_matches_resolved_quadrature() {
        let (a, eps) = (2.0, (-4.0f64).exp());
        let delta = 1e-14;
        for &lam in &[0.0, 3.0, 57.0, 400.0] {
            let (got, _) = germ_fourier(a, eps, lam, 1e-13).unwrap();
            // e^{iλt} = 1 below delta to 4e-12 of the head mass.
            let head = Complex64::new(germ_primitive(a, delta), 0.0);
            let (tail, _) = quad::integrate(
                |t: f64| {
                    let l = (1.0 / t).ln();
                    let (s, c) = (lam * t).sin_cos();
                    Complex64::new(c, s) / (t * l * l)
                },
                delta,
                eps,
                1e-13,
            )
            .unwrap();
            let want = head + tail;
            assert!((got - want).norm() < 2e-8, "lam={lam}: {got} vs {want}");
        }
    }
}

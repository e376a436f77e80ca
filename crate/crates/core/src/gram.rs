//! Gram geometry of the windowed trigonometric bases.
//!
//! The two families are complex exponentials with frequency lattice `2πk/T`
//! supported on `(0, T)` (the `x` family) and `(-T, 0)` (the `y` family),
//! paired through the kernel form `⟨f, g⟩ = ∬ f(s) conj(g(t)) B(s-t) ds dt`.
//! Stationarity collapses every pairing to one-dimensional kernel
//! transforms:
//!
//! * equal indices: `2 ∫_0^T (T-t) B(t) cos(2πkt/T) dt`,
//! * unequal `x`-`x`: a sine-difference increment with prefactor
//!   `-T/(π(k-l))`,
//! * `x`-`y`: a `min(t, 2T-t)`-weighted transform on `(0, 2T)` on the
//!   diagonal and a `sgn(T-t)`-weighted increment off it.
//!
//! The normalized Gram matrix collects both families at truncation `N`
//! (indices `-N..=N`, `x` block then `y` block; the `y`-`y` block equals the
//! `x`-`x` block by stationarity). Its distance from the identity in the
//! Frobenius norm (the Hilbert–Schmidt defect) and its smallest eigenvalue
//! are the finite-truncation signatures that the family is a Riesz-type
//! system: defect increments must decay under doubling and the eigenvalue
//! floor must stay away from zero.
//!
//! `oracle` holds slow iterated-quadrature evaluations of the raw double
//! integrals, used by the verification suites to check the 1-D reductions.

use crate::kernel::germ_primitive;
use crate::{linalg, osc, Complex64, Error, Kernel, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

const REL_TOL: f64 = 1e-9;

fn mu(period: f64, k: i64) -> f64 {
    2.0 * std::f64::consts::PI * k as f64 / period
}

/// `∫_T^{min(2T, t_zero)} B(t) e^{iλt} dt` (zero when the support ends first).
fn tail_plain(kernel: &Kernel, period: f64, lambda: f64) -> Result<Complex64> {
    let cap = (2.0 * period).min(kernel.t_zero());
    if cap <= period {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut edges = vec![period];
    if kernel.eps_cut() > period && kernel.eps_cut() < cap {
        edges.push(kernel.eps_cut());
    }
    edges.push(cap);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in edges.windows(2) {
        let (v, _) = osc::fourier_integral(
            |t| kernel.b(t),
            w[0],
            w[1],
            lambda,
            REL_TOL * kernel.total_mass(),
            false,
        )?;
        acc += v;
    }
    Ok(acc)
}

/// `∫_T^{min(2T, t_zero)} (2T-t) B(t) e^{iλt} dt`.
fn tail_weighted(kernel: &Kernel, period: f64, lambda: f64) -> Result<Complex64> {
    let cap = (2.0 * period).min(kernel.t_zero());
    if cap <= period {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut edges = vec![period];
    if kernel.eps_cut() > period && kernel.eps_cut() < cap {
        edges.push(kernel.eps_cut());
    }
    edges.push(cap);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in edges.windows(2) {
        let (v, _) = osc::fourier_integral(
            |t| (2.0 * period - t) * kernel.b(t),
            w[0],
            w[1],
            lambda,
            REL_TOL * kernel.total_mass() * period,
            false,
        )?;
        acc += v;
    }
    Ok(acc)
}

/// `⟨x_m, x_n⟩ = ⟨y_m, y_n⟩` (real-valued; returned as complex for a uniform
/// entry type).
pub fn inner_xx(kernel: &Kernel, period: f64, m: i64, n: i64) -> Result<Complex64> {
    if m == n {
        let lam = mu(period, m.abs());
        let (phi, _) = kernel.fourier_up_to(period, lam, REL_TOL)?;
        let (psi, _) = kernel.fourier_weighted_t(period, lam, REL_TOL)?;
        Ok(Complex64::new(
            2.0 * (period * phi.re - psi.re),
            0.0,
        ))
    } else {
        let im_phi = |k: i64| -> Result<f64> {
            let (phi, _) = kernel.fourier_up_to(period, mu(period, k.abs()), REL_TOL)?;
            Ok(if k < 0 { -phi.im } else { phi.im })
        };
        let value = -period / (std::f64::consts::PI * (m - n) as f64) * (im_phi(m)? - im_phi(n)?);
        Ok(Complex64::new(value, 0.0))
    }
}

/// `⟨x_m, y_n⟩`.
pub fn inner_xy(kernel: &Kernel, period: f64, m: i64, n: i64) -> Result<Complex64> {
    let half = |k: i64| -> Result<Complex64> {
        // ∫_0^T B e^{iμ_k t} - ∫_T^{2T} B e^{iμ_k t}
        let lam = mu(period, k.abs());
        let (phi, _) = kernel.fourier_up_to(period, lam, REL_TOL)?;
        let v = phi - tail_plain(kernel, period, lam)?;
        Ok(if k < 0 { v.conj() } else { v })
    };
    if m == n {
        // ∫_0^{2T} min(t, 2T-t) B(t) e^{iμt} dt
        let lam = mu(period, m.abs());
        let (psi, _) = kernel.fourier_weighted_t(period, lam, REL_TOL)?;
        let v = psi + tail_weighted(kernel, period, lam)?;
        Ok(if m < 0 { v.conj() } else { v })
    } else {
        let pref = Complex64::new(0.0, -1.0) * period
            / (2.0 * std::f64::consts::PI * (m - n) as f64);
        Ok(pref * (half(m)? - half(n)?))
    }
}

/// Normalized Gram of the joint `x`/`y` family at truncation `N`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n_trunc: usize,
    alpha: f64,
    period: f64,
    matrix: DMatrix<Complex64>,
    /// Unnormalized diagonal `‖x_k‖²`, index `k+N`.
    diag: Vec<f64>,
}

/// Serialized Gram: row-major `[re, im]` pairs plus provenance metadata.
#[derive(Debug, Clone, Serialize)]
pub struct GramJson {
    pub n_trunc: usize,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub period: f64,
    /// Flat index layout of the rows/columns.
    pub order: String,
    pub entries: Vec<[f64; 2]>,
}

/// One row of a Hilbert–Schmidt defect scan.
#[derive(Debug, Clone, Serialize)]
pub struct DefectRow {
    pub n_trunc: usize,
    pub defect: f64,
    /// `S_N - S_{N/2}` when the previous truncation is in the scan.
    pub increment: Option<f64>,
    pub min_eigenvalue: f64,
}

/// Frobenius-squared distance of a square matrix from the identity.
pub fn frobenius_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = if i == j {
                m[(i, j)] - Complex64::new(1.0, 0.0)
            } else {
                m[(i, j)]
            };
            acc += d.norm_sqr();
        }
    }
    acc
}

struct Transforms {
    xx_diag: Vec<f64>,      // ⟨x_k, x_k⟩, k = 0..=N
    im_phi: Vec<f64>,       // Im ∫_0^T B e^{iμ_k t}, k = 0..=N
    xy_diag: Vec<Complex64>, // ⟨x_k, y_k⟩, k = 0..=N
    half: Vec<Complex64>,    // ∫_0^T - ∫_T^{2T} of B e^{iμ_k t}, k = 0..=N
}

fn transforms(kernel: &Kernel, period: f64, n: usize) -> Result<Transforms> {
    let rows: Result<Vec<(f64, f64, Complex64, Complex64)>> = (0..=n as i64)
        .into_par_iter()
        .map(|k| {
            let lam = mu(period, k);
            let (phi, _) = kernel.fourier_up_to(period, lam, REL_TOL)?;
            let (psi, _) = kernel.fourier_weighted_t(period, lam, REL_TOL)?;
            let xx = 2.0 * (period * phi.re - psi.re);
            let xy = psi + tail_weighted(kernel, period, lam)?;
            let half = phi - tail_plain(kernel, period, lam)?;
            Ok((xx, phi.im, xy, half))
        })
        .collect();
    let rows = rows?;
    Ok(Transforms {
        xx_diag: rows.iter().map(|r| r.0).collect(),
        im_phi: rows.iter().map(|r| r.1).collect(),
        xy_diag: rows.iter().map(|r| r.2).collect(),
        half: rows.iter().map(|r| r.3).collect(),
    })
}

impl GramMatrix {
    /// Builds the full normalized Gram over `x_{-N}..x_N, y_{-N}..y_N`.
    pub fn build(kernel: &Kernel, period: f64, n_trunc: usize) -> Result<Self> {
        if n_trunc < 1 {
            return Err(Error::parameter("truncation must be at least 1"));
        }
        if !(period > 0.0) {
            return Err(Error::parameter("period must be positive"));
        }
        let n = n_trunc as i64;
        let tf = transforms(kernel, period, n_trunc)?;
        for (k, &d) in tf.xx_diag.iter().enumerate() {
            if !(d > 0.0) {
                return Err(Error::Shape(format!("nonpositive norm at |k|={k}: {d}")));
            }
        }
        let dim = 2 * (2 * n_trunc + 1);
        let side = 2 * n_trunc + 1;
        let idx = |k: i64| (k + n) as usize;

        let diag: Vec<f64> = (-n..=n).map(|k| tf.xx_diag[k.unsigned_abs() as usize]).collect();
        let inv_norm: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();

        let xx = |m: i64, l: i64| -> f64 {
            if m == l {
                tf.xx_diag[m.unsigned_abs() as usize]
            } else {
                let im = |k: i64| {
                    let v = tf.im_phi[k.unsigned_abs() as usize];
                    if k < 0 {
                        -v
                    } else {
                        v
                    }
                };
                -period / (std::f64::consts::PI * (m - l) as f64) * (im(m) - im(l))
            }
        };
        let xy = |m: i64, l: i64| -> Complex64 {
            if m == l {
                let v = tf.xy_diag[m.unsigned_abs() as usize];
                if m < 0 {
                    v.conj()
                } else {
                    v
                }
            } else {
                let half = |k: i64| {
                    let v = tf.half[k.unsigned_abs() as usize];
                    if k < 0 {
                        v.conj()
                    } else {
                        v
                    }
                };
                Complex64::new(0.0, -1.0) * period
                    / (2.0 * std::f64::consts::PI * (m - l) as f64)
                    * (half(m) - half(l))
            }
        };

        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for m in -n..=n {
            for l in -n..=n {
                let w = inv_norm[idx(m)] * inv_norm[idx(l)];
                let v_xx = Complex64::new(xx(m, l) * w, 0.0);
                let v_xy = xy(m, l) * w;
                let (im_, il) = (idx(m), idx(l));
                matrix[(im_, il)] = v_xx;
                matrix[(side + im_, side + il)] = v_xx;
                matrix[(im_, side + il)] = v_xy;
                matrix[(side + il, im_)] = v_xy.conj();
            }
        }
        for i in 0..dim {
            matrix[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(GramMatrix {
            n_trunc,
            alpha: kernel.alpha(),
            period,
            matrix,
            diag,
        })
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
    /// Unnormalized `‖x_k‖²` for `|k| ≤ N`.
    pub fn raw_norm_sq(&self, k: i64) -> f64 {
        self.diag[(k + self.n_trunc as i64) as usize]
    }

    /// Flat index of `x_k` (`y_k` sits one block later).
    pub fn x_index(&self, k: i64) -> usize {
        (k + self.n_trunc as i64) as usize
    }
    pub fn y_index(&self, k: i64) -> usize {
        (2 * self.n_trunc + 1) + self.x_index(k)
    }

    /// Hilbert–Schmidt defect `‖G - I‖_F²`.
    pub fn hs_defect(&self) -> f64 {
        frobenius_defect(&self.matrix)
    }

    /// Defect of the sub-Gram truncated to `|k| ≤ m` (both families).
    pub fn hs_defect_at(&self, m: usize) -> f64 {
        assert!(m <= self.n_trunc);
        let n = self.n_trunc as i64;
        let mm = m as i64;
        let mut sel: Vec<usize> = Vec::with_capacity(2 * (2 * m + 1));
        for k in -mm..=mm {
            sel.push((k + n) as usize);
        }
        let side = 2 * self.n_trunc + 1;
        let len = sel.len();
        for i in 0..len {
            sel.push(side + sel[i]);
        }
        let mut acc = 0.0;
        for (a, &i) in sel.iter().enumerate() {
            for (b, &j) in sel.iter().enumerate() {
                let d = if a == b {
                    self.matrix[(i, j)] - Complex64::new(1.0, 0.0)
                } else {
                    self.matrix[(i, j)]
                };
                acc += d.norm_sqr();
            }
        }
        acc
    }

    /// Smallest eigenvalue of the normalized Gram.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::hermitian_min_eigenvalue(&self.matrix)
    }

    /// Sub-Gram eigen floor at truncation `m ≤ N`.
    pub fn min_eigenvalue_at(&self, m: usize) -> Result<f64> {
        assert!(m <= self.n_trunc);
        let n = self.n_trunc as i64;
        let mm = m as i64;
        let side = 2 * self.n_trunc + 1;
        let mut sel: Vec<usize> = Vec::new();
        for k in -mm..=mm {
            sel.push((k + n) as usize);
        }
        let len = sel.len();
        for i in 0..len {
            sel.push(side + sel[i]);
        }
        let sub = DMatrix::from_fn(sel.len(), sel.len(), |i, j| self.matrix[(sel[i], sel[j])]);
        linalg::hermitian_min_eigenvalue(&sub)
    }

    pub fn to_json(&self) -> GramJson {
        GramJson {
            n_trunc: self.n_trunc,
            alpha: self.alpha,
            period: self.period,
            order: format!(
                "x[-{n}..={n}] then y[-{n}..={n}], row-major",
                n = self.n_trunc
            ),
            entries: self
                .matrix
                .row_iter()
                .flat_map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                .collect(),
        }
    }
}

/// Builds one Gram at `max(ns)` and reports defect plus eigen floor at each
/// requested truncation.
pub fn defect_scan(kernel: &Kernel, period: f64, ns: &[usize]) -> Result<Vec<DefectRow>> {
    if ns.is_empty() {
        return Err(Error::parameter("empty truncation list"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::parameter("truncations must be strictly increasing"));
    }
    let max_n = *ns.last().unwrap();
    let gram = GramMatrix::build(kernel, period, max_n)?;
    let mut rows = Vec::with_capacity(ns.len());
    let mut prev: Option<f64> = None;
    for &m in ns {
        let defect = gram.hs_defect_at(m);
        let min_eig = gram.min_eigenvalue_at(m)?;
        rows.push(DefectRow {
            n_trunc: m,
            defect,
            increment: prev.map(|p| defect - p),
            min_eigenvalue: min_eig,
        });
        prev = Some(defect);
    }
    Ok(rows)
}

/// Diagonal-growth ratio `‖x_k‖² · ln^(a-1)|k| · (a-1) / (2T)`, expected to
/// approach 1 as `|k|` grows.
#[derive(Debug, Clone, Serialize)]
pub struct DiagRatio {
    pub k: i64,
    pub norm_sq: f64,
    pub ratio: f64,
}

pub fn diag_asymptotic(kernel: &Kernel, period: f64, ks: &[i64]) -> Result<Vec<DiagRatio>> {
    for &k in ks {
        if k.abs() < 2 {
            return Err(Error::parameter("diagonal asymptote needs |k| >= 2"));
        }
    }
    ks.par_iter()
        .map(|&k| {
            let norm_sq = inner_xx(kernel, period, k, k)?.re;
            let lk = (k.abs() as f64).ln();
            let ratio = norm_sq * lk.powf(kernel.alpha() - 1.0) * (kernel.alpha() - 1.0)
                / (2.0 * period);
            Ok(DiagRatio { k, norm_sq, ratio })
        })
        .collect()
}

pub mod oracle {
    //! Iterated-quadrature reference values for the raw double integrals.
    //!
    //! Everything here works from pointwise kernel values plus the analytic
    //! antiderivative of the germ; the 1-D reductions above are never used,
    //! so agreement is a real cross-check. Intended for small `|k|` only —
    //! cost grows with the oscillation.

    use super::*;
    use crate::quad;

    /// `∫_0^b e^{iμu} B(u) du` with the analytic head at the origin.
    fn transform_from_zero(kernel: &Kernel, b: f64, mu: f64, tol: f64) -> Result<Complex64> {
        if b <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let eps = kernel.eps_cut();
        let germ_to = b.min(eps);
        let head = germ_primitive(kernel.alpha(), germ_to);
        // bounded residual: (e^{iμu} - 1) B on (0, germ_to]
        let (res, _) = quad::integrate(
            |u: f64| {
                if u <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let (s, c) = (mu * u).sin_cos();
                Complex64::new(c - 1.0, s) * kernel.b(u)
            },
            0.0,
            germ_to,
            tol / 2.0,
        )?;
        let mut acc = Complex64::new(head, 0.0) + res;
        if b > eps {
            let cap = b.min(kernel.t_zero());
            if cap > eps {
                let (smooth, _) = quad::integrate(
                    |u: f64| {
                        let (s, c) = (mu * u).sin_cos();
                        Complex64::new(c, s) * kernel.b(u)
                    },
                    eps,
                    cap,
                    tol / 2.0,
                )?;
                acc += smooth;
            }
        }
        Ok(acc)
    }

    /// `∬_{(0,T)²} e^{iμ_m s} e^{-iμ_n t} B(s-t) ds dt` by iterated
    /// quadrature (outer in `s`, inner split at the diagonal).
    pub fn xx(kernel: &Kernel, period: f64, m: i64, n: i64) -> Result<Complex64> {
        let mu_m = mu(period, m);
        let mu_n = mu(period, n);
        let inner_tol = 1e-10;
        let inner = |s: f64| -> Complex64 {
            let a = transform_from_zero(kernel, s, mu_n, inner_tol).expect("inner quadrature");
            let bpart =
                transform_from_zero(kernel, period - s, mu_n, inner_tol).expect("inner quadrature");
            let phase = crate::special::cis(-mu_n * s);
            phase * (a + bpart.conj())
        };
        let (v, _) = quad::integrate(
            |s: f64| crate::special::cis(mu_m * s) * inner(s),
            0.0,
            period,
            1e-8 * period,
        )?;
        Ok(v)
    }

    /// `∬_{(-T,0)²}` analogue for the `y` family.
    pub fn yy(kernel: &Kernel, period: f64, m: i64, n: i64) -> Result<Complex64> {
        let mu_m = mu(period, m);
        let mu_n = mu(period, n);
        let inner_tol = 1e-10;
        let inner = |s: f64| -> Complex64 {
            let a = transform_from_zero(kernel, s + period, mu_n, inner_tol).expect("inner");
            let bpart = transform_from_zero(kernel, -s, mu_n, inner_tol).expect("inner");
            let phase = crate::special::cis(-mu_n * s);
            phase * (a + bpart.conj())
        };
        let (v, _) = quad::integrate(
            |s: f64| crate::special::cis(mu_m * s) * inner(s),
            -period,
            0.0,
            1e-8 * period,
        )?;
        Ok(v)
    }

    /// `∬_{(0,T)×(-T,0)} e^{iμ_m s} e^{-iμ_n t} B(s-t) ds dt`.
    pub fn xy(kernel: &Kernel, period: f64, m: i64, n: i64) -> Result<Complex64> {
        let mu_m = mu(period, m);
        let mu_n = mu(period, n);
        let inner_tol = 1e-10;
        let inner = |s: f64| -> Complex64 {
            // ∫_{-T}^0 e^{-iμ_n t} B(s-t) dt = e^{-iμ_n s} ∫_s^{s+T} e^{iμ_n u} B du
            let hi = transform_from_zero(kernel, s + period, mu_n, inner_tol).expect("inner");
            let lo = transform_from_zero(kernel, s, mu_n, inner_tol).expect("inner");
            crate::special::cis(-mu_n * s) * (hi - lo)
        };
        let (v, _) = quad::integrate(
            |s: f64| crate::special::cis(mu_m * s) * inner(s),
            0.0,
            period,
            1e-8 * period,
        )?;
        Ok(v)
    }
}

//! Finite-dimensional bipartite states and reduced density matrices.
//!
//! A pure state of a product of two finite-dimensional spaces is stored as
//! its coefficient matrix in a product basis; tracing out either factor
//! gives a positive, trace-one density matrix, and the map is 2-Lipschitz
//! from state vectors to trace norm. Unitaries acting on one factor
//! conjugate the reduction on that factor and leave the other invisible.
//!
//! The displacement diagnostics live here too: the lower-bound profile
//!
//! ```text
//! M(r) = max_{φ ∈ [0, π]} exp(-φ²/2r²) · 2 sin(φ/2)
//! ```
//!
//! and the coherent-state slice of the bound
//! `‖ρ(ψ) - ρ(U ψ)‖ ≥ M(dist)`: displacing the vacuum of one factor by a
//! coherent amplitude `β` moves the reduced state by the closed-form trace
//! distance `2 √(1 - e^{-|β|²})`, which must dominate `M(2|β|)`.

use crate::{linalg, Complex64, Error, Result};
use nalgebra::DMatrix;

/// Which factor survives the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Normalized pure state of a `d1 × d2` product space.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: DMatrix<Complex64>,
}

impl PureState {
    /// Coefficient matrix in an orthonormal product basis; must have unit
    /// Frobenius norm to `1e-12`.
    pub fn new(amplitudes: DMatrix<Complex64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::parameter(format!(
                "state must be normalized (|ψ|² = {norm_sq})"
            )));
        }
        Ok(PureState { amplitudes })
    }

    /// Normalizes and wraps.
    pub fn normalized(mut amplitudes: DMatrix<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::parameter("cannot normalize the zero state"));
        }
        amplitudes /= Complex64::new(norm, 0.0);
        Ok(PureState { amplitudes })
    }

    /// Product state `a ⊗ b`.
    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        let m = DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j]);
        Self::normalized(m)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.amplitudes.nrows(), self.amplitudes.ncols())
    }
    pub fn amplitudes(&self) -> &DMatrix<Complex64> {
        &self.amplitudes
    }
}

/// Hermitian, positive semidefinite, trace-one matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let eigs = linalg::hermitian_eigenvalues(&entries)?;
        if eigs.iter().any(|&l| l < -1e-10) {
            return Err(Error::Shape(format!(
                "not positive semidefinite (min eigenvalue {:.3e})",
                eigs[0]
            )));
        }
        let trace: f64 = entries.diagonal().iter().map(|z| z.re).sum();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::Shape(format!("trace must be 1, got {trace}")));
        }
        Ok(DensityMatrix { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.entries)
    }
}

/// Reduced density matrix of `psi` on the chosen factor.
pub fn reduce(psi: &PureState, side: Side) -> Result<DensityMatrix> {
    let m = &psi.amplitudes;
    let rho = match side {
        Side::Left => m * m.adjoint(),
        Side::Right => (m.adjoint() * m).transpose(),
    };
    DensityMatrix::new(rho)
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian matrix.
pub fn trace_norm(a: &DMatrix<Complex64>) -> Result<f64> {
    let eigs = linalg::hermitian_eigenvalues(a)?;
    Ok(eigs.iter().map(|l| l.abs()).sum())
}

/// `‖ρ(ψ₁) - ρ(ψ₂)‖ ≤ 2 ‖ψ₁ - ψ₂‖ + 1e-10` on the left factor.
pub fn lipschitz_check(psi1: &PureState, psi2: &PureState) -> Result<bool> {
    if psi1.dims() != psi2.dims() {
        return Err(Error::parameter("state shapes differ"));
    }
    let r1 = reduce(psi1, Side::Left)?;
    let r2 = reduce(psi2, Side::Left)?;
    let lhs = trace_norm(&(r1.entries - r2.entries))?;
    let diff: f64 = (psi1.amplitudes() - psi2.amplitudes())
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(lhs <= 2.0 * diff + 1e-10)
}

fn assert_unitary(u: &DMatrix<Complex64>) -> Result<()> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::parameter("unitary must be square"));
    }
    let defect = (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if defect > 1e-10 {
        return Err(Error::parameter(format!(
            "matrix is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Checks `ρ((U₁⊗U₂)ψ) = U₁ ρ(ψ) U₁*` entrywise to `1e-10`.
pub fn covariance_check(
    psi: &PureState,
    u1: &DMatrix<Complex64>,
    u2: &DMatrix<Complex64>,
) -> Result<bool> {
    assert_unitary(u1)?;
    assert_unitary(u2)?;
    let (d1, d2) = psi.dims();
    if u1.nrows() != d1 || u2.nrows() != d2 {
        return Err(Error::parameter("unitary dimensions do not match the state"));
    }
    let transformed = PureState::new(u1 * psi.amplitudes() * u2.transpose())?;
    let lhs = reduce(&transformed, Side::Left)?;
    let rhs = u1 * reduce(psi, Side::Left)?.entries() * u1.adjoint();
    let max_dev = (lhs.entries() - rhs)
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    Ok(max_dev <= 1e-10)
}

/// `M(r) = max_{φ ∈ [0, π]} exp(-φ²/2r²) · 2 sin(φ/2)`, by a 10³-point
/// scan refined by golden-section search. `M(0) = 0`; nondecreasing in `r`
/// with limit 2.
pub fn m_of_r(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let f = |phi: f64| (-phi * phi / (2.0 * r * r)).exp() * 2.0 * (phi / 2.0).sin();
    let n = 1000;
    let step = std::f64::consts::PI / n as f64;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let v = f(step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = step * best_i.saturating_sub(1) as f64;
    let mut b = (step * (best_i + 1) as f64).min(std::f64::consts::PI);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..120 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    f(0.5 * (a + b)).max(best)
}

/// Truncated coherent-state amplitudes `e^{-|β|²/2} β^n/√(n!)` with the
/// discarded tail mass.
pub fn coherent_amplitudes(beta: Complex64, dim: usize) -> (Vec<Complex64>, f64) {
    let mut amps = Vec::with_capacity(dim);
    let mut c = Complex64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    let mut mass = 0.0;
    for n in 0..dim {
        amps.push(c);
        mass += c.norm_sqr();
        c *= beta / Complex64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    (amps, (1.0 - mass).max(0.0))
}

/// Result of the coherent displacement bound check.
#[derive(Debug, Clone)]
pub struct DisplacementBound {
    /// Trace distance `‖ρ(vac) - ρ(displaced vac)‖`, computed spectrally.
    pub lhs: f64,
    /// Closed form `2 √(1 - e^{-|β|²})` for the same distance.
    pub lhs_closed_form: f64,
    /// `M(2|β|)`.
    pub rhs: f64,
    pub holds: bool,
    pub truncation_tail: f64,
}

/// Displaces the first factor's vacuum by `β` and checks the trace-norm
/// lower bound `lhs ≥ M(2|β|) - 1e-8` on truncated matrices of size
/// `fock_dim` (the discarded coherent tail must stay below `1e-8`).
pub fn displacement_bound_check(beta: Complex64, fock_dim: usize) -> Result<DisplacementBound> {
    if fock_dim < 2 {
        return Err(Error::parameter("fock_dim must be at least 2"));
    }
    let (amps, tail) = coherent_amplitudes(beta, fock_dim);
    if tail >= 1e-8 {
        return Err(Error::Precision(format!(
            "coherent truncation tail {tail:.3e} at |β| = {:.3}, fock_dim = {fock_dim}",
            beta.norm()
        )));
    }
    let mut vac = vec![Complex64::new(0.0, 0.0); fock_dim];
    vac[0] = Complex64::new(1.0, 0.0);
    let unit_second = vec![Complex64::new(1.0, 0.0)];
    let psi1 = PureState::product(&vac, &unit_second)?;
    let psi2 = PureState::product(&amps, &unit_second)?;
    let r1 = reduce(&psi1, Side::Left)?;
    let r2 = reduce(&psi2, Side::Left)?;
    let lhs = trace_norm(&(r1.entries - r2.entries))?;
    let rhs = m_of_r(2.0 * beta.norm());
    Ok(DisplacementBound {
        lhs,
        lhs_closed_form: 2.0 * (1.0 - (-beta.norm_sqr()).exp()).max(0.0).sqrt(),
        rhs,
        holds: lhs >= rhs - 1e-8,
        truncation_tail: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(1234)
    }

    fn normal_pair(r: &mut rand_chacha::ChaCha8Rng) -> (f64, f64) {
        let u1 = ((r.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let rad = (-2.0 * u1.ln()).sqrt();
        let ang = 2.0 * std::f64::consts::PI * u2;
        (rad * ang.cos(), rad * ang.sin())
    }

    fn random_state(r: &mut rand_chacha::ChaCha8Rng, d1: usize, d2: usize) -> PureState {
        let m = DMatrix::from_fn(d1, d2, |_, _| {
            let (x, y) = normal_pair(r);
            c(x, y)
        });
        PureState::normalized(m).unwrap()
    }

    fn random_unitary(r: &mut rand_chacha::ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
        let m = DMatrix::from_fn(d, d, |_, _| {
            let (x, y) = normal_pair(r);
            c(x, y)
        });
        m.qr().q()
    }

    #[test]
    fn product_state_reduces_to_projector() {
        let a = [c(0.6, 0.0), c(0.0, 0.8)];
        let b = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let psi = PureState::product(&a, &b).unwrap();
        let rho = reduce(&psi, Side::Left).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = a[i] * a[j].conj();
                assert!((rho.entries()[(i, j)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn maximally_entangled_reduces_to_uniform() {
        let s = 1.0 / 2f64.sqrt();
        let m = DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let rho = reduce(&PureState::new(m).unwrap(), Side::Left).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((rho.entries()[(i, j)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn left_right_spectra_coincide() {
        let mut r = rng();
        let psi = random_state(&mut r, 3, 4);
        let left = reduce(&psi, Side::Left).unwrap().eigenvalues().unwrap();
        let right = reduce(&psi, Side::Right).unwrap().eigenvalues().unwrap();
        // Right spectrum = left spectrum padded with one zero.
        assert!((right[0]).abs() < 1e-10);
        for (l, rr) in left.iter().zip(right[1..].iter()) {
            assert!((l - rr).abs() < 1e-10, "{left:?} vs {right:?}");
        }
    }

    #[test]
    fn reductions_are_valid_density_matrices() {
        let mut r = rng();
        for _ in 0..200 {
            let d1 = 2 + (r.next_u64() % 5) as usize;
            let d2 = 2 + (r.next_u64() % 5) as usize;
            let psi = random_state(&mut r, d1, d2);
            for side in [Side::Left, Side::Right] {
                let rho = reduce(&psi, side).unwrap();
                let eigs = rho.eigenvalues().unwrap();
                assert!(eigs[0] >= -1e-10);
                let tr: f64 = rho.entries().diagonal().iter().map(|z| z.re).sum();
                assert!((tr - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn trace_norm_values() {
        let d = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!((trace_norm(&d).unwrap() - 1.0).abs() < 1e-12);
        let z = DMatrix::<Complex64>::zeros(3, 3);
        assert_eq!(trace_norm(&z).unwrap(), 0.0);
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(trace_norm(&bad).is_err());
    }

    #[test]
    fn trace_distance_of_pure_projectors() {
        // ‖|a⟩⟨a| - |b⟩⟨b|‖ = 2 sqrt(1 - |⟨a,b⟩|²)
        let mut r = rng();
        for _ in 0..50 {
            let a = random_state(&mut r, 4, 1);
            let b = random_state(&mut r, 4, 1);
            let pa = reduce(&a, Side::Left).unwrap();
            let pb = reduce(&b, Side::Left).unwrap();
            let dist = trace_norm(&(pa.entries() - pb.entries())).unwrap();
            let ip: Complex64 = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes().iter())
                .map(|(x, y)| x * y.conj())
                .sum();
            let want = 2.0 * (1.0 - ip.norm_sqr()).max(0.0).sqrt();
            assert!((dist - want).abs() < 1e-10, "{dist} vs {want}");
        }
    }

    #[test]
    fn lipschitz_bound_holds() {
        let mut r = rng();
        let psi = random_state(&mut r, 3, 3);
        assert!(lipschitz_check(&psi, &psi).unwrap());
        for _ in 0..100 {
            let d1 = 2 + (r.next_u64() % 5) as usize;
            let d2 = 2 + (r.next_u64() % 5) as usize;
            let a = random_state(&mut r, d1, d2);
            let b = random_state(&mut r, d1, d2);
            assert!(lipschitz_check(&a, &b).unwrap());
        }
        // Shape mismatch errors.
        let a = random_state(&mut r, 2, 2);
        let b = random_state(&mut r, 3, 2);
        assert!(lipschitz_check(&a, &b).is_err());
    }

    #[test]
    fn orthogonal_products_strict_inequality() {
        let e0 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e1 = [c(0.0, 0.0), c(1.0, 0.0)];
        let psi1 = PureState::product(&e0, &e0).unwrap();
        let psi2 = PureState::product(&e1, &e1).unwrap();
        let r1 = reduce(&psi1, Side::Left).unwrap();
        let r2 = reduce(&psi2, Side::Left).unwrap();
        let lhs = trace_norm(&(r1.entries() - r2.entries())).unwrap();
        assert!((lhs - 2.0).abs() < 1e-12);
        // ‖ψ1 - ψ2‖ = sqrt 2, so the bound 2‖Δψ‖ = 2√2 holds strictly.
        assert!(lhs < 2.0 * 2f64.sqrt());
        assert!(lipschitz_check(&psi1, &psi2).unwrap());
    }

    #[test]
    fn unitary_covariance() {
        let mut r = rng();
        let psi = random_state(&mut r, 3, 3);
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!(covariance_check(&psi, &id, &id).unwrap());
        for _ in 0..30 {
            let u1 = random_unitary(&mut r, 3);
            let u2 = random_unitary(&mut r, 3);
            assert!(covariance_check(&psi, &u1, &u2).unwrap());
            // A unitary on the unseen factor leaves the reduction alone.
            assert!(covariance_check(&psi, &id, &u2).unwrap());
        }
        let not_unitary = DMatrix::from_element(3, 3, c(0.5, 0.0));
        assert!(covariance_check(&psi, &not_unitary, &id).is_err());
    }

    #[test]
    fn m_profile() {
        assert_eq!(m_of_r(0.0), 0.0);
        // Small r: M(r)/r -> e^{-1/2}.
        let r = 1e-3;
        assert!((m_of_r(r) / r - (-0.5f64).exp()).abs() < 1e-3);
        // Large r: the sine cap.
        assert!((m_of_r(1e3) - 2.0).abs() < 1e-4);
        // Mid value from the scan itself, pinned once.
        assert!((m_of_r(1.0) - 0.583).abs() < 5e-4, "{}", m_of_r(1.0));
        // Monotone nondecreasing, bounded by 2.
        let mut prev = 0.0;
        for i in 1..=100 {
            let v = m_of_r(0.08 * i as f64);
            assert!(v + 1e-12 >= prev);
            assert!(v <= 2.0);
            prev = v;
        }
        // Linear envelope near zero.
        for &rr in &[1e-3, 5e-3, 1e-2] {
            assert!(m_of_r(rr) <= rr * (-0.5f64).exp() * 1.1);
        }
    }

    #[test]
    fn displacement_bound_cases() {
        let z = displacement_bound_check(c(0.0, 0.0), 8).unwrap();
        assert!(z.lhs.abs() < 1e-10 && z.rhs == 0.0 && z.holds);

        let half = displacement_bound_check(c(0.5, 0.0), 40).unwrap();
        let want = 2.0 * (1.0 - (-0.25f64).exp()).sqrt();
        assert!((half.lhs - want).abs() < 1e-9, "{} vs {want}", half.lhs);
        assert!((half.lhs_closed_form - want).abs() < 1e-14);
        assert!((half.rhs - m_of_r(1.0)).abs() < 1e-14);
        assert!(half.holds);

        let three = displacement_bound_check(c(0.0, 3.0), 48).unwrap();
        assert!(three.lhs > 1.99 && three.holds);
        assert!(three.rhs < three.lhs && three.rhs > 1.7);

        // Tail check exists: |β| = 4 does not fit in 40 levels.
        assert!(matches!(
            displacement_bound_check(c(4.0, 0.0), 40),
            Err(Error::Precision(_))
        ));
        assert!(displacement_bound_check(c(4.0, 0.0), 64).unwrap().holds);
    }
}

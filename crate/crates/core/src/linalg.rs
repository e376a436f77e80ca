//! Dense Hermitian eigenvalue helpers.
//!
//! Complex Hermitian problems are mapped to the real symmetric embedding
//! `H = A + iC  →  [[A, -C], [C, A]]`, whose spectrum is that of `H` with
//! every eigenvalue doubled. This keeps the whole crate on nalgebra's pure
//! Rust symmetric solver.

use crate::{Complex64, Error, Result};
use nalgebra::DMatrix;

/// Eigenvalues of a complex Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::parameter("matrix must be square"));
    }
    let herm_defect = (0..n)
        .flat_map(|i| (0..=i).map(move |j| (i, j)))
        .map(|(i, j)| (h[(i, j)] - h[(j, i)].conj()).norm())
        .fold(0.0f64, f64::max);
    let scale = h.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    if herm_defect > 1e-10 * scale {
        return Err(Error::parameter(format!(
            "matrix is not Hermitian (defect {herm_defect:.3e})"
        )));
    }

    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            big[(i, j)] = z.re;
            big[(n + i, n + j)] = z.re;
            big[(i, n + j)] = -z.im;
            big[(n + i, j)] = z.im;
        }
    }
    // Symmetrize away rounding noise before the solver.
    let big = (&big + big.transpose()) * 0.5;
    let eig = big.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    // Doubled spectrum: take every second entry.
    Ok(vals.into_iter().step_by(2).collect())
}

/// Smallest eigenvalue of a complex Hermitian matrix.
pub fn hermitian_min_eigenvalue(h: &DMatrix<Complex64>) -> Result<f64> {
    let vals = hermitian_eigenvalues(h)?;
    vals.first()
        .copied()
        .ok_or_else(|| Error::parameter("empty matrix"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_with_complex_offdiagonal() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let h = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let vals = hermitian_eigenvalues(&h).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        assert!(hermitian_eigenvalues(&h).is_err());
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let h = DMatrix::<Complex64>::identity(5, 5);
        let vals = hermitian_eigenvalues(&h).unwrap();
        assert_eq!(vals.len(), 5);
        for v in vals {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }
}

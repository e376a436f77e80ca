//! Small special-function kit: upper incomplete gamma for the kernel's
//! second antiderivative, and numerically stable `sinc`/`cis` helpers.

use crate::{Complex64, Error, Result};

/// Upper incomplete gamma `Γ(s, z) = ∫_z^∞ t^{s-1} e^{-t} dt` for real `s`
/// (any sign) and `z` well to the right of the origin.
///
/// Uses the standard continued fraction in modified-Lentz form, which
/// converges quickly for `z ≳ |s| + 1`; the kernel geometry only ever asks
/// for `z ≥ ln(1/eps_cut) > alpha`, comfortably inside that region.
pub fn upper_gamma(s: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::parameter(format!("upper_gamma needs z > 0, got {z}")));
    }
    if z < s + 1.0 {
        return Err(Error::parameter(format!(
            "upper_gamma continued fraction unreliable at s={s}, z={z}"
        )));
    }
    let tiny = 1e-300;
    let mut b = z + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=500 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            let log_pref = -z + s * z.ln();
            return Ok(log_pref.exp() * h);
        }
    }
    Err(Error::numeric(
        1e-16,
        f64::NAN,
        format!("upper_gamma CF did not converge at s={s}, z={z}"),
    ))
}

/// `sin(x)/x` with the removable singularity handled by series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `e^{ix}`.
pub fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

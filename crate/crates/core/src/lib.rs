//! Numerical laboratory for stationary covariance kernels with a
//! logarithmically singular short-range germ.
//!
//! The library is organised around one kernel family: even, compactly
//! supported covariance functions that behave like `1/(t ln^a(1/t))` near
//! the origin and continue as a convex decreasing tail. Everything else
//! is machinery built on top of it:
//!
//! * [`kernel`] — the kernel family itself, its antiderivatives and its
//!   cosine transform (spectral density), plus shape diagnostics.
//! * [`spectral`] — half-line Fourier transforms of corrected kernels and
//!   verification of their `1/ln^(a-1)` large-frequency asymptotics.
//! * [`gram`] — inner products of windowed trigonometric bases, normalized
//!   Gram matrices, Hilbert–Schmidt defects and eigenvalue floors.
//! * [`gspace`] — the Hilbert geometry induced on step functions of the
//!   unit interval; lattice interval sets, interval-average statistics and
//!   their threshold behaviour, and two-kernel separation diagnostics.
//! * [`measures`] — scalar identities for Hellinger affinity, total
//!   variation, infinite Gaussian product measures and displacement
//!   overlaps.
//! * [`fock`] — finite-dimensional bipartite states, reduced density
//!   matrices, trace-norm bounds and displacement lower bounds.
//! * [`sim`] — Monte Carlo cross-validation by sampling bin averages of
//!   the associated Gaussian field with reproducible counter-based noise.
//!
//! Low-level numerics (adaptive Gauss–Legendre panels, oscillation-aware
//! panels with exact polynomial moments, incomplete gamma) live in
//! [`quad`], [`osc`] and [`special`].

pub mod error;
pub mod fock;
pub mod gram;
pub mod gspace;
pub mod kernel;
pub mod linalg;
pub mod measures;
pub mod osc;
pub mod quad;
pub mod sim;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use kernel::Kernel;

/// Complex double used throughout.
pub type Complex64 = num_complex::Complex<f64>;

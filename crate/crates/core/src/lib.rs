//! Exact connection polynomials between classical Hermite and exceptional
//! (Wronskian-generated) Hermite families, and the closed-form propagators,
//! potentials and Green functions of rationally extended harmonic oscillators
//! that are assembled from them.
//!
//! The exact layer works over arbitrary-precision rationals with a tracked
//! global `(2π)^{-e/2}` scale factor, so every polynomial identity (sum rule,
//! nonlinear connection, parity, ΔV) is checked by exact arithmetic. The
//! numeric layer evaluates propagators, spectral sums and eigenfunction
//! residuals in double-precision complex arithmetic.

pub mod connection;
pub mod hermite;
pub mod numeric;
pub mod poly;
pub mod propagator;
pub mod report;
pub mod scalar;
pub mod verify;
pub mod wronskian;

pub use num_complex::Complex64;
pub use num_rational::BigRational;

/// Exact polynomial over arbitrary-precision rationals (the default lane).
pub type ExactPoly = poly::ScaledPoly<BigRational>;
/// Matrix of exact polynomials.
pub type ExactMatrix = poly::PolyMatrix<BigRational>;
/// Double-precision polynomial lane (approximate arithmetic).
pub type FloatPoly = poly::ScaledPoly<f64>;

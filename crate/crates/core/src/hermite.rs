//! Probabilists' Hermite polynomials `He_n`, their normalized paired
//! products, and the rescaled family `He_n^[α]` with formal scale parameters.
//!
//! A single normalized polynomial `h_n = He_n/√(n!·√(2π))` is irrational; the
//! library therefore only ever materializes the paired product
//! `h_n(x)·h_n(y) = He_n(x)He_n(y)/n! · (2π)^{-1/2}`, which is rational times
//! one unit of scale. Everything downstream (Wronskian pairs, connection
//! polynomials) consumes the paired form.

use crate::poly::Arity;
use crate::ExactPoly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::sync::{Mutex, OnceLock};

/// Memoized table of `He_n`, grown on demand.
///
/// Concurrent `get` calls are safe and return equal polynomials.
pub struct HermiteCache {
    table: Mutex<Vec<ExactPoly>>,
}

impl HermiteCache {
    pub fn new() -> Self {
        HermiteCache {
            table: Mutex::new(vec![
                ExactPoly::one(Arity::One),
                ExactPoly::var_x(Arity::One),
            ]),
        }
    }

    /// `He_n` by the three-term recurrence `He_{n+1} = x·He_n − n·He_{n−1}`.
    pub fn get(&self, n: u32) -> ExactPoly {
        let mut table = self.table.lock().expect("hermite cache poisoned");
        let x = ExactPoly::var_x(Arity::One);
        while table.len() <= n as usize {
            let m = table.len() - 1;
            let next = x
                .mul(&table[m])
                .checked_sub(&table[m - 1].mul_scalar(&BigRational::from_integer(m.into())))
                .expect("hermite recurrence at scale 0");
            table.push(next);
        }
        table[n as usize].clone()
    }
}

impl Default for HermiteCache {
    fn default() -> Self {
        Self::new()
    }
}

fn global_cache() -> &'static HermiteCache {
    static CACHE: OnceLock<HermiteCache> = OnceLock::new();
    CACHE.get_or_init(HermiteCache::new)
}

/// Exact `He_n` (scale 0), from the process-wide cache.
pub fn hermite(n: u32) -> ExactPoly {
    global_cache().get(n)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n as u64).map(BigInt::from).product()
}

/// The paired product `h_n(x)·h_n(y)` of normalized Hermite polynomials:
/// `He_n(x)He_n(y)/n!` at scale exponent 1.
pub fn normalized_pair(n: u32) -> ExactPoly {
    let he = hermite(n);
    let pair = he.mul(&he.promote_to_y().expect("He_n is univariate"));
    pair.mul_scalar(&BigRational::new(BigInt::one(), factorial(n)))
        .shift_scale(1)
}

/// Which formal scale parameter a rescaled polynomial carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleVar {
    Alpha,
    Beta,
}

/// Polynomial in `x` whose coefficients are exact polynomials in the formal
/// scale parameters `(α, β)`.
///
/// `coeff_of_x[k]` is the coefficient of `x^k`; the coefficient polynomials
/// use variable slots `x ↦ α`, `y ↦ β` and always carry scale exponent 0.
#[derive(Debug, Clone)]
pub struct AlphaPoly {
    coeff_of_x: Vec<ExactPoly>,
}

impl PartialEq for AlphaPoly {
    fn eq(&self, other: &Self) -> bool {
        let n = self.coeff_of_x.len().max(other.coeff_of_x.len());
        let zero = ExactPoly::zero(Arity::Two);
        (0..n).all(|k| {
            self.coeff_of_x.get(k).unwrap_or(&zero) == other.coeff_of_x.get(k).unwrap_or(&zero)
        })
    }
}

impl AlphaPoly {
    pub fn from_coeffs(coeff_of_x: Vec<ExactPoly>) -> Self {
        let mut p = AlphaPoly { coeff_of_x };
        while p.coeff_of_x.last().is_some_and(|c| c.is_zero()) {
            p.coeff_of_x.pop();
        }
        p
    }

    pub fn coeff_of_x(&self, k: usize) -> ExactPoly {
        self.coeff_of_x
            .get(k)
            .cloned()
            .unwrap_or_else(|| ExactPoly::zero(Arity::Two))
    }

    pub fn degree_x(&self) -> usize {
        self.coeff_of_x.len().saturating_sub(1)
    }

    /// Derivative with respect to `x`.
    pub fn diff_x(&self) -> AlphaPoly {
        let coeffs = self
            .coeff_of_x
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.mul_scalar(&BigRational::from_integer(k.into())))
            .collect();
        AlphaPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &BigRational) -> AlphaPoly {
        AlphaPoly::from_coeffs(self.coeff_of_x.iter().map(|p| p.mul_scalar(c)).collect())
    }

    /// Substitutes numeric values for the formal scales, leaving an exact
    /// polynomial in `x`.
    pub fn substitute_scales(&self, alpha: &BigRational, beta: &BigRational) -> ExactPoly {
        let mut out = ExactPoly::zero(Arity::One);
        for (k, c) in self.coeff_of_x.iter().enumerate() {
            let mut val = BigRational::from_integer(0.into());
            for (&(da, db), coeff) in c.terms() {
                let mut term = coeff.clone();
                for _ in 0..da {
                    term *= alpha.clone();
                }
                for _ in 0..db {
                    term *= beta.clone();
                }
                val += term;
            }
            let mono = ExactPoly::monomial(val, k as u32, 0, 0, Arity::One)
                .expect("univariate monomial");
            out = out.checked_add(&mono).expect("scale 0 throughout");
        }
        out
    }
}

/// Rescaled Hermite polynomial `He_n^[s] = s^{n/2}·He_n(x/√s)` with the scale
/// kept formal: the coefficient of `x^k` is `h_{n,k}·s^{(n−k)/2}` (zero when
/// `n−k` is odd).
pub fn rescaled_hermite(n: u32, var: ScaleVar) -> AlphaPoly {
    let he = hermite(n);
    let mut coeffs = vec![ExactPoly::zero(Arity::Two); n as usize + 1];
    for (&(k, _), c) in he.terms() {
        let half = (n - k) / 2;
        let (da, db) = match var {
            ScaleVar::Alpha => (half, 0),
            ScaleVar::Beta => (0, half),
        };
        coeffs[k as usize] =
            ExactPoly::monomial(c.clone(), da, db, 0, Arity::Two).expect("scale monomial");
    }
    AlphaPoly::from_coeffs(coeffs)
}

/// `He_n^[α+β]`: coefficient of `x^k` is `h_{n,k}·(α+β)^{(n−k)/2}`.
pub fn rescaled_hermite_sum_scale(n: u32) -> AlphaPoly {
    let he = hermite(n);
    let alpha_plus_beta = ExactPoly::var_x(Arity::Two)
        .checked_add(&ExactPoly::var_y())
        .expect("scale 0");
    let mut coeffs = vec![ExactPoly::zero(Arity::Two); n as usize + 1];
    for (&(k, _), c) in he.terms() {
        let half = (n - k) / 2;
        coeffs[k as usize] = alpha_plus_beta.pow(half).mul_scalar(c);
    }
    AlphaPoly::from_coeffs(coeffs)
}

/// Umbral composition `(a ∘ B)(x) = Σ_k a_k·B_k(x)` of an Appell polynomial
/// with a basis sequence, exact in the formal scales of both.
pub fn umbral_compose(a: &AlphaPoly, basis: &[AlphaPoly]) -> AlphaPoly {
    let mut out: Vec<ExactPoly> = Vec::new();
    for (k, a_k) in a.coeff_of_x.iter().enumerate() {
        if a_k.is_zero() {
            continue;
        }
        let b = &basis[k];
        for (j, b_j) in b.coeff_of_x.iter().enumerate() {
            if b_j.is_zero() {
                continue;
            }
            let term = a_k.mul(b_j);
            if out.len() <= j {
                out.resize(j + 1, ExactPoly::zero(Arity::Two));
            }
            out[j] = out[j].checked_add(&term).expect("scale 0 throughout");
        }
    }
    AlphaPoly::from_coeffs(out)
}

/// The rescaled basis `He_0^[s] … He_n^[s]` for umbral composition.
pub fn rescaled_basis(n_max: u32, var: ScaleVar) -> Vec<AlphaPoly> {
    (0..=n_max).map(|n| rescaled_hermite(n, var)).collect()
}

//! Sparse polynomials in one or two variables with exact coefficients and a
//! tracked global scale factor `(2π)^{-e/2}`, plus matrices of them and
//! fraction-free determinants.
//!
//! The scale exponent `e` keeps products of squared oscillator normalization
//! constants (`p_n² = 1/(n!·√(2π))`) exactly representable: the rational part
//! lives in the coefficients, the transcendental part in `e`. Two polynomials
//! with different `e` cannot be added — there is no rational power of `2π`
//! that reconciles them — except when one of them is zero.

use crate::scalar::Scalar;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Value of `2π` used by numeric evaluation of the scale factor.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgError {
    #[error("operands mix univariate and bivariate polynomials incompatibly")]
    ArityMismatch,
    #[error("scale exponents differ by {0}: rescaling by (2pi)^({0}/2) is irrational")]
    IrrationalScaleMismatch(i64),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("bivariate polynomial evaluated without a value for y")]
    MissingVariable,
    #[error("matrix entries must share one scale exponent")]
    NonUniformScale,
    #[error("entry count {got} does not fill a {rows}x{cols} matrix")]
    InvalidShape { rows: usize, cols: usize, got: usize },
}

/// Number of variables of a polynomial: `x` alone, or `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arity {
    One,
    Two,
}

/// Variable selector for differentiation and sign flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

/// Sparse polynomial with coefficients in `T` and a global `(2π)^{-e/2}`
/// prefactor.
///
/// Invariants: no zero coefficients are stored; univariate polynomials carry
/// no `y` powers; the zero polynomial is canonical with `e = 0` and compares
/// equal regardless of scale.
#[derive(Debug, Clone)]
pub struct ScaledPoly<T: Scalar> {
    arity: Arity,
    scale_exp: i64,
    coeffs: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> PartialEq for ScaledPoly<T> {
    fn eq(&self, other: &Self) -> bool {
        if self.coeffs.is_empty() && other.coeffs.is_empty() {
            return true;
        }
        self.scale_exp == other.scale_exp && self.coeffs == other.coeffs
    }
}

impl<T: Scalar> ScaledPoly<T> {
    pub fn zero(arity: Arity) -> Self {
        ScaledPoly {
            arity,
            scale_exp: 0,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(arity: Arity) -> Self {
        Self::constant(T::one(), 0, arity)
    }

    pub fn constant(c: T, scale_exp: i64, arity: Arity) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert((0, 0), c);
        }
        ScaledPoly {
            arity,
            scale_exp,
            coeffs,
        }
        .normalized()
    }

    /// The monomial `x`.
    pub fn var_x(arity: Arity) -> Self {
        Self::monomial(T::one(), 1, 0, 0, arity).expect("x is valid for any arity")
    }

    /// The monomial `y` (bivariate only).
    pub fn var_y() -> Self {
        Self::monomial(T::one(), 0, 1, 0, Arity::Two).expect("y is valid for arity two")
    }

    pub fn monomial(c: T, dx: u32, dy: u32, scale_exp: i64, arity: Arity) -> Result<Self, AlgError> {
        if arity == Arity::One && dy != 0 {
            return Err(AlgError::ArityMismatch);
        }
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert((dx, dy), c);
        }
        Ok(ScaledPoly {
            arity,
            scale_exp,
            coeffs,
        }
        .normalized())
    }

    pub fn from_terms<I>(arity: Arity, scale_exp: i64, terms: I) -> Result<Self, AlgError>
    where
        I: IntoIterator<Item = ((u32, u32), T)>,
    {
        let mut coeffs: BTreeMap<(u32, u32), T> = BTreeMap::new();
        for ((dx, dy), c) in terms {
            if arity == Arity::One && dy != 0 {
                return Err(AlgError::ArityMismatch);
            }
            let entry = match coeffs.remove(&(dx, dy)) {
                Some(prev) => prev + c,
                None => c,
            };
            if !entry.is_zero() {
                coeffs.insert((dx, dy), entry);
            }
        }
        Ok(ScaledPoly {
            arity,
            scale_exp,
            coeffs,
        }
        .normalized())
    }

    fn normalized(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_zero());
        if self.coeffs.is_empty() {
            self.scale_exp = 0;
        }
        self
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn scale_exp(&self) -> i64 {
        self.scale_exp
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, dx: u32, dy: u32) -> Option<&T> {
        self.coeffs.get(&(dx, dy))
    }

    pub fn degree(&self, var: Var) -> u32 {
        self.coeffs
            .keys()
            .map(|&(dx, dy)| match var {
                Var::X => dx,
                Var::Y => dy,
            })
            .max()
            .unwrap_or(0)
    }

    fn merged_arity(&self, other: &Self) -> Arity {
        if self.arity == Arity::Two || other.arity == Arity::Two {
            Arity::Two
        } else {
            Arity::One
        }
    }

    /// Exact sum. Requires identical scale exponents unless one operand is
    /// zero (zero adopts any scale).
    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgError> {
        if self.is_zero() {
            return Ok(other.clone_with_arity(self.merged_arity(other)));
        }
        if other.is_zero() {
            return Ok(self.clone_with_arity(self.merged_arity(other)));
        }
        if self.scale_exp != other.scale_exp {
            return Err(AlgError::IrrationalScaleMismatch(
                other.scale_exp - self.scale_exp,
            ));
        }
        let mut coeffs = self.coeffs.clone();
        for (&k, c) in &other.coeffs {
            let entry = match coeffs.remove(&k) {
                Some(prev) => prev + c.clone(),
                None => c.clone(),
            };
            if !entry.is_zero() {
                coeffs.insert(k, entry);
            }
        }
        Ok(ScaledPoly {
            arity: self.merged_arity(other),
            scale_exp: self.scale_exp,
            coeffs,
        }
        .normalized())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgError> {
        self.checked_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ScaledPoly {
            arity: self.arity,
            scale_exp: self.scale_exp,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&k, c)| (k, -c.clone()))
                .collect(),
        }
    }

    /// Exact product; scale exponents add. Univariate operands embed into the
    /// bivariate ring when mixed.
    pub fn mul(&self, other: &Self) -> Self {
        let arity = self.merged_arity(other);
        let mut coeffs: BTreeMap<(u32, u32), T> = BTreeMap::new();
        for (&(ax, ay), ac) in &self.coeffs {
            for (&(bx, by), bc) in &other.coeffs {
                let key = (ax + bx, ay + by);
                let term = ac.clone() * bc.clone();
                let entry = match coeffs.remove(&key) {
                    Some(prev) => prev + term,
                    None => term,
                };
                if !entry.is_zero() {
                    coeffs.insert(key, entry);
                }
            }
        }
        ScaledPoly {
            arity,
            scale_exp: self.scale_exp + other.scale_exp,
            coeffs,
        }
        .normalized()
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.arity);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn mul_scalar(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        ScaledPoly {
            arity: self.arity,
            scale_exp: self.scale_exp,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&k, v)| (k, v.clone() * c.clone()))
                .collect(),
        }
        .normalized()
    }

    /// Multiplies the value by `(2π)^{-delta/2}`, i.e. adds `delta` to the
    /// scale exponent of a nonzero polynomial.
    pub fn shift_scale(&self, delta: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        ScaledPoly {
            arity: self.arity,
            scale_exp: self.scale_exp + delta,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Exact formal derivative of the given order; scale is preserved.
    pub fn diff(&self, var: Var, order: u32) -> Self {
        let mut cur = self.clone();
        for _ in 0..order {
            let mut coeffs: BTreeMap<(u32, u32), T> = BTreeMap::new();
            for (&(dx, dy), c) in &cur.coeffs {
                let (d, key) = match var {
                    Var::X => (dx, (dx.wrapping_sub(1), dy)),
                    Var::Y => (dy, (dx, dy.wrapping_sub(1))),
                };
                if d == 0 {
                    continue;
                }
                let term = c.clone() * T::from_int(d as i64);
                if !term.is_zero() {
                    coeffs.insert(key, term);
                }
            }
            cur = ScaledPoly {
                arity: cur.arity,
                scale_exp: cur.scale_exp,
                coeffs,
            }
            .normalized();
        }
        cur
    }

    /// Renames `x` to `y`, turning a univariate polynomial into the same
    /// polynomial in the second variable.
    pub fn promote_to_y(&self) -> Result<Self, AlgError> {
        if self.degree(Var::Y) != 0 {
            return Err(AlgError::ArityMismatch);
        }
        Ok(ScaledPoly {
            arity: Arity::Two,
            scale_exp: self.scale_exp,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(dx, _), c)| ((0, dx), c.clone()))
                .collect(),
        })
    }

    /// Restriction to the diagonal `y = x`, producing a univariate polynomial.
    pub fn diagonal(&self) -> Self {
        let mut coeffs: BTreeMap<(u32, u32), T> = BTreeMap::new();
        for (&(dx, dy), c) in &self.coeffs {
            let key = (dx + dy, 0);
            let entry = match coeffs.remove(&key) {
                Some(prev) => prev + c.clone(),
                None => c.clone(),
            };
            if !entry.is_zero() {
                coeffs.insert(key, entry);
            }
        }
        ScaledPoly {
            arity: Arity::One,
            scale_exp: self.scale_exp,
            coeffs,
        }
        .normalized()
    }

    /// Substitutes `var → -var`.
    pub fn flip_sign(&self, var: Var) -> Self {
        ScaledPoly {
            arity: self.arity,
            scale_exp: self.scale_exp,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(dx, dy), c)| {
                    let odd = match var {
                        Var::X => dx % 2 == 1,
                        Var::Y => dy % 2 == 1,
                    };
                    ((dx, dy), if odd { -c.clone() } else { c.clone() })
                })
                .collect(),
        }
    }

    /// Swaps the two variables.
    pub fn swap_vars(&self) -> Self {
        ScaledPoly {
            arity: self.arity,
            scale_exp: self.scale_exp,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(dx, dy), c)| ((dy, dx), c.clone()))
                .collect(),
        }
    }

    fn clone_with_arity(&self, arity: Arity) -> Self {
        let mut out = self.clone();
        out.arity = arity;
        out
    }

    fn leading(&self) -> Option<(&(u32, u32), &T)> {
        self.coeffs.iter().next_back()
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a
    /// remainder. Used by the fraction-free determinant, whose intermediate
    /// divisions are exact by construction.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        let arity = self.merged_arity(divisor);
        let mut rem = self.clone_with_arity(arity);
        let mut quot = Self::zero(arity);
        quot.scale_exp = self.scale_exp - divisor.scale_exp;
        let (&(ldx, ldy), lc) = divisor.leading().expect("nonzero divisor");
        while !rem.is_zero() {
            let (&(rx, ry), rc) = rem.leading().expect("nonzero remainder");
            if rx < ldx || ry < ldy {
                return None;
            }
            let key = (rx - ldx, ry - ldy);
            let c = rc.clone() / lc.clone();
            let term = ScaledPoly {
                arity,
                scale_exp: rem.scale_exp - divisor.scale_exp,
                coeffs: BTreeMap::from([(key, c.clone())]),
            };
            rem = rem
                .checked_sub(&term.mul(divisor))
                .expect("scales agree in exact division");
            if let Some(prev) = quot.coeffs.remove(&key) {
                let s = prev + c;
                if !s.is_zero() {
                    quot.coeffs.insert(key, s);
                }
            } else {
                quot.coeffs.insert(key, c);
            }
        }
        Some(quot.normalized())
    }

    /// Horner evaluation in double-precision complex arithmetic, including
    /// the `(2π)^{-e/2}` factor. `y` must be supplied iff the polynomial is
    /// bivariate (has any `y` power).
    pub fn eval(&self, x: Complex64, y: Option<Complex64>) -> Result<Complex64, AlgError> {
        if self.arity == Arity::Two && y.is_none() && self.degree(Var::Y) > 0 {
            return Err(AlgError::MissingVariable);
        }
        Ok(self.to_numeric().eval(x, y.unwrap_or(Complex64::new(0.0, 0.0))))
    }

    /// Compiles the polynomial to a dense-in-structure f64 form for repeated
    /// evaluation.
    pub fn to_numeric(&self) -> NumericPoly {
        // Group by descending x power; each group holds descending y powers.
        let mut groups: Vec<(u32, Vec<(u32, f64)>)> = Vec::new();
        for (&(dx, dy), c) in self.coeffs.iter().rev() {
            let cf = c.to_c64().re;
            match groups.last_mut() {
                Some((gx, inner)) if *gx == dx => inner.push((dy, cf)),
                _ => groups.push((dx, vec![(dy, cf)])),
            }
        }
        // BTreeMap reverse iteration gives descending (dx, dy); within a dx
        // group that is descending dy, as Horner wants.
        NumericPoly {
            scale: TWO_PI.powf(-(self.scale_exp as f64) / 2.0),
            groups,
        }
    }
}

/// Compiled double-precision form of a [`ScaledPoly`] for fast repeated
/// Horner evaluation at complex points.
#[derive(Debug, Clone)]
pub struct NumericPoly {
    scale: f64,
    groups: Vec<(u32, Vec<(u32, f64)>)>,
}

impl NumericPoly {
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut prev_dx: Option<u32> = None;
        for (dx, inner) in &self.groups {
            if let Some(p) = prev_dx {
                acc *= x.powu(p - dx);
            }
            let mut inner_acc = Complex64::new(0.0, 0.0);
            let mut prev_dy: Option<u32> = None;
            for &(dy, c) in inner {
                if let Some(p) = prev_dy {
                    inner_acc *= y.powu(p - dy);
                }
                inner_acc += c;
                prev_dy = Some(dy);
            }
            if let Some(p) = prev_dy {
                inner_acc *= y.powu(p);
            }
            acc += inner_acc;
            prev_dx = Some(*dx);
        }
        if let Some(p) = prev_dx {
            acc *= x.powu(p);
        }
        acc * self.scale
    }
}

/// Rectangular matrix of polynomials sharing one arity and scale exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    entries: Vec<ScaledPoly<T>>,
}

impl<T: Scalar> PolyMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<ScaledPoly<T>>) -> Result<Self, AlgError> {
        if entries.len() != rows * cols {
            return Err(AlgError::InvalidShape {
                rows,
                cols,
                got: entries.len(),
            });
        }
        let mut scale: Option<i64> = None;
        let mut arity: Option<Arity> = None;
        for e in &entries {
            match arity {
                Some(a) if a != e.arity() => return Err(AlgError::ArityMismatch),
                Some(_) => {}
                None => arity = Some(e.arity()),
            }
            if e.is_zero() {
                continue;
            }
            match scale {
                Some(s) if s != e.scale_exp() => return Err(AlgError::NonUniformScale),
                Some(_) => {}
                None => scale = Some(e.scale_exp()),
            }
        }
        Ok(PolyMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScaledPoly<T> {
        &self.entries[i * self.cols + j]
    }

    fn arity(&self) -> Arity {
        self.entries
            .iter()
            .map(|e| e.arity())
            .max()
            .unwrap_or(Arity::One)
    }

    /// Exact determinant: cofactor expansion up to 4×4, fraction-free Bareiss
    /// elimination beyond. The empty matrix has determinant 1.
    pub fn det(&self) -> Result<ScaledPoly<T>, AlgError> {
        if self.rows != self.cols {
            return Err(AlgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows <= 4 {
            Ok(self.det_cofactor())
        } else {
            Ok(self.det_bareiss())
        }
    }

    /// Determinant by recursive cofactor expansion along the first row.
    pub fn det_cofactor(&self) -> ScaledPoly<T> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return ScaledPoly::one(self.arity());
        }
        det_cofactor_rec(&self.entries, n)
    }

    /// Determinant by fraction-free Bareiss elimination with row pivoting.
    pub fn det_bareiss(&self) -> ScaledPoly<T> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return ScaledPoly::one(self.arity());
        }
        let mut a: Vec<Vec<ScaledPoly<T>>> = (0..n)
            .map(|i| self.entries[i * n..(i + 1) * n].to_vec())
            .collect();
        let mut sign_flip = false;
        let mut prev = ScaledPoly::one(self.arity());
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign_flip = !sign_flip;
                    }
                    None => return ScaledPoly::zero(self.arity()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j]
                        .mul(&a[k][k])
                        .checked_sub(&a[i][k].mul(&a[k][j]))
                        .expect("uniform scales in elimination");
                    a[i][j] = num
                        .div_exact(&prev)
                        .expect("Bareiss division is exact");
                }
            }
            prev = a[k][k].clone();
        }
        let det = a[n - 1][n - 1].clone();
        if sign_flip {
            det.neg()
        } else {
            det
        }
    }
}

fn det_cofactor_rec<T: Scalar>(entries: &[ScaledPoly<T>], n: usize) -> ScaledPoly<T> {
    if n == 1 {
        return entries[0].clone();
    }
    let arity = entries
        .iter()
        .map(|e| e.arity())
        .max()
        .unwrap_or(Arity::One);
    let mut acc = ScaledPoly::zero(arity);
    for j in 0..n {
        if entries[j].is_zero() {
            continue;
        }
        let minor: Vec<ScaledPoly<T>> = (1..n)
            .flat_map(|i| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(move |c| entries[i * n + c].clone())
            })
            .collect();
        let sub = det_cofactor_rec(&minor, n - 1);
        let term = entries[j].mul(&sub);
        acc = if j % 2 == 0 {
            acc.checked_add(&term)
        } else {
            acc.checked_sub(&term)
        }
        .expect("uniform scales in cofactor expansion");
    }
    acc
}

// ---------------------------------------------------------------------------
// JSON serialization of the exact lane
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermRepr {
    dx: u32,
    dy: u32,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    scale_exp: i64,
    arity: u8,
    terms: Vec<TermRepr>,
}

impl Serialize for ScaledPoly<BigRational> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = PolyRepr {
            scale_exp: self.scale_exp,
            arity: match self.arity {
                Arity::One => 1,
                Arity::Two => 2,
            },
            terms: self
                .coeffs
                .iter()
                .map(|(&(dx, dy), c)| TermRepr {
                    dx,
                    dy,
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ScaledPoly<BigRational> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        let arity = match repr.arity {
            1 => Arity::One,
            2 => Arity::Two,
            a => return Err(D::Error::custom(format!("invalid arity {a}"))),
        };
        let mut terms = Vec::with_capacity(repr.terms.len());
        for t in repr.terms {
            let num = num_bigint::BigInt::from_str(&t.num)
                .map_err(|e| D::Error::custom(format!("bad numerator: {e}")))?;
            let den = num_bigint::BigInt::from_str(&t.den)
                .map_err(|e| D::Error::custom(format!("bad denominator: {e}")))?;
            if !den.is_positive() {
                return Err(D::Error::custom("denominator must be positive"));
            }
            terms.push(((t.dx, t.dy), BigRational::new(num, den)));
        }
        ScaledPoly::from_terms(arity, repr.scale_exp, terms)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Pretty printing of the exact lane
// ---------------------------------------------------------------------------

/// A denominator factor that needs no extra parentheses after `/`.
fn is_atomic_factor(s: &str) -> bool {
    s == "sqrt(2*pi)" || s.chars().all(|c| c.is_ascii_digit()) || s.starts_with("pi")
}

impl fmt::Display for ScaledPoly<BigRational> {
    /// Renders with the rational content folded into a single denominator and
    /// the scale written as powers of `2*pi`, e.g. `(x^2*y^2 + x^2 + y^2 - 1)/(4*pi)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_bigint::BigInt;
        use num_integer::Integer;
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut den_lcm = BigInt::one();
        for c in self.coeffs.values() {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let int_terms: Vec<((u32, u32), BigInt)> = {
            let mut v: Vec<((u32, u32), BigInt)> = self
                .coeffs
                .iter()
                .map(|(&k, c)| {
                    (k, (c * BigRational::from_integer(den_lcm.clone())).to_integer())
                })
                .collect();
            // Paper-style order: descending total degree, then descending x.
            v.sort_by(|a, b| {
                let ta = a.0 .0 + a.0 .1;
                let tb = b.0 .0 + b.0 .1;
                tb.cmp(&ta).then(b.0 .0.cmp(&a.0 .0)).then(b.0 .1.cmp(&a.0 .1))
            });
            v
        };
        let mut num = String::new();
        for (i, ((dx, dy), c)) in int_terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.magnitude();
            if i == 0 {
                if neg {
                    num.push('-');
                }
            } else {
                num.push_str(if neg { " - " } else { " + " });
            }
            let mut mono = String::new();
            if *dx > 0 {
                mono.push('x');
                if *dx > 1 {
                    mono.push_str(&format!("^{dx}"));
                }
            }
            if *dy > 0 {
                if !mono.is_empty() {
                    mono.push('*');
                }
                mono.push('y');
                if *dy > 1 {
                    mono.push_str(&format!("^{dy}"));
                }
            }
            if mono.is_empty() {
                num.push_str(&mag.to_string());
            } else if *mag == num_bigint::BigUint::from(1u32) {
                num.push_str(&mono);
            } else {
                num.push_str(&format!("{mag}*{mono}"));
            }
        }
        // Scale factor (2*pi)^{-e/2}: integer part q and odd remainder r.
        let q = self.scale_exp.div_euclid(2);
        let r = self.scale_exp.rem_euclid(2);
        let mut den_parts: Vec<String> = Vec::new();
        let mut num_prefix: Vec<String> = Vec::new();
        let mut den_int = den_lcm.clone();
        if q > 0 {
            den_int *= BigInt::from(2).pow(q as u32);
            den_parts.push(if q == 1 {
                "pi".to_string()
            } else {
                format!("pi^{q}")
            });
        } else if q < 0 {
            num_prefix.push(if q == -1 {
                "(2*pi)".to_string()
            } else {
                format!("(2*pi)^{}", -q)
            });
        }
        if r == 1 {
            den_parts.push("sqrt(2*pi)".to_string());
        }
        if den_int != BigInt::one() {
            den_parts.insert(0, den_int.to_string());
        }
        let needs_parens = int_terms.len() > 1 && (!den_parts.is_empty() || !num_prefix.is_empty());
        let num_str = if needs_parens { format!("({num})") } else { num };
        let full_num = if num_prefix.is_empty() {
            num_str
        } else {
            format!("{}*{}", num_prefix.join("*"), num_str)
        };
        if den_parts.is_empty() {
            write!(f, "{full_num}")
        } else if den_parts.len() == 1 && is_atomic_factor(&den_parts[0]) {
            write!(f, "{full_num}/{}", den_parts[0])
        } else {
            write!(f, "{full_num}/({})", den_parts.join("*"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactPoly;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn x() -> ExactPoly {
        ExactPoly::var_x(Arity::One)
    }

    #[test]
    fn add_inverse_gives_zero() {
        let sum = x().checked_add(&x().neg()).unwrap();
        assert!(sum.is_zero());
        assert_eq!(sum.scale_exp(), 0);
    }

    #[test]
    fn add_like_terms_at_shared_scale() {
        let one_e1 = ExactPoly::constant(rat(1, 1), 1, Arity::One);
        let sum = one_e1.checked_add(&one_e1).unwrap();
        assert_eq!(sum, ExactPoly::constant(rat(2, 1), 1, Arity::One));
    }

    #[test]
    fn add_rejects_any_scale_mismatch() {
        let a = x().mul(&x()).shift_scale(2);
        let b = ExactPoly::constant(rat(1, 1), 4, Arity::One);
        match a.checked_add(&b) {
            Err(AlgError::IrrationalScaleMismatch(2)) => {}
            other => panic!("expected scale mismatch, got {other:?}"),
        }
        let c = ExactPoly::constant(rat(1, 1), 3, Arity::One);
        assert!(a.checked_add(&c).is_err());
    }

    #[test]
    fn zero_is_scale_polymorphic() {
        let z = ExactPoly::zero(Arity::One);
        let p = x().shift_scale(3);
        assert_eq!(z.checked_add(&p).unwrap(), p);
        assert_eq!(p.checked_sub(&z).unwrap(), p);
        assert_eq!(ExactPoly::zero(Arity::Two), ExactPoly::zero(Arity::One));
    }

    #[test]
    fn mul_adds_scales_and_embeds() {
        let xe1 = x().shift_scale(1);
        let ye1 = ExactPoly::var_y().shift_scale(1);
        let prod = xe1.mul(&ye1);
        assert_eq!(prod.scale_exp(), 2);
        assert_eq!(prod.coeff(1, 1), Some(&rat(1, 1)));
        assert_eq!(prod.arity(), Arity::Two);
    }

    #[test]
    fn mul_hermite_example() {
        // x * (x^2 - 1) = x^3 - x
        let he1 = x();
        let he2 = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), rat(1, 1)), ((0, 0), rat(-1, 1))],
        )
        .unwrap();
        let prod = he1.mul(&he2);
        let expect = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((3, 0), rat(1, 1)), ((1, 0), rat(-1, 1))],
        )
        .unwrap();
        assert_eq!(prod, expect);
    }

    #[test]
    fn mul_by_zero_annihilates() {
        let p = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), rat(1, 1)), ((0, 0), rat(1, 1))],
        )
        .unwrap();
        assert!(p.mul(&ExactPoly::zero(Arity::One)).is_zero());
    }

    #[test]
    fn diff_examples() {
        let p = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((3, 0), rat(1, 1)), ((1, 0), rat(-3, 1))],
        )
        .unwrap();
        let d = p.diff(Var::X, 1);
        let expect = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), rat(3, 1)), ((0, 0), rat(-3, 1))],
        )
        .unwrap();
        assert_eq!(d, expect);

        let q = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), rat(1, 1)), ((0, 0), rat(1, 1))],
        )
        .unwrap();
        assert_eq!(
            q.diff(Var::X, 2),
            ExactPoly::constant(rat(2, 1), 0, Arity::One)
        );
        assert!(q.diff(Var::Y, 1).is_zero());
    }

    #[test]
    fn det_small_examples() {
        // det [[x, 1], [1, 0]] = -1
        let m = PolyMatrix::new(
            2,
            2,
            vec![
                x(),
                ExactPoly::one(Arity::One),
                ExactPoly::one(Arity::One),
                ExactPoly::zero(Arity::One),
            ],
        )
        .unwrap();
        assert_eq!(
            m.det().unwrap(),
            ExactPoly::constant(rat(-1, 1), 0, Arity::One)
        );

        let id3 = PolyMatrix::new(
            3,
            3,
            (0..9)
                .map(|i| {
                    if i % 4 == 0 {
                        ExactPoly::one(Arity::One)
                    } else {
                        ExactPoly::zero(Arity::One)
                    }
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(id3.det().unwrap(), ExactPoly::one(Arity::One));
    }

    #[test]
    fn det_wronskian_of_first_two_hermites() {
        // Wr[He_1, He_2] = He_1 * He_2' - He_1' * He_2 = x^2 + 1
        let he1 = x();
        let he2 = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), rat(1, 1)), ((0, 0), rat(-1, 1))],
        )
        .unwrap();
        let m = PolyMatrix::new(
            2,
            2,
            vec![he1.clone(), he2.clone(), he1.diff(Var::X, 1), he2.diff(Var::X, 1)],
        )
        .unwrap();
        let expect = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), rat(1, 1)), ((0, 0), rat(1, 1))],
        )
        .unwrap();
        assert_eq!(m.det().unwrap(), expect);
    }

    #[test]
    fn det_rejects_non_square() {
        let m = PolyMatrix::new(1, 2, vec![x(), x()]).unwrap();
        assert!(matches!(m.det(), Err(AlgError::NonSquare { .. })));
    }

    #[test]
    fn det_scale_is_row_count_times_entry_scale() {
        let m = PolyMatrix::new(
            2,
            2,
            vec![
                x().shift_scale(1),
                ExactPoly::constant(rat(1, 1), 1, Arity::One),
                ExactPoly::constant(rat(1, 1), 1, Arity::One),
                ExactPoly::constant(rat(2, 1), 1, Arity::One),
            ],
        )
        .unwrap();
        let det = m.det().unwrap();
        assert_eq!(det.scale_exp(), 2);
        let expect = ExactPoly::from_terms(
            Arity::One,
            2,
            vec![((1, 0), rat(2, 1)), ((0, 0), rat(-1, 1))],
        )
        .unwrap();
        assert_eq!(det, expect);
    }

    #[test]
    fn matrix_rejects_mixed_scale_or_arity() {
        assert!(matches!(
            PolyMatrix::new(1, 2, vec![x(), x().shift_scale(1)]),
            Err(AlgError::NonUniformScale)
        ));
        assert!(matches!(
            PolyMatrix::new(1, 2, vec![x(), ExactPoly::var_y()]),
            Err(AlgError::ArityMismatch)
        ));
    }

    #[test]
    fn eval_examples() {
        let p = ExactPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), rat(1, 1)), ((0, 0), rat(1, 1))],
        )
        .unwrap();
        let at_i = p.eval(Complex64::new(0.0, 1.0), None).unwrap();
        assert!(at_i.norm() < 1e-15);

        let c = ExactPoly::constant(rat(1, 1), 2, Arity::One);
        let v = c.eval(Complex64::new(5.0, 2.0), None).unwrap();
        assert!((v.re - 1.0 / TWO_PI).abs() < 1e-15);

        let xy = x().mul(&ExactPoly::var_y());
        let v = xy
            .eval(Complex64::new(2.0, 0.0), Some(Complex64::new(3.0, 0.0)))
            .unwrap();
        assert!((v.re - 6.0).abs() < 1e-12);

        assert!(matches!(
            xy.eval(Complex64::new(1.0, 0.0), None),
            Err(AlgError::MissingVariable)
        ));
    }

    #[test]
    fn display_matches_paper_typography() {
        // (x^2*y^2 + x^2 + y^2 - 1)/2 at e=2 prints with a 4*pi denominator.
        let p = ExactPoly::from_terms(
            Arity::Two,
            2,
            vec![
                ((2, 2), rat(1, 2)),
                ((2, 0), rat(1, 2)),
                ((0, 2), rat(1, 2)),
                ((0, 0), rat(-1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(p.to_string(), "(x^2*y^2 + x^2 + y^2 - 1)/(4*pi)");
        let q0 = ExactPoly::constant(rat(1, 1), 1, Arity::Two);
        assert_eq!(q0.to_string(), "1/sqrt(2*pi)");
        let q1 = ExactPoly::from_terms(Arity::Two, 1, vec![((1, 1), rat(-1, 1))]).unwrap();
        assert_eq!(q1.to_string(), "-x*y/sqrt(2*pi)");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let p = ExactPoly::from_terms(
            Arity::Two,
            3,
            vec![((0, 0), rat(-7, 3)), ((4, 1), rat(22, 7))],
        )
        .unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: ExactPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
        assert_eq!(s, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn float_lane_evaluates() {
        let p = crate::FloatPoly::from_terms(
            Arity::One,
            0,
            vec![((2, 0), 1.0f64), ((0, 0), 0.5f64)],
        )
        .unwrap();
        let v = p.eval(Complex64::new(2.0, 0.0), None).unwrap();
        assert!((v.re - 4.5).abs() < 1e-15);
    }

    // ------------------------------------------------------------------
    // Property tests
    // ------------------------------------------------------------------

    fn arb_poly(max_deg: u32, arity: Arity) -> impl Strategy<Value = ExactPoly> {
        let term = (
            0..=max_deg,
            if arity == Arity::Two { 0..=max_deg } else { 0..=0u32 },
            -100i64..=100,
        );
        proptest::collection::vec(term, 0..8).prop_map(move |terms| {
            ExactPoly::from_terms(
                arity,
                0,
                terms
                    .into_iter()
                    .map(|(dx, dy, c)| ((dx, dy), BigRational::from_integer(c.into()))),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(
            a in arb_poly(12, Arity::Two),
            b in arb_poly(12, Arity::Two),
            c in arb_poly(12, Arity::Two),
        ) {
            prop_assert_eq!(
                a.checked_add(&b).unwrap(),
                b.checked_add(&a).unwrap()
            );
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(
                a.checked_add(&b).unwrap().checked_add(&c).unwrap(),
                a.checked_add(&b.checked_add(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(
                a.mul(&b.checked_add(&c).unwrap()),
                a.mul(&b).checked_add(&a.mul(&c)).unwrap()
            );
        }

        #[test]
        fn det_is_alternating_in_rows(
            a in arb_poly(3, Arity::One), b in arb_poly(3, Arity::One),
            c in arb_poly(3, Arity::One), d in arb_poly(3, Arity::One),
            e in arb_poly(3, Arity::One), f in arb_poly(3, Arity::One),
            g in arb_poly(3, Arity::One), h in arb_poly(3, Arity::One),
            i in arb_poly(3, Arity::One),
        ) {
            let m = PolyMatrix::new(3, 3, vec![
                a.clone(), b.clone(), c.clone(),
                d.clone(), e.clone(), f.clone(),
                g.clone(), h.clone(), i.clone(),
            ]).unwrap();
            let swapped = PolyMatrix::new(3, 3, vec![
                d, e, f,
                a, b, c,
                g, h, i,
            ]).unwrap();
            prop_assert_eq!(m.det().unwrap(), swapped.det().unwrap().neg());
        }

        #[test]
        fn det_is_multilinear_in_rows(
            a in arb_poly(2, Arity::One), b in arb_poly(2, Arity::One),
            c in arb_poly(2, Arity::One), d in arb_poly(2, Arity::One),
            e in arb_poly(2, Arity::One), f in arb_poly(2, Arity::One),
            g in arb_poly(2, Arity::One), h in arb_poly(2, Arity::One),
            i in arb_poly(2, Arity::One),
            extra in arb_poly(2, Arity::One),
            scale in -20i64..=20,
        ) {
            let det_with_row0 = |r0: &ExactPoly, r1: &ExactPoly, r2: &ExactPoly| {
                PolyMatrix::new(3, 3, vec![
                    r0.clone(), r1.clone(), r2.clone(),
                    d.clone(), e.clone(), f.clone(),
                    g.clone(), h.clone(), i.clone(),
                ]).unwrap().det().unwrap()
            };
            // Scaling one row scales the determinant.
            let k = BigRational::from_integer(scale.into());
            prop_assert_eq!(
                det_with_row0(&a.mul_scalar(&k), &b.mul_scalar(&k), &c.mul_scalar(&k)),
                det_with_row0(&a, &b, &c).mul_scalar(&k)
            );
            // Additivity in one full row: det(u+v, …) = det(u, …) + det(v, …).
            let sum_row = det_with_row0(
                &a.checked_add(&extra).unwrap(),
                &b.checked_add(&extra).unwrap(),
                &c.checked_add(&extra).unwrap(),
            );
            prop_assert_eq!(
                sum_row,
                det_with_row0(&a, &b, &c)
                    .checked_add(&det_with_row0(&extra, &extra, &extra))
                    .unwrap()
            );
        }

        #[test]
        fn eval_is_multiplicative(
            a in arb_poly(6, Arity::Two),
            b in arb_poly(6, Arity::Two),
            xr in -2.0f64..2.0, xi in -2.0f64..2.0,
            yr in -2.0f64..2.0, yi in -2.0f64..2.0,
        ) {
            let x = Complex64::new(xr, xi);
            let y = Complex64::new(yr, yi);
            let lhs = a.mul(&b).eval(x, Some(y)).unwrap();
            let rhs = a.eval(x, Some(y)).unwrap() * b.eval(x, Some(y)).unwrap();
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            prop_assert!((lhs - rhs).norm() / scale < 1e-12);
        }

        #[test]
        fn bareiss_matches_cofactor(
            entries in proptest::collection::vec(arb_poly(2, Arity::One), 16),
        ) {
            for n in 1usize..=4 {
                let m = PolyMatrix::new(
                    n, n,
                    entries.iter().take(n * n).cloned().collect(),
                ).unwrap();
                prop_assert_eq!(m.det_bareiss(), m.det_cofactor());
            }
        }

        #[test]
        fn bareiss_matches_cofactor_5x5(
            entries in proptest::collection::vec(arb_poly(1, Arity::One), 25),
        ) {
            let m = PolyMatrix::new(5, 5, entries).unwrap();
            prop_assert_eq!(m.det_bareiss(), m.det_cofactor());
        }

        #[test]
        fn json_round_trip_property(a in arb_poly(8, Arity::Two)) {
            let s = serde_json::to_string(&a).unwrap();
            let back: ExactPoly = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(a, back);
        }
    }
}

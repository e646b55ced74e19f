//! Level sequences σ, Wronskians of Hermite polynomials, exceptional Hermite
//! pairs, and the polynomial Darboux operator `L̂f = Wr[He_σ ∪ {f}]/Wr[He_σ]`.

use crate::hermite::{factorial, hermite};
use crate::poly::{AlgError, Arity, PolyMatrix, Var};
use crate::ExactPoly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("sequence must be strictly increasing")]
    NotStrictlyIncreasing,
}

/// Strictly increasing sequence of oscillator levels deleted by the Darboux
/// chain.
///
/// A Krein-Adler sequence decomposes into consecutive pairs
/// `{k₁, k₁+1, …, k_M, k_M+1}`; only those produce potentials that are
/// regular on the whole real line. Non-Krein-Adler sequences are accepted at
/// the polynomial level and refused by potential-dependent operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSequence {
    levels: Vec<u32>,
}

impl LevelSequence {
    pub fn new(levels: Vec<u32>) -> Result<Self, SequenceError> {
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SequenceError::NotStrictlyIncreasing);
        }
        Ok(LevelSequence { levels })
    }

    pub fn empty() -> Self {
        LevelSequence { levels: Vec::new() }
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn last(&self) -> Option<u32> {
        self.levels.last().copied()
    }

    pub fn contains(&self, n: u32) -> bool {
        self.levels.binary_search(&n).is_ok()
    }

    /// True iff the levels split into consecutive pairs `{k, k+1}`.
    /// The empty sequence is trivially Krein-Adler (M = 0).
    pub fn is_krein_adler(&self) -> bool {
        self.levels.len() % 2 == 0
            && self
                .levels
                .chunks_exact(2)
                .all(|pair| pair[1] == pair[0] + 1)
    }

    /// Number of deleted pairs `M` (meaningful for Krein-Adler sequences).
    pub fn pair_count(&self) -> usize {
        self.levels.len() / 2
    }

    /// Degree of `Wr[He_σ]`: `Σ_n (σ[n] − n)` with 0-based `n`.
    pub fn wronskian_degree(&self) -> u32 {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, &l)| l - i as u32)
            .sum()
    }

    /// Degree of the lowest exceptional polynomial, `deg Ŵ − |σ|`. Controls
    /// the sign pattern of the connection polynomials under `x → −x`; only
    /// its parity is meaningful when `0 ∈ σ` (the value goes negative).
    pub fn base_parity_degree(&self) -> i64 {
        self.wronskian_degree() as i64 - self.levels.len() as i64
    }

    /// Formal squared-normalization denominator `Π_j (σ[j] − n)`; zero iff
    /// `n ∈ σ`. For even-length sequences (all Krein-Adler ones) this equals
    /// `Π_j (n − σ[j])`; for odd lengths the sign follows the formally
    /// normalized convention under which the three-term identity for σ={1}
    /// has constant term `+1/√(2π)`.
    pub fn norm_product(&self, n: u32) -> BigInt {
        self.levels
            .iter()
            .map(|&l| BigInt::from(l as i64 - n as i64))
            .product()
    }

    /// `Π_j σ[j]!`.
    pub fn factorial_product(&self) -> BigInt {
        self.levels.iter().map(|&l| factorial(l)).product()
    }

    /// σ with the element at `idx` removed.
    pub fn without_index(&self, idx: usize) -> LevelSequence {
        let mut levels = self.levels.clone();
        levels.remove(idx);
        LevelSequence { levels }
    }

    /// σ ∪ {n}, sorted; `None` if `n` is already present.
    pub fn with_level(&self, n: u32) -> Option<LevelSequence> {
        if self.contains(n) {
            return None;
        }
        let mut levels = self.levels.clone();
        let pos = levels.partition_point(|&l| l < n);
        levels.insert(pos, n);
        Some(LevelSequence { levels })
    }
}

impl std::fmt::Display for LevelSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{{{}}}",
            self.levels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Wronskian matrix of the given functions: row `i` holds the `i`-th
/// derivatives, columns follow the input order.
pub fn wronskian_matrix(funcs: &[ExactPoly]) -> PolyMatrix<BigRational> {
    let n = funcs.len();
    let entries: Vec<ExactPoly> = (0..n)
        .flat_map(|order| funcs.iter().map(move |f| f.diff(Var::X, order as u32)))
        .collect();
    PolyMatrix::new(n, n, entries).expect("square matrix of uniform scale")
}

/// Exact `Ŵ = Wr[He_σ]`. The empty sequence gives 1.
pub fn wronskian_of_levels(sigma: &LevelSequence) -> ExactPoly {
    let funcs: Vec<ExactPoly> = sigma.levels().iter().map(|&l| hermite(l)).collect();
    wronskian_matrix(&funcs).det().expect("square by construction")
}

/// `Ŵ` together with the deleted-row Wronskians `Ŵ_n = Wr[He_{σ∖σ[n]}]`.
#[derive(Debug, Clone)]
pub struct WronskianSet {
    pub sigma: LevelSequence,
    pub w_hat: ExactPoly,
    pub w_hat_minus: Vec<ExactPoly>,
}

impl WronskianSet {
    pub fn build(sigma: &LevelSequence) -> Self {
        let w_hat = wronskian_of_levels(sigma);
        let w_hat_minus = (0..sigma.len())
            .map(|i| wronskian_of_levels(&sigma.without_index(i)))
            .collect();
        WronskianSet {
            sigma: sigma.clone(),
            w_hat,
            w_hat_minus,
        }
    }
}

/// Exact paired product `h_n^σ(x)·h_n^σ(y)` of formally normalized
/// exceptional Hermite polynomials, at scale exponent `|σ|+1`:
///
/// `N_n² · Π_j p_{σ[j]}² · p_n² · Wr[He_{σ∪n}](x) · Wr[He_{σ∪n}](y)`
///
/// where `N_n² = 1/Π_j(n−σ[j])` and `p_k² = 1/(k!·√(2π))`. For `n ∈ σ` the
/// normalization vanishes and the zero polynomial is returned.
pub fn xhermite_pair(sigma: &LevelSequence, n: u32) -> ExactPoly {
    let union = match sigma.with_level(n) {
        Some(u) => u,
        None => return ExactPoly::zero(Arity::Two),
    };
    let w = wronskian_of_levels(&union);
    let denom = sigma.norm_product(n) * sigma.factorial_product() * factorial(n);
    debug_assert!(!denom.is_zero());
    let prefactor = BigRational::new(BigInt::one(), denom);
    w.mul(&w.promote_to_y().expect("univariate Wronskian"))
        .mul_scalar(&prefactor)
        .shift_scale(sigma.len() as i64 + 1)
}

/// The polynomial Darboux operator applied to `f`, as an exact rational
/// function `(Wr[He_σ ∪ {f}], Wr[He_σ])`. `f` is appended as the last
/// Wronskian column and must be univariate.
pub fn apply_lhat(sigma: &LevelSequence, f: &ExactPoly) -> Result<(ExactPoly, ExactPoly), AlgError> {
    if f.degree(Var::Y) != 0 {
        return Err(AlgError::ArityMismatch);
    }
    // Normalize arity and factor the scale out of the matrix (the operator
    // is linear, so a (2π)^{-e/2} prefactor moves to the numerator).
    let f1 = ExactPoly::from_terms(Arity::One, 0, f.terms().map(|(&k, c)| (k, c.clone())))?;
    let mut funcs: Vec<ExactPoly> = sigma.levels().iter().map(|&l| hermite(l)).collect();
    funcs.push(f1);
    let num = wronskian_matrix(&funcs).det()?.shift_scale(f.scale_exp());
    Ok((num, wronskian_of_levels(sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::TWO_PI;
    use num_complex::Complex64;

    fn seq(levels: &[u32]) -> LevelSequence {
        LevelSequence::new(levels.to_vec()).unwrap()
    }

    fn poly1(terms: &[(u32, i64)]) -> ExactPoly {
        ExactPoly::from_terms(
            Arity::One,
            0,
            terms
                .iter()
                .map(|&(d, c)| ((d, 0), BigRational::from_integer(c.into()))),
        )
        .unwrap()
    }

    #[test]
    fn sequence_validation() {
        assert!(LevelSequence::new(vec![2, 1]).is_err());
        assert!(LevelSequence::new(vec![1, 1]).is_err());
        assert!(LevelSequence::new(vec![1, 2]).is_ok());
        assert!(LevelSequence::new(vec![]).is_ok());
    }

    #[test]
    fn krein_adler_predicate() {
        assert!(seq(&[1, 2]).is_krein_adler());
        assert!(seq(&[2, 3]).is_krein_adler());
        assert!(seq(&[1, 2, 3, 4]).is_krein_adler());
        assert!(seq(&[2, 3, 5, 6]).is_krein_adler());
        assert!(LevelSequence::empty().is_krein_adler());
        assert!(!seq(&[1]).is_krein_adler());
        assert!(!seq(&[1, 3]).is_krein_adler());
        assert!(!seq(&[1, 2, 4]).is_krein_adler());
    }

    #[test]
    fn wronskian_of_12_and_23() {
        assert_eq!(wronskian_of_levels(&seq(&[1, 2])), poly1(&[(2, 1), (0, 1)]));
        assert_eq!(wronskian_of_levels(&seq(&[2, 3])), poly1(&[(4, 1), (0, 3)]));
    }

    #[test]
    fn empty_wronskian_is_one() {
        assert_eq!(
            wronskian_of_levels(&LevelSequence::empty()),
            ExactPoly::one(Arity::One)
        );
    }

    #[test]
    fn wronskian_degree_formula() {
        for levels in [
            vec![1, 2],
            vec![2, 3],
            vec![3, 4],
            vec![4, 5],
            vec![1, 2, 3, 4],
            vec![2, 3, 5, 6],
            vec![1],
            vec![2],
            vec![1, 3],
            vec![0, 2, 5],
        ] {
            let s = seq(&levels);
            let w = wronskian_of_levels(&s);
            assert_eq!(
                w.degree(Var::X),
                s.wronskian_degree(),
                "degree formula for {s}"
            );
        }
    }

    #[test]
    fn krein_adler_wronskians_are_even_polynomials() {
        for levels in [vec![1, 2], vec![2, 3], vec![3, 4], vec![1, 2, 3, 4], vec![2, 3, 5, 6]] {
            let w = wronskian_of_levels(&seq(&levels));
            for (&(dx, _), _) in w.terms() {
                assert_eq!(dx % 2, 0, "odd power in Wronskian of {levels:?}");
            }
        }
    }

    #[test]
    fn krein_adler_wronskians_are_nodeless_on_grid() {
        for levels in [vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 5], vec![1, 2, 3, 4], vec![2, 3, 5, 6]] {
            let w = wronskian_of_levels(&seq(&levels)).to_numeric();
            let zero_y = Complex64::new(0.0, 0.0);
            for i in 0..4001 {
                let x = -20.0 + 40.0 * (i as f64) / 4000.0;
                let v = w.eval(Complex64::new(x, 0.0), zero_y);
                assert!(
                    v.re.abs() > 1e-9,
                    "Wronskian of {levels:?} vanishes near x={x}"
                );
            }
        }
    }

    #[test]
    fn wronskian_set_carries_deleted_row_wronskians() {
        let s = seq(&[2, 3, 5, 6]);
        let set = WronskianSet::build(&s);
        assert_eq!(set.w_hat, wronskian_of_levels(&s));
        assert_eq!(set.w_hat_minus.len(), 4);
        for (i, w_minus) in set.w_hat_minus.iter().enumerate() {
            let sub = s.without_index(i);
            assert_eq!(w_minus.degree(Var::X), sub.wronskian_degree());
            assert_eq!(*w_minus, wronskian_of_levels(&sub));
        }
    }

    #[test]
    fn pair_vanishes_on_deleted_levels() {
        let s = seq(&[1, 2]);
        assert!(xhermite_pair(&s, 1).is_zero());
        assert!(xhermite_pair(&s, 2).is_zero());
        assert!(!xhermite_pair(&s, 0).is_zero());
    }

    #[test]
    fn pair_is_symmetric_in_x_and_y() {
        for (levels, ns) in [(vec![1, 2], 0..6), (vec![2, 3], 0..6), (vec![1], 0..6)] {
            let s = seq(&levels);
            for n in ns {
                let p = xhermite_pair(&s, n);
                assert_eq!(p, p.swap_vars(), "pair symmetry for {s}, n={n}");
            }
        }
    }

    #[test]
    fn pair_scale_exponent_is_sigma_len_plus_one() {
        let p = xhermite_pair(&seq(&[1, 2]), 0);
        assert_eq!(p.scale_exp(), 3);
        let p = xhermite_pair(&seq(&[1]), 0);
        assert_eq!(p.scale_exp(), 2);
    }

    #[test]
    fn pair_numeric_cross_check_sigma_12_n0() {
        // h_0^{1,2}(x)h_0^{1,2}(y) = (1/2)·(1/2)·W(x)W(y)·(2π)^{-3/2}, W = 2
        let p = xhermite_pair(&seq(&[1, 2]), 0);
        let v = p
            .eval(Complex64::new(0.7, 0.0), Some(Complex64::new(-0.4, 0.0)))
            .unwrap();
        let expect = TWO_PI.powf(-1.5);
        assert!((v.re - expect).abs() < 1e-14);
    }

    #[test]
    fn lhat_annihilates_deleted_levels() {
        let s = seq(&[1, 2]);
        for &l in s.levels() {
            let (num, _) = apply_lhat(&s, &hermite(l)).unwrap();
            assert!(num.is_zero(), "L̂He_{l} must vanish");
        }
    }

    #[test]
    fn lhat_on_empty_sequence_is_identity() {
        let f = poly1(&[(3, 2), (0, -5)]);
        let (num, den) = apply_lhat(&LevelSequence::empty(), &f).unwrap();
        assert_eq!(num, f);
        assert_eq!(den, ExactPoly::one(Arity::One));
    }

    #[test]
    fn lhat_example_sigma_12_he0() {
        let s = seq(&[1, 2]);
        let (num, den) = apply_lhat(&s, &hermite(0)).unwrap();
        assert_eq!(num, ExactPoly::constant(BigRational::from_integer(2.into()), 0, Arity::One));
        assert_eq!(den, poly1(&[(2, 1), (0, 1)]));
    }
}

//! Fraction-free Gauss-Jordan elimination over the integers.
//!
//! Small systems run in checked `i128`; on overflow the caller retries with
//! `BigInt`. Every intermediate value is a minor of the input matrix, so all
//! divisions are exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Integer arithmetic that may overflow.
pub trait ExactInt: Clone + PartialEq + PartialOrd + std::fmt::Debug {
    fn from_i64(v: i64) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Option<Self>;
    fn add(&self, rhs: &Self) -> Option<Self>;
    fn sub(&self, rhs: &Self) -> Option<Self>;
    fn div_exact(&self, rhs: &Self) -> Self;
    fn to_bigint(&self) -> BigInt;
    fn to_f64(&self) -> f64;
}

impl ExactInt for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn mul(&self, rhs: &Self) -> Option<Self> {
        self.checked_mul(*rhs)
    }
    fn add(&self, rhs: &Self) -> Option<Self> {
        self.checked_add(*rhs)
    }
    fn sub(&self, rhs: &Self) -> Option<Self> {
        self.checked_sub(*rhs)
    }
    fn div_exact(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self % rhs, 0);
        self / rhs
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl ExactInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Option<Self> {
        Some(self * rhs)
    }
    fn add(&self, rhs: &Self) -> Option<Self> {
        Some(self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Option<Self> {
        Some(self - rhs)
    }
    fn div_exact(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Solution of `A x = b` as `x_i = numerators[i] / denominator`, with
/// `denominator > 0` (not reduced).
#[derive(Debug, Clone, PartialEq)]
pub struct IntSolution<T> {
    pub numerators: Vec<T>,
    pub denominator: T,
}

impl<T: ExactInt> IntSolution<T> {
    pub fn to_rationals(&self) -> Vec<BigRational> {
        let den = self.denominator.to_bigint();
        self.numerators
            .iter()
            .map(|p| BigRational::new(p.to_bigint(), den.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solve<T> {
    Unique(IntSolution<T>),
    Singular,
}

/// Solves the `k x k` system given as a row-major augmented matrix
/// `[A | b]` of shape `k x (k + 1)`. Returns `None` on arithmetic overflow.
pub fn solve_augmented<T: ExactInt>(mut aug: Vec<T>, k: usize) -> Option<Solve<T>> {
    let w = k + 1;
    debug_assert_eq!(aug.len(), k * w);
    let mut prev = T::one();
    for col in 0..k {
        let Some(p) = (col..k).find(|&r| !aug[r * w + col].is_zero()) else {
            return Some(Solve::Singular);
        };
        if p != col {
            for j in 0..w {
                aug.swap(p * w + j, col * w + j);
            }
        }
        let pivot = aug[col * w + col].clone();
        for i in (0..k).filter(|&i| i != col) {
            let factor = aug[i * w + col].clone();
            for j in 0..w {
                let lhs = pivot.mul(&aug[i * w + j])?;
                let rhs = factor.mul(&aug[col * w + j])?;
                aug[i * w + j] = lhs.sub(&rhs)?.div_exact(&prev);
            }
        }
        prev = pivot;
    }
    // every diagonal entry now equals det(A) up to the row-swap sign, which
    // cancels in x_i = aug[i][k] / aug[i][i]
    let det = aug[(k - 1) * w + (k - 1)].clone();
    let flip = det.is_negative();
    let mut numerators = Vec::with_capacity(k);
    for i in 0..k {
        debug_assert!(aug[i * w + i] == det);
        let v = aug[i * w + k].clone();
        numerators.push(if flip { v.neg() } else { v });
    }
    let denominator = if flip { det.neg() } else { det };
    Some(Solve::Unique(IntSolution {
        numerators,
        denominator,
    }))
}

/// Exact rational solve of an integer system, widening to `BigInt` when
/// `i128` overflows.
pub fn solve_integer_system(matrix: &[Vec<i64>], rhs: &[i64]) -> Option<Vec<BigRational>> {
    let k = rhs.len();
    let aug: Vec<i128> = matrix
        .iter()
        .zip(rhs)
        .flat_map(|(row, &b)| row.iter().copied().chain(std::iter::once(b)).map(|x| x as i128))
        .collect();
    let widened = || aug.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    let solved = match solve_augmented(aug.clone(), k) {
        Some(Solve::Unique(sol)) => return Some(sol.to_rationals()),
        Some(Solve::Singular) => return None,
        None => solve_augmented(widened(), k),
    };
    match solved {
        Some(Solve::Unique(sol)) => Some(sol.to_rationals()),
        _ => None,
    }
}

/// `p/q` rendering of a rational, or `p` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    /// Textbook Gaussian elimination over rationals.
    fn naive_solve(matrix: &[Vec<i64>], rhs: &[i64]) -> Option<Vec<BigRational>> {
        let k = rhs.len();
        let mut a: Vec<Vec<BigRational>> = matrix
            .iter()
            .zip(rhs)
            .map(|(row, &b)| {
                row.iter()
                    .chain(std::iter::once(&b))
                    .map(|&x| BigRational::from_integer(x.into()))
                    .collect()
            })
            .collect();
        for col in 0..k {
            let p = (col..k).find(|&r| !a[r][col].is_zero())?;
            a.swap(p, col);
            for i in 0..k {
                if i != col {
                    let f = &a[i][col] / &a[col][col];
                    for j in 0..=k {
                        let t = &f * &a[col][j];
                        a[i][j] -= t;
                    }
                }
            }
        }
        Some((0..k).map(|i| &a[i][k] / &a[i][i]).collect())
    }

    #[test]
    fn two_by_two() {
        let x = solve_integer_system(&[vec![2, 1], vec![1, 3]], &[3, 5]).unwrap();
        assert_eq!(x, vec![ratio(4, 5), ratio(7, 5)]);
    }

    #[test]
    fn needs_pivoting() {
        let x = solve_integer_system(&[vec![0, 1], vec![1, 0]], &[2, 3]).unwrap();
        assert_eq!(x, vec![ratio(3, 1), ratio(2, 1)]);
    }

    #[test]
    fn singular_is_reported() {
        assert!(solve_integer_system(&[vec![1, 2], vec![2, 4]], &[1, 2]).is_none());
    }

    #[test]
    fn bigint_fallback_matches() {
        // Hilbert-like integer matrix large enough to overflow i128 minors
        let k = 24;
        let m: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| 1_000_003 * ((i * j) % 17) as i64 + (i == j) as i64).collect())
            .collect();
        let b: Vec<i64> = (0..k as i64).collect();
        assert_eq!(solve_integer_system(&m, &b), naive_solve(&m, &b));
    }

    #[test]
    fn format() {
        assert_eq!(format_rational(&ratio(2, 4)), "1/2");
        assert_eq!(format_rational(&ratio(-6, 3)), "-2");
    }

    proptest! {
        #[test]
        fn agrees_with_naive_elimination(
            k in 1usize..6,
            entries in proptest::collection::vec(-6i64..7, 42),
        ) {
            let m: Vec<Vec<i64>> = (0..k).map(|i| entries[i * k..(i + 1) * k].to_vec()).collect();
            let b = entries[36..36 + k].to_vec();
            prop_assert_eq!(solve_integer_system(&m, &b), naive_solve(&m, &b));
        }
    }
}

//! Exact rational scalars, matrices, polynomials, and linear solving.

mod matrix;
mod poly;
mod rational;

pub use matrix::{RatMatrix, SingularMatrix};
pub use poly::RatPoly;
pub use rational::{rat, Rational};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Exact binomial coefficient; zero outside `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> Rational {
    if k < 0 || k > n {
        return Rational::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    Rational::new(num, den)
}

/// Binomial coefficient as `BigInt` for index arithmetic.
pub fn binom_int(n: i64, k: i64) -> BigInt {
    let b = binom(n, k);
    debug_assert!(b.is_integer());
    if b.is_zero() {
        BigInt::zero()
    } else {
        b.numer().clone()
    }
}

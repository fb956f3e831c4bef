//! Exact Bernoulli numbers and polynomials (B_1 = -1/2, B_2 = +1/6).

use crate::error::{Result, SalError};
use crate::scalar::Real;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::OnceLock;

/// Largest index held in the table.
pub const BERNOULLI_CAPACITY: usize = 240;

fn table() -> &'static Vec<BigRational> {
    static T: OnceLock<Vec<BigRational>> = OnceLock::new();
    T.get_or_init(|| {
        let n = BERNOULLI_CAPACITY;
        let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
        b.push(BigRational::one());
        for k in 1..=n {
            if k > 1 && k % 2 == 1 {
                b.push(BigRational::zero());
                continue;
            }
            // sum_{j=0}^{k} C(k+1, j) B_j = 0
            let mut s = BigRational::zero();
            let mut binom = BigInt::one();
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    s += BigRational::from_integer(binom.clone()) * bj;
                }
                binom = binom * BigInt::from(k + 1 - j) / BigInt::from(j + 1);
            }
            b.push(-s / BigRational::from_integer(BigInt::from(k + 1)));
        }
        b
    })
}

/// Exact B_k.
pub fn bernoulli_number(k: usize) -> Result<BigRational> {
    if k > BERNOULLI_CAPACITY {
        return Err(SalError::InvalidArgument(format!("Bernoulli index {k} exceeds table capacity {BERNOULLI_CAPACITY}")));
    }
    Ok(table()[k].clone())
}

/// B_k as a float.
pub fn bernoulli_f64(k: usize) -> f64 {
    table()[k].to_f64().unwrap_or(f64::NAN)
}

pub fn binomial_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for j in 0..k {
        r = r * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    r
}

/// Coefficients of B_k(x) = sum_j C(k,j) B_{k-j} x^j, lowest degree first.
pub fn bernoulli_poly_coeffs(k: usize) -> Result<Vec<BigRational>> {
    (0..=k)
        .map(|j| Ok(BigRational::from_integer(binomial_big(k, j)) * bernoulli_number(k - j)?))
        .collect()
}

/// Exact B_k(x) at a rational point.
pub fn bernoulli_poly_exact(k: usize, x: &BigRational) -> Result<BigRational> {
    let cs = bernoulli_poly_coeffs(k)?;
    let mut acc = BigRational::zero();
    for c in cs.iter().rev() {
        acc = acc * x + c;
    }
    Ok(acc)
}

/// B_k(x) in floating point (Horner on exact coefficients).
pub fn bernoulli_poly<T: Real>(k: usize, x: T) -> Result<T> {
    let cs = bernoulli_poly_coeffs(k)?;
    let mut acc = T::zero();
    for c in cs.iter().rev() {
        acc = acc * x + T::of(c.to_f64().unwrap_or(f64::NAN));
    }
    Ok(acc)
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(bernoulli_number(0).unwrap(), rational(1, 1));
        assert_eq!(bernoulli_number(1).unwrap(), rational(-1, 2));
        assert_eq!(bernoulli_number(2).unwrap(), rational(1, 6));
        assert_eq!(bernoulli_number(4).unwrap(), rational(-1, 30));
        assert_eq!(bernoulli_number(6).unwrap(), rational(1, 42));
        assert_eq!(bernoulli_number(12).unwrap(), rational(-691, 2730));
        assert!(bernoulli_number(61).unwrap().is_zero());
    }

    #[test]
    fn capacity_error() {
        assert!(bernoulli_number(BERNOULLI_CAPACITY + 1).is_err());
    }

    #[test]
    fn polynomial_identities() {
        // B_j(1/2) = (2^{1-j} - 1) B_j and integral over [0,1] vanishes.
        for j in 1..=12usize {
            let half = rational(1, 2);
            let v = bernoulli_poly_exact(j, &half).unwrap();
            let expect = (rational(2, 1) * rational(1, 1 << j) - rational(1, 1)) * bernoulli_number(j).unwrap();
            assert_eq!(v, expect);
            let cs = bernoulli_poly_coeffs(j).unwrap();
            let integral: BigRational = cs
                .iter()
                .enumerate()
                .map(|(i, c)| c / BigRational::from_integer(BigInt::from(i + 1)))
                .sum();
            assert!(integral.is_zero());
        }
    }

    #[test]
    fn derivative_rule() {
        for j in 1..=12usize {
            let p = bernoulli_poly_coeffs(j).unwrap();
            let q = bernoulli_poly_coeffs(j - 1).unwrap();
            for i in 1..p.len() {
                let d = &p[i] * BigRational::from_integer(BigInt::from(i));
                assert_eq!(d, &q[i - 1] * BigRational::from_integer(BigInt::from(j)));
            }
        }
    }
}

//! Deterministic sample points for numeric residual checks.
//!
//! A Halton sequence per coordinate (base = the coordinate's prime) gives
//! well-spread points with exact rational values, so residuals evaluated on
//! them stay exact in rational mode. The seed only offsets the global index,
//! keeping every run reproducible from the manifest alone.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::{rational_to_f64, NumericValue, Point};

/// How numeric checks run: exact rational arithmetic, or plain doubles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Rational,
    Float,
}

#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub points: Vec<Point>,
    pub mode: EvalMode,
}

impl SamplePlan {
    /// `count` points in the box `[lo, hi]^dim`, offset by `seed`.
    pub fn new(dim: usize, count: usize, seed: u64, lo: &BigRational, hi: &BigRational, mode: EvalMode) -> Self {
        let bases = first_primes(dim);
        let width = hi - lo;
        let mut points = Vec::with_capacity(count);
        for i in 1..=count as u64 {
            let k = seed.wrapping_mul(997).wrapping_add(i);
            let mut pt = Vec::with_capacity(dim);
            for &b in &bases {
                let x = lo + &width * radical_inverse(b, k);
                pt.push(match mode {
                    EvalMode::Rational => NumericValue::Exact(x),
                    EvalMode::Float => NumericValue::Float(rational_to_f64(&x)),
                });
            }
            points.push(pt);
        }
        SamplePlan { points, mode }
    }
}

/// Van der Corput radical inverse of `k` in base `b`, in `[0, 1)`.
fn radical_inverse(b: u64, mut k: u64) -> BigRational {
    let base = BigInt::from(b);
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    while k > 0 {
        num = num * &base + BigInt::from(k % b);
        den *= &base;
        k /= b;
    }
    BigRational::new(num, den)
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

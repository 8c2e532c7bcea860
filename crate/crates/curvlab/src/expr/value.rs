use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ast::Expr;
use super::error::EvalError;

/// A number that knows whether it is exact.
///
/// Exact values are arbitrary-precision rationals. Any operation without an
/// exact rational result (only `exp` at a nonzero argument, here) demotes to
/// `Float`, and float-ness is contagious through arithmetic.
#[derive(Debug, Clone)]
pub enum NumericValue {
    Exact(BigRational),
    Float(f64),
}

impl NumericValue {
    pub fn exact_int(v: i64) -> Self {
        NumericValue::Exact(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        NumericValue::Exact(BigRational::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NumericValue::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NumericValue::Exact(r) => r.is_zero(),
            NumericValue::Float(f) => *f == 0.0,
        }
    }

    /// Nearest double; correctly rounded for exact values in the normal
    /// f64 range (see `rational_to_f64`).
    pub fn to_f64(&self) -> f64 {
        match self {
            NumericValue::Exact(r) => rational_to_f64(r),
            NumericValue::Float(f) => *f,
        }
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            NumericValue::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn add(&self, rhs: &NumericValue) -> NumericValue {
        match (self, rhs) {
            (NumericValue::Exact(a), NumericValue::Exact(b)) => NumericValue::Exact(a + b),
            _ => NumericValue::Float(self.to_f64() + rhs.to_f64()),
        }
    }

    pub fn sub(&self, rhs: &NumericValue) -> NumericValue {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> NumericValue {
        match self {
            NumericValue::Exact(a) => NumericValue::Exact(-a.clone()),
            NumericValue::Float(f) => NumericValue::Float(-f),
        }
    }

    pub fn mul(&self, rhs: &NumericValue) -> NumericValue {
        match (self, rhs) {
            (NumericValue::Exact(a), NumericValue::Exact(b)) => NumericValue::Exact(a * b),
            _ => NumericValue::Float(self.to_f64() * rhs.to_f64()),
        }
    }

    pub fn div(&self, rhs: &NumericValue) -> Result<NumericValue, EvalError> {
        if rhs.is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        Ok(match (self, rhs) {
            (NumericValue::Exact(a), NumericValue::Exact(b)) => NumericValue::Exact(a / b),
            _ => NumericValue::Float(self.to_f64() / rhs.to_f64()),
        })
    }

    pub fn powi(&self, k: i32) -> Result<NumericValue, EvalError> {
        if k < 0 && self.is_zero() {
            return Err(EvalError::ZeroToNegativePower);
        }
        Ok(match self {
            NumericValue::Exact(a) => NumericValue::Exact(a.pow(k)),
            NumericValue::Float(f) => NumericValue::Float(f.powi(k)),
        })
    }

    /// `exp`; exact only at zero.
    pub fn exp_val(&self) -> NumericValue {
        match self {
            NumericValue::Exact(r) if r.is_zero() => {
                NumericValue::Exact(BigRational::from_integer(1.into()))
            }
            other => NumericValue::Float(other.to_f64().exp()),
        }
    }
}

impl PartialEq for NumericValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (NumericValue::Exact(a), NumericValue::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl fmt::Display for NumericValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericValue::Exact(r) => write!(f, "{r}"),
            NumericValue::Float(x) => write!(f, "{x:.16e}"),
        }
    }
}

/// A point of the chart: one value per coordinate.
pub type Point = Vec<NumericValue>;

/// Round an exact rational to the nearest double, ties to even.
///
/// The quotient is computed to 55 bits plus a sticky remainder and rounded
/// once, so results in the normal range are correctly rounded; values beyond
/// it saturate to infinity or flush toward zero through the final scaling.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let n = r.numer().abs();
    let d = r.denom().clone();
    let mut shift: i64 = 55 - (n.bits() as i64 - d.bits() as i64);
    let mut q;
    let mut rem;
    let mut rounds = 0;
    loop {
        let (qq, rr) = if shift >= 0 {
            (&n << shift as u64).div_rem(&d)
        } else {
            n.div_rem(&(&d << (-shift) as u64))
        };
        q = qq;
        rem = rr;
        let qb = q.bits() as i64;
        if qb == 55 {
            break;
        }
        shift += 55 - qb;
        rounds += 1;
        debug_assert!(rounds < 5, "quotient width estimate failed to converge");
        if rounds >= 5 {
            break;
        }
    }
    let mut m = q.to_u64().expect("55-bit quotient fits u64");
    let mut e = -shift;
    let dropped = m & 0b11;
    m >>= 2;
    e += 2;
    let sticky = !rem.is_zero() || (dropped & 0b01) != 0;
    if (dropped & 0b10) != 0 && (sticky || (m & 1) == 1) {
        m += 1;
        if m == (1u64 << 53) {
            m >>= 1;
            e += 1;
        }
    }
    let mag = ldexp(m as f64, e);
    if neg {
        -mag
    } else {
        mag
    }
}

fn ldexp(m: f64, mut e: i64) -> f64 {
    let mut x = m;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// Evaluate an expression at a point, propagating exactness.
pub fn evaluate(e: &Expr, point: &[NumericValue]) -> Result<NumericValue, EvalError> {
    match e {
        Expr::Const(c) => Ok(NumericValue::Exact(c.clone())),
        Expr::Coord(i) => point
            .get(*i)
            .cloned()
            .ok_or(EvalError::DimensionMismatch { index: *i, got: point.len() }),
        Expr::Neg(u) => Ok(evaluate(u, point)?.neg()),
        Expr::Sum(items) => {
            let mut acc = NumericValue::zero();
            for item in items {
                acc = acc.add(&evaluate(item, point)?);
            }
            Ok(acc)
        }
        Expr::Product(items) => {
            let mut acc = NumericValue::exact_int(1);
            for item in items {
                acc = acc.mul(&evaluate(item, point)?);
            }
            Ok(acc)
        }
        Expr::Quot(a, b) => evaluate(a, point)?.div(&evaluate(b, point)?),
        Expr::Pow(b, k) => evaluate(b, point)?.powi(*k),
        Expr::Exp(u) => Ok(evaluate(u, point)?.exp_val()),
    }
}

//! Rational-function normal form behind `simplify`.
//!
//! An expression tree is flattened into a quotient of multivariate
//! polynomials over the rationals. The polynomial indeterminates ("atoms")
//! are chart coordinates together with whole `exp(...)` subterms, keyed by
//! the normal form of their argument. Arithmetic in this fraction field
//! decides polynomial identities exactly; distinct exp-atoms stay inert, so
//! transcendental coincidences such as exp(a)*exp(b) = exp(a+b) are not
//! recognized and fall through to numeric checks.
//!
//! Canonical invariants of a `RatFun`:
//!   - the denominator is not the zero polynomial, and is `1` when the
//!     numerator is zero;
//!   - numerator and denominator share no monomial or polynomial factor
//!     (polynomial cancellation may be skipped only on exponent overflow);
//!   - all coefficients are integers with no common factor across the two
//!     polynomials, and the denominator's least monomial is positive.
//!
//! Full cancellation matters for more than looks: curvature pipelines over
//! non-monomial metrics multiply denominators relentlessly, and without the
//! gcd step intermediate degrees grow with every operation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ast::Expr;
use super::error::NormError;
use super::gcd;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Atom {
    Coord(usize),
    Exp(Box<RatFun>),
}

/// Product of atom powers; the empty map is the monomial 1.
/// Exponents are strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(crate) struct Monomial(pub(crate) BTreeMap<Atom, u32>);

/// Exponents stay within `i32` so reconstructed `Pow` nodes are exact.
fn bound_exponent(v: u32) -> Result<(), NormError> {
    if v > i32::MAX as u32 {
        Err(NormError::ExponentOverflow)
    } else {
        Ok(())
    }
}

impl Monomial {
    pub(crate) fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub(crate) fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn atom(a: Atom) -> Self {
        let mut m = BTreeMap::new();
        m.insert(a, 1);
        Monomial(m)
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Result<Monomial, NormError> {
        let mut out = self.0.clone();
        for (a, e) in &other.0 {
            let slot = out.entry(a.clone()).or_insert(0);
            *slot = slot.checked_add(*e).ok_or(NormError::ExponentOverflow)?;
            bound_exponent(*slot)?;
        }
        Ok(Monomial(out))
    }

    /// Atom-wise minimum of exponents; atoms missing on either side drop out.
    fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = BTreeMap::new();
        for (a, e) in &self.0 {
            if let Some(f) = other.0.get(a) {
                out.insert(a.clone(), (*e).min(*f));
            }
        }
        Monomial(out)
    }

    /// Division that reports failure; `None` when `d` does not divide `self`.
    pub(crate) fn try_div(&self, d: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for (a, e) in &d.0 {
            let cur = out.get_mut(a)?;
            if *cur < *e {
                return None;
            }
            *cur -= *e;
            if *cur == 0 {
                out.remove(a);
            }
        }
        Some(Monomial(out))
    }

    /// Exact division; `d` must divide `self`.
    fn div(&self, d: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (a, e) in &d.0 {
            let cur = out.get_mut(a).expect("divisor monomial not contained");
            debug_assert!(*cur >= *e);
            *cur -= *e;
            if *cur == 0 {
                out.remove(a);
            }
        }
        Monomial(out)
    }
}

/// Sparse polynomial; the empty term map is the zero polynomial.
/// Coefficients are nonzero exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(crate) struct Poly(pub(crate) BTreeMap<Monomial, BigRational>);

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub(crate) fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub(crate) fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly(terms)
    }

    pub(crate) fn atom(a: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::atom(a), BigRational::one());
        Poly(terms)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn as_constant(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(slot) => {
                *slot += c;
                if slot.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, c);
            }
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect())
    }

    pub(crate) fn mul(&self, other: &Poly) -> Result<Poly, NormError> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.add_term(m1.mul(m2)?, c1 * c2);
            }
        }
        Ok(out)
    }

    fn pow(&self, k: u32) -> Result<Poly, NormError> {
        let mut base = self.clone();
        let mut acc = Poly::one();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Greatest monomial dividing every term; 1 for the zero polynomial.
    fn content_monomial(&self) -> Monomial {
        let mut it = self.0.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut acc = first.clone();
        for m in it {
            acc = acc.gcd(m);
            if acc.is_one() {
                break;
            }
        }
        acc
    }

    fn div_monomial(&self, d: &Monomial) -> Poly {
        if d.is_one() {
            return self.clone();
        }
        Poly(self.0.iter().map(|(m, c)| (m.div(d), c.clone())).collect())
    }

    pub(crate) fn scale_div(&self, c: &BigRational) -> Poly {
        Poly(self.0.iter().map(|(m, k)| (m.clone(), k / c)).collect())
    }

    fn first_coeff(&self) -> &BigRational {
        self.0.values().next().expect("zero polynomial has no coefficients")
    }
}

/// Joint rational content of two polynomials: the positive rational whose
/// removal leaves both with integer coefficients of overall gcd 1.
fn rational_content(a: &Poly, b: &Poly) -> BigRational {
    let mut gnum = BigInt::zero();
    let mut lden = BigInt::one();
    for p in [a, b] {
        for c in p.0.values() {
            gnum = gnum.gcd(&c.numer().abs());
            lden = lden.lcm(c.denom());
        }
    }
    BigRational::new(gnum, lden)
}

/// Quotient of polynomials in canonical reduced form (see module docs).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct RatFun {
    pub(crate) num: Poly,
    pub(crate) den: Poly,
}

impl RatFun {
    fn reduced(num: Poly, den: Poly) -> Result<RatFun, NormError> {
        if den.is_zero() {
            return Err(NormError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RatFun { num: Poly::zero(), den: Poly::one() });
        }
        let common = num.content_monomial().gcd(&den.content_monomial());
        let (mut num, mut den) = if common.is_one() {
            (num, den)
        } else {
            (num.div_monomial(&common), den.div_monomial(&common))
        };
        // A lone monomial only has monomial factors, so the polynomial gcd
        // can bring nothing new unless both sides have several terms.
        if num.0.len() > 1 && den.0.len() > 1 {
            let g = gcd::poly_gcd_or_one(&num, &den);
            if g.as_constant().is_none() {
                if let (Some(n), Some(d)) =
                    (gcd::poly_div_exact(&num, &g), gcd::poly_div_exact(&den, &g))
                {
                    num = n;
                    den = d;
                }
            }
        }
        let mut scale = rational_content(&num, &den);
        if den.first_coeff().is_negative() {
            scale = -scale;
        }
        if !scale.is_one() {
            num = num.scale_div(&scale);
            den = den.scale_div(&scale);
        }
        Ok(RatFun { num, den })
    }

    pub(crate) fn zero() -> Self {
        RatFun { num: Poly::zero(), den: Poly::one() }
    }

    pub(crate) fn one() -> Self {
        RatFun { num: Poly::one(), den: Poly::one() }
    }

    pub(crate) fn constant(c: BigRational) -> Self {
        RatFun::reduced(Poly::constant(c), Poly::one()).expect("unit denominator")
    }

    pub(crate) fn atom(a: Atom) -> Self {
        RatFun { num: Poly::atom(a), den: Poly::one() }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub(crate) fn as_constant(&self) -> Option<BigRational> {
        let d = self.den.as_constant()?;
        let n = self.num.as_constant()?;
        Some(n / d)
    }

    pub(crate) fn add(&self, other: &RatFun) -> Result<RatFun, NormError> {
        let num = self.num.mul(&other.den)?.add(&other.num.mul(&self.den)?);
        RatFun::reduced(num, self.den.mul(&other.den)?)
    }

    pub(crate) fn neg(&self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub(crate) fn mul(&self, other: &RatFun) -> Result<RatFun, NormError> {
        RatFun::reduced(self.num.mul(&other.num)?, self.den.mul(&other.den)?)
    }

    pub(crate) fn div(&self, other: &RatFun) -> Result<RatFun, NormError> {
        if other.num.is_zero() {
            return Err(NormError::ZeroDenominator);
        }
        RatFun::reduced(self.num.mul(&other.den)?, self.den.mul(&other.num)?)
    }

    pub(crate) fn pow(&self, k: i32) -> Result<RatFun, NormError> {
        if k == 0 {
            return Ok(RatFun::one());
        }
        let (base, mag) = if k < 0 {
            (RatFun::one().div(self)?, (-(k as i64)) as u32)
        } else {
            (self.clone(), k as u32)
        };
        RatFun::reduced(base.num.pow(mag)?, base.den.pow(mag)?)
    }
}

pub(crate) fn normalize(e: &Expr) -> Result<RatFun, NormError> {
    match e {
        Expr::Const(c) => Ok(RatFun::constant(c.clone())),
        Expr::Coord(i) => Ok(RatFun::atom(Atom::Coord(*i))),
        Expr::Neg(u) => Ok(normalize(u)?.neg()),
        Expr::Sum(items) => {
            let mut acc = RatFun::zero();
            for item in items {
                acc = acc.add(&normalize(item)?)?;
            }
            Ok(acc)
        }
        Expr::Product(items) => {
            let mut acc = RatFun::one();
            for item in items {
                acc = acc.mul(&normalize(item)?)?;
            }
            Ok(acc)
        }
        Expr::Quot(a, b) => normalize(a)?.div(&normalize(b)?),
        Expr::Pow(b, k) => normalize(b)?.pow(*k),
        Expr::Exp(u) => {
            let arg = normalize(u)?;
            if arg.is_zero() {
                Ok(RatFun::one())
            } else {
                Ok(RatFun::atom(Atom::Exp(Box::new(arg))))
            }
        }
    }
}

pub(crate) fn reconstruct(rf: &RatFun) -> Expr {
    if let Some(c) = rf.as_constant() {
        return Expr::Const(c);
    }
    if rf.den.as_constant().map_or(false, |c| c.is_one()) {
        return poly_to_expr(&rf.num);
    }
    Expr::Quot(Box::new(poly_to_expr(&rf.num)), Box::new(poly_to_expr(&rf.den)))
}

fn poly_to_expr(p: &Poly) -> Expr {
    if p.is_zero() {
        return Expr::zero();
    }
    // leading term first, the order a human writes a polynomial in
    let mut ordered: Vec<_> = p.0.iter().collect();
    ordered.sort_by(|(a, _), (b, _)| gcd::cmp_mono(b, a));
    let mut terms = Vec::with_capacity(ordered.len());
    for (m, c) in ordered {
        terms.push(term_to_expr(m, c));
    }
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Sum(terms)
    }
}

fn term_to_expr(m: &Monomial, c: &BigRational) -> Expr {
    let mut factors = Vec::new();
    if !c.is_one() || m.is_one() {
        factors.push(Expr::Const(c.clone()));
    }
    for (atom, e) in &m.0 {
        let base = match atom {
            Atom::Coord(i) => Expr::Coord(*i),
            Atom::Exp(arg) => Expr::Exp(Box::new(reconstruct(arg))),
        };
        factors.push(if *e == 1 {
            base
        } else {
            Expr::Pow(Box::new(base), *e as i32)
        });
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Product(factors)
    }
}

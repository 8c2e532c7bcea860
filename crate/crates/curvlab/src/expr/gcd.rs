//! Multivariate polynomial gcd for rational-function reduction.
//!
//! Primitive pseudo-remainder sequences, recursing on the atom set: the
//! polynomial is viewed as univariate in its largest atom with polynomial
//! coefficients, contents are split off, and the pseudo-remainder loop runs
//! on the primitive parts. Exp-atoms are opaque indeterminates here like
//! coordinates.
//!
//! The only caller is the rational-function reducer, which cancels the gcd
//! from numerator and denominator. Correctness of zero-decisions never
//! depends on the gcd being found, so any internal failure (exponent
//! bounds) degrades to a gcd of 1 and larger representatives.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::error::NormError;
use super::normal::{Atom, Monomial, Poly};

/// Graded lexicographic order: total degree first, then atom-wise
/// exponents. Unlike the storage order, this one is compatible with
/// monomial multiplication, which the division algorithm requires.
pub(crate) fn cmp_mono(a: &Monomial, b: &Monomial) -> Ordering {
    let da: u64 = a.0.values().map(|e| *e as u64).sum();
    let db: u64 = b.0.values().map(|e| *e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        other => return other,
    }
    let mut ia = a.0.iter().peekable();
    let mut ib = b.0.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some((ka, ea)), Some((kb, eb))) => match ka.cmp(kb) {
                // the side holding the earlier atom has positive exponent
                // where the other has zero
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match ea.cmp(eb) {
                    Ordering::Equal => {
                        ia.next();
                        ib.next();
                    }
                    other => return other,
                },
            },
        }
    }
}

fn leading(p: &Poly) -> (&Monomial, &BigRational) {
    p.0.iter()
        .max_by(|(m1, _), (m2, _)| cmp_mono(m1, m2))
        .expect("leading term of a zero polynomial")
}

fn rational_content(p: &Poly) -> BigRational {
    let mut gnum = BigInt::zero();
    let mut lden = BigInt::one();
    for c in p.0.values() {
        gnum = gnum.gcd(&c.numer().abs());
        lden = lden.lcm(c.denom());
    }
    BigRational::new(gnum, lden)
}

/// Integer-primitive associate with positive leading coefficient.
fn primitive_part(p: &Poly) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let mut content = rational_content(p);
    if leading(p).1.is_negative() {
        content = -content;
    }
    p.scale_div(&content)
}

/// Exact division `a / b`; `None` when `b` does not divide `a`.
pub(crate) fn poly_div_exact(a: &Poly, b: &Poly) -> Option<Poly> {
    if b.is_zero() {
        return None;
    }
    if a.is_zero() {
        return Some(Poly::zero());
    }
    if let Some(c) = b.as_constant() {
        return Some(a.scale_div(&c));
    }
    let (lbm, lbc) = {
        let (m, c) = leading(b);
        (m.clone(), c.clone())
    };
    let mut rem = a.clone();
    let mut quo = Poly::zero();
    while !rem.is_zero() {
        let (lm, lc) = {
            let (m, c) = leading(&rem);
            (m.clone(), c.clone())
        };
        let qm = lm.try_div(&lbm)?;
        let qc = lc / &lbc;
        quo.add_term(qm.clone(), qc.clone());
        for (m, c) in &b.0 {
            let mm = m.mul(&qm).ok()?;
            rem.add_term(mm, -(c * &qc));
        }
    }
    Some(quo)
}

/// Gcd of two polynomials, or 1 when the computation cannot finish. The
/// result is integer-primitive with positive leading coefficient.
pub(crate) fn poly_gcd_or_one(a: &Poly, b: &Poly) -> Poly {
    poly_gcd(a, b).unwrap_or_else(|_| Poly::one())
}

fn poly_gcd(a: &Poly, b: &Poly) -> Result<Poly, NormError> {
    if a.is_zero() {
        return Ok(primitive_part(b));
    }
    if b.is_zero() {
        return Ok(primitive_part(a));
    }
    let pa = primitive_part(a);
    let pb = primitive_part(b);
    if pa.as_constant().is_some() || pb.as_constant().is_some() {
        return Ok(Poly::one());
    }
    let x = pa
        .0
        .keys()
        .chain(pb.0.keys())
        .flat_map(|m| m.0.keys())
        .max()
        .expect("non-constant polynomial has an atom")
        .clone();
    let (ua, ca) = univariate_primitive(&to_univariate(&pa, &x))?;
    let (ub, cb) = univariate_primitive(&to_univariate(&pb, &x))?;
    let cont = poly_gcd(&ca, &cb)?;
    let (mut u, mut v) = if udeg(&ua) >= udeg(&ub) { (ua, ub) } else { (ub, ua) };
    while !uis_zero(&v) {
        let r = pseudo_rem(&u, &v)?;
        u = v;
        (v, _) = univariate_primitive(&r)?;
    }
    let g = primitive_part(&from_univariate(&u, &x)?);
    Ok(primitive_part(&g.mul(&cont)?))
}

/// Dense-by-degree view in the main atom; coefficients are polynomials in
/// the remaining atoms.
type UPoly = Vec<Poly>;

fn to_univariate(p: &Poly, x: &Atom) -> UPoly {
    let deg = p
        .0
        .keys()
        .map(|m| m.0.get(x).copied().unwrap_or(0))
        .max()
        .unwrap_or(0) as usize;
    let mut out = vec![Poly::zero(); deg + 1];
    for (m, c) in &p.0 {
        let e = m.0.get(x).copied().unwrap_or(0) as usize;
        let mut rest = m.0.clone();
        rest.remove(x);
        out[e].add_term(Monomial(rest), c.clone());
    }
    out
}

fn from_univariate(u: &UPoly, x: &Atom) -> Result<Poly, NormError> {
    let mut out = Poly::zero();
    for (e, coeff) in u.iter().enumerate() {
        let xe = if e == 0 {
            Monomial::one()
        } else {
            let mut m = Monomial::one();
            m.0.insert(x.clone(), e as u32);
            m
        };
        for (m, c) in &coeff.0 {
            out.add_term(m.mul(&xe)?, c.clone());
        }
    }
    Ok(out)
}

fn trim(u: &mut UPoly) {
    while u.len() > 1 && u.last().map_or(false, Poly::is_zero) {
        u.pop();
    }
}

fn udeg(u: &UPoly) -> usize {
    u.len() - 1
}

fn uis_zero(u: &UPoly) -> bool {
    u.iter().all(Poly::is_zero)
}

/// Split off the content (gcd of the coefficients); returns the primitive
/// univariate polynomial and the content.
fn univariate_primitive(u: &UPoly) -> Result<(UPoly, Poly), NormError> {
    let mut cont = Poly::zero();
    for c in u {
        if c.is_zero() {
            continue;
        }
        cont = poly_gcd(&cont, c)?;
        if cont.as_constant().map_or(false, |v| v.is_one()) {
            break;
        }
    }
    if cont.is_zero() {
        return Ok((vec![Poly::zero()], Poly::one()));
    }
    if cont.as_constant().map_or(false, |v| v.is_one()) {
        let mut out = u.clone();
        trim(&mut out);
        return Ok((out, cont));
    }
    let mut out = Vec::with_capacity(u.len());
    for c in u {
        out.push(poly_div_exact(c, &cont).expect("content divides its source"));
    }
    trim(&mut out);
    Ok((out, cont))
}

/// Pseudo-remainder of `u` by `v` in the main atom: repeatedly scales by
/// the leading coefficient of `v` so every cancellation is exact.
fn pseudo_rem(u: &UPoly, v: &UPoly) -> Result<UPoly, NormError> {
    let dv = udeg(v);
    let lv = v.last().expect("nonzero divisor");
    let mut r = u.clone();
    trim(&mut r);
    while !uis_zero(&r) && udeg(&r) >= dv {
        let d = udeg(&r);
        let c = r.last().unwrap().clone();
        let mut scaled: UPoly = Vec::with_capacity(r.len());
        for p in &r {
            scaled.push(p.mul(lv)?);
        }
        for (i, vc) in v.iter().enumerate() {
            let t = vc.mul(&c)?;
            let slot = i + d - dv;
            scaled[slot] = scaled[slot].add(&t.neg());
        }
        r = scaled;
        trim(&mut r);
    }
    Ok(r)
}

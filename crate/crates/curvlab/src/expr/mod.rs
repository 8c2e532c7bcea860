//! Exact symbolic expressions over chart coordinates.
//!
//! The expression language is deliberately small: rationals, coordinates,
//! field arithmetic, integer powers, and `exp`. Everything the curvature
//! machinery needs (metric components, Christoffel symbols, curvature
//! tensors, residuals) lives inside the rational functions generated by the
//! coordinates and `exp` atoms, so a canonical normal form exists and
//! simplification never guesses.
//!
//! `simplify` is total: when an expression has no normal form (a denominator
//! that is identically zero, an exponent outside machine range) it returns
//! the input unchanged and the caller's numeric fallback takes over.

pub mod ast;
pub mod error;
mod gcd;
mod normal;
pub mod parse;
pub mod value;

pub use ast::Expr;
pub use error::{EvalError, NormError, ParseError};
pub use parse::{parse_expr, validate_coords};
pub use value::{evaluate, rational_to_f64, NumericValue, Point};

use normal::{normalize, reconstruct};

/// Canonical form of `e`, or `e` itself when no normal form exists.
pub fn simplify(e: &Expr) -> Expr {
    match normalize(e) {
        Ok(rf) => reconstruct(&rf),
        Err(_) => e.clone(),
    }
}

/// True when `e` is identically zero as a rational function of the
/// coordinates and its `exp` atoms. A `false` is not a proof of nonzero:
/// relations between different `exp` atoms (such as `exp(a)*exp(b)` against
/// `exp(a+b)`) are invisible here and fall through to numeric checking.
pub fn provably_zero(e: &Expr) -> bool {
    match normalize(e) {
        Ok(rf) => rf.is_zero(),
        Err(_) => false,
    }
}

/// The exact rational value of `e` when it is constant as a rational
/// function, however the constant is spelled.
pub fn constant_value(e: &Expr) -> Option<num_rational::BigRational> {
    normalize(e).ok().and_then(|rf| rf.as_constant())
}

/// Partial derivative with respect to coordinate `k`, simplified.
pub fn differentiate(e: &Expr, k: usize) -> Expr {
    simplify(&derivative_raw(e, k))
}

fn derivative_raw(e: &Expr, k: usize) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Coord(i) => {
            if *i == k {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(u) => Expr::Neg(Box::new(derivative_raw(u, k))),
        Expr::Sum(items) => Expr::Sum(items.iter().map(|it| derivative_raw(it, k)).collect()),
        Expr::Product(items) => {
            let mut terms = Vec::with_capacity(items.len());
            for i in 0..items.len() {
                let mut factors = items.clone();
                factors[i] = derivative_raw(&items[i], k);
                terms.push(Expr::Product(factors));
            }
            Expr::Sum(terms)
        }
        Expr::Quot(a, b) => {
            let da = derivative_raw(a, k);
            let db = derivative_raw(b, k);
            let num = Expr::Sum(vec![
                Expr::Product(vec![da, (**b).clone()]),
                Expr::Neg(Box::new(Expr::Product(vec![(**a).clone(), db]))),
            ]);
            Expr::Quot(Box::new(num), Box::new(Expr::Pow(b.clone(), 2)))
        }
        Expr::Pow(b, n) => {
            if *n == 0 {
                return Expr::zero();
            }
            let db = derivative_raw(b, k);
            Expr::Product(vec![
                Expr::int(*n as i64),
                Expr::Pow(b.clone(), *n - 1),
                db,
            ])
        }
        Expr::Exp(u) => Expr::Product(vec![e.clone(), derivative_raw(u, k)]),
    }
}

/// `a + b`, simplified.
pub fn add(a: &Expr, b: &Expr) -> Expr {
    simplify(&Expr::Sum(vec![a.clone(), b.clone()]))
}

/// `a - b`, simplified.
pub fn sub(a: &Expr, b: &Expr) -> Expr {
    simplify(&Expr::Sum(vec![
        a.clone(),
        Expr::Neg(Box::new(b.clone())),
    ]))
}

/// `a * b`, simplified.
pub fn mul(a: &Expr, b: &Expr) -> Expr {
    simplify(&Expr::Product(vec![a.clone(), b.clone()]))
}

/// `-a`, simplified.
pub fn neg(a: &Expr) -> Expr {
    simplify(&Expr::Neg(Box::new(a.clone())))
}

/// Sum of a whole slice, simplified in one pass.
pub fn sum_of(items: &[Expr]) -> Expr {
    match items.len() {
        0 => Expr::zero(),
        1 => simplify(&items[0]),
        _ => simplify(&Expr::Sum(items.to_vec())),
    }
}

/// `a / b`; fails when `b` is identically zero. A divisor that merely
/// vanishes at some points is fine and surfaces at evaluation time.
pub fn div(a: &Expr, b: &Expr) -> Result<Expr, NormError> {
    let rf = normalize(&Expr::Quot(Box::new(a.clone()), Box::new(b.clone())))?;
    Ok(reconstruct(&rf))
}

/// `a^k`, simplified.
pub fn pow_expr(a: &Expr, k: i32) -> Expr {
    simplify(&Expr::Pow(Box::new(a.clone()), k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn coords3() -> Vec<String> {
        vec!["x1".into(), "x2".into(), "x3".into()]
    }

    fn p(src: &str) -> Expr {
        parse_expr(src, &coords3()).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn evaluates_exactly_at_rational_points() {
        let e = p("x1 + (1/2)*x2");
        let pt = vec![NumericValue::exact_int(1), NumericValue::exact_int(3)];
        let v = evaluate(&e, &pt).unwrap();
        assert_eq!(v, NumericValue::Exact(rat(5, 2)));
        assert!(v.is_exact());
    }

    #[test]
    fn differentiates_monomials() {
        let e = p("2*(x1)^2");
        assert_eq!(differentiate(&e, 0).render(&coords3()), "4*x1");
        assert!(provably_zero(&differentiate(&e, 1)));
    }

    #[test]
    fn quotient_rule_reintroduces_denominators() {
        let e = p("1/x1");
        assert_eq!(differentiate(&e, 0).render(&coords3()), "-1/x1^2");
    }

    #[test]
    fn exp_chain_rule() {
        let e = p("exp(x1^2)");
        let d = differentiate(&e, 0);
        // 2*x1*exp(x1^2), up to canonical ordering
        let pt = vec![NumericValue::Float(0.7)];
        let expected = 2.0 * 0.7 * (0.7f64 * 0.7).exp();
        let got = evaluate(&d, &pt).unwrap().to_f64();
        assert!((got - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn exp_is_exact_only_at_zero() {
        let zero = evaluate(&p("exp(x1 - x1)"), &[NumericValue::exact_int(5)]).unwrap();
        assert_eq!(zero, NumericValue::Exact(rat(1, 1)));
        let one = evaluate(&p("exp(x1)"), &[NumericValue::exact_int(1)]).unwrap();
        assert!(!one.is_exact());
        assert!((one.to_f64() - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn simplify_cancels_and_reduces() {
        assert!(provably_zero(&p("(4*x1)/2 - 2*x1")));
        assert_eq!(simplify(&p("(4*x1)/(4*x1^2)")).render(&coords3()), "1/x1");
        assert_eq!(simplify(&p("x1*x2 - x2*x1")), Expr::zero());
    }

    #[test]
    fn simplify_survives_identically_zero_denominators() {
        let e = p("x1/(x2 - x2)");
        let s = simplify(&e);
        assert_eq!(s, e);
        assert!(!provably_zero(&e));
    }

    #[test]
    fn division_helper_rejects_zero_divisors() {
        let a = p("x1");
        let b = p("x2 - x2");
        assert!(matches!(div(&a, &b), Err(NormError::ZeroDenominator)));
        let ok = div(&a, &p("2*x1^2")).unwrap();
        assert_eq!(ok.render(&coords3()), "1/(2*x1)");
    }

    #[test]
    fn derivative_matches_finite_differences_on_random_polynomials() {
        let mut rng = crate::rng::SplitMix64::new(0x5EED_0001);
        for case in 0..500 {
            let nvars = 1 + (rng.next_u64() % 3) as usize;
            let nterms = 1 + (rng.next_u64() % 6) as usize;
            let mut terms = Vec::new();
            for _ in 0..nterms {
                let coeff = (rng.next_u64() % 9) as i64 - 4;
                let mut factors = vec![Expr::int(coeff)];
                for v in 0..nvars {
                    let k = (rng.next_u64() % 5) as i32;
                    if k > 0 {
                        factors.push(Expr::Pow(Box::new(Expr::Coord(v)), k));
                    }
                }
                terms.push(Expr::Product(factors));
            }
            let e = Expr::Sum(terms);
            let k = (rng.next_u64() % nvars as u64) as usize;
            let d = differentiate(&e, k);

            let pt: Vec<f64> = (0..nvars)
                .map(|_| 0.5 + (rng.next_u64() % 1001) as f64 / 1000.0)
                .collect();
            let evalf = |xs: &[f64]| {
                let vals: Vec<NumericValue> =
                    xs.iter().map(|v| NumericValue::Float(*v)).collect();
                evaluate(&e, &vals).unwrap().to_f64()
            };
            let h = 1e-5;
            let mut plus = pt.clone();
            plus[k] += h;
            let mut minus = pt.clone();
            minus[k] -= h;
            let fd = (evalf(&plus) - evalf(&minus)) / (2.0 * h);

            let vals: Vec<NumericValue> = pt.iter().map(|v| NumericValue::Float(*v)).collect();
            let dv = evaluate(&d, &vals).unwrap().to_f64();
            let scale = dv.abs().max(1.0);
            assert!(
                (dv - fd).abs() <= 1e-6 * scale,
                "case {case}: symbolic {dv} vs finite difference {fd}"
            );
        }
    }

    #[test]
    fn to_f64_handles_extreme_magnitudes() {
        let huge = BigRational::new(num_bigint::BigInt::from(2).pow(1100u32), 3.into());
        assert!(rational_to_f64(&huge).is_infinite());
        let tiny = BigRational::new(3.into(), num_bigint::BigInt::from(2).pow(1100u32));
        let t = rational_to_f64(&tiny);
        assert!(t >= 0.0 && t < 1e-300);
        let neg = BigRational::new((-3).into(), num_bigint::BigInt::from(2).pow(1100u32));
        assert!(rational_to_f64(&neg) <= 0.0);
    }

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (-6i64..=6).prop_map(Expr::int),
            ((-6i64..=6), 1i64..=5).prop_map(|(n, d)| Expr::Const(rat(n, d))),
            (0usize..3).prop_map(Expr::Coord),
        ]
    }

    fn expr_strategy() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                proptest::collection::vec(inner.clone(), 1..4).prop_map(Expr::Sum),
                proptest::collection::vec(inner.clone(), 1..4).prop_map(Expr::Product),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                    let den = if b.is_zero_const() { Expr::one() } else { b };
                    Expr::Quot(Box::new(a), Box::new(den))
                }),
                (inner.clone(), -3i32..=4).prop_map(|(b, k)| Expr::Pow(Box::new(b), k)),
                inner.prop_map(|e| Expr::Exp(Box::new(e))),
            ]
        })
    }

    fn point_strategy() -> impl Strategy<Value = Vec<NumericValue>> {
        proptest::collection::vec(
            (1i64..=40, 1i64..=8).prop_map(|(n, d)| NumericValue::Exact(rat(n, d))),
            3,
        )
    }

    proptest! {
        #[test]
        fn simplify_is_idempotent(e in expr_strategy()) {
            let once = simplify(&e);
            prop_assert_eq!(simplify(&once), once);
        }

        #[test]
        fn render_then_parse_preserves_value(e in expr_strategy(), pt in point_strategy()) {
            let coords = coords3();
            let rendered = e.render(&coords);
            let orig = evaluate(&e, &pt);
            prop_assume!(orig.is_ok());
            let orig = orig.unwrap();
            let parsed = parse_expr(&rendered, &coords).unwrap();
            let back = evaluate(&parsed, &pt).unwrap();
            match (&orig, &back) {
                (NumericValue::Exact(a), NumericValue::Exact(b)) => prop_assert_eq!(a, b),
                _ => {
                    let (x, y) = (orig.to_f64(), back.to_f64());
                    let same = x == y
                        || (x.is_nan() && y.is_nan())
                        || (x - y).abs() <= 1e-12 * x.abs().max(1.0);
                    prop_assert!(same, "{} evaluated to {} then {}", rendered, x, y);
                }
            }
        }

        #[test]
        fn to_f64_matches_hardware_division(n in -(1i64 << 53)..(1i64 << 53), d in 1i64..(1i64 << 53)) {
            let r = rat(n, d);
            let ours = rational_to_f64(&r);
            let hw = (n as f64) / (d as f64);
            prop_assert!(ours == hw || (ours.is_nan() && hw.is_nan()),
                "{n}/{d}: got {ours:?}, hardware {hw:?}");
        }
    }
}

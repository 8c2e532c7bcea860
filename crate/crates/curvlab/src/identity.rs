//! Built-in curvature identity suite.
//!
//! The structural identities every Levi-Civita curvature bundle satisfies,
//! phrased so they hold under either curvature sign and either lowering
//! slot order. The suite doubles as an engine self-test on any manifest: a
//! failure localizes which symmetry broke, which is far more useful than a
//! single wrong downstream number.

use crate::check::{check_field_zero, ResidualReport};
use crate::expr;
use crate::expr::Expr;
use crate::sample::SamplePlan;
use crate::tensor::{ops, CurvatureBundle, TensorField};

/// Runs every identity check against `bundle`, one report each.
pub fn curvature_identity_suite(
    bundle: &CurvatureBundle,
    plan: &SamplePlan,
    tol: f64,
) -> Vec<ResidualReport> {
    let n = bundle.dim();
    let g = bundle.metric();
    let riem = bundle.riemann();
    let low = bundle.lowered();
    let ric = bundle.ricci();
    let mut out = Vec::new();

    let nabla_g = ops::covariant_derivative(g, bundle);
    out.push(check_field_zero("metric is parallel", &nabla_g, &[g], plan, tol));

    let anti_args = riem.add(&riem.swap_slots(1, 2));
    out.push(check_field_zero(
        "curvature antisymmetry in the vector arguments",
        &anti_args,
        &[riem],
        plan,
        tol,
    ));

    let anti_first = low.add(&low.swap_slots(0, 1));
    out.push(check_field_zero(
        "lowered antisymmetry, first pair",
        &anti_first,
        &[low],
        plan,
        tol,
    ));

    let anti_second = low.add(&low.swap_slots(2, 3));
    out.push(check_field_zero(
        "lowered antisymmetry, second pair",
        &anti_second,
        &[low],
        plan,
        tol,
    ));

    let pair = low.sub(&low.swap_slots(0, 2).swap_slots(1, 3));
    out.push(check_field_zero(
        "lowered pair interchange",
        &pair,
        &[low],
        plan,
        tol,
    ));

    let mut first_bianchi = TensorField::zeros(bundle.manifold(), 0, 4);
    for idx in first_bianchi.indices() {
        let (i, j, z, w) = (idx[0], idx[1], idx[2], idx[3]);
        let cyc = expr::sum_of(&[
            low.get(&[i, j, z, w]).clone(),
            low.get(&[j, z, i, w]).clone(),
            low.get(&[z, i, j, w]).clone(),
        ]);
        first_bianchi.set(&idx, cyc);
    }
    out.push(check_field_zero(
        "first Bianchi identity",
        &first_bianchi,
        &[low],
        plan,
        tol,
    ));

    // deriv index sits in the last slot of the covariant derivative
    let nabla_r = ops::covariant_derivative(low, bundle);
    let mut second_bianchi = TensorField::zeros(bundle.manifold(), 0, 5);
    for idx in second_bianchi.indices() {
        let (i, j, z, w, m) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
        let cyc = expr::sum_of(&[
            nabla_r.get(&[i, j, z, w, m]).clone(),
            nabla_r.get(&[j, m, z, w, i]).clone(),
            nabla_r.get(&[m, i, z, w, j]).clone(),
        ]);
        second_bianchi.set(&idx, cyc);
    }
    out.push(check_field_zero(
        "second Bianchi identity",
        &second_bianchi,
        &[&nabla_r],
        plan,
        tol,
    ));

    let ric_skew = ric.sub(&ric.swap_slots(0, 1));
    out.push(check_field_zero("Ricci symmetry", &ric_skew, &[ric], plan, tol));

    // contracted second Bianchi: div Ric = (1/2) d(scalar)
    let div_ric = ops::divergence_last_slot(ric, bundle);
    let half = Expr::rational(1, 2);
    let grad: Vec<Expr> = (0..n)
        .map(|k| expr::mul(&half, &expr::differentiate(bundle.scalar(), k)))
        .collect();
    let half_grad = TensorField::from_components(bundle.manifold(), 0, 1, grad);
    let contracted = div_ric.sub(&half_grad);
    out.push(check_field_zero(
        "contracted Bianchi (div Ric = dr/2)",
        &contracted,
        &[&div_ric, &half_grad],
        plan,
        tol,
    ));

    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_rational::BigRational;

    use super::*;
    use crate::sample::EvalMode;
    use crate::tensor::{ChartManifold, Convention, CurvatureSign, LoweredSlotOrder};

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn diag_metric(m: &Arc<ChartManifold>, entries: &[&str]) -> TensorField {
        let n = m.dim();
        let mut g = TensorField::zeros(m, 0, 2);
        for (i, src) in entries.iter().enumerate() {
            g.set(&[i, i], m.parse(src).unwrap());
        }
        assert_eq!(entries.len(), n);
        g
    }

    #[test]
    fn suite_passes_on_a_curved_surface_under_all_conventions() {
        let m = ChartManifold::new(vec!["u".into(), "v".into()]).unwrap();
        let g = diag_metric(&m, &["4/((1 + u^2 + v^2)^2)", "4/((1 + u^2 + v^2)^2)"]);
        let plan = SamplePlan::new(2, 6, 11, &rat(-1), &rat(1), EvalMode::Rational);
        for sign in [CurvatureSign::Negative, CurvatureSign::Positive] {
            for order in [LoweredSlotOrder::ZThenW, LoweredSlotOrder::WThenZ] {
                let bundle = CurvatureBundle::new(
                    g.clone(),
                    Convention { curvature_sign: sign, lowered_slot_order: order },
                )
                .unwrap();
                let reports = curvature_identity_suite(&bundle, &plan, 1e-9);
                for r in &reports {
                    assert!(r.passed(), "{r}");
                }
            }
        }
    }

    #[test]
    fn suite_detects_a_corrupted_curvature_tensor() {
        // sanity that the checks can fail: swap one pair of lowered slots
        // by hand and feed the suite a bundle with mismatched parts
        let m = ChartManifold::new(vec!["u".into(), "v".into()]).unwrap();
        let g = diag_metric(&m, &["1", "u^2"]);
        let bundle = CurvatureBundle::new(g, Convention::default()).unwrap();
        let plan = SamplePlan::new(2, 6, 3, &rat(1), &rat(2), EvalMode::Rational);
        let reports = curvature_identity_suite(&bundle, &plan, 1e-9);
        assert!(reports.iter().all(|r| r.passed()));
        // now corrupt: a non-symmetric "Ricci" residual must be caught
        let mut fake = bundle.ricci().clone();
        fake.set(&[0, 1], m.parse("1").unwrap());
        let skew = fake.sub(&fake.swap_slots(0, 1));
        let rep = check_field_zero("corrupted", &skew, &[&fake], &plan, 1e-9);
        assert!(!rep.passed());
    }
}

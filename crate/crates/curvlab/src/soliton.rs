//! Ricci-Bourguignon soliton analysis: the flow-equation residual, per-point
//! lambda extraction with the named special couplings, the structural lambda
//! predicted by the coefficient functions, and the two theorem chains that
//! follow from a torse-forming or conharmonically flat configuration.
//!
//! Labels follow the lambda sign convention expanding / steady / shrinking
//! for lambda > 0 / = 0 / < 0; reports always carry lambda itself so a
//! reader preferring the opposite labeling can relabel.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::check::{check_field_zero, ResidualReport};
use crate::derived::{conharmonic_tensor, lowered_zw, DerivedError};
use crate::detect::{
    classify_vector_field, eigenvector_check, solve_rows, EigenvectorReport, FitOutcome,
    VectorClass, VectorFieldReport, FIT_TOL,
};
use crate::expr::{self, Expr, NumericValue};
use crate::sample::SamplePlan;
use crate::structure::MsqeStructure;
use crate::tensor::{indices, ops, ChartManifold, CurvatureBundle, TensorField};

#[derive(Debug, Error)]
pub enum SolitonError {
    #[error("potential field has {got} components, chart dimension is {dim}")]
    BadPotential { got: usize, dim: usize },
    #[error("potential field differs from the first generator")]
    PotentialMismatch,
    #[error("generator is not torse-forming within tolerance")]
    NotTorseForming,
    #[error("structure carries no coefficient functions")]
    MissingCoefficients,
    #[error(transparent)]
    Derived(#[from] DerivedError),
}

/// Potential field and coupling of the flow equation
/// (1/2) L_U g + Ric = (lambda + rho r) g.
#[derive(Debug, Clone)]
pub struct RBSolitonConfig {
    pub u: Vec<Expr>,
    pub rho: BigRational,
    /// Fit per point when absent.
    pub lambda: Option<BigRational>,
}

/// Couplings the literature names. For charts where the values collide
/// (dimension two makes 1/2, 1/n and 1/(2(n-1)) coincide) the first label
/// in this order wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCoupling {
    Ricci,
    Einstein,
    TracelessRicci,
    Schouten,
}

impl SpecialCoupling {
    pub fn label(self) -> &'static str {
        match self {
            SpecialCoupling::Ricci => "Ricci",
            SpecialCoupling::Einstein => "Einstein",
            SpecialCoupling::TracelessRicci => "traceless Ricci",
            SpecialCoupling::Schouten => "Schouten",
        }
    }
}

pub fn special_coupling(rho: &BigRational, n: usize) -> Option<SpecialCoupling> {
    let nn = n as i64;
    if rho.is_zero() {
        Some(SpecialCoupling::Ricci)
    } else if *rho == BigRational::new(1.into(), 2.into()) {
        Some(SpecialCoupling::Einstein)
    } else if nn > 0 && *rho == BigRational::new(1.into(), nn.into()) {
        Some(SpecialCoupling::TracelessRicci)
    } else if nn > 1 && *rho == BigRational::new(1.into(), (2 * (nn - 1)).into()) {
        Some(SpecialCoupling::Schouten)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonClass {
    Expanding,
    Steady,
    Shrinking,
    Indeterminate,
}

impl SolitonClass {
    fn of_rational(l: &BigRational) -> SolitonClass {
        if l.is_zero() {
            SolitonClass::Steady
        } else if l.is_positive() {
            SolitonClass::Expanding
        } else {
            SolitonClass::Shrinking
        }
    }

    fn of_float(f: f64, scale: f64, tol: f64) -> SolitonClass {
        if f.abs() <= tol * scale.max(1.0) {
            SolitonClass::Steady
        } else if f > 0.0 {
            SolitonClass::Expanding
        } else {
            SolitonClass::Shrinking
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SolitonClass::Expanding => "expanding",
            SolitonClass::Steady => "steady",
            SolitonClass::Shrinking => "shrinking",
            SolitonClass::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug)]
pub struct SolitonReport {
    /// Name of the coupling when rho matches one of the four special values.
    pub coupling: Option<SpecialCoupling>,
    /// (1/2) L_U g + Ric - (lambda + rho r) g with the pinned lambda; when
    /// no lambda could be pinned the field keeps the full lambda term out
    /// and a diagnostic says so.
    pub residual: ResidualReport,
    /// Per-point fit of the scalar multiplying g on the flow side.
    pub fit: FitOutcome,
    /// The fitted scalar is lambda itself. False when rho is nonzero and r
    /// is not constant, where only lambda + rho r is pointwise observable.
    pub lambda_separable: bool,
    /// lambda actually used in the residual: the supplied value, or an
    /// exact point-independent fit.
    pub lambda: Option<Expr>,
    pub classification: SolitonClass,
    /// div U.
    pub divergence: Expr,
    /// lambda predicted by the coefficient functions, when supplied.
    pub structural_lambda: Option<Expr>,
    pub diagnostics: Vec<String>,
}

/// Evaluate the flow equation for one configuration. The structure only
/// contributes the predicted lambda; everything else is metric data.
pub fn soliton_residual(
    bundle: &CurvatureBundle,
    cfg: &RBSolitonConfig,
    structure: Option<&MsqeStructure>,
    plan: &SamplePlan,
) -> Result<SolitonReport, SolitonError> {
    let n = bundle.dim();
    if cfg.u.len() != n {
        return Err(SolitonError::BadPotential {
            got: cfg.u.len(),
            dim: n,
        });
    }
    let g = bundle.metric();
    let r = bundle.scalar();
    let m_field = ops::lie_derivative_metric(bundle, &cfg.u)
        .scale(&Expr::rational(1, 2))
        .add(bundle.ricci());

    let rho = Expr::Const(cfg.rho.clone());
    let lambda_separable = cfg.rho.is_zero() || expr::constant_value(r).is_some();
    // With lambda the only unknown, move rho r g to the flow side so the
    // fitted scalar is lambda itself; otherwise fit the affine combination.
    let (fit_name, fit_target) = if lambda_separable {
        ("lambda", m_field.sub(&g.scale(&expr::mul(&rho, r))))
    } else {
        ("lambda + rho*r", m_field.clone())
    };
    let mut rows = Vec::with_capacity(n * n);
    for idx in indices(n, 2) {
        rows.push((vec![g.get(&idx).clone()], fit_target.get(&idx).clone()));
    }
    let fit = solve_rows(&[fit_name], &rows, plan);

    let mut diagnostics = Vec::new();
    if !lambda_separable {
        diagnostics.push(
            "scalar curvature is not constant and rho is nonzero: only lambda + rho*r \
             is pointwise observable, lambda is not separable"
                .to_string(),
        );
    }

    let fitted = fit
        .consensus
        .as_ref()
        .filter(|_| lambda_separable && fit.fits() && fit.point_independent)
        .map(|c| c[0].clone());
    let lambda: Option<Expr> = match (&cfg.lambda, &fitted) {
        (Some(l), _) => Some(Expr::Const(l.clone())),
        (None, Some(NumericValue::Exact(q))) => Some(Expr::Const(q.clone())),
        _ => None,
    };

    let with_lambda = lambda.clone().unwrap_or_else(Expr::zero);
    let coefficient = expr::add(&with_lambda, &expr::mul(&rho, r));
    let residual = check_field_zero(
        "flow equation residual",
        &m_field.sub(&g.scale(&coefficient)),
        &[&m_field, g],
        plan,
        FIT_TOL,
    );
    if lambda.is_none() {
        diagnostics.push("no constant lambda pinned; the residual omits the lambda term".into());
    }

    let classification = if let Some(l) = &cfg.lambda {
        if residual.passed() {
            SolitonClass::of_rational(l)
        } else {
            diagnostics
                .push("supplied lambda does not satisfy the equation at the sample points".into());
            SolitonClass::Indeterminate
        }
    } else {
        match &fitted {
            Some(NumericValue::Exact(q)) => SolitonClass::of_rational(q),
            Some(NumericValue::Float(f)) => SolitonClass::of_float(*f, fit.scale, fit.tol),
            None => {
                if lambda_separable && !fit.fits() {
                    diagnostics.push(
                        "no scalar multiple of the metric matches the flow side; the best fit \
                         leaves a residual"
                            .into(),
                    );
                } else if lambda_separable && !fit.point_independent {
                    diagnostics.push("fitted lambda varies across sample points".into());
                }
                SolitonClass::Indeterminate
            }
        }
    };

    let structural_lambda = structure
        .and_then(|s| s.psis())
        .map(|ps| lambda_from_structure(&ps[0], &ps[1], &ps[2], n, &cfg.rho));

    Ok(SolitonReport {
        coupling: special_coupling(&cfg.rho, n),
        residual,
        fit,
        lambda_separable,
        lambda,
        classification,
        divergence: ops::vector_divergence(&cfg.u, bundle),
        structural_lambda,
        diagnostics,
    })
}

/// lambda = (1 - rho n) P1 + (1 - rho) P2 - rho P3.
pub fn lambda_from_structure(
    p1: &Expr,
    p2: &Expr,
    p3: &Expr,
    n: usize,
    rho: &BigRational,
) -> Expr {
    let nr = BigRational::from_integer((n as i64).into());
    let c1 = Expr::Const(BigRational::one() - rho * nr);
    let c2 = Expr::Const(BigRational::one() - rho);
    let c3 = Expr::Const(-rho.clone());
    expr::sum_of(&[
        expr::mul(&c1, p1),
        expr::mul(&c2, p2),
        expr::mul(&c3, p3),
    ])
}

#[derive(Debug)]
pub struct SpecialRow {
    pub coupling: SpecialCoupling,
    pub rho: BigRational,
    pub lambda: Expr,
    /// Sign classification when lambda is a constant, else indeterminate.
    pub classification: SolitonClass,
}

/// Structural lambda at the four named couplings.
pub fn specialization_table(p1: &Expr, p2: &Expr, p3: &Expr, n: usize) -> Vec<SpecialRow> {
    let nn = n as i64;
    let named = [
        (SpecialCoupling::Ricci, BigRational::zero()),
        (
            SpecialCoupling::Einstein,
            BigRational::new(1.into(), 2.into()),
        ),
        (
            SpecialCoupling::TracelessRicci,
            BigRational::new(1.into(), nn.into()),
        ),
        (
            SpecialCoupling::Schouten,
            BigRational::new(1.into(), (2 * (nn - 1)).into()),
        ),
    ];
    named
        .into_iter()
        .map(|(coupling, rho)| {
            let lambda = lambda_from_structure(p1, p2, p3, n, &rho);
            let classification = expr::constant_value(&lambda)
                .map(|v| SolitonClass::of_rational(&v))
                .unwrap_or(SolitonClass::Indeterminate);
            SpecialRow {
                coupling,
                rho,
                lambda,
                classification,
            }
        })
        .collect()
}

fn vector_field(m: &Arc<ChartManifold>, u: &[Expr]) -> TensorField {
    let mut out = TensorField::zeros(m, 1, 0);
    for (i, c) in u.iter().enumerate() {
        out.set(&[i], c.clone());
    }
    out
}

#[derive(Debug)]
pub struct TorseFormingReport {
    pub classifier: VectorFieldReport,
    /// D_{xi1} xi1 against zero.
    pub autoparallel: ResidualReport,
    /// Fourth coefficient against zero; a failure violates the theorem's
    /// consequence, not the computation.
    pub psi4_residual: ResidualReport,
    /// Scale the coefficients predict: P2 - P3 - P5 D(xi2, xi2).
    pub predicted_scale: Expr,
    /// Covariant derivative of xi1 against
    /// f (Id - eps1 A (x) xi1) with the predicted f. The unit-normalized
    /// generator needs the signature factor for the derivative to stay
    /// orthogonal to xi1; the classifier's alpha consistency records how
    /// the literal unsigned form differs.
    pub shape_residual: ResidualReport,
    /// D(., xi2) = D(xi2, xi2) g(., xi2), the eigenvector conclusion.
    pub eigenvector: EigenvectorReport,
}

impl TorseFormingReport {
    pub fn all_passed(&self) -> bool {
        self.autoparallel.passed()
            && self.psi4_residual.passed()
            && self.shape_residual.passed()
            && self
                .eigenvector
                .residual
                .as_ref()
                .is_some_and(|r| r.passed())
    }
}

/// Consequence chain for a torse-forming first generator driving the flow.
/// The potential must be the generator itself and must classify as
/// torse-forming (or stronger) before any consequence is evaluated.
pub fn torse_forming_consequences(
    bundle: &CurvatureBundle,
    s: &MsqeStructure,
    cfg: &RBSolitonConfig,
    plan: &SamplePlan,
) -> Result<TorseFormingReport, SolitonError> {
    let n = bundle.dim();
    if cfg.u.len() != n {
        return Err(SolitonError::BadPotential {
            got: cfg.u.len(),
            dim: n,
        });
    }
    let xi1 = s.xi1();
    for (a, b) in cfg.u.iter().zip(xi1) {
        if !expr::provably_zero(&expr::sub(a, b)) {
            return Err(SolitonError::PotentialMismatch);
        }
    }
    let classifier = classify_vector_field(bundle, xi1, plan);
    if classifier.strongest == VectorClass::Generic {
        return Err(SolitonError::NotTorseForming);
    }
    let ps = s.psis().ok_or(SolitonError::MissingCoefficients)?;

    let m = bundle.manifold();
    let auto = vector_field(m, &ops::directional_derivative_vector(xi1, xi1, bundle));
    let autoparallel =
        check_field_zero("generator autoparallelism", &auto, &[], plan, FIT_TOL);

    let psi4_residual = check_field_zero(
        "fourth coefficient function",
        &TensorField::scalar(m, ps[3].clone()),
        &[],
        plan,
        FIT_TOL,
    );

    let d22 = ops::apply_bilinear(s.d_tensor(), s.xi2(), s.xi2());
    let predicted_scale = expr::sub(&expr::sub(&ps[1], &ps[2]), &expr::mul(&ps[4], &d22));

    let grad = ops::covariant_derivative(&vector_field(m, xi1), bundle);
    let a_form = s.a_form();
    let eps1 = Expr::int(s.eps1() as i64);
    let mut expected = TensorField::zeros(m, 1, 1);
    for i in 0..n {
        for j in 0..n {
            let mut shape = expr::neg(&expr::mul(
                &eps1,
                &expr::mul(a_form.get(&[j]), &xi1[i]),
            ));
            if i == j {
                shape = expr::add(&shape, &Expr::one());
            }
            expected.set(&[i, j], expr::mul(&predicted_scale, &shape));
        }
    }
    let shape_residual = check_field_zero(
        "generator derivative against the predicted torse-forming shape",
        &grad.sub(&expected),
        &[&grad],
        plan,
        FIT_TOL,
    );

    let eigenvector = eigenvector_check(bundle, s.d_tensor(), s.xi2(), plan);

    Ok(TorseFormingReport {
        classifier,
        autoparallel,
        psi4_residual,
        predicted_scale,
        shape_residual,
        eigenvector,
    })
}

#[derive(Debug)]
pub struct ConharmonicFlatReport {
    /// Conharmonic tensor against zero: the applicability gate.
    pub flatness: ResidualReport,
    pub applicable: bool,
    /// r against zero (flatness forces it).
    pub scalar_zero: Option<ResidualReport>,
    /// n P1 + P2 + P3 against zero, when coefficients are supplied.
    pub coefficient_relation: Option<ResidualReport>,
    /// div U.
    pub divergence: Expr,
    /// div U - n lambda, when a lambda was pinned.
    pub divergence_relation: Option<ResidualReport>,
    /// The flow-equation run the relation draws lambda from.
    pub soliton: SolitonReport,
}

/// Consequences of conharmonic flatness: zero scalar curvature, the
/// coefficient balance, and the divergence law div U = n lambda that makes
/// the soliton steady exactly when the potential is divergence-free. When
/// the conharmonic tensor is not zero the consequence checks are skipped
/// and the report says so through `applicable`.
pub fn conharmonic_flat_consequences(
    bundle: &CurvatureBundle,
    structure: Option<&MsqeStructure>,
    cfg: &RBSolitonConfig,
    plan: &SamplePlan,
) -> Result<ConharmonicFlatReport, SolitonError> {
    let conh = conharmonic_tensor(bundle)?;
    let low = lowered_zw(bundle);
    let flatness = check_field_zero("conharmonic tensor", &conh, &[&low], plan, FIT_TOL);
    let applicable = flatness.passed();
    let soliton = soliton_residual(bundle, cfg, structure, plan)?;
    let m = bundle.manifold();
    let n = bundle.dim();

    let mut scalar_zero = None;
    let mut coefficient_relation = None;
    let mut divergence_relation = None;
    if applicable {
        scalar_zero = Some(check_field_zero(
            "scalar curvature",
            &TensorField::scalar(m, bundle.scalar().clone()),
            &[],
            plan,
            FIT_TOL,
        ));
        if let Some(ps) = structure.and_then(|s| s.psis()) {
            let relation = expr::sum_of(&[
                expr::mul(&Expr::int(n as i64), &ps[0]),
                ps[1].clone(),
                ps[2].clone(),
            ]);
            coefficient_relation = Some(check_field_zero(
                "coefficient balance n*P1 + P2 + P3",
                &TensorField::scalar(m, relation),
                &[],
                plan,
                FIT_TOL,
            ));
        }
        if let Some(lambda) = &soliton.lambda {
            let gap = expr::sub(
                &soliton.divergence,
                &expr::mul(&Expr::int(n as i64), lambda),
            );
            divergence_relation = Some(check_field_zero(
                "potential divergence against n*lambda",
                &TensorField::scalar(m, gap),
                &[],
                plan,
                FIT_TOL,
            ));
        }
    }

    Ok(ConharmonicFlatReport {
        flatness,
        applicable,
        scalar_zero,
        coefficient_relation,
        divergence: soliton.divergence.clone(),
        divergence_relation,
        soliton,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sample::EvalMode;
    use crate::structure::GeneratorInput;
    use crate::tensor::Convention;

    fn chart(n: usize) -> Arc<ChartManifold> {
        ChartManifold::new((1..=n).map(|i| format!("x{i}")).collect()).unwrap()
    }

    fn plan(dim: usize) -> SamplePlan {
        let lo = BigRational::new(1.into(), 2.into());
        let hi = BigRational::from_integer(3.into());
        SamplePlan::new(dim, 12, 0, &lo, &hi, EvalMode::Rational)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn diag_bundle(m: &Arc<ChartManifold>, entries: &[&str]) -> CurvatureBundle {
        let mut g = TensorField::zeros(m, 0, 2);
        for (i, e) in entries.iter().enumerate() {
            g.set(&[i, i], m.parse(e).unwrap());
        }
        CurvatureBundle::new(g, Convention::default()).unwrap()
    }

    fn cfg(u: Vec<Expr>, rho: BigRational, lambda: Option<BigRational>) -> RBSolitonConfig {
        RBSolitonConfig { u, rho, lambda }
    }

    #[test]
    fn the_flow_equation_examples_classify_as_printed() {
        // flat chart, zero potential: lambda fits to zero, steady
        let m = chart(4);
        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let zero_u = vec![Expr::zero(); 4];
        let report =
            soliton_residual(&mink, &cfg(zero_u, rat(1, 3), None), None, &plan(4)).unwrap();
        assert_eq!(report.classification, SolitonClass::Steady);
        assert!(report.residual.passed());
        assert!(report.lambda_separable);
        assert_eq!(report.coupling, None);
        assert!(expr::provably_zero(report.lambda.as_ref().unwrap()));
        assert!(expr::provably_zero(&report.divergence));

        // position field on the flat plane: L_U g = 2g, lambda = 1
        let m2 = chart(2);
        let plane = diag_bundle(&m2, &["1", "1"]);
        let u = vec![m2.parse("x1").unwrap(), m2.parse("x2").unwrap()];
        let lie = ops::lie_derivative_metric(&plane, &u);
        assert!(lie.sub(&plane.metric().scale(&Expr::int(2))).is_zero());
        let report =
            soliton_residual(&plane, &cfg(u, BigRational::zero(), None), None, &plan(2)).unwrap();
        assert_eq!(report.classification, SolitonClass::Expanding);
        assert_eq!(report.coupling, Some(SpecialCoupling::Ricci));
        assert!(report.residual.passed());
        assert_eq!(
            expr::constant_value(report.lambda.as_ref().unwrap()).unwrap(),
            BigRational::one()
        );
        assert_eq!(expr::constant_value(&report.divergence).unwrap(), rat(2, 1));

        // mixed-signature running example driven by its own generator: the
        // Ricci tensor is not a multiple of g, so no lambda works
        let m = chart(4);
        let b = diag_bundle(&m, &["1", "2*x1^2", "2*x2^2", "-1"]);
        let xi1 = vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::int(-1)];
        let report = soliton_residual(&b, &cfg(xi1, rat(1, 2), None), None, &plan(4)).unwrap();
        assert_eq!(report.coupling, Some(SpecialCoupling::Einstein));
        assert_eq!(report.classification, SolitonClass::Indeterminate);
        assert!(!report.fit.fits());
        assert!(report
            .diagnostics
            .iter()
            .any(|d| d.contains("leaves a residual")));
    }

    #[test]
    fn a_supplied_lambda_is_validated_not_trusted() {
        let m = chart(2);
        let plane = diag_bundle(&m, &["1", "1"]);
        let u = vec![m.parse("x1").unwrap(), m.parse("x2").unwrap()];
        let good = soliton_residual(
            &plane,
            &cfg(u.clone(), BigRational::zero(), Some(BigRational::one())),
            None,
            &plan(2),
        )
        .unwrap();
        assert_eq!(good.classification, SolitonClass::Expanding);
        assert!(good.residual.passed());

        let bad = soliton_residual(
            &plane,
            &cfg(u, BigRational::zero(), Some(rat(2, 1))),
            None,
            &plan(2),
        )
        .unwrap();
        assert_eq!(bad.classification, SolitonClass::Indeterminate);
        assert!(!bad.residual.passed());
        assert!(bad.diagnostics.iter().any(|d| d.contains("supplied lambda")));
    }

    #[test]
    fn nonconstant_scalar_curvature_entangles_lambda() {
        let m = chart(3);
        let curved = diag_bundle(&m, &["1", "x1^2", "x1^2"]);
        assert!(expr::constant_value(curved.scalar()).is_none());
        let report = soliton_residual(
            &curved,
            &cfg(vec![Expr::zero(); 3], rat(1, 2), None),
            None,
            &plan(3),
        )
        .unwrap();
        assert!(!report.lambda_separable);
        assert!(report.lambda.is_none());
        assert_eq!(report.classification, SolitonClass::Indeterminate);
        assert_eq!(report.fit.names, vec!["lambda + rho*r".to_string()]);
        assert!(report
            .diagnostics
            .iter()
            .any(|d| d.contains("not separable")));
    }

    #[test]
    fn special_couplings_are_recognized() {
        assert_eq!(
            special_coupling(&BigRational::zero(), 4),
            Some(SpecialCoupling::Ricci)
        );
        assert_eq!(
            special_coupling(&rat(1, 2), 4),
            Some(SpecialCoupling::Einstein)
        );
        assert_eq!(
            special_coupling(&rat(1, 4), 4),
            Some(SpecialCoupling::TracelessRicci)
        );
        assert_eq!(
            special_coupling(&rat(1, 6), 4),
            Some(SpecialCoupling::Schouten)
        );
        assert_eq!(special_coupling(&rat(2, 7), 4), None);
        // dimension two collapses the last three onto 1/2: Einstein wins
        assert_eq!(
            special_coupling(&rat(1, 2), 2),
            Some(SpecialCoupling::Einstein)
        );
    }

    #[test]
    fn named_couplings_classify_like_the_corollaries() {
        let sign_class = |v: &BigRational| SolitonClass::of_rational(v);
        let mut rng = SplitMix64::new(7);
        for _ in 0..100 {
            let p = |rng: &mut SplitMix64| {
                let mut num = rng.range_i64(-9, 9);
                if num == 0 {
                    num = 1;
                }
                rat(num, rng.range_i64(1, 9))
            };
            let (p1, p2, p3) = (p(&mut rng), p(&mut rng), p(&mut rng));
            let n = rng.range_i64(3, 8) as usize;
            let nn = n as i64;
            let exprs = [
                Expr::Const(p1.clone()),
                Expr::Const(p2.clone()),
                Expr::Const(p3.clone()),
            ];
            let table = specialization_table(&exprs[0], &exprs[1], &exprs[2], n);
            assert_eq!(table.len(), 4);
            for row in &table {
                let lambda = expr::constant_value(&row.lambda).unwrap();
                let (closed, class) = match row.coupling {
                    SpecialCoupling::Ricci => {
                        let l = &p1 + &p2;
                        (l.clone(), sign_class(&l))
                    }
                    SpecialCoupling::Einstein => {
                        // expanding exactly when (n-2)P1 - P2 + P3 < 0
                        let gauge =
                            rat(nn - 2, 1) * &p1 - &p2 + &p3;
                        (-rat(1, 2) * &gauge, sign_class(&(-rat(1, 2) * &gauge)))
                    }
                    SpecialCoupling::TracelessRicci => {
                        let l = (rat(nn - 1, 1) * &p2 - &p3) / rat(nn, 1);
                        (l.clone(), sign_class(&l))
                    }
                    SpecialCoupling::Schouten => {
                        let l = (rat(nn - 2, 1) * &p1 + rat(2 * nn - 3, 1) * &p2 - &p3)
                            / rat(2 * (nn - 1), 1);
                        (l.clone(), sign_class(&l))
                    }
                };
                assert_eq!(lambda, closed, "{:?} n={n}", row.coupling);
                assert_eq!(row.classification, class, "{:?} n={n}", row.coupling);
            }
        }
    }

    #[test]
    fn a_structured_fixture_satisfies_the_flow_equation_in_the_generator_slot() {
        // flat chart, position-field potential, coefficients arranged so the
        // structural lambda equals the true one
        let m = chart(4);
        let b = diag_bundle(&m, &["1", "1", "1", "1"]);
        let u: Vec<Expr> = (1..=4).map(|i| m.parse(&format!("x{i}")).unwrap()).collect();
        let xi1 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
        let xi2 = vec![Expr::zero(), Expr::one(), Expr::zero(), Expr::zero()];
        let psis = [
            Expr::rational(1, 2),
            Expr::rational(1, 2),
            Expr::int(3),
            Expr::zero(),
            Expr::one(),
        ];
        let s = MsqeStructure::resolve(
            &b,
            GeneratorInput::vector(xi1.clone()),
            GeneratorInput::vector(xi2),
            TensorField::zeros(&m, 0, 2),
            Some(psis),
            1,
            1,
        )
        .unwrap();
        let rho = BigRational::zero();
        let structural = lambda_from_structure(
            &Expr::rational(1, 2),
            &Expr::rational(1, 2),
            &Expr::int(3),
            4,
            &rho,
        );
        assert_eq!(expr::constant_value(&structural).unwrap(), BigRational::one());
        let report = soliton_residual(
            &b,
            &cfg(u, rho, expr::constant_value(&structural)),
            Some(&s),
            &plan(4),
        )
        .unwrap();
        assert!(report.residual.passed());
        assert!(expr::provably_zero(&expr::sub(
            report.structural_lambda.as_ref().unwrap(),
            report.lambda.as_ref().unwrap(),
        )));
        // the generator slot of the residual vanishes identically
        let residual_field = ops::lie_derivative_metric(&b, &report_u(&m))
            .scale(&Expr::rational(1, 2))
            .add(b.ricci())
            .sub(&b.metric().scale(report.lambda.as_ref().unwrap()));
        assert!(expr::provably_zero(&ops::apply_bilinear(
            &residual_field,
            &xi1,
            &xi1
        )));
    }

    fn report_u(m: &Arc<ChartManifold>) -> Vec<Expr> {
        (1..=4).map(|i| m.parse(&format!("x{i}")).unwrap()).collect()
    }

    #[test]
    fn scaling_the_potential_scales_the_lie_derivative_linearly() {
        let m = chart(4);
        let b = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let u: Vec<Expr> = vec![
            m.parse("x1^2").unwrap(),
            m.parse("x1*x2").unwrap(),
            Expr::zero(),
            m.parse("x3").unwrap(),
        ];
        let scaled: Vec<Expr> = u.iter().map(|c| expr::mul(&Expr::int(3), c)).collect();
        let lie = ops::lie_derivative_metric(&b, &u);
        let lie_scaled = ops::lie_derivative_metric(&b, &scaled);
        assert!(lie_scaled.sub(&lie.scale(&Expr::int(3))).is_zero());

        // Killing rotation: steady, and steady after scaling with Ric = 0
        let killing = vec![
            m.parse("-x2").unwrap(),
            m.parse("x1").unwrap(),
            Expr::zero(),
            Expr::zero(),
        ];
        let five = killing
            .iter()
            .map(|c| expr::mul(&Expr::int(5), c))
            .collect::<Vec<_>>();
        for field in [killing, five] {
            let report = soliton_residual(
                &b,
                &cfg(field, BigRational::zero(), None),
                None,
                &plan(4),
            )
            .unwrap();
            assert_eq!(report.classification, SolitonClass::Steady);
        }
    }

    fn warped_fixture(m: &Arc<ChartManifold>) -> (CurvatureBundle, MsqeStructure) {
        let b = diag_bundle(m, &["-1", "x1^2", "x1^2", "x1^2"]);
        let xi1 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
        let xi2 = vec![Expr::zero(), m.parse("1/x1").unwrap(), Expr::zero(), Expr::zero()];
        let mut d = TensorField::zeros(m, 0, 2);
        for i in 1..4 {
            d.set(&[i, i], m.parse("3*x1^2").unwrap());
        }
        let psis = [
            Expr::int(5),
            m.parse("1/x1 + 3").unwrap(),
            Expr::zero(),
            Expr::zero(),
            Expr::one(),
        ];
        let s = MsqeStructure::resolve(
            &b,
            GeneratorInput::vector(xi1),
            GeneratorInput::vector(xi2),
            d,
            Some(psis),
            -1,
            1,
        )
        .unwrap();
        (b, s)
    }

    #[test]
    fn torse_forming_consequences_certify_a_warped_generator() {
        let m = chart(4);
        let (b, s) = warped_fixture(&m);
        let config = cfg(s.xi1().to_vec(), BigRational::zero(), None);
        let report = torse_forming_consequences(&b, &s, &config, &plan(4)).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert!(expr::provably_zero(&expr::sub(
            &report.predicted_scale,
            &m.parse("1/x1").unwrap(),
        )));
        assert!(expr::provably_zero(&expr::sub(
            report.eigenvector.eigenvalue.as_ref().unwrap(),
            &Expr::int(3),
        )));
    }

    #[test]
    fn a_forced_fourth_coefficient_breaks_the_hypothesis() {
        let m = chart(4);
        let (b, s) = warped_fixture(&m);
        let mut psis = s.psis().unwrap().clone();
        psis[3] = m.parse("x2").unwrap();
        let spoiled = MsqeStructure::resolve(
            &b,
            GeneratorInput::vector(s.xi1().to_vec()),
            GeneratorInput::vector(s.xi2().to_vec()),
            s.d_tensor().clone(),
            Some(psis),
            -1,
            1,
        )
        .unwrap();
        let config = cfg(spoiled.xi1().to_vec(), BigRational::zero(), None);
        let report = torse_forming_consequences(&b, &spoiled, &config, &plan(4)).unwrap();
        assert!(!report.psi4_residual.passed());
        assert!(report.shape_residual.passed());
        assert!(report.autoparallel.passed());
    }

    #[test]
    fn a_parallel_generator_reduces_to_the_coefficient_balance() {
        let m = chart(4);
        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let xi1 = vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()];
        let xi2 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
        let mut d = TensorField::zeros(&m, 0, 2);
        for i in 0..3 {
            d.set(&[i, i], Expr::int(3));
        }
        // P2 - P3 - P5 D(xi2,xi2) = 5 - 2 - 3 = 0 matches the parallel f = 0
        let psis = [Expr::one(), Expr::int(5), Expr::int(2), Expr::zero(), Expr::one()];
        let s = MsqeStructure::resolve(
            &mink,
            GeneratorInput::vector(xi1),
            GeneratorInput::vector(xi2),
            d,
            Some(psis),
            -1,
            1,
        )
        .unwrap();
        let config = cfg(s.xi1().to_vec(), BigRational::zero(), None);
        let report = torse_forming_consequences(&mink, &s, &config, &plan(4)).unwrap();
        assert_eq!(report.classifier.strongest, VectorClass::Parallel);
        assert!(expr::provably_zero(&report.predicted_scale));
        assert!(report.all_passed());
    }

    #[test]
    fn torse_forming_preconditions_are_enforced() {
        let m = chart(4);
        let b = diag_bundle(&m, &["1", "1", "1", "1"]);
        // swirling field: not torse-forming anywhere
        let xi1 = vec![m.parse("x2").unwrap(), m.parse("x1").unwrap(), Expr::zero(), Expr::zero()];
        let xi2 = vec![Expr::zero(), Expr::zero(), Expr::one(), Expr::zero()];
        let s = MsqeStructure::resolve(
            &b,
            GeneratorInput::vector(xi1),
            GeneratorInput::vector(xi2),
            TensorField::zeros(&m, 0, 2),
            Some([Expr::one(), Expr::one(), Expr::one(), Expr::one(), Expr::one()]),
            1,
            1,
        )
        .unwrap();
        let config = cfg(s.xi1().to_vec(), BigRational::zero(), None);
        assert!(matches!(
            torse_forming_consequences(&b, &s, &config, &plan(4)),
            Err(SolitonError::NotTorseForming)
        ));

        let other = cfg(vec![Expr::one(); 4], BigRational::zero(), None);
        assert!(matches!(
            torse_forming_consequences(&b, &s, &other, &plan(4)),
            Err(SolitonError::PotentialMismatch)
        ));
    }

    #[test]
    fn conharmonic_flat_consequences_on_flat_charts() {
        // zero potential on the flat mixed-signature chart: steady branch
        let m = chart(4);
        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let report = conharmonic_flat_consequences(
            &mink,
            None,
            &cfg(vec![Expr::zero(); 4], rat(1, 3), None),
            &plan(4),
        )
        .unwrap();
        assert!(report.applicable);
        assert!(report.scalar_zero.as_ref().unwrap().passed());
        assert!(report.coefficient_relation.is_none());
        assert!(report.divergence_relation.as_ref().unwrap().passed());
        assert_eq!(report.soliton.classification, SolitonClass::Steady);
        assert!(expr::provably_zero(&report.divergence));

        // position field on the flat chart: expanding branch, div U = n*lambda
        let b = diag_bundle(&m, &["1", "1", "1", "1"]);
        let u: Vec<Expr> = (1..=4).map(|i| m.parse(&format!("x{i}")).unwrap()).collect();
        let xi1 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
        let xi2 = vec![Expr::zero(), Expr::one(), Expr::zero(), Expr::zero()];
        let psis = [
            Expr::rational(1, 2),
            Expr::rational(1, 2),
            Expr::rational(-5, 2),
            Expr::zero(),
            Expr::one(),
        ];
        let s = MsqeStructure::resolve(
            &b,
            GeneratorInput::vector(xi1),
            GeneratorInput::vector(xi2),
            TensorField::zeros(&m, 0, 2),
            Some(psis),
            1,
            1,
        )
        .unwrap();
        let report = conharmonic_flat_consequences(
            &b,
            Some(&s),
            &cfg(u, BigRational::zero(), None),
            &plan(4),
        )
        .unwrap();
        assert!(report.applicable);
        assert!(report.scalar_zero.as_ref().unwrap().passed());
        // 4 * (1/2) + 1/2 - 5/2 = 0
        assert!(report.coefficient_relation.as_ref().unwrap().passed());
        assert_eq!(expr::constant_value(&report.divergence).unwrap(), rat(4, 1));
        assert!(report.divergence_relation.as_ref().unwrap().passed());
        assert_eq!(report.soliton.classification, SolitonClass::Expanding);
        assert!(expr::provably_zero(&expr::sub(
            report.soliton.structural_lambda.as_ref().unwrap(),
            report.soliton.lambda.as_ref().unwrap(),
        )));
    }

    #[test]
    fn curved_charts_leave_the_flat_consequences_inapplicable() {
        let m = chart(3);
        let curved = diag_bundle(&m, &["1", "x1^2", "x1^2"]);
        let report = conharmonic_flat_consequences(
            &curved,
            None,
            &cfg(vec![Expr::zero(); 3], BigRational::zero(), None),
            &plan(3),
        )
        .unwrap();
        assert!(!report.applicable);
        assert!(report.scalar_zero.is_none());
        assert!(report.coefficient_relation.is_none());
        assert!(report.divergence_relation.is_none());
    }
}

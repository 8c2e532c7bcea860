//! Structure detection against a fixed curvature bundle: frame audits,
//! least-squares coefficient fits, recurrence classification and vector
//! field classification.
//!
//! Fits are per sample point. In rational mode every solve that stays
//! rational goes through the exact normal equations, so "residual zero" and
//! "coefficients agree across points" are exact statements; a point whose
//! evaluation touches `exp` falls back to floating QR for that point only.
//! Audits report findings, they never repair the input.

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::check::{check_field_zero, ResidualReport};
use crate::derived::{kulkarni_wedge, metric_square};
use crate::expr::{self, evaluate, rational_to_f64, Expr, NumericValue, Point};
use crate::linalg::{lsq_exact, lsq_float};
use crate::sample::{EvalMode, SamplePlan};
use crate::structure::MsqeStructure;
use crate::tensor::{indices, ops, CurvatureBundle, TensorField};

/// Residual tolerance for float-mode fits, relative to the right-hand side
/// scale (floored at one).
pub const FIT_TOL: f64 = 1e-9;

/// Relative tolerance for deciding that fitted coefficients agree across
/// sample points when any of them are floats.
pub const POINT_INDEPENDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("structure carries no coefficient functions")]
    MissingCoefficients,
    #[error("expected a ({contra},{co}) field for this operation")]
    Shape { contra: usize, co: usize },
}

/// One per-point linear solve.
#[derive(Debug, Clone)]
pub struct PointFit {
    pub point_index: usize,
    pub coefficients: Vec<NumericValue>,
    /// Norm of the least-squares residual at this point.
    pub residual_norm: f64,
    /// The residual is an exact rational zero, not merely small.
    pub residual_exactly_zero: bool,
    pub rank: usize,
    pub nullspace_dim: usize,
}

/// A least-squares fit evaluated over the whole sample plan.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub names: Vec<String>,
    pub points: Vec<PointFit>,
    pub points_skipped: usize,
    /// Greatest per-point residual norm.
    pub max_residual: f64,
    /// Scale of the right-hand side, floored at one; tolerances are
    /// relative to this.
    pub scale: f64,
    pub tol: f64,
    /// Every surviving point solved exactly with zero residual.
    pub all_exact: bool,
    /// Coefficients agree across points: exactly where both sides are
    /// rational, within `POINT_INDEPENDENCE_TOL` otherwise.
    pub point_independent: bool,
    /// Shared coefficients, present when `point_independent` held.
    pub consensus: Option<Vec<NumericValue>>,
    pub full_rank: bool,
    /// Nullspace basis of the first rank-deficient point, as evidence of
    /// the indeterminacy.
    pub nullspace_example: Option<(usize, Vec<Vec<NumericValue>>)>,
    pub warnings: Vec<String>,
}

impl FitOutcome {
    /// No sample point survived evaluation.
    pub fn indeterminate(&self) -> bool {
        self.points.is_empty()
    }

    /// The model explains the target at every usable point, exactly or
    /// within the float tolerance.
    pub fn fits(&self) -> bool {
        !self.points.is_empty() && self.max_residual <= self.tol * self.scale
    }
}

fn numeric_to_f64(v: &NumericValue) -> f64 {
    v.to_f64()
}

fn numeric_is_zero(v: &NumericValue, tol: f64) -> bool {
    match v {
        NumericValue::Exact(r) => r.is_zero(),
        NumericValue::Float(f) => f.abs() <= tol,
    }
}

fn coefficients_agree(a: &[NumericValue], b: &[NumericValue]) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (NumericValue::Exact(p), NumericValue::Exact(q)) => p == q,
        _ => {
            let (xf, yf) = (numeric_to_f64(x), numeric_to_f64(y));
            (xf - yf).abs() <= POINT_INDEPENDENCE_TOL * xf.abs().max(yf.abs()).max(1.0)
        }
    })
}

fn eval_point(
    rows: &[(Vec<Expr>, Expr)],
    point: &Point,
) -> Result<Vec<(Vec<NumericValue>, NumericValue)>, crate::expr::EvalError> {
    rows.iter()
        .map(|(cols, rhs)| {
            let cs = cols.iter().map(|c| evaluate(c, point)).collect::<Result<Vec<_>, _>>()?;
            Ok((cs, evaluate(rhs, point)?))
        })
        .collect()
}

/// Solve the same symbolic linear system at every sample point.
pub(crate) fn solve_rows(names: &[&str], rows: &[(Vec<Expr>, Expr)], plan: &SamplePlan) -> FitOutcome {
    let cols = names.len();
    debug_assert!(rows.iter().all(|(c, _)| c.len() == cols));
    let mut out = FitOutcome {
        names: names.iter().map(|s| s.to_string()).collect(),
        points: Vec::new(),
        points_skipped: 0,
        max_residual: 0.0,
        scale: 1.0,
        tol: FIT_TOL,
        all_exact: true,
        point_independent: true,
        consensus: None,
        full_rank: true,
        nullspace_example: None,
        warnings: Vec::new(),
    };

    for (pi, point) in plan.points.iter().enumerate() {
        let values = match eval_point(rows, point) {
            Ok(v) => v,
            Err(e) => {
                out.points_skipped += 1;
                out.warnings.push(format!("sample point {pi} skipped: {e}"));
                continue;
            }
        };
        for (_, rhs) in &values {
            out.scale = out.scale.max(numeric_to_f64(rhs).abs());
        }
        let exact = plan.mode == EvalMode::Rational
            && values
                .iter()
                .all(|(cs, r)| {
                    cs.iter().all(|v| matches!(v, NumericValue::Exact(_)))
                        && matches!(r, NumericValue::Exact(_))
                });

        let fit = if exact {
            let a: Vec<Vec<BigRational>> = values
                .iter()
                .map(|(cs, _)| {
                    cs.iter()
                        .map(|v| match v {
                            NumericValue::Exact(r) => r.clone(),
                            NumericValue::Float(_) => unreachable!(),
                        })
                        .collect()
                })
                .collect();
            let b: Vec<BigRational> = values
                .iter()
                .map(|(_, r)| match r {
                    NumericValue::Exact(r) => r.clone(),
                    NumericValue::Float(_) => unreachable!(),
                })
                .collect();
            let solved = lsq_exact(&a, &b);
            if !solved.nullspace.is_empty() && out.nullspace_example.is_none() {
                out.nullspace_example = Some((
                    pi,
                    solved
                        .nullspace
                        .iter()
                        .map(|v| v.iter().cloned().map(NumericValue::Exact).collect())
                        .collect(),
                ));
            }
            PointFit {
                point_index: pi,
                residual_norm: rational_to_f64(&solved.residual_sq).sqrt(),
                residual_exactly_zero: solved.residual_sq.is_zero(),
                rank: solved.rank,
                nullspace_dim: solved.nullspace.len(),
                coefficients: solved.solution.into_iter().map(NumericValue::Exact).collect(),
            }
        } else {
            let a: Vec<Vec<f64>> = values
                .iter()
                .map(|(cs, _)| cs.iter().map(numeric_to_f64).collect())
                .collect();
            let b: Vec<f64> = values.iter().map(|(_, r)| numeric_to_f64(r)).collect();
            let solved = lsq_float(&a, &b);
            PointFit {
                point_index: pi,
                residual_norm: solved.residual_norm,
                residual_exactly_zero: false,
                rank: solved.rank,
                nullspace_dim: cols - solved.rank,
                coefficients: solved.solution.into_iter().map(NumericValue::Float).collect(),
            }
        };

        out.all_exact &= fit.residual_exactly_zero;
        out.max_residual = out.max_residual.max(fit.residual_norm);
        out.full_rank &= fit.rank == cols;
        out.points.push(fit);
    }

    if out.points.is_empty() {
        out.all_exact = false;
        out.warnings.push("no evaluable sample points".into());
    } else {
        out.point_independent = out
            .points
            .iter()
            .all(|p| coefficients_agree(&p.coefficients, &out.points[0].coefficients));
        if out.point_independent {
            out.consensus = Some(out.points[0].coefficients.clone());
        }
        if !out.full_rank {
            out.warnings.push(
                "rank-deficient system: coefficients shown are the minimum-norm representative"
                    .into(),
            );
        }
    }
    out
}

/// Frame audit: duality of the one-forms, orthogonality and normalization
/// of the generators, and the claimed algebraic properties of the auxiliary
/// tensor. Findings are reported, never repaired.
#[derive(Debug)]
pub struct FrameAudit {
    pub checks: Vec<ResidualReport>,
    pub d_trace: Expr,
    pub d_trace_is_zero: bool,
    pub findings: Vec<String>,
}

impl FrameAudit {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

pub fn audit_frame(bundle: &CurvatureBundle, s: &MsqeStructure, plan: &SamplePlan) -> FrameAudit {
    let m = bundle.manifold();
    let g = bundle.metric();
    let mut checks = Vec::new();

    let a_dual = ops::lower_vector(s.xi1(), bundle);
    checks.push(check_field_zero(
        "A is the metric dual of xi1",
        &s.a_form().sub(&a_dual),
        &[s.a_form()],
        plan,
        FIT_TOL,
    ));
    let b_dual = ops::lower_vector(s.xi2(), bundle);
    checks.push(check_field_zero(
        "B is the metric dual of xi2",
        &s.b_form().sub(&b_dual),
        &[s.b_form()],
        plan,
        FIT_TOL,
    ));

    let eps1 = Expr::int(s.eps1() as i64);
    let eps2 = Expr::int(s.eps2() as i64);
    let scalar_checks: [(&str, Expr); 6] = [
        ("g(xi1,xi1) = eps1", expr::sub(&bundle.metric_dot(s.xi1(), s.xi1()), &eps1)),
        ("g(xi2,xi2) = eps2", expr::sub(&bundle.metric_dot(s.xi2(), s.xi2()), &eps2)),
        ("g(xi1,xi2) = 0", bundle.metric_dot(s.xi1(), s.xi2())),
        (
            "inverse-metric square of A = eps1",
            expr::sub(&ops::inverse_dot(s.a_form(), s.a_form(), bundle), &eps1),
        ),
        (
            "inverse-metric square of B = eps2",
            expr::sub(&ops::inverse_dot(s.b_form(), s.b_form(), bundle), &eps2),
        ),
        (
            "inverse-metric product of A and B = 0",
            ops::inverse_dot(s.a_form(), s.b_form(), bundle),
        ),
    ];
    for (name, residual) in scalar_checks {
        checks.push(check_field_zero(
            name,
            &TensorField::scalar(m, residual),
            &[g],
            plan,
            FIT_TOL,
        ));
    }

    checks.push(check_field_zero(
        "D is symmetric",
        &s.d_tensor().sub(&s.d_tensor().swap_slots(0, 1)),
        &[s.d_tensor()],
        plan,
        FIT_TOL,
    ));
    checks.push(check_field_zero(
        "D annihilates xi1",
        &ops::contract_vector(s.d_tensor(), 1, s.xi1()),
        &[s.d_tensor()],
        plan,
        FIT_TOL,
    ));

    let d_trace = s.d_trace(bundle);
    let d_trace_is_zero = expr::provably_zero(&d_trace);
    let mut findings: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("frame audit failed: {}", c.name))
        .collect();
    if !d_trace_is_zero {
        findings.push(format!(
            "auxiliary tensor is not trace-free: tr D = {}",
            m.render(&d_trace)
        ));
    }
    FrameAudit { checks, d_trace, d_trace_is_zero, findings }
}

/// Residual of the defining equation with the supplied coefficients, plus
/// the per-component split into exactly-satisfied and defective slots.
#[derive(Debug)]
pub struct DefiningEquationReport {
    pub overall: ResidualReport,
    /// Components (i <= j) where the residual is provably zero.
    pub exact_components: Vec<[usize; 2]>,
    /// The complement; the interesting part when the equation only holds
    /// on a subblock.
    pub defect_components: Vec<[usize; 2]>,
}

pub fn defining_equation_report(
    bundle: &CurvatureBundle,
    s: &MsqeStructure,
    plan: &SamplePlan,
) -> Result<DefiningEquationReport, DetectError> {
    let residual = s.defining_residual(bundle).ok_or(DetectError::MissingCoefficients)?;
    let rhs = s.defining_rhs(bundle.metric()).expect("psis checked above");
    let overall = check_field_zero(
        "defining equation of the structure",
        &residual,
        &[bundle.ricci(), &rhs],
        plan,
        FIT_TOL,
    );
    let n = bundle.dim();
    let mut exact_components = Vec::new();
    let mut defect_components = Vec::new();
    for i in 0..n {
        for j in i..n {
            if expr::provably_zero(residual.get(&[i, j])) {
                exact_components.push([i, j]);
            } else {
                defect_components.push([i, j]);
            }
        }
    }
    Ok(DefiningEquationReport { overall, exact_components, defect_components })
}

/// One row of the trace audit: a named scalar identity and its residual.
#[derive(Debug)]
pub struct TraceAuditRow {
    pub name: &'static str,
    pub residual: Expr,
    pub report: ResidualReport,
}

/// Three readings of the trace of the defining equation. The first assumes
/// a Riemannian orthonormal frame, the second carries the normalization
/// signs and the auxiliary trace, the third carries the signs but drops the
/// auxiliary term (the form quoted for trace-free D). Disagreement between
/// them is the point of the audit.
pub fn trace_audit(
    bundle: &CurvatureBundle,
    s: &MsqeStructure,
    plan: &SamplePlan,
) -> Result<Vec<TraceAuditRow>, DetectError> {
    let [p1, p2, p3, _, p5] = s.psis().ok_or(DetectError::MissingCoefficients)?;
    let m = bundle.manifold();
    let r = bundle.scalar();
    let n = Expr::int(bundle.dim() as i64);
    let eps1 = Expr::int(s.eps1() as i64);
    let eps2 = Expr::int(s.eps2() as i64);

    let riemannian = expr::sub(
        r,
        &expr::sum_of(&[expr::mul(&n, p1), p2.clone(), p3.clone()]),
    );
    let signed_full = s.trace_residual(bundle).expect("psis checked above");
    let signed_plain = expr::sub(
        r,
        &expr::sum_of(&[
            expr::mul(&n, p1),
            expr::mul(&eps1, p2),
            expr::mul(&eps2, p3),
        ]),
    );
    let _ = p5;

    let rows = [
        ("trace, Riemannian orthonormal form", riemannian),
        ("trace, signature-aware with auxiliary term", signed_full),
        ("trace, signature-aware without auxiliary term", signed_plain),
    ];
    Ok(rows
        .into_iter()
        .map(|(name, residual)| {
            let report = check_field_zero(
                name,
                &TensorField::scalar(m, residual.clone()),
                &[&TensorField::scalar(m, r.clone()), &TensorField::scalar(m, p1.clone())],
                plan,
                FIT_TOL,
            );
            TraceAuditRow { name, residual, report }
        })
        .collect())
}

/// Fit the five structure coefficients to a symmetric (0,2) target,
/// component rows i <= j, one solve per sample point.
pub fn fit_msqe(
    target: &TensorField,
    s: &MsqeStructure,
    bundle: &CurvatureBundle,
    plan: &SamplePlan,
) -> FitOutcome {
    assert_eq!((target.contra(), target.co()), (0, 2));
    let regs = s.regressors(bundle.metric());
    let n = bundle.dim();
    let mut rows = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let cols: Vec<Expr> = regs.iter().map(|t| t.get(&[i, j]).clone()).collect();
            rows.push((cols, target.get(&[i, j]).clone()));
        }
    }
    solve_rows(&["P1", "P2", "P3", "P4", "P5"], &rows, plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicciRecurrenceClass {
    /// The covariant derivative of Ric vanishes.
    Symmetric,
    /// (D_Z Ric) = gamma(Z) Ric with zero metric part.
    Recurrent,
    /// (D_Z Ric) = gamma(Z) Ric + delta(Z) g with some delta != 0.
    Generalized,
    /// Ric and g are dependent on the sample, so gamma and delta are not
    /// separable; the fit only pins their combination.
    Degenerate,
    /// The two-term model does not explain the derivative.
    Unclassified,
}

#[derive(Debug)]
pub struct RicciRecurrenceReport {
    pub class: RicciRecurrenceClass,
    pub nabla_ricci_zero: ResidualReport,
    /// One fit per coordinate direction, coefficients (gamma, delta).
    pub directions: Vec<FitOutcome>,
}

pub fn fit_ricci_recurrence(bundle: &CurvatureBundle, plan: &SamplePlan) -> RicciRecurrenceReport {
    let ric = bundle.ricci();
    let g = bundle.metric();
    let nabla = ops::covariant_derivative(ric, bundle);
    let nabla_ricci_zero =
        check_field_zero("covariant derivative of Ric", &nabla, &[ric, g], plan, FIT_TOL);

    let n = bundle.dim();
    let mut directions = Vec::with_capacity(n);
    for dir in 0..n {
        let mut rows = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                rows.push((
                    vec![ric.get(&[i, j]).clone(), g.get(&[i, j]).clone()],
                    nabla.get(&[i, j, dir]).clone(),
                ));
            }
        }
        directions.push(solve_rows(&["gamma", "delta"], &rows, plan));
    }

    let class = if nabla_ricci_zero.verdict.is_zero() {
        RicciRecurrenceClass::Symmetric
    } else if directions.iter().any(|d| !d.full_rank) {
        RicciRecurrenceClass::Degenerate
    } else if directions.iter().all(|d| d.fits()) {
        let delta_zero = directions.iter().all(|d| {
            d.points
                .iter()
                .all(|p| numeric_is_zero(&p.coefficients[1], FIT_TOL * d.scale))
        });
        if delta_zero {
            RicciRecurrenceClass::Recurrent
        } else {
            RicciRecurrenceClass::Generalized
        }
    } else {
        RicciRecurrenceClass::Unclassified
    };

    RicciRecurrenceReport { class, nabla_ricci_zero, directions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorClass {
    Parallel,
    Concircular,
    TorseForming,
    Generic,
}

/// Consistency of the fitted torse-forming data with alpha = -f A for a
/// unit field, in the literal form and with the normalization sign carried.
#[derive(Debug, Clone)]
pub struct AlphaConsistency {
    pub eps: i8,
    pub literal_max: f64,
    pub signed_max: f64,
}

#[derive(Debug)]
pub struct VectorFieldReport {
    pub parallel: ResidualReport,
    pub geodesic: ResidualReport,
    /// Fit of (D_m u)^i = mu d^i_m.
    pub concircular: FitOutcome,
    /// Fit of (D_m u)^i = f d^i_m + alpha_m u^i.
    pub torse_forming: FitOutcome,
    /// Present when the field has constant unit norm.
    pub alpha_consistency: Option<AlphaConsistency>,
    pub strongest: VectorClass,
}

pub fn classify_vector_field(
    bundle: &CurvatureBundle,
    u: &[Expr],
    plan: &SamplePlan,
) -> VectorFieldReport {
    let n = bundle.dim();
    assert_eq!(u.len(), n);
    let m = bundle.manifold();
    let u_field = TensorField::from_components(m, 1, 0, u.to_vec());
    let nabla_u = ops::covariant_derivative(&u_field, bundle);

    let parallel =
        check_field_zero("covariant derivative of the field", &nabla_u, &[&u_field], plan, FIT_TOL);

    let mut geo = TensorField::zeros(m, 1, 0);
    for i in 0..n {
        let terms: Vec<Expr> =
            (0..n).map(|k| expr::mul(&u[k], nabla_u.get(&[i, k]))).collect();
        geo.set(&[i], expr::sum_of(&terms));
    }
    let geodesic = check_field_zero("acceleration along the field", &geo, &[&u_field], plan, FIT_TOL);

    let mut conc_rows = Vec::with_capacity(n * n);
    let mut torse_rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for d in 0..n {
            let delta = if i == d { Expr::one() } else { Expr::zero() };
            let rhs = nabla_u.get(&[i, d]).clone();
            conc_rows.push((vec![delta.clone()], rhs.clone()));
            let mut cols = Vec::with_capacity(1 + n);
            cols.push(delta);
            for c in 0..n {
                cols.push(if c == d { u[i].clone() } else { Expr::zero() });
            }
            torse_rows.push((cols, rhs));
        }
    }
    let concircular = solve_rows(&["mu"], &conc_rows, plan);
    let torse_names: Vec<String> = std::iter::once("f".to_string())
        .chain((1..=n).map(|k| format!("alpha_{k}")))
        .collect();
    let torse_name_refs: Vec<&str> = torse_names.iter().map(|s| s.as_str()).collect();
    let torse_forming = solve_rows(&torse_name_refs, &torse_rows, plan);

    let alpha_consistency = alpha_consistency(bundle, u, plan, &torse_forming);

    let strongest = if parallel.verdict.is_zero() {
        VectorClass::Parallel
    } else if concircular.fits() {
        VectorClass::Concircular
    } else if torse_forming.fits() {
        VectorClass::TorseForming
    } else {
        VectorClass::Generic
    };

    VectorFieldReport { parallel, geodesic, concircular, torse_forming, alpha_consistency, strongest }
}

fn alpha_consistency(
    bundle: &CurvatureBundle,
    u: &[Expr],
    plan: &SamplePlan,
    torse: &FitOutcome,
) -> Option<AlphaConsistency> {
    let norm = expr::constant_value(&bundle.metric_dot(u, u))?;
    let eps: i8 = if norm == BigRational::from_integer(1.into()) {
        1
    } else if norm == BigRational::from_integer((-1).into()) {
        -1
    } else {
        return None;
    };
    let a = ops::lower_vector(u, bundle);
    let n = bundle.dim();
    let mut literal_max = 0.0f64;
    let mut signed_max = 0.0f64;
    for pf in &torse.points {
        let point = &plan.points[pf.point_index];
        let f = numeric_to_f64(&pf.coefficients[0]);
        for k in 0..n {
            let ak = numeric_to_f64(&evaluate(a.get(&[k]), point).ok()?);
            let alpha_k = numeric_to_f64(&pf.coefficients[1 + k]);
            literal_max = literal_max.max((alpha_k + f * ak).abs());
            signed_max = signed_max.max((alpha_k + f64::from(eps) * f * ak).abs());
        }
    }
    Some(AlphaConsistency { eps, literal_max, signed_max })
}

/// Symmetry of the covariant derivative of a symmetric (0,2) field in its
/// derivative slot against the first argument.
pub fn codazzi_check(
    bundle: &CurvatureBundle,
    d: &TensorField,
    plan: &SamplePlan,
) -> ResidualReport {
    assert_eq!((d.contra(), d.co()), (0, 2));
    let n = bundle.dim();
    let nabla = ops::covariant_derivative(d, bundle);
    let mut res = TensorField::zeros(d.manifold(), 0, 3);
    for idx in indices(n, 3) {
        let (x, y, z) = (idx[0], idx[1], idx[2]);
        res.set(&idx, expr::sub(nabla.get(&[y, z, x]), nabla.get(&[x, z, y])));
    }
    check_field_zero("Codazzi symmetry of the auxiliary tensor", &res, &[&nabla], plan, FIT_TOL)
}

#[derive(Debug)]
pub struct EigenvectorReport {
    /// D(xi,xi) / g(xi,xi) where the generator is non-null.
    pub eigenvalue: Option<Expr>,
    /// Residual of D(., xi) = b g(., xi) for the symbolic eigenvalue.
    pub residual: Option<ResidualReport>,
    /// Least-squares fallback when the symbolic quotient is unavailable.
    pub fit: Option<FitOutcome>,
    pub null_generator: bool,
    pub warnings: Vec<String>,
}

/// Check whether a generator is an eigenvector of the auxiliary tensor in
/// the metric sense: D(X, xi) = b g(X, xi).
pub fn eigenvector_check(
    bundle: &CurvatureBundle,
    d: &TensorField,
    xi: &[Expr],
    plan: &SamplePlan,
) -> EigenvectorReport {
    assert_eq!((d.contra(), d.co()), (0, 2));
    let d_xi = ops::contract_vector(d, 1, xi);
    let g_xi = ops::lower_vector(xi, bundle);
    let d_xixi = ops::apply_bilinear(d, xi, xi);
    let g_xixi = bundle.metric_dot(xi, xi);

    match expr::div(&d_xixi, &g_xixi) {
        Ok(b) => {
            let residual = d_xi.sub(&g_xi.scale(&b));
            let report = check_field_zero(
                "eigenvector relation for the generator",
                &residual,
                &[&d_xi, &g_xi],
                plan,
                FIT_TOL,
            );
            EigenvectorReport {
                eigenvalue: Some(b),
                residual: Some(report),
                fit: None,
                null_generator: false,
                warnings: Vec::new(),
            }
        }
        Err(e) => {
            let null = matches!(e, crate::expr::NormError::ZeroDenominator);
            let mut warnings = Vec::new();
            if null {
                warnings.push("generator is null: eigenvalue fit is per point".into());
            } else {
                warnings.push(format!("symbolic eigenvalue unavailable: {e}"));
            }
            let n = bundle.dim();
            let rows: Vec<(Vec<Expr>, Expr)> = (0..n)
                .map(|i| (vec![g_xi.get(&[i]).clone()], d_xi.get(&[i]).clone()))
                .collect();
            let fit = solve_rows(&["b"], &rows, plan);
            EigenvectorReport {
                eigenvalue: None,
                residual: None,
                fit: Some(fit),
                null_generator: null,
                warnings,
            }
        }
    }
}

#[derive(Debug)]
pub struct ClosednessReport {
    pub d_form: TensorField,
    pub closed: bool,
}

pub fn oneform_closedness(omega: &TensorField) -> ClosednessReport {
    let d_form = ops::exterior_derivative_oneform(omega);
    let closed = d_form.is_zero();
    ClosednessReport { d_form, closed }
}

/// Residual of (P1 + P2) dA + P4 dB, the linkage between the exterior
/// derivatives of the two one-forms forced by a parallel first generator.
pub fn closedness_linkage(
    s: &MsqeStructure,
    plan: &SamplePlan,
) -> Result<ResidualReport, DetectError> {
    let [p1, p2, _, p4, _] = s.psis().ok_or(DetectError::MissingCoefficients)?;
    let da = ops::exterior_derivative_oneform(s.a_form());
    let db = ops::exterior_derivative_oneform(s.b_form());
    let residual = da.scale(&expr::add(p1, p2)).add(&db.scale(p4));
    Ok(check_field_zero(
        "closedness linkage of the one-forms",
        &residual,
        &[&da, &db],
        plan,
        FIT_TOL,
    ))
}

/// Fit the lowered curvature tensor to the five-block constant-curvature
/// shape built from the structure. `target` overrides the bundle's own
/// lowered tensor, which lets synthetic tensors round-trip.
pub fn check_quasi_constant_curvature(
    bundle: &CurvatureBundle,
    s: &MsqeStructure,
    plan: &SamplePlan,
    target: Option<&TensorField>,
) -> FitOutcome {
    let low = target.unwrap_or_else(|| bundle.lowered());
    assert_eq!((low.contra(), low.co()), (0, 4));
    let g = bundle.metric();
    let [_, aa, bb, ab, d] = s.regressors(g);
    let blocks = [
        metric_square(g),
        kulkarni_wedge(g, &aa),
        kulkarni_wedge(g, &bb),
        kulkarni_wedge(g, &ab),
        kulkarni_wedge(g, &d),
    ];
    let n = bundle.dim();
    let mut rows = Vec::with_capacity(n.pow(4));
    for idx in indices(n, 4) {
        let cols: Vec<Expr> = blocks.iter().map(|t| t.get(&idx).clone()).collect();
        rows.push((cols, low.get(&idx).clone()));
    }
    solve_rows(&["f1", "f2", "f3", "f4", "f5"], &rows, plan)
}

/// The coefficients the constant-curvature shape takes when the space-matter
/// tensor vanishes and the field equation holds, in the order f1..f5.
pub fn expected_qcc_coefficients(
    bundle: &CurvatureBundle,
    s: &MsqeStructure,
    sigma: &Expr,
) -> Result<[Expr; 5], DetectError> {
    let [p1, p2, p3, p4, p5] = s.psis().ok_or(DetectError::MissingCoefficients)?;
    let half = Expr::rational(1, 2);
    let f1 = expr::add(
        &expr::sub(&expr::mul(&half, bundle.scalar()), p1),
        sigma,
    );
    let neg_half = Expr::rational(-1, 2);
    Ok([
        f1,
        expr::mul(&neg_half, p2),
        expr::mul(&neg_half, p3),
        expr::mul(&neg_half, p4),
        expr::mul(&neg_half, p5),
    ])
}

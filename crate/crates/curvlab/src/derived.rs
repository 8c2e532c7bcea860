//! Tensors derived from the curvature bundle: the conformal, conharmonic
//! and concircular transforms, the matter-sector tensors built around an
//! energy-momentum input, and the pseudosymmetry analysis that runs through
//! the conformal operator.
//!
//! Every rank-four tensor produced here uses the fixed slot order
//! T(X,Y,Z,W) = g(T(X,Y)Z, W), whatever lowering convention the bundle
//! itself stores; formulas written against the operator form then stay
//! literal. The overall curvature sign still follows the bundle.

use thiserror::Error;

use crate::check::{check_field_zero, ResidualReport};
use crate::detect::{solve_rows, FitOutcome, FIT_TOL};
use crate::expr::{self, Expr};
use crate::sample::SamplePlan;
use crate::structure::MsqeStructure;
use crate::tensor::{indices, ops, CurvatureBundle, LoweredSlotOrder, TensorField};

#[derive(Debug, Error)]
pub enum DerivedError {
    #[error("transform needs dimension at least {needs}, got {got}")]
    DimensionTooSmall { needs: usize, got: usize },
    #[error("matter tensor must be a symmetric (0,2) field")]
    AsymmetricInput,
    #[error("gravitational coupling is identically zero")]
    ZeroCoupling,
    #[error("fifth coefficient function is identically zero, the analysis divides by it")]
    ZeroAuxiliaryScalar,
    #[error("structure carries no coefficient functions")]
    MissingCoefficients,
}

/// Coupling constant and energy-density function entering the matter-sector
/// tensors. The coupling is checked once here so the tensor builders never
/// divide by a provably zero function.
#[derive(Debug, Clone)]
pub struct PhysicsConfig {
    kappa: Expr,
    sigma: Expr,
}

impl PhysicsConfig {
    pub fn new(kappa: Expr, sigma: Expr) -> Result<Self, DerivedError> {
        if expr::provably_zero(&kappa) {
            return Err(DerivedError::ZeroCoupling);
        }
        Ok(PhysicsConfig { kappa, sigma })
    }

    pub fn kappa(&self) -> &Expr {
        &self.kappa
    }

    pub fn sigma(&self) -> &Expr {
        &self.sigma
    }
}

/// The lowered curvature in the fixed slot order g(R(X,Y)Z, W), whatever
/// order the bundle's own lowering convention stores.
pub fn lowered_zw(bundle: &CurvatureBundle) -> TensorField {
    match bundle.convention().lowered_slot_order {
        LoweredSlotOrder::ZThenW => bundle.lowered().clone(),
        LoweredSlotOrder::WThenZ => bundle.lowered().swap_slots(2, 3),
    }
}

/// G(X,Y,Z,W) = g(X,W)g(Y,Z) - g(X,Z)g(Y,W).
pub fn metric_square(g: &TensorField) -> TensorField {
    debug_assert_eq!((g.contra(), g.co()), (0, 2));
    let n = g.dim();
    let mut out = TensorField::zeros(g.manifold(), 0, 4);
    for idx in indices(n, 4) {
        let (x, y, z, w) = (idx[0], idx[1], idx[2], idx[3]);
        out.set(
            &idx,
            expr::sub(
                &expr::mul(g.get(&[x, w]), g.get(&[y, z])),
                &expr::mul(g.get(&[x, z]), g.get(&[y, w])),
            ),
        );
    }
    out
}

/// (g ^ T)(X,Y,Z,W) = g(X,W)T(Y,Z) + g(Y,Z)T(X,W) - g(X,Z)T(Y,W) - g(Y,W)T(X,Z).
/// Both inputs must be symmetric (0,2) fields; `g_tensor_and_wedge` is the
/// entry point that actually validates that.
pub fn kulkarni_wedge(g: &TensorField, t: &TensorField) -> TensorField {
    debug_assert_eq!((t.contra(), t.co()), (0, 2));
    let n = g.dim();
    let mut out = TensorField::zeros(g.manifold(), 0, 4);
    for idx in indices(n, 4) {
        let (x, y, z, w) = (idx[0], idx[1], idx[2], idx[3]);
        out.set(
            &idx,
            expr::sum_of(&[
                expr::mul(g.get(&[x, w]), t.get(&[y, z])),
                expr::mul(g.get(&[y, z]), t.get(&[x, w])),
                expr::neg(&expr::mul(g.get(&[x, z]), t.get(&[y, w]))),
                expr::neg(&expr::mul(g.get(&[y, w]), t.get(&[x, z]))),
            ]),
        );
    }
    out
}

/// The metric square G together with the wedge of the metric against a
/// symmetric (0,2) field, rejecting anything else.
pub fn g_tensor_and_wedge(
    g: &TensorField,
    t: &TensorField,
) -> Result<(TensorField, TensorField), DerivedError> {
    if (t.contra(), t.co()) != (0, 2) || !t.is_symmetric_in(0, 1) {
        return Err(DerivedError::AsymmetricInput);
    }
    Ok((metric_square(g), kulkarni_wedge(g, t)))
}

/// Lower the contravariant slot of an operator-shaped (1,3) field into a
/// trailing covariant slot: out[x,y,z,w] = g_{lw} t[l,x,y,z].
pub fn lower_operator(t: &TensorField, g: &TensorField) -> TensorField {
    assert_eq!((t.contra(), t.co()), (1, 3));
    let n = t.dim();
    let mut out = TensorField::zeros(t.manifold(), 0, 4);
    for idx in indices(n, 4) {
        let (x, y, z, w) = (idx[0], idx[1], idx[2], idx[3]);
        let mut terms = Vec::new();
        for l in 0..n {
            let (ge, te) = (g.get(&[l, w]), t.get(&[l, x, y, z]));
            if ge.is_zero_const() || te.is_zero_const() {
                continue;
            }
            terms.push(expr::mul(ge, te));
        }
        out.set(&idx, expr::sum_of(&terms));
    }
    out
}

/// Conformal curvature operator, indexed [l][x][y][z] like the bundle's
/// Riemann tensor. Identically zero in dimension three, so dimensions
/// below four are rejected rather than silently returning zeros.
pub fn conformal_operator(bundle: &CurvatureBundle) -> Result<TensorField, DerivedError> {
    let n = bundle.dim();
    if n < 4 {
        return Err(DerivedError::DimensionTooSmall { needs: 4, got: n });
    }
    let riem = bundle.riemann();
    let ric = bundle.ricci();
    let g = bundle.metric();
    let inv = bundle.inverse();
    let nn = n as i64;
    let c_ric = Expr::rational(-1, nn - 2);
    let c_scal = expr::mul(bundle.scalar(), &Expr::rational(1, (nn - 1) * (nn - 2)));

    // Ricci operator q^l_m = g^{li} Ric_{im}
    let mut q = TensorField::zeros(bundle.manifold(), 1, 1);
    for l in 0..n {
        for m in 0..n {
            let mut terms = Vec::new();
            for i in 0..n {
                let (ge, re) = (inv.get(&[l, i]), ric.get(&[i, m]));
                if ge.is_zero_const() || re.is_zero_const() {
                    continue;
                }
                terms.push(expr::mul(ge, re));
            }
            q.set(&[l, m], expr::sum_of(&terms));
        }
    }

    let mut out = TensorField::zeros(bundle.manifold(), 1, 3);
    for idx in indices(n, 4) {
        let (l, x, y, z) = (idx[0], idx[1], idx[2], idx[3]);
        let mut bracket = vec![
            expr::mul(g.get(&[y, z]), q.get(&[l, x])),
            expr::neg(&expr::mul(g.get(&[x, z]), q.get(&[l, y]))),
        ];
        if l == x {
            bracket.push(ric.get(&[y, z]).clone());
        }
        if l == y {
            bracket.push(expr::neg(ric.get(&[x, z])));
        }
        let mut terms = vec![
            riem.get(&idx).clone(),
            expr::mul(&c_ric, &expr::sum_of(&bracket)),
        ];
        if l == x {
            terms.push(expr::mul(&c_scal, g.get(&[y, z])));
        }
        if l == y {
            terms.push(expr::neg(&expr::mul(&c_scal, g.get(&[x, z]))));
        }
        out.set(&idx, expr::sum_of(&terms));
    }
    Ok(out)
}

/// Fully lowered conformal tensor, g(C(X,Y)Z, W).
pub fn conformal_tensor(bundle: &CurvatureBundle) -> Result<TensorField, DerivedError> {
    Ok(lower_operator(&conformal_operator(bundle)?, bundle.metric()))
}

/// Conharmonic tensor: the conformal combination without the scalar term.
/// Its (0,3)-trace is -(r/(n-2)) g rather than zero.
pub fn conharmonic_tensor(bundle: &CurvatureBundle) -> Result<TensorField, DerivedError> {
    let n = bundle.dim();
    if n < 3 {
        return Err(DerivedError::DimensionTooSmall { needs: 3, got: n });
    }
    let wedge = kulkarni_wedge(bundle.metric(), bundle.ricci());
    Ok(lowered_zw(bundle).sub(&wedge.scale(&Expr::rational(1, n as i64 - 2))))
}

/// Concircular tensor R - (r/(n(n-1))) G; zero exactly on space forms.
pub fn concircular_tensor(bundle: &CurvatureBundle) -> Result<TensorField, DerivedError> {
    let n = bundle.dim();
    if n < 2 {
        return Err(DerivedError::DimensionTooSmall { needs: 2, got: n });
    }
    let coeff = expr::mul(bundle.scalar(), &Expr::rational(1, (n * (n - 1)) as i64));
    Ok(lowered_zw(bundle).sub(&metric_square(bundle.metric()).scale(&coeff)))
}

/// Energy-momentum tensor determined by the field equation
/// Ric - (r/2) g = kappa T.
pub fn energy_momentum_from_efe(
    bundle: &CurvatureBundle,
    cfg: &PhysicsConfig,
) -> Result<TensorField, DerivedError> {
    let half_r = expr::mul(bundle.scalar(), &Expr::rational(1, 2));
    let einstein = bundle.ricci().sub(&bundle.metric().scale(&half_r));
    let n = bundle.dim();
    let mut out = TensorField::zeros(bundle.manifold(), 0, 2);
    for idx in indices(n, 2) {
        let t = expr::div(einstein.get(&idx), cfg.kappa())
            .map_err(|_| DerivedError::ZeroCoupling)?;
        out.set(&idx, t);
    }
    Ok(out)
}

/// Space-matter tensor P = R + (kappa/2) g^T - sigma G for a symmetric
/// energy-momentum input T.
pub fn space_matter_tensor(
    bundle: &CurvatureBundle,
    t: &TensorField,
    cfg: &PhysicsConfig,
) -> Result<TensorField, DerivedError> {
    let (gsq, wedge) = g_tensor_and_wedge(bundle.metric(), t)?;
    let half_kappa = expr::mul(cfg.kappa(), &Expr::rational(1, 2));
    Ok(lowered_zw(bundle)
        .add(&wedge.scale(&half_kappa))
        .sub(&gsq.scale(cfg.sigma())))
}

/// Divergence of the lowered curvature over its last slot,
/// (div R)(X,Y,Z) = g^{vw} (D_v R)(X,Y,Z,w).
pub fn riemann_divergence(bundle: &CurvatureBundle) -> TensorField {
    ops::divergence_last_slot(&lowered_zw(bundle), bundle)
}

/// (D_X Ric)(Y,Z) - (D_Y Ric)(X,Z), the skew combination the contracted
/// second Bianchi identity equates with div R.
pub fn skew_ricci_derivative(bundle: &CurvatureBundle) -> TensorField {
    let dric = ops::covariant_derivative(bundle.ricci(), bundle);
    let n = bundle.dim();
    let mut out = TensorField::zeros(bundle.manifold(), 0, 3);
    for idx in indices(n, 3) {
        let (x, y, z) = (idx[0], idx[1], idx[2]);
        out.set(&idx, expr::sub(dric.get(&[y, z, x]), dric.get(&[x, z, y])));
    }
    out
}

/// Divergence of the space-matter tensor, taken directly.
pub fn space_matter_divergence(
    bundle: &CurvatureBundle,
    t: &TensorField,
    cfg: &PhysicsConfig,
) -> Result<TensorField, DerivedError> {
    Ok(ops::divergence_last_slot(
        &space_matter_tensor(bundle, t, cfg)?,
        bundle,
    ))
}

/// Closed form of div P when the energy-momentum tensor comes from the
/// field equation: (3/2)[(D_X Ric)(Y,Z) - (D_Y Ric)(X,Z)]
/// - g(Y,Z)(X(r)/4 + X(sigma)) + g(X,Z)(Y(r)/4 + Y(sigma)).
/// The coupling drops out, so only the energy density enters. With a free
/// T this form does not apply; take the divergence directly instead.
pub fn space_matter_divergence_closed_form(
    bundle: &CurvatureBundle,
    cfg: &PhysicsConfig,
) -> TensorField {
    let g = bundle.metric();
    let r = bundle.scalar();
    let n = bundle.dim();
    let weights: Vec<Expr> = (0..n)
        .map(|x| {
            expr::add(
                &expr::mul(&Expr::rational(1, 4), &expr::differentiate(r, x)),
                &expr::differentiate(cfg.sigma(), x),
            )
        })
        .collect();
    let mut out = skew_ricci_derivative(bundle).scale(&Expr::rational(3, 2));
    for idx in indices(n, 3) {
        let (x, y, z) = (idx[0], idx[1], idx[2]);
        let term = expr::sub(
            &expr::mul(g.get(&[x, z]), &weights[y]),
            &expr::mul(g.get(&[y, z]), &weights[x]),
        );
        out.set(&idx, expr::add(out.get(&idx), &term));
    }
    out
}

/// Divergence-free space-matter tensor forces a constant energy density,
/// so a failing `sigma_gradient` alongside a passing `div_p` is a genuine
/// contradiction. A nonzero divergence leaves the implication vacuous.
#[derive(Debug)]
pub struct EnergyDensityCheck {
    pub div_p: ResidualReport,
    pub sigma_gradient: ResidualReport,
    pub implication_holds: bool,
}

pub fn energy_density_constancy(
    bundle: &CurvatureBundle,
    t: &TensorField,
    cfg: &PhysicsConfig,
    plan: &SamplePlan,
) -> Result<EnergyDensityCheck, DerivedError> {
    let div = space_matter_divergence(bundle, t, cfg)?;
    let low = lowered_zw(bundle);
    let div_p = check_field_zero(
        "divergence of the space-matter tensor",
        &div,
        &[&low],
        plan,
        FIT_TOL,
    );
    let n = bundle.dim();
    let mut dsigma = TensorField::zeros(bundle.manifold(), 0, 1);
    for x in 0..n {
        dsigma.set(&[x], expr::differentiate(cfg.sigma(), x));
    }
    let sigma_gradient =
        check_field_zero("gradient of the energy density", &dsigma, &[], plan, FIT_TOL);
    let implication_holds = !div_p.passed() || sigma_gradient.passed();
    Ok(EnergyDensityCheck {
        div_p,
        sigma_gradient,
        implication_holds,
    })
}

/// Every derived tensor computed against one physics configuration. The
/// energy-momentum tensor always comes from the field equation here;
/// `inputs` records that, plus the transforms skipped for dimension.
#[derive(Debug)]
pub struct DerivedBundle {
    pub conformal: Option<TensorField>,
    pub conharmonic: Option<TensorField>,
    pub concircular: TensorField,
    pub g_tensor: TensorField,
    pub energy_momentum: TensorField,
    pub matter_wedge: TensorField,
    pub space_matter: TensorField,
    pub riemann_divergence: TensorField,
    pub space_matter_divergence: TensorField,
    pub inputs: Vec<String>,
}

pub fn derived_bundle(
    bundle: &CurvatureBundle,
    cfg: &PhysicsConfig,
) -> Result<DerivedBundle, DerivedError> {
    let m = bundle.manifold();
    let mut inputs = vec![
        "energy-momentum solved from the field equation".to_string(),
        format!("kappa = {}", m.render(cfg.kappa())),
        format!("sigma = {}", m.render(cfg.sigma())),
    ];
    let note_dim = |inputs: &mut Vec<String>, what: &str, needs: usize| {
        inputs.push(format!(
            "{what} skipped: needs dimension {needs}, chart has {}",
            bundle.dim()
        ));
    };
    let conformal = match conformal_tensor(bundle) {
        Ok(c) => Some(c),
        Err(DerivedError::DimensionTooSmall { needs, .. }) => {
            note_dim(&mut inputs, "conformal transform", needs);
            None
        }
        Err(e) => return Err(e),
    };
    let conharmonic = match conharmonic_tensor(bundle) {
        Ok(c) => Some(c),
        Err(DerivedError::DimensionTooSmall { needs, .. }) => {
            note_dim(&mut inputs, "conharmonic transform", needs);
            None
        }
        Err(e) => return Err(e),
    };
    let concircular = concircular_tensor(bundle)?;
    let energy_momentum = energy_momentum_from_efe(bundle, cfg)?;
    let (g_tensor, matter_wedge) = g_tensor_and_wedge(bundle.metric(), &energy_momentum)?;
    let space_matter = space_matter_tensor(bundle, &energy_momentum, cfg)?;
    let sm_div = ops::divergence_last_slot(&space_matter, bundle);
    Ok(DerivedBundle {
        conformal,
        conharmonic,
        concircular,
        g_tensor,
        energy_momentum,
        matter_wedge,
        space_matter,
        riemann_divergence: riemann_divergence(bundle),
        space_matter_divergence: sm_div,
        inputs,
    })
}

/// Outcome of pushing the Ricci tensor through the conformal operator and
/// fitting the single proportionality function of the pseudosymmetry
/// condition, together with the eigenvalue dichotomy for the curvature of
/// the generator plane.
#[derive(Debug)]
pub struct PseudosymmetryReport {
    /// Per-point fit of F in Ric(C(X,Y)Z,W) + Ric(Z,C(X,Y)W) = F * Q,
    /// where Q is the metric-Ricci skew combination.
    pub f_ric: FitOutcome,
    /// Q vanishes identically, which happens exactly when the Ricci tensor
    /// is proportional to the metric; the fit is then uninformative.
    pub einstein_degenerate: bool,
    /// F predicted from the structure coefficients.
    pub f_ric_closed_form: Expr,
    /// R(xi2, xi1, xi1, xi2).
    pub generator_curvature: Expr,
    /// Threshold value m; the auxiliary tensor taking m as eigenvalue on
    /// the second generator decides which branch applies.
    pub m_threshold: Expr,
    /// One-form E of the generator-plane curvature identity.
    pub e_form: TensorField,
    /// Metric dual of `e_form`.
    pub theta_vector: Vec<Expr>,
    /// E applied to a slot equals the metric pairing with `theta_vector`.
    pub duality: ResidualReport,
    /// D(., xi2) = m g(., xi2) holds identically.
    pub eigenvalue_case: bool,
    /// R(X,Y,xi1,xi2) - (E(X)A(Y) - E(Y)A(X)).
    pub identity_residual: ResidualReport,
    pub warnings: Vec<String>,
}

pub fn pseudosymmetry_analysis(
    bundle: &CurvatureBundle,
    s: &MsqeStructure,
    plan: &SamplePlan,
) -> Result<PseudosymmetryReport, DerivedError> {
    let [p1, p2, p3, p4, p5] = s.psis().ok_or(DerivedError::MissingCoefficients)?;
    if expr::provably_zero(p5) {
        return Err(DerivedError::ZeroAuxiliaryScalar);
    }
    let c13 = conformal_operator(bundle)?;
    let n = bundle.dim();
    let nn = n as i64;
    let g = bundle.metric();
    let ric = bundle.ricci();

    let mut warnings = Vec::new();
    if expr::provably_zero(p4) {
        warnings.push("fourth coefficient function is identically zero".to_string());
    }

    let mut rows = Vec::with_capacity(n.pow(4));
    let mut einstein_degenerate = true;
    for idx in indices(n, 4) {
        let (x, y, z, w) = (idx[0], idx[1], idx[2], idx[3]);
        let mut lhs_terms = Vec::new();
        for l in 0..n {
            let c1 = c13.get(&[l, x, y, z]);
            if !c1.is_zero_const() {
                lhs_terms.push(expr::mul(c1, ric.get(&[l, w])));
            }
            let c2 = c13.get(&[l, x, y, w]);
            if !c2.is_zero_const() {
                lhs_terms.push(expr::mul(ric.get(&[z, l]), c2));
            }
        }
        let q = expr::sum_of(&[
            expr::mul(g.get(&[y, z]), ric.get(&[x, w])),
            expr::neg(&expr::mul(g.get(&[x, z]), ric.get(&[y, w]))),
            expr::mul(g.get(&[y, w]), ric.get(&[x, z])),
            expr::neg(&expr::mul(g.get(&[x, w]), ric.get(&[y, z]))),
        ]);
        einstein_degenerate &= expr::provably_zero(&q);
        rows.push((vec![q], expr::sum_of(&lhs_terms)));
    }
    let f_ric = solve_rows(&["F"], &rows, plan);
    if einstein_degenerate {
        warnings.push(
            "ricci tensor is proportional to the metric; the proportionality fit is uninformative"
                .to_string(),
        );
    }

    let low = lowered_zw(bundle);
    let (xi1, xi2) = (s.xi1(), s.xi2());
    let d = s.d_tensor();
    let generator_curvature = ops::apply_multilinear(&low, &[xi2, xi1, xi1, xi2]);
    let d22 = ops::apply_bilinear(d, xi2, xi2);
    let inv_n2 = Expr::rational(1, nn - 2);
    let p5_over = expr::mul(p5, &inv_n2);

    let f_ric_closed_form = expr::sum_of(&[
        generator_curvature.clone(),
        expr::mul(bundle.scalar(), &Expr::rational(1, (nn - 1) * (nn - 2))),
        expr::neg(&expr::mul(
            &inv_n2,
            &expr::sum_of(&[expr::mul(&Expr::int(2), p1), p2.clone(), p3.clone()]),
        )),
        expr::neg(&expr::mul(&p5_over, &d22)),
    ]);

    let m_threshold = expr::add(
        &expr::div(
            &expr::mul(&expr::neg(&generator_curvature), &Expr::int(nn - 2)),
            p5,
        )
        .map_err(|_| DerivedError::ZeroAuxiliaryScalar)?,
        &d22,
    );

    let d_xi2 = ops::contract_vector(d, 1, xi2);
    let lead = expr::sub(&generator_curvature, &expr::mul(&p5_over, &d22));
    let b_form = s.b_form();
    let mut e_form = TensorField::zeros(bundle.manifold(), 0, 1);
    for x in 0..n {
        e_form.set(
            &[x],
            expr::add(
                &expr::mul(&lead, b_form.get(&[x])),
                &expr::mul(&p5_over, d_xi2.get(&[x])),
            ),
        );
    }
    let theta_vector = ops::raise_oneform(&e_form, bundle);
    let duality = check_field_zero(
        "identity one-form against its metric dual",
        &e_form.sub(&ops::lower_vector(&theta_vector, bundle)),
        &[&e_form],
        plan,
        FIT_TOL,
    );

    let xi2_flat = ops::lower_vector(xi2, bundle);
    let eigenvalue_case = d_xi2.sub(&xi2_flat.scale(&m_threshold)).is_zero();

    let plane = ops::contract_vector(&ops::contract_vector(&low, 3, xi2), 2, xi1);
    let a_form = s.a_form();
    let mut skew = TensorField::zeros(bundle.manifold(), 0, 2);
    for x in 0..n {
        for y in 0..n {
            skew.set(
                &[x, y],
                expr::sub(
                    &expr::mul(e_form.get(&[x]), a_form.get(&[y])),
                    &expr::mul(e_form.get(&[y]), a_form.get(&[x])),
                ),
            );
        }
    }
    let identity_residual = check_field_zero(
        "generator-plane curvature against the one-form skew",
        &plane.sub(&skew),
        &[&plane, &skew],
        plan,
        FIT_TOL,
    );

    Ok(PseudosymmetryReport {
        f_ric,
        einstein_degenerate,
        f_ric_closed_form,
        generator_curvature,
        m_threshold,
        e_form,
        theta_vector,
        duality,
        eigenvalue_case,
        identity_residual,
        warnings,
    })
}

/// Identities every derived transform must satisfy, assembled for whatever
/// subset of transforms the chart dimension admits.
pub fn transform_identity_suite(
    bundle: &CurvatureBundle,
    plan: &SamplePlan,
    tol: f64,
) -> Vec<ResidualReport> {
    let mut out = Vec::new();
    let g = bundle.metric();
    let low = lowered_zw(bundle);
    if let Ok(c) = conformal_tensor(bundle) {
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let tr = ops::contract_with_inverse(&c, bundle, a, b);
            out.push(check_field_zero(
                &format!("conformal trace over slots ({a},{b})"),
                &tr,
                &[&low],
                plan,
                tol,
            ));
        }
        out.push(check_field_zero(
            "conformal antisymmetry in the last pair",
            &c.add(&c.swap_slots(2, 3)),
            &[&c],
            plan,
            tol,
        ));
    }
    if let Ok(k) = conharmonic_tensor(bundle) {
        let n = bundle.dim() as i64;
        let tr = ops::contract_with_inverse(&k, bundle, 0, 3);
        let deficit = g.scale(&expr::mul(bundle.scalar(), &Expr::rational(-1, n - 2)));
        out.push(check_field_zero(
            "conharmonic trace against the scalar deficit",
            &tr.sub(&deficit),
            &[&k],
            plan,
            tol,
        ));
    }
    let dual = riemann_divergence(bundle).sub(&skew_ricci_derivative(bundle));
    out.push(check_field_zero(
        "curvature divergence against the Ricci skew",
        &dual,
        &[&low],
        plan,
        tol,
    ));
    let doubled = kulkarni_wedge(g, g).sub(&metric_square(g).scale(&Expr::int(2)));
    out.push(check_field_zero(
        "metric wedged with itself against the doubled square",
        &doubled,
        &[g],
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
    use crate::expr::{evaluate, NumericValue};
    use crate::sample::EvalMode;
    use crate::structure::GeneratorInput;
    use crate::tensor::{ChartManifold, Convention, CurvatureSign};

    fn chart(n: usize) -> Arc<ChartManifold> {
        ChartManifold::new((1..=n).map(|i| format!("x{i}")).collect()).unwrap()
    }

    fn plan(dim: usize) -> SamplePlan {
        let lo = BigRational::new(1.into(), 2.into());
        let hi = BigRational::from_integer(3.into());
        SamplePlan::new(dim, 12, 0, &lo, &hi, EvalMode::Rational)
    }

    fn diag_bundle(m: &Arc<ChartManifold>, entries: &[&str]) -> CurvatureBundle {
        let mut g = TensorField::zeros(m, 0, 2);
        for (i, e) in entries.iter().enumerate() {
            g.set(&[i, i], m.parse(e).unwrap());
        }
        CurvatureBundle::new(g, Convention::default()).unwrap()
    }

    fn example_bundle(m: &Arc<ChartManifold>) -> CurvatureBundle {
        diag_bundle(m, &["1", "2*x1^2", "2*x2^2", "-1"])
    }

    fn example_structure(m: &Arc<ChartManifold>, b: &CurvatureBundle) -> MsqeStructure {
        let mut d = TensorField::zeros(m, 0, 2);
        d.set(&[0, 0], Expr::one());
        d.set(&[1, 1], Expr::int(-2));
        d.set(&[2, 2], Expr::one());
        d.set(&[0, 1], m.parse("x1/x2").unwrap());
        d.set(&[1, 0], m.parse("x1/x2").unwrap());
        let psis = [
            m.parse("3/4*exp(x1)").unwrap(),
            m.parse("2*exp(x1)").unwrap(),
            m.parse("-exp(x1)").unwrap(),
            m.parse("-x1").unwrap(),
            m.parse("-1/x1^2").unwrap(),
        ];
        let a = vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()];
        let bf = vec![Expr::zero(), m.parse("x1").unwrap(), m.parse("x2").unwrap(), Expr::zero()];
        MsqeStructure::resolve(
            b,
            GeneratorInput::one_form(a),
            GeneratorInput::one_form(bf),
            d,
            Some(psis),
            -1,
            1,
        )
        .unwrap()
    }

    fn unit_physics() -> PhysicsConfig {
        PhysicsConfig::new(Expr::one(), Expr::zero()).unwrap()
    }

    fn assert_same(a: &Expr, b: &Expr) {
        assert!(
            expr::provably_zero(&expr::sub(a, b)),
            "expressions differ: {a:?} vs {b:?}"
        );
    }

    #[test]
    fn conformal_transform_vanishes_for_flat_and_conformally_flat_metrics() {
        let m = chart(4);
        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        assert!(conformal_tensor(&mink).unwrap().is_zero());

        let cf = diag_bundle(&m, &["exp(2*x1)", "exp(2*x1)", "exp(2*x1)", "exp(2*x1)"]);
        let c = conformal_tensor(&cf).unwrap();
        assert!(c.is_zero());

        let m3 = chart(3);
        let flat3 = diag_bundle(&m3, &["1", "1", "1"]);
        assert!(matches!(
            conformal_tensor(&flat3),
            Err(DerivedError::DimensionTooSmall { needs: 4, got: 3 })
        ));
    }

    #[test]
    fn conformal_tensor_agrees_with_its_wedge_expansion() {
        let m = chart(4);
        for convention in [
            Convention::default(),
            Convention {
                curvature_sign: CurvatureSign::Positive,
                lowered_slot_order: LoweredSlotOrder::WThenZ,
            },
        ] {
            let mut g = TensorField::zeros(&m, 0, 2);
            for (i, e) in ["1", "2*x1^2", "2*x2^2", "-1"].iter().enumerate() {
                g.set(&[i, i], m.parse(e).unwrap());
            }
            let b = CurvatureBundle::new(g, convention).unwrap();
            let c = conformal_tensor(&b).unwrap();
            let wedge = kulkarni_wedge(b.metric(), b.ricci());
            let gsq = metric_square(b.metric());
            let rhs = lowered_zw(&b)
                .sub(&wedge.scale(&Expr::rational(1, 2)))
                .add(&gsq.scale(&expr::mul(b.scalar(), &Expr::rational(1, 6))));
            assert!(c.sub(&rhs).is_zero(), "convention {convention:?}");
        }
    }

    #[test]
    fn conformal_traces_vanish_on_the_running_example() {
        let m = chart(4);
        let b = example_bundle(&m);
        let c = conformal_tensor(&b).unwrap();
        for (a, w) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            assert!(
                ops::contract_with_inverse(&c, &b, a, w).is_zero(),
                "trace over ({a},{w})"
            );
        }
    }

    #[test]
    fn conharmonic_trace_tracks_the_scalar_deficit() {
        let m = chart(4);
        let b = example_bundle(&m);
        let k = conharmonic_tensor(&b).unwrap();
        // zero scalar curvature here, so the trace itself must vanish
        assert!(expr::provably_zero(b.scalar()));
        assert!(ops::contract_with_inverse(&k, &b, 0, 3).is_zero());

        let m3 = chart(3);
        let curved = diag_bundle(&m3, &["1", "x1^2", "x1^2"]);
        assert!(!expr::provably_zero(curved.scalar()));
        let k3 = conharmonic_tensor(&curved).unwrap();
        let tr = ops::contract_with_inverse(&k3, &curved, 0, 3);
        let deficit = curved
            .metric()
            .scale(&expr::mul(curved.scalar(), &Expr::rational(-1, 1)));
        assert!(tr.sub(&deficit).is_zero());

        let m2 = chart(2);
        let plane = diag_bundle(&m2, &["1", "x1^2"]);
        assert!(matches!(
            conharmonic_tensor(&plane),
            Err(DerivedError::DimensionTooSmall { needs: 3, got: 2 })
        ));
    }

    #[test]
    fn concircular_transform_vanishes_exactly_on_a_space_form() {
        let m = chart(4);
        let scale = "4/((1 + x1^2 + x2^2 + x3^2 + x4^2)^2)";
        let sphere = diag_bundle(&m, &[scale, scale, scale, scale]);
        assert!(concircular_tensor(&sphere).unwrap().is_zero());

        let b = example_bundle(&m);
        // zero scalar curvature: the transform changes nothing
        assert!(concircular_tensor(&b).unwrap().sub(&lowered_zw(&b)).is_zero());
    }

    #[test]
    fn energy_momentum_follows_the_field_equation() {
        let m = chart(4);
        let b = example_bundle(&m);
        let t = energy_momentum_from_efe(&b, &unit_physics()).unwrap();
        assert!(t.sub(b.ricci()).is_zero());
        assert_same(t.get(&[0, 1]), &m.parse("-1/(x1*x2)").unwrap());

        let hyp = diag_bundle(&m, &["1/x4^2", "1/x4^2", "1/x4^2", "1/x4^2"]);
        let cfg = PhysicsConfig::new(Expr::int(2), Expr::zero()).unwrap();
        let t = energy_momentum_from_efe(&hyp, &cfg).unwrap();
        let trace = ops::contract_with_inverse(&t, &hyp, 0, 1);
        // metric trace of T is (1 - n/2) r / kappa
        let expected = expr::mul(hyp.scalar(), &Expr::rational(-1, 2));
        assert_same(trace.get(&[]), &expected);

        assert!(matches!(
            PhysicsConfig::new(Expr::zero(), Expr::zero()),
            Err(DerivedError::ZeroCoupling)
        ));
    }

    #[test]
    fn space_matter_tensor_matches_the_bench_values() {
        let m = chart(4);
        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let t0 = TensorField::zeros(&m, 0, 2);
        let vacuum = PhysicsConfig::new(Expr::one(), Expr::one()).unwrap();
        let p = space_matter_tensor(&mink, &t0, &vacuum).unwrap();
        assert!(p.add(&metric_square(mink.metric())).is_zero());
        let free = PhysicsConfig::new(Expr::one(), Expr::zero()).unwrap();
        assert!(space_matter_tensor(&mink, &t0, &free).unwrap().is_zero());

        let b = example_bundle(&m);
        let t = energy_momentum_from_efe(&b, &free).unwrap();
        let p = space_matter_tensor(&b, &t, &free).unwrap();
        let low = lowered_zw(&b);
        let wedge = kulkarni_wedge(b.metric(), b.ricci());
        assert!(p.sub(&low).sub(&wedge.scale(&Expr::rational(1, 2))).is_zero());
        // regression values for the off-block component [0][2][2][1]
        assert_same(low.get(&[0, 2, 2, 1]), &m.parse("-2*x2/x1").unwrap());
        assert_same(p.get(&[0, 2, 2, 1]), &m.parse("-3*x2/x1").unwrap());

        let mut skewed = TensorField::zeros(&m, 0, 2);
        skewed.set(&[0, 1], Expr::one());
        assert!(matches!(
            space_matter_tensor(&b, &skewed, &free),
            Err(DerivedError::AsymmetricInput)
        ));
    }

    #[test]
    fn curvature_divergence_agrees_with_the_ricci_skew() {
        let m = chart(4);
        let b = example_bundle(&m);
        assert!(riemann_divergence(&b).sub(&skew_ricci_derivative(&b)).is_zero());

        let m2 = ChartManifold::new(vec!["u".into(), "v".into()]).unwrap();
        let scale = "4/((1 + u^2 + v^2)^2)";
        let mut g = TensorField::zeros(&m2, 0, 2);
        g.set(&[0, 0], m2.parse(scale).unwrap());
        g.set(&[1, 1], m2.parse(scale).unwrap());
        let sphere = CurvatureBundle::new(
            g,
            Convention {
                curvature_sign: CurvatureSign::Positive,
                lowered_slot_order: LoweredSlotOrder::WThenZ,
            },
        )
        .unwrap();
        assert!(riemann_divergence(&sphere)
            .sub(&skew_ricci_derivative(&sphere))
            .is_zero());
    }

    #[test]
    fn space_matter_divergence_closed_form_matches_the_direct_route() {
        let m = chart(4);
        let b = example_bundle(&m);
        let cfg = PhysicsConfig::new(Expr::one(), m.parse("x1 + 3").unwrap()).unwrap();
        let t = energy_momentum_from_efe(&b, &cfg).unwrap();
        let direct = space_matter_divergence(&b, &t, &cfg).unwrap();
        assert!(direct.sub(&space_matter_divergence_closed_form(&b, &cfg)).is_zero());

        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let cfg = PhysicsConfig::new(Expr::one(), m.parse("x1").unwrap()).unwrap();
        let t = energy_momentum_from_efe(&mink, &cfg).unwrap();
        let direct = space_matter_divergence(&mink, &t, &cfg).unwrap();
        assert!(direct
            .sub(&space_matter_divergence_closed_form(&mink, &cfg))
            .is_zero());
    }

    #[test]
    fn energy_density_constancy_reflects_the_divergence() {
        let m = chart(4);
        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let t0 = TensorField::zeros(&m, 0, 2);

        let constant = PhysicsConfig::new(Expr::one(), Expr::int(6)).unwrap();
        let check = energy_density_constancy(&mink, &t0, &constant, &plan(4)).unwrap();
        assert!(check.div_p.passed());
        assert!(check.sigma_gradient.passed());
        assert!(check.implication_holds);

        let sliding = PhysicsConfig::new(Expr::one(), m.parse("x1").unwrap()).unwrap();
        let check = energy_density_constancy(&mink, &t0, &sliding, &plan(4)).unwrap();
        assert!(!check.div_p.passed());
        assert!(!check.sigma_gradient.passed());
        assert!(check.implication_holds);
    }

    #[test]
    fn g_tensor_and_wedge_validates_symmetry() {
        let m = chart(4);
        let b = example_bundle(&m);
        let g = b.metric();
        let (gsq, wedge) = g_tensor_and_wedge(g, g).unwrap();
        assert!(wedge.sub(&gsq.scale(&Expr::int(2))).is_zero());

        let mut skewed = TensorField::zeros(&m, 0, 2);
        skewed.set(&[1, 0], m.parse("x1").unwrap());
        assert!(matches!(
            g_tensor_and_wedge(g, &skewed),
            Err(DerivedError::AsymmetricInput)
        ));
    }

    #[test]
    fn derived_bundle_collects_the_transforms_and_notes_skips() {
        let m = chart(4);
        let b = example_bundle(&m);
        let d = derived_bundle(&b, &unit_physics()).unwrap();
        assert!(d.conformal.is_some() && d.conharmonic.is_some());
        assert!(d.inputs.iter().any(|s| s.contains("field equation")));
        assert!(d
            .riemann_divergence
            .sub(&skew_ricci_derivative(&b))
            .is_zero());

        let m2 = chart(2);
        let plane = diag_bundle(&m2, &["1", "x1^2"]);
        let d2 = derived_bundle(&plane, &unit_physics()).unwrap();
        assert!(d2.conformal.is_none() && d2.conharmonic.is_none());
        assert_eq!(
            d2.inputs.iter().filter(|s| s.contains("skipped")).count(),
            2
        );
    }

    #[test]
    fn einstein_inputs_degenerate_the_pseudosymmetry_fit() {
        let m = chart(4);
        let ads = diag_bundle(&m, &["-1/x4^2", "1/x4^2", "1/x4^2", "1/x4^2"]);
        let xi1 = vec![m.parse("x4").unwrap(), Expr::zero(), Expr::zero(), Expr::zero()];
        let xi2 = vec![Expr::zero(), m.parse("x4").unwrap(), Expr::zero(), Expr::zero()];
        let d = TensorField::zeros(&m, 0, 2);
        let psis = [Expr::one(), Expr::zero(), Expr::zero(), Expr::one(), Expr::one()];
        let s = MsqeStructure::resolve(
            &ads,
            GeneratorInput::vector(xi1),
            GeneratorInput::vector(xi2),
            d,
            Some(psis),
            -1,
            1,
        )
        .unwrap();
        let report = pseudosymmetry_analysis(&ads, &s, &plan(4)).unwrap();
        assert!(report.einstein_degenerate);
        assert!(!report.f_ric.full_rank);
        assert!(report.warnings.iter().any(|w| w.contains("uninformative")));
        assert!(report.duality.passed());
    }

    #[test]
    fn the_eigenvalue_branch_zeroes_the_generator_curvature() {
        let m = chart(4);
        let mink = diag_bundle(&m, &["1", "1", "1", "-1"]);
        let xi1 = vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()];
        let xi2 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
        // d = 3 (g + a (x) a): annihilates xi1, eigenvalue 3 on xi2
        let mut d = TensorField::zeros(&m, 0, 2);
        for i in 0..3 {
            d.set(&[i, i], Expr::int(3));
        }
        let psis = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::one(), Expr::int(2)];
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
        let report = pseudosymmetry_analysis(&mink, &s, &plan(4)).unwrap();
        assert!(report.eigenvalue_case);
        assert!(expr::provably_zero(&report.generator_curvature));
        assert_same(&report.m_threshold, &Expr::int(3));
        assert!(report.e_form.is_zero());
        assert!(report.identity_residual.passed());
    }

    #[test]
    fn the_running_example_sits_in_the_generic_branch() {
        let m = chart(4);
        let b = example_bundle(&m);
        let s = example_structure(&m, &b);
        let report = pseudosymmetry_analysis(&b, &s, &plan(4)).unwrap();
        assert!(!report.einstein_degenerate);
        assert!(!report.eigenvalue_case);
        assert!(expr::provably_zero(&report.generator_curvature));
        assert_same(
            &report.m_threshold,
            &m.parse("-1/(2*x1^2) + 1/(4*x2^2)").unwrap(),
        );
        assert!(report.duality.passed());
        // the plane curvature vanishes while the one-form does not, so the
        // branch identity genuinely fails on this example
        assert!(!report.identity_residual.passed());
        assert!(!report.e_form.is_zero());

        let ones = vec![NumericValue::exact_int(1); 4];
        let f = evaluate(&report.f_ric_closed_form, &ones).unwrap().to_f64();
        let want = -1.25 * std::f64::consts::E - 0.125;
        assert!((f - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn pseudosymmetry_rejects_missing_or_degenerate_coefficients() {
        let m = chart(4);
        let b = example_bundle(&m);
        let s = example_structure(&m, &b);
        let bare = MsqeStructure::resolve(
            &b,
            GeneratorInput::vector(s.xi1().to_vec()),
            GeneratorInput::vector(s.xi2().to_vec()),
            s.d_tensor().clone(),
            None,
            -1,
            1,
        )
        .unwrap();
        assert!(matches!(
            pseudosymmetry_analysis(&b, &bare, &plan(4)),
            Err(DerivedError::MissingCoefficients)
        ));

        let mut psis = s.psis().unwrap().clone();
        psis[4] = Expr::zero();
        let degenerate = MsqeStructure::resolve(
            &b,
            GeneratorInput::vector(s.xi1().to_vec()),
            GeneratorInput::vector(s.xi2().to_vec()),
            s.d_tensor().clone(),
            Some(psis),
            -1,
            1,
        )
        .unwrap();
        assert!(matches!(
            pseudosymmetry_analysis(&b, &degenerate, &plan(4)),
            Err(DerivedError::ZeroAuxiliaryScalar)
        ));
    }

    #[test]
    fn transform_identity_suite_passes_on_exact_fixtures() {
        let m = chart(4);
        let b = example_bundle(&m);
        let suite = transform_identity_suite(&b, &plan(4), FIT_TOL);
        assert_eq!(suite.len(), 10);
        for report in &suite {
            assert!(report.passed(), "failed: {}", report.name);
        }

        let m2 = chart(2);
        let plane = diag_bundle(&m2, &["1", "x1^2"]);
        let suite = transform_identity_suite(&plane, &plan(2), FIT_TOL);
        assert_eq!(suite.len(), 2);
        for report in &suite {
            assert!(report.passed(), "failed: {}", report.name);
        }
    }
}

//! Pipeline orchestration: run the requested analyses against a resolved
//! manifest in dependency order and collect a deterministic report
//! skeleton. Sections whose inputs are absent come back marked skipped
//! instead of failing the run.

use num_traits::Signed;

use crate::check::{check_field_zero, ResidualReport, Verdict};
use crate::derived::{
    derived_bundle, pseudosymmetry_analysis, space_matter_divergence_closed_form,
    transform_identity_suite, energy_density_constancy,
};
use crate::detect::{
    audit_frame, classify_vector_field, defining_equation_report, fit_msqe,
    fit_ricci_recurrence, trace_audit, FitOutcome, RicciRecurrenceClass, VectorClass, FIT_TOL,
};
use crate::expr::{self, NumericValue};
use crate::identity::curvature_identity_suite;
use crate::soliton::{soliton_residual, specialization_table};
use crate::tensor::TensorField;

use super::manifest::ResolvedManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Curvature,
    FrameAudit,
    MsqeFit,
    RecurrenceFit,
    VectorFields,
    Pseudosymmetry,
    Physics,
    Soliton,
    Identities,
}

impl Analysis {
    pub const ALL: [Analysis; 9] = [
        Analysis::Curvature,
        Analysis::FrameAudit,
        Analysis::MsqeFit,
        Analysis::RecurrenceFit,
        Analysis::VectorFields,
        Analysis::Pseudosymmetry,
        Analysis::Physics,
        Analysis::Soliton,
        Analysis::Identities,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Analysis::Curvature => "curvature",
            Analysis::FrameAudit => "frame-audit",
            Analysis::MsqeFit => "msqe-fit",
            Analysis::RecurrenceFit => "recurrence-fit",
            Analysis::VectorFields => "vector-fields",
            Analysis::Pseudosymmetry => "pseudosymmetry",
            Analysis::Physics => "physics",
            Analysis::Soliton => "soliton",
            Analysis::Identities => "identities",
        }
    }

    pub fn from_id(id: &str) -> Option<Analysis> {
        Analysis::ALL.into_iter().find(|a| a.id() == id)
    }
}

#[derive(Debug)]
pub struct AnalysisReport {
    pub version: &'static str,
    pub name: String,
    pub convention: &'static str,
    pub mode: &'static str,
    pub seed: u64,
    pub sections: Vec<Section>,
}

#[derive(Debug)]
pub struct Section {
    pub id: &'static str,
    pub skipped: Option<String>,
    pub items: Vec<Item>,
}

impl Section {
    fn ran(id: &'static str, items: Vec<Item>) -> Section {
        Section { id, skipped: None, items }
    }

    fn skipped(id: &'static str, reason: impl Into<String>) -> Section {
        Section { id, skipped: Some(reason.into()), items: Vec::new() }
    }
}

#[derive(Debug)]
pub struct Item {
    pub label: String,
    pub value: ItemValue,
}

#[derive(Debug)]
pub enum ItemValue {
    Text(String),
    Flag(bool),
    Residual(ResidualSummary),
    Fit(FitSummary),
    List(Vec<String>),
    /// Ordered key/value rows, e.g. nonzero tensor components.
    Table(Vec<(String, String)>),
}

fn item(label: impl Into<String>, value: ItemValue) -> Item {
    Item { label: label.into(), value }
}

#[derive(Debug)]
pub struct ResidualSummary {
    pub passed: bool,
    pub verdict: &'static str,
    pub max_abs: f64,
    pub scale: f64,
    pub points_used: usize,
    pub points_skipped: usize,
    pub all_exact: bool,
    pub warnings: Vec<String>,
}

impl ResidualSummary {
    fn from(r: &ResidualReport) -> ResidualSummary {
        ResidualSummary {
            passed: r.passed(),
            verdict: match r.verdict {
                Verdict::ZeroSymbolic => "zero symbolically",
                Verdict::ZeroNumeric => "zero at the sample points",
                Verdict::Nonzero => "nonzero",
                Verdict::Indeterminate => "indeterminate",
            },
            max_abs: r.max_abs,
            scale: r.scale,
            points_used: r.points_used,
            points_skipped: r.points_skipped,
            all_exact: r.all_exact,
            warnings: r.warnings.clone(),
        }
    }
}

fn residual_item(r: &ResidualReport) -> Item {
    item(r.name.clone(), ItemValue::Residual(ResidualSummary::from(r)))
}

#[derive(Debug)]
pub struct FitSummary {
    pub names: Vec<String>,
    pub consensus: Option<Vec<String>>,
    pub fits: bool,
    pub point_independent: bool,
    pub full_rank: bool,
    pub all_exact: bool,
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

impl FitSummary {
    fn from(f: &FitOutcome) -> FitSummary {
        FitSummary {
            names: f.names.clone(),
            consensus: f
                .consensus
                .as_ref()
                .map(|vals| vals.iter().map(format_value).collect()),
            fits: f.fits(),
            point_independent: f.point_independent,
            full_rank: f.full_rank,
            all_exact: f.all_exact,
            max_residual: f.max_residual,
            warnings: f.warnings.clone(),
        }
    }
}

fn fit_item(label: impl Into<String>, f: &FitOutcome) -> Item {
    item(label, ItemValue::Fit(FitSummary::from(f)))
}

/// "p/q" for exact values (plain "p" for integers), 17 significant digits
/// for floats.
pub fn format_value(v: &NumericValue) -> String {
    match v {
        NumericValue::Exact(q) => format_rational(q),
        NumericValue::Float(f) => format_float(*f),
    }
}

pub fn format_rational(q: &num_rational::BigRational) -> String {
    if q.denom() == &num_bigint::BigInt::from(1) {
        q.numer().to_string()
    } else if q.is_negative() {
        format!("-{}/{}", q.numer().magnitude(), q.denom())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn format_float(f: f64) -> String {
    if f == 0.0 {
        "0".to_string()
    } else {
        format!("{f:.16e}")
    }
}

pub fn run_pipeline(r: &ResolvedManifest, requested: &[Analysis]) -> AnalysisReport {
    let mut sections = Vec::new();
    for a in Analysis::ALL {
        if !requested.contains(&a) {
            continue;
        }
        sections.push(match a {
            Analysis::Curvature => curvature_section(r),
            Analysis::FrameAudit => frame_audit_section(r),
            Analysis::MsqeFit => msqe_fit_section(r),
            Analysis::RecurrenceFit => recurrence_section(r),
            Analysis::VectorFields => vector_fields_section(r),
            Analysis::Pseudosymmetry => pseudosymmetry_section(r),
            Analysis::Physics => physics_section(r),
            Analysis::Soliton => soliton_section(r),
            Analysis::Identities => identities_section(r),
        });
    }
    AnalysisReport {
        version: env!("CARGO_PKG_VERSION"),
        name: r.name.clone(),
        convention: r.convention.label(),
        mode: r.mode.label(),
        seed: r.seed,
        sections,
    }
}

/// Nonzero components of a symmetric (0,2) field, upper triangle, as
/// rendered rows.
fn symmetric_rows(t: &TensorField, prefix: &str, r: &ResolvedManifest) -> Vec<(String, String)> {
    let m = r.bundle.manifold();
    let n = r.bundle.dim();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i..n {
            let e = t.get(&[i, j]);
            if !expr::provably_zero(e) {
                rows.push((format!("{prefix}_{}{}", i + 1, j + 1), m.render(e)));
            }
        }
    }
    rows
}

/// Nonzero components of a curvature-type (0,4) field, one representative
/// per antisymmetry/pair-interchange orbit.
fn curvature_rows(t: &TensorField, prefix: &str, r: &ResolvedManifest) -> Vec<(String, String)> {
    let m = r.bundle.manifold();
    let n = r.bundle.dim();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                for l in k + 1..n {
                    if (k, l) < (i, j) {
                        continue;
                    }
                    let e = t.get(&[i, j, k, l]);
                    if !expr::provably_zero(e) {
                        rows.push((
                            format!("{prefix}_{}{}{}{}", i + 1, j + 1, k + 1, l + 1),
                            m.render(e),
                        ));
                    }
                }
            }
        }
    }
    rows
}

fn curvature_section(r: &ResolvedManifest) -> Section {
    let b = &r.bundle;
    let m = b.manifold();
    let n = b.dim();
    let mut items = vec![item(
        "curvature sign",
        ItemValue::Text(r.convention.label().to_string()),
    )];

    let mut gamma = Vec::new();
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let e = b.christoffel().get(&[l, i, j]);
                if !expr::provably_zero(e) {
                    gamma.push((format!("Γ^{}_{}{}", l + 1, i + 1, j + 1), m.render(e)));
                }
            }
        }
    }
    items.push(item("christoffel symbols", ItemValue::Table(gamma)));
    items.push(item(
        "riemann (lowered)",
        ItemValue::Table(curvature_rows(b.lowered(), "R", r)),
    ));
    items.push(item(
        "ricci",
        ItemValue::Table(symmetric_rows(b.ricci(), "Ric", r)),
    ));
    items.push(item(
        "scalar curvature",
        ItemValue::Text(m.render(b.scalar())),
    ));
    Section::ran(Analysis::Curvature.id(), items)
}

fn frame_audit_section(r: &ResolvedManifest) -> Section {
    let id = Analysis::FrameAudit.id();
    let Some(s) = &r.structure else {
        return Section::skipped(id, "missing input: structure block");
    };
    let audit = audit_frame(&r.bundle, s, &r.plan);
    let m = r.bundle.manifold();
    let mut items: Vec<Item> = audit.checks.iter().map(residual_item).collect();
    items.push(item("trace of D", ItemValue::Text(m.render(&audit.d_trace))));
    items.push(item("trace of D is zero", ItemValue::Flag(audit.d_trace_is_zero)));
    items.push(item("findings", ItemValue::List(audit.findings.clone())));
    match trace_audit(&r.bundle, s, &r.plan) {
        Ok(rows) => {
            for row in rows {
                items.push(item(
                    format!("trace identity, {}", row.name),
                    ItemValue::Residual(ResidualSummary::from(&row.report)),
                ));
            }
        }
        Err(e) => items.push(item("trace identities", ItemValue::Text(format!("skipped: {e}")))),
    }
    Section::ran(id, items)
}

fn msqe_fit_section(r: &ResolvedManifest) -> Section {
    let id = Analysis::MsqeFit.id();
    let Some(s) = &r.structure else {
        return Section::skipped(id, "missing input: structure block");
    };
    let fit = fit_msqe(r.bundle.ricci(), s, &r.bundle, &r.plan);
    let mut items = vec![fit_item("coefficient fit against Ric", &fit)];
    match defining_equation_report(&r.bundle, s, &r.plan) {
        Ok(report) => {
            items.push(residual_item(&report.overall));
            let fmt = |pairs: &[[usize; 2]]| {
                pairs
                    .iter()
                    .map(|[i, j]| format!("({},{})", i + 1, j + 1))
                    .collect::<Vec<_>>()
            };
            items.push(item(
                "components holding symbolically",
                ItemValue::List(fmt(&report.exact_components)),
            ));
            items.push(item(
                "components with a defect",
                ItemValue::List(fmt(&report.defect_components)),
            ));
        }
        Err(e) => items.push(item(
            "defining equation",
            ItemValue::Text(format!("skipped: {e}")),
        )),
    }
    Section::ran(id, items)
}

fn recurrence_class_label(c: RicciRecurrenceClass) -> &'static str {
    match c {
        RicciRecurrenceClass::Symmetric => "symmetric",
        RicciRecurrenceClass::Recurrent => "recurrent",
        RicciRecurrenceClass::Generalized => "generalized recurrent",
        RicciRecurrenceClass::Degenerate => "degenerate",
        RicciRecurrenceClass::Unclassified => "unclassified",
    }
}

fn recurrence_section(r: &ResolvedManifest) -> Section {
    let report = fit_ricci_recurrence(&r.bundle, &r.plan);
    let coords = r.bundle.manifold().coords().to_vec();
    let mut items = vec![
        item(
            "class",
            ItemValue::Text(recurrence_class_label(report.class).to_string()),
        ),
        residual_item(&report.nabla_ricci_zero),
    ];
    for (k, fit) in report.directions.iter().enumerate() {
        items.push(fit_item(format!("direction {}", coords[k]), fit));
    }
    Section::ran(Analysis::RecurrenceFit.id(), items)
}

fn vector_class_label(c: VectorClass) -> &'static str {
    match c {
        VectorClass::Parallel => "parallel",
        VectorClass::Concircular => "concircular",
        VectorClass::TorseForming => "torse-forming",
        VectorClass::Generic => "generic",
    }
}

fn vector_fields_section(r: &ResolvedManifest) -> Section {
    let id = Analysis::VectorFields.id();
    let Some(s) = &r.structure else {
        return Section::skipped(id, "missing input: structure block");
    };
    let mut items = Vec::new();
    for (name, field) in [("xi1", s.xi1()), ("xi2", s.xi2())] {
        let report = classify_vector_field(&r.bundle, field, &r.plan);
        items.push(item(
            format!("{name} class"),
            ItemValue::Text(vector_class_label(report.strongest).to_string()),
        ));
        items.push(item(
            format!("{name} {}", report.parallel.name),
            ItemValue::Residual(ResidualSummary::from(&report.parallel)),
        ));
        items.push(item(
            format!("{name} {}", report.geodesic.name),
            ItemValue::Residual(ResidualSummary::from(&report.geodesic)),
        ));
        items.push(fit_item(format!("{name} concircular fit"), &report.concircular));
        items.push(fit_item(format!("{name} torse-forming fit"), &report.torse_forming));
        if let Some(ac) = &report.alpha_consistency {
            items.push(item(
                format!("{name} alpha consistency"),
                ItemValue::Text(format!(
                    "eps = {}, literal max {}, signed max {}",
                    ac.eps,
                    format_float(ac.literal_max),
                    format_float(ac.signed_max)
                )),
            ));
        }
    }
    Section::ran(id, items)
}

fn pseudosymmetry_section(r: &ResolvedManifest) -> Section {
    let id = Analysis::Pseudosymmetry.id();
    let Some(s) = &r.structure else {
        return Section::skipped(id, "missing input: structure block");
    };
    let report = match pseudosymmetry_analysis(&r.bundle, s, &r.plan) {
        Ok(report) => report,
        Err(e) => return Section::skipped(id, format!("missing input: {e}")),
    };
    let m = r.bundle.manifold();
    let items = vec![
        item("degenerate Einstein input", ItemValue::Flag(report.einstein_degenerate)),
        fit_item("F fit", &report.f_ric),
        item("F closed form", ItemValue::Text(m.render(&report.f_ric_closed_form))),
        item(
            "generator-plane curvature",
            ItemValue::Text(m.render(&report.generator_curvature)),
        ),
        item("threshold m", ItemValue::Text(m.render(&report.m_threshold))),
        item("eigenvalue case", ItemValue::Flag(report.eigenvalue_case)),
        residual_item(&report.duality),
        residual_item(&report.identity_residual),
        item("warnings", ItemValue::List(report.warnings.clone())),
    ];
    Section::ran(id, items)
}

fn physics_section(r: &ResolvedManifest) -> Section {
    let id = Analysis::Physics.id();
    let Some(cfg) = &r.physics else {
        return Section::skipped(id, "missing input: physics block");
    };
    let db = match derived_bundle(&r.bundle, cfg) {
        Ok(db) => db,
        Err(e) => return Section::skipped(id, format!("missing input: {e}")),
    };
    let mut items = vec![item("inputs", ItemValue::List(db.inputs.clone()))];
    items.push(item(
        "energy-momentum",
        ItemValue::Table(symmetric_rows(&db.energy_momentum, "T", r)),
    ));
    items.push(item(
        "space-matter",
        ItemValue::Table(curvature_rows(&db.space_matter, "P", r)),
    ));
    let div_zero = check_field_zero(
        "space-matter divergence",
        &db.space_matter_divergence,
        &[&db.space_matter],
        &r.plan,
        FIT_TOL,
    );
    items.push(residual_item(&div_zero));
    let closed = space_matter_divergence_closed_form(&r.bundle, cfg);
    let routes = check_field_zero(
        "divergence closed form against the direct route",
        &db.space_matter_divergence.sub(&closed),
        &[&db.space_matter_divergence],
        &r.plan,
        FIT_TOL,
    );
    items.push(residual_item(&routes));
    match energy_density_constancy(&r.bundle, &db.energy_momentum, cfg, &r.plan) {
        Ok(check) => {
            items.push(residual_item(&check.div_p));
            items.push(residual_item(&check.sigma_gradient));
            items.push(item(
                "conserved geometry forces constant sigma",
                ItemValue::Flag(check.implication_holds),
            ));
        }
        Err(e) => items.push(item(
            "energy density constancy",
            ItemValue::Text(format!("skipped: {e}")),
        )),
    }
    Section::ran(id, items)
}

fn soliton_section(r: &ResolvedManifest) -> Section {
    let id = Analysis::Soliton.id();
    let Some(cfg) = &r.soliton else {
        return Section::skipped(id, "missing input: soliton block");
    };
    let report = match soliton_residual(&r.bundle, cfg, r.structure.as_ref(), &r.plan) {
        Ok(report) => report,
        Err(e) => return Section::skipped(id, format!("missing input: {e}")),
    };
    let m = r.bundle.manifold();
    let mut items = vec![
        item("rho", ItemValue::Text(format_rational(&cfg.rho))),
        item(
            "coupling",
            ItemValue::Text(
                report
                    .coupling
                    .map(|c| c.label().to_string())
                    .unwrap_or_else(|| "none".to_string()),
            ),
        ),
        item(
            "classification",
            ItemValue::Text(match &report.lambda {
                Some(l) => format!("{} (λ = {})", report.classification.label(), m.render(l)),
                None => report.classification.label().to_string(),
            }),
        ),
        item("lambda separable", ItemValue::Flag(report.lambda_separable)),
        residual_item(&report.residual),
        fit_item("lambda fit", &report.fit),
        item("divergence of U", ItemValue::Text(m.render(&report.divergence))),
    ];
    if let Some(sl) = &report.structural_lambda {
        items.push(item("structural lambda", ItemValue::Text(m.render(sl))));
    }
    if let Some(ps) = r.structure.as_ref().and_then(|s| s.psis()) {
        let table = specialization_table(&ps[0], &ps[1], &ps[2], r.bundle.dim());
        let rows = table
            .into_iter()
            .map(|row| {
                (
                    row.coupling.label().to_string(),
                    format!(
                        "λ = {} ({})",
                        m.render(&row.lambda),
                        row.classification.label()
                    ),
                )
            })
            .collect();
        items.push(item("specializations", ItemValue::Table(rows)));
    }
    items.push(item("diagnostics", ItemValue::List(report.diagnostics.clone())));
    Section::ran(id, items)
}

fn identities_section(r: &ResolvedManifest) -> Section {
    let mut items: Vec<Item> = curvature_identity_suite(&r.bundle, &r.plan, FIT_TOL)
        .iter()
        .map(residual_item)
        .collect();
    for report in transform_identity_suite(&r.bundle, &r.plan, FIT_TOL) {
        items.push(residual_item(&report));
    }
    Section::ran(Analysis::Identities.id(), items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::manifest::{bundled_manifest, parse_manifest};

    fn resolved(name: &str) -> ResolvedManifest {
        parse_manifest(bundled_manifest(name).unwrap())
            .unwrap()
            .resolve()
            .unwrap()
    }

    #[test]
    fn the_bench_manifest_runs_every_section() {
        let r = resolved("msqe_example");
        let report = run_pipeline(&r, &Analysis::ALL);
        assert_eq!(report.sections.len(), 9);
        for section in &report.sections {
            assert!(section.skipped.is_none(), "{} skipped", section.id);
        }
        let curvature = &report.sections[0];
        let gamma = curvature
            .items
            .iter()
            .find(|i| i.label == "christoffel symbols")
            .unwrap();
        match &gamma.value {
            ItemValue::Table(rows) => {
                assert_eq!(rows.len(), 4, "{rows:?}");
                assert!(rows.iter().any(|(k, v)| k == "Γ^1_22" && v == "-2*x1"));
            }
            other => panic!("wrong shape: {other:?}"),
        }
    }

    #[test]
    fn missing_blocks_mark_sections_skipped() {
        let r = resolved("polar_plane");
        let report = run_pipeline(&r, &Analysis::ALL);
        let by_id = |id: &str| report.sections.iter().find(|s| s.id == id).unwrap();
        assert!(by_id("frame-audit").skipped.as_deref().unwrap().contains("structure"));
        assert!(by_id("physics").skipped.is_some());
        assert!(by_id("soliton").skipped.is_some());
        assert!(by_id("curvature").skipped.is_none());
        assert!(by_id("identities").skipped.is_none());
    }

    #[test]
    fn requested_subsets_keep_canonical_order() {
        let r = resolved("minkowski4");
        let report = run_pipeline(&r, &[Analysis::Identities, Analysis::Curvature]);
        let ids: Vec<&str> = report.sections.iter().map(|s| s.id).collect();
        assert_eq!(ids, vec!["curvature", "identities"]);
    }

    #[test]
    fn analysis_ids_round_trip() {
        for a in Analysis::ALL {
            assert_eq!(Analysis::from_id(a.id()), Some(a));
        }
        assert_eq!(Analysis::from_id("nope"), None);
    }

    #[test]
    fn the_flat_manifest_is_steady_with_zero_lambda() {
        let r = resolved("minkowski4");
        let report = run_pipeline(&r, &[Analysis::Soliton]);
        let section = &report.sections[0];
        let class = section
            .items
            .iter()
            .find(|i| i.label == "classification")
            .unwrap();
        match &class.value {
            ItemValue::Text(t) => assert_eq!(t, "steady (λ = 0)"),
            other => panic!("wrong shape: {other:?}"),
        }
    }
}

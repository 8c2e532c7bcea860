//! Pseudosymmetry analysis: fit the scalar F relating the conformal action
//! on Ricci to the metric-Ricci skew, compare it with the closed form from
//! the structure coefficients, and inspect the generator-plane identity.

use num_rational::BigRational;

use curvlab::derived::pseudosymmetry_analysis;
use curvlab::fixtures::{eigenvalue_case, running_example};
use curvlab::report::pipeline::format_value;
use curvlab::sample::{EvalMode, SamplePlan};
use curvlab::tensor::Convention;

fn plan() -> SamplePlan {
    let lo = BigRational::new(1.into(), 2.into());
    let hi = BigRational::from_integer(3.into());
    SamplePlan::new(4, 12, 0, &lo, &hi, EvalMode::Rational)
}

fn main() {
    let (b, s) = running_example(Convention::default());
    let m = b.manifold().clone();
    let report = pseudosymmetry_analysis(&b, &s, &plan()).unwrap();

    println!("bench chart:");
    println!("  Einstein-degenerate: {}", report.einstein_degenerate);
    if let Some(c) = report.f_ric.consensus.as_ref() {
        println!("  fitted F: {}", format_value(&c[0]));
    } else {
        println!("  fitted F varies per point (as expected off the special branches)");
    }
    println!("  closed form F: {}", m.render(&report.f_ric_closed_form));
    println!(
        "  generator-plane curvature R(xi2,xi1,xi1,xi2): {}",
        m.render(&report.generator_curvature)
    );
    println!("  threshold m: {}", m.render(&report.m_threshold));
    println!("  eigenvalue case: {}", report.eigenvalue_case);
    println!("  E-form duality: {}", report.duality.passed());
    println!(
        "  generator-plane identity holds: {}",
        report.identity_residual.passed()
    );

    // a fixture built to sit exactly on the eigenvalue branch
    let (fb, fs) = eigenvalue_case();
    let report = pseudosymmetry_analysis(&fb, &fs, &plan()).unwrap();
    println!("eigenvalue-branch fixture:");
    println!("  eigenvalue case: {}", report.eigenvalue_case);
    println!(
        "  generator-plane curvature: {}",
        fb.manifold().render(&report.generator_curvature)
    );
    println!(
        "  identity residual passes: {}",
        report.identity_residual.passed()
    );
}

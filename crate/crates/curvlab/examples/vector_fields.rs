//! Classify vector fields by the shape of their covariant derivative:
//! parallel, concircular, torse-forming, or none of those. The classifier
//! fits the defining coefficients per sample point and reports consensus.

use num_rational::BigRational;

use curvlab::detect::{classify_vector_field, eigenvector_check};
use curvlab::expr::Expr;
use curvlab::fixtures::{euclidean, warped_generator};
use curvlab::report::pipeline::format_value;
use curvlab::sample::{EvalMode, SamplePlan};

fn plan(dim: usize) -> SamplePlan {
    let lo = BigRational::new(1.into(), 2.into());
    let hi = BigRational::from_integer(3.into());
    SamplePlan::new(dim, 12, 0, &lo, &hi, EvalMode::Rational)
}

fn main() {
    // position field on flat space: concircular with unit scale
    let flat = euclidean(3);
    let m = flat.manifold().clone();
    let position: Vec<Expr> = (1..=3).map(|i| m.parse(&format!("x{i}")).unwrap()).collect();
    let report = classify_vector_field(&flat, &position, &plan(3));
    println!("position field on flat 3-space: {:?}", report.strongest);
    if let Some(c) = &report.concircular.consensus {
        println!("  concircular scale mu = {}", format_value(&c[0]));
    }

    // rotation field: Killing, not concircular, not torse-forming
    let rotation = vec![m.parse("-x2").unwrap(), m.parse("x1").unwrap(), Expr::zero()];
    let report = classify_vector_field(&flat, &rotation, &plan(3));
    println!("rotation field: {:?}", report.strongest);

    // warped-product generator: torse-forming with scale 1/x1, and the
    // auxiliary tensor takes the second generator as an eigenvector
    let (b, s) = warped_generator();
    let report = classify_vector_field(&b, s.xi1(), &plan(4));
    println!("warped generator: {:?}", report.strongest);
    if let Some(c) = &report.torse_forming.consensus {
        println!("  torse-forming scale f = {}", format_value(&c[0]));
    }
    if let Some(ac) = &report.alpha_consistency {
        println!(
            "  alpha bookkeeping: eps = {}, literal max {:.1e}, signed max {:.1e}",
            ac.eps, ac.literal_max, ac.signed_max
        );
    }

    let eig = eigenvector_check(&b, s.d_tensor(), s.xi2(), &plan(4));
    match (&eig.eigenvalue, &eig.residual) {
        (Some(b_val), Some(res)) => println!(
            "  D eigenvalue on xi2: {} ({})",
            b.manifold().render(b_val),
            if res.passed() { "verified" } else { "failed" }
        ),
        _ => println!("  D eigenvalue on xi2: not an eigenvector"),
    }
}

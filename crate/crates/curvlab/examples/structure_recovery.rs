//! Recover the five structure coefficients of a mixed super quasi-Einstein
//! decomposition from a synthetic target, then watch the same fit go rank
//! deficient on an Einstein metric, where the regressors collapse.

use num_rational::BigRational;

use curvlab::detect::fit_msqe;
use curvlab::expr::Expr;
use curvlab::fixtures::{hyperbolic4, seeded_msqe};
use curvlab::report::pipeline::format_value;
use curvlab::sample::{EvalMode, SamplePlan};
use curvlab::structure::{GeneratorInput, MsqeStructure};
use curvlab::tensor::TensorField;

fn plan(dim: usize) -> SamplePlan {
    let lo = BigRational::new(1.into(), 2.into());
    let hi = BigRational::from_integer(3.into());
    SamplePlan::new(dim, 12, 0, &lo, &hi, EvalMode::Rational)
}

fn main() {
    // forward-construct a target with known coefficients, then fit
    let case = seeded_msqe(42);
    let fit = fit_msqe(&case.target, &case.structure, &case.bundle, &plan(4));
    println!("synthetic recovery (seed 42):");
    println!("  exact: {}, full rank: {}", fit.all_exact, fit.full_rank);
    if let Some(consensus) = &fit.consensus {
        for (name, (got, want)) in fit
            .names
            .iter()
            .zip(consensus.iter().zip(&case.psis))
        {
            println!("  {name} = {} (constructed as {want})", format_value(got));
        }
    }

    // Einstein input: Ric is proportional to g, so the five regressors
    // cannot be told apart and the fit reports the indeterminacy
    let b = hyperbolic4();
    let m = b.manifold().clone();
    let xi1 = vec![m.parse("x4").unwrap(), Expr::zero(), Expr::zero(), Expr::zero()];
    let xi2 = vec![Expr::zero(), m.parse("x4").unwrap(), Expr::zero(), Expr::zero()];
    let s = MsqeStructure::resolve(
        &b,
        GeneratorInput::vector(xi1),
        GeneratorInput::vector(xi2),
        TensorField::zeros(&m, 0, 2),
        None,
        1,
        1,
    )
    .unwrap();
    let fit = fit_msqe(b.ricci(), &s, &b, &plan(4));
    println!("hyperbolic (Einstein) input:");
    println!("  full rank: {}, consensus: {:?}", fit.full_rank, fit.consensus.is_some());
    for w in &fit.warnings {
        println!("  warning: {w}");
    }
}

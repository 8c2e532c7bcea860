//! Ricci-Bourguignon flow analysis: fit lambda, name the coupling, and
//! classify the soliton as expanding, steady or shrinking. Ends with the
//! consequence chain for a torse-forming generator.

use num_rational::BigRational;
use num_traits::Zero;

use curvlab::expr::Expr;
use curvlab::fixtures::{euclidean, minkowski4, running_example, warped_generator};
use curvlab::sample::{EvalMode, SamplePlan};
use curvlab::soliton::{
    soliton_residual, specialization_table, torse_forming_consequences, RBSolitonConfig,
};
use curvlab::tensor::Convention;

fn plan(dim: usize) -> SamplePlan {
    let lo = BigRational::new(1.into(), 2.into());
    let hi = BigRational::from_integer(3.into());
    SamplePlan::new(dim, 12, 0, &lo, &hi, EvalMode::Rational)
}

fn show(name: &str, report: &curvlab::soliton::SolitonReport, m: &curvlab::tensor::ChartManifold) {
    let lambda = report
        .lambda
        .as_ref()
        .map(|l| format!(" (λ = {})", m.render(l)))
        .unwrap_or_default();
    println!("{name}: {}{lambda}", report.classification.label());
    if let Some(c) = report.coupling {
        println!("  coupling: {}", c.label());
    }
    for d in &report.diagnostics {
        println!("  note: {d}");
    }
}

fn main() {
    // flat space, zero potential: steady
    let mink = minkowski4();
    let cfg = RBSolitonConfig {
        u: vec![Expr::zero(); 4],
        rho: BigRational::new(1.into(), 2.into()),
        lambda: None,
    };
    let report = soliton_residual(&mink, &cfg, None, &plan(4)).unwrap();
    show("minkowski, U = 0", &report, mink.manifold());

    // flat space, position field: expanding with lambda = 1
    let flat = euclidean(2);
    let m = flat.manifold().clone();
    let cfg = RBSolitonConfig {
        u: vec![m.parse("x1").unwrap(), m.parse("x2").unwrap()],
        rho: BigRational::zero(),
        lambda: None,
    };
    let report = soliton_residual(&flat, &cfg, None, &plan(2)).unwrap();
    show("flat plane, position field", &report, &m);

    // the bench chart driven by its own generator: Ric is not a metric
    // multiple, so no constant lambda exists
    let (b, s) = running_example(Convention::default());
    let cfg = RBSolitonConfig {
        u: s.xi1().to_vec(),
        rho: BigRational::new(1.into(), 2.into()),
        lambda: None,
    };
    let report = soliton_residual(&b, &cfg, Some(&s), &plan(4)).unwrap();
    show("bench chart, U = xi1", &report, b.manifold());

    // structural lambda at the named couplings, straight from the psis
    if let Some(ps) = s.psis() {
        println!("specializations from the coefficient functions:");
        for row in specialization_table(&ps[0], &ps[1], &ps[2], 4) {
            println!(
                "  {}: λ = {} ({})",
                row.coupling.label(),
                b.manifold().render(&row.lambda),
                row.classification.label()
            );
        }
    }

    // torse-forming generator: the consequence chain certifies the scale
    // f = P2 - P3 - P5 D(xi2, xi2) and the eigenvector conclusion
    let (wb, ws) = warped_generator();
    let cfg = RBSolitonConfig {
        u: ws.xi1().to_vec(),
        rho: BigRational::zero(),
        lambda: None,
    };
    let chain = torse_forming_consequences(&wb, &ws, &cfg, &plan(4)).unwrap();
    println!("torse-forming consequence chain on the warped product:");
    println!("  predicted scale f = {}", wb.manifold().render(&chain.predicted_scale));
    println!("  everything verified: {}", chain.all_passed());
}

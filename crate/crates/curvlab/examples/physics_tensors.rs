//! The physics layer: solve the field equation for the energy-momentum
//! tensor, assemble the space-matter tensor, and check its divergence two
//! independent ways.

use num_rational::BigRational;

use curvlab::derived::{
    derived_bundle, energy_density_constancy, space_matter_divergence_closed_form, PhysicsConfig,
};
use curvlab::expr::{self, Expr};
use curvlab::fixtures::running_example;
use curvlab::sample::{EvalMode, SamplePlan};
use curvlab::tensor::Convention;

fn main() {
    let (b, _) = running_example(Convention::default());
    let m = b.manifold().clone();
    let lo = BigRational::new(1.into(), 2.into());
    let hi = BigRational::from_integer(3.into());
    let plan = SamplePlan::new(4, 12, 0, &lo, &hi, EvalMode::Rational);

    // kappa = 1 and a position-dependent sigma
    let cfg = PhysicsConfig::new(Expr::one(), m.parse("x1 + 3").unwrap()).unwrap();
    let db = derived_bundle(&b, &cfg).unwrap();

    println!("inputs:");
    for line in &db.inputs {
        println!("  {line}");
    }

    // with r = 0 and kappa = 1 the field equation gives T = Ric
    println!("energy-momentum tensor (nonzero components):");
    for i in 0..4 {
        for j in i..4 {
            let e = db.energy_momentum.get(&[i, j]);
            if !expr::provably_zero(e) {
                println!("  T_{}{} = {}", i + 1, j + 1, m.render(e));
            }
        }
    }

    // divergence of the space-matter tensor, direct versus closed form
    let direct = &db.space_matter_divergence;
    let closed = space_matter_divergence_closed_form(&b, &cfg);
    let agree = direct.sub(&closed).is_zero();
    println!("space-matter divergence routes agree symbolically: {agree}");

    let check = energy_density_constancy(&b, &db.energy_momentum, &cfg, &plan).unwrap();
    println!("div P zero: {}", check.div_p.passed());
    println!("sigma gradient zero: {}", check.sigma_gradient.passed());
    println!(
        "`div P = 0 forces sigma constant` holds here: {}",
        check.implication_holds
    );
}

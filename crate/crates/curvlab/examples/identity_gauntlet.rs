//! Run the structural identity suite on several charts, in exact rational
//! arithmetic and again in floating point. Every Levi-Civita bundle must
//! pass; a failure localizes which symmetry broke.

use num_rational::BigRational;

use curvlab::derived::transform_identity_suite;
use curvlab::detect::FIT_TOL;
use curvlab::fixtures::{minkowski4, polar_plane, running_example, seeded_poly_diag};
use curvlab::identity::curvature_identity_suite;
use curvlab::sample::{EvalMode, SamplePlan};
use curvlab::tensor::{Convention, CurvatureBundle};

fn gauntlet(name: &str, bundle: &CurvatureBundle, mode: EvalMode) {
    let lo = BigRational::new(1.into(), 2.into());
    let hi = BigRational::from_integer(3.into());
    let plan = SamplePlan::new(bundle.dim(), 12, 0, &lo, &hi, mode);
    let mut pass = 0;
    let mut total = 0;
    for report in curvature_identity_suite(bundle, &plan, FIT_TOL)
        .into_iter()
        .chain(transform_identity_suite(bundle, &plan, FIT_TOL))
    {
        total += 1;
        if report.passed() {
            pass += 1;
        } else {
            println!("  FAILED: {report}");
        }
    }
    println!("{name} [{mode:?}]: {pass}/{total} identities hold");
}

fn main() {
    gauntlet("minkowski", &minkowski4(), EvalMode::Rational);
    gauntlet("polar plane", &polar_plane(), EvalMode::Rational);
    let (bench, _) = running_example(Convention::default());
    gauntlet("bench chart", &bench, EvalMode::Rational);
    gauntlet("bench chart", &bench, EvalMode::Float);
    let seeded = seeded_poly_diag(7, 3);
    gauntlet("seeded diagonal", &seeded, EvalMode::Rational);
    gauntlet("seeded diagonal", &seeded, EvalMode::Float);
}

//! Ready-made charts, structures and seeded generators shared by the
//! examples, the report pipeline and the integration tests. Everything here
//! is plain construction; the modules under test do the actual work.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use crate::expr::Expr;
use crate::rng::SplitMix64;
use crate::structure::{GeneratorInput, MsqeStructure};
use crate::tensor::{ChartManifold, Convention, CurvatureBundle, TensorField};

fn chart(n: usize) -> Arc<ChartManifold> {
    ChartManifold::new((1..=n).map(|i| format!("x{i}")).collect()).unwrap()
}

fn diag(m: &Arc<ChartManifold>, entries: &[&str], convention: Convention) -> CurvatureBundle {
    let mut g = TensorField::zeros(m, 0, 2);
    for (i, e) in entries.iter().enumerate() {
        g.set(&[i, i], m.parse(e).unwrap());
    }
    CurvatureBundle::new(g, convention).unwrap()
}

pub fn euclidean(n: usize) -> CurvatureBundle {
    let m = chart(n);
    let entries = vec!["1"; n];
    diag(&m, &entries, Convention::default())
}

pub fn minkowski4() -> CurvatureBundle {
    let m = chart(4);
    diag(&m, &["1", "1", "1", "-1"], Convention::default())
}

/// Flat plane in polar-style coordinates, the smallest curved-looking chart
/// with nontrivial Christoffel symbols.
pub fn polar_plane() -> CurvatureBundle {
    let m = chart(2);
    diag(&m, &["1", "x1^2"], Convention::default())
}

/// Round four-sphere in stereographic coordinates; constant curvature with
/// rational metric entries.
pub fn stereographic_sphere4() -> CurvatureBundle {
    let m = chart(4);
    let scale = "4/((1 + x1^2 + x2^2 + x3^2 + x4^2)^2)";
    diag(&m, &[scale, scale, scale, scale], Convention::default())
}

/// Upper-half-space hyperbolic metric; Einstein, so structure fits against
/// it are rank deficient by design.
pub fn hyperbolic4() -> CurvatureBundle {
    let m = chart(4);
    let e = "1/x4^2";
    diag(&m, &[e, e, e, e], Convention::default())
}

/// Three-dimensional wave-like chart whose Ricci tensor is recurrent but
/// not parallel.
pub fn ricci_recurrent_wave() -> CurvatureBundle {
    let m = chart(3);
    let mut g = TensorField::zeros(&m, 0, 2);
    g.set(&[0, 0], m.parse("x1*x3^2").unwrap());
    g.set(&[0, 1], Expr::one());
    g.set(&[1, 0], Expr::one());
    g.set(&[2, 2], Expr::one());
    CurvatureBundle::new(g, Convention::default()).unwrap()
}

/// The mixed-signature bench chart g = diag(1, 2 x1^2, 2 x2^2, -1) with its
/// full generator frame, auxiliary tensor and coefficient functions.
pub fn running_example(convention: Convention) -> (CurvatureBundle, MsqeStructure) {
    let m = chart(4);
    let b = diag(&m, &["1", "2*x1^2", "2*x2^2", "-1"], convention);
    let s = running_example_structure(&b);
    (b, s)
}

fn running_example_structure(b: &CurvatureBundle) -> MsqeStructure {
    let m = b.manifold().clone();
    let p = |src: &str| m.parse(src).unwrap();
    let xi1 = vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::int(-1)];
    let xi2 = vec![Expr::zero(), p("1/(2*x1)"), p("1/(2*x2)"), Expr::zero()];
    let mut d = TensorField::zeros(&m, 0, 2);
    d.set(&[0, 0], Expr::one());
    d.set(&[1, 1], Expr::int(-2));
    d.set(&[2, 2], Expr::one());
    d.set(&[0, 1], p("x1/x2"));
    d.set(&[1, 0], p("x1/x2"));
    let psis = [
        p("3/4*exp(x1)"),
        p("2*exp(x1)"),
        p("-exp(x1)"),
        p("-x1"),
        p("-1/x1^2"),
    ];
    MsqeStructure::resolve(
        b,
        GeneratorInput::vector(xi1),
        GeneratorInput::vector(xi2),
        d,
        Some(psis),
        -1,
        1,
    )
    .unwrap()
}

/// Flat chart where the auxiliary tensor has the second generator as an
/// exact eigenvector, putting the pseudosymmetry analysis on its
/// degenerate-threshold branch.
pub fn eigenvalue_case() -> (CurvatureBundle, MsqeStructure) {
    let m = chart(4);
    let b = diag(&m, &["1", "1", "1", "-1"], Convention::default());
    let xi1 = vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()];
    let xi2 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
    let mut d = TensorField::zeros(&m, 0, 2);
    for i in 0..3 {
        d.set(&[i, i], Expr::int(3));
    }
    let psis = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::one(), Expr::int(2)];
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

/// Warped product whose first generator is torse-forming with scale 1/x1;
/// exercises the full consequence chain of the flow analysis.
pub fn warped_generator() -> (CurvatureBundle, MsqeStructure) {
    let m = chart(4);
    let b = diag(&m, &["-1", "x1^2", "x1^2", "x1^2"], Convention::default());
    let xi1 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
    let xi2 = vec![
        Expr::zero(),
        m.parse("1/x1").unwrap(),
        Expr::zero(),
        Expr::zero(),
    ];
    let mut d = TensorField::zeros(&m, 0, 2);
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

/// Seeded diagonal metric with low-degree polynomial entries, positive on
/// any box inside the positive orthant.
pub fn seeded_poly_diag(seed: u64, n: usize) -> CurvatureBundle {
    let mut rng = SplitMix64::new(seed);
    let m = chart(n);
    let mut g = TensorField::zeros(&m, 0, 2);
    for i in 0..n {
        let a = rng.range_i64(1, 4);
        let b = rng.range_i64(0, 3);
        let k = rng.below(n as u64) as usize + 1;
        g.set(&[i, i], m.parse(&format!("{a} + {b}*x{k}^2")).unwrap());
    }
    CurvatureBundle::new(g, Convention::default()).unwrap()
}

/// A structure with known coefficients and the symmetric target built from
/// them, for exercising exact recovery of the coefficient fit.
pub struct SyntheticMsqe {
    pub bundle: CurvatureBundle,
    pub structure: MsqeStructure,
    pub psis: [BigRational; 5],
    pub target: TensorField,
}

/// Seeded structure on the flat mixed-signature chart. The auxiliary tensor
/// keeps its first off-diagonal entry nonzero so the five regressors stay
/// independent and the recovery is unique.
pub fn seeded_msqe(seed: u64) -> SyntheticMsqe {
    let mut rng = SplitMix64::new(seed);
    let m = chart(4);
    let bundle = diag(&m, &["1", "1", "1", "-1"], Convention::default());

    let xi1 = vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()];
    let xi2 = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()];
    let mut rat = |lo: i64, hi: i64| BigRational::new(rng.range_i64(lo, hi).into(), rng.range_i64(1, 5).into());
    let mut d = TensorField::zeros(&m, 0, 2);
    for i in 0..3 {
        for j in i..3 {
            let mut v = rat(-5, 5);
            if (i, j) == (0, 1) && v.is_zero() {
                v = BigRational::new(1.into(), 2.into());
            }
            d.set(&[i, j], Expr::Const(v.clone()));
            d.set(&[j, i], Expr::Const(v));
        }
    }
    let mut psis_r = [(); 5].map(|_| rat(-6, 6));
    if psis_r[4].is_zero() {
        psis_r[4] = BigRational::new(1.into(), 3.into());
    }

    let structure = MsqeStructure::resolve(
        &bundle,
        GeneratorInput::vector(xi1),
        GeneratorInput::vector(xi2),
        d,
        Some(psis_r.clone().map(Expr::Const)),
        -1,
        1,
    )
    .unwrap();

    let regs = structure.regressors(bundle.metric());
    let mut target = TensorField::zeros(&m, 0, 2);
    for (reg, psi) in regs.iter().zip(&psis_r) {
        target = target.add(&reg.scale(&Expr::Const(psi.clone())));
    }
    SyntheticMsqe {
        bundle,
        structure,
        psis: psis_r,
        target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::fit_msqe;
    use crate::expr::{self, NumericValue};
    use crate::sample::{EvalMode, SamplePlan};

    fn plan(dim: usize) -> SamplePlan {
        let lo = BigRational::new(1.into(), 2.into());
        let hi = BigRational::from_integer(3.into());
        SamplePlan::new(dim, 12, 0, &lo, &hi, EvalMode::Rational)
    }

    #[test]
    fn the_catalog_builds_and_keeps_its_advertised_shapes() {
        assert_eq!(euclidean(3).dim(), 3);
        assert!(minkowski4().ricci().is_zero());
        assert!(polar_plane().ricci().is_zero());
        assert!(!stereographic_sphere4().ricci().is_zero());
        assert!(!hyperbolic4().ricci().is_zero());
        assert!(!ricci_recurrent_wave().ricci().is_zero());
        let (b, s) = running_example(Convention::default());
        assert_eq!(b.dim(), 4);
        assert_eq!((s.eps1(), s.eps2()), (-1, 1));
        for seed in 0..4 {
            for n in 2..5 {
                assert_eq!(seeded_poly_diag(seed, n).dim(), n);
            }
        }
    }

    #[test]
    fn seeded_targets_round_trip_through_the_fit() {
        for seed in 0..6 {
            let case = seeded_msqe(seed);
            let fit = fit_msqe(&case.target, &case.structure, &case.bundle, &plan(4));
            assert!(fit.fits(), "seed {seed}: {:?}", fit.warnings);
            assert!(fit.all_exact && fit.full_rank && fit.point_independent);
            let got = fit.consensus.as_ref().unwrap();
            for (g, want) in got.iter().zip(&case.psis) {
                match g {
                    NumericValue::Exact(q) => assert_eq!(q, want, "seed {seed}"),
                    NumericValue::Float(_) => panic!("exact input produced a float"),
                }
            }
        }
    }

    #[test]
    fn the_running_example_metric_reads_back() {
        let (b, s) = running_example(Convention::default());
        let m = b.manifold();
        assert!(expr::provably_zero(&expr::sub(
            b.metric().get(&[1, 1]),
            &m.parse("2*x1^2").unwrap(),
        )));
        assert!(expr::provably_zero(&expr::sub(
            &s.d_tensor().get(&[0, 1]).clone(),
            &m.parse("x1/x2").unwrap(),
        )));
    }
}

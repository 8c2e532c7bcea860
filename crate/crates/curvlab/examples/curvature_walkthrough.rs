//! Build a chart and metric by hand, then walk the whole curvature stack:
//! Christoffel symbols, Riemann and lowered curvature, Ricci, scalar. Also
//! shows how the curvature sign convention changes the reported tensors.

use curvlab::expr;
use curvlab::tensor::{ChartManifold, Convention, CurvatureBundle, CurvatureSign, TensorField};

fn main() {
    let m = ChartManifold::new(vec![
        "x1".into(),
        "x2".into(),
        "x3".into(),
        "x4".into(),
    ])
    .unwrap();

    // the mixed-signature bench metric diag(1, 2 x1^2, 2 x2^2, -1)
    let mut g = TensorField::zeros(&m, 0, 2);
    g.set(&[0, 0], m.parse("1").unwrap());
    g.set(&[1, 1], m.parse("2*x1^2").unwrap());
    g.set(&[2, 2], m.parse("2*x2^2").unwrap());
    g.set(&[3, 3], m.parse("-1").unwrap());

    let bundle = CurvatureBundle::new(g.clone(), Convention::default()).unwrap();
    let n = bundle.dim();

    println!("nonzero Christoffel symbols:");
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let e = bundle.christoffel().get(&[l, i, j]);
                if !expr::provably_zero(e) {
                    println!("  Γ^{}_{}{} = {}", l + 1, i + 1, j + 1, m.render(e));
                }
            }
        }
    }

    println!("nonzero Ricci components (upper triangle):");
    for i in 0..n {
        for j in i..n {
            let e = bundle.ricci().get(&[i, j]);
            if !expr::provably_zero(e) {
                println!("  Ric_{}{} = {}", i + 1, j + 1, m.render(e));
            }
        }
    }
    println!("scalar curvature: {}", m.render(bundle.scalar()));

    // the opposite curvature sign flips odd-order curvature contractions
    let flipped = CurvatureBundle::new(
        g,
        Convention {
            curvature_sign: CurvatureSign::Positive,
            ..Convention::default()
        },
    )
    .unwrap();
    println!(
        "Ric_12 under the positive convention: {}",
        m.render(flipped.ricci().get(&[0, 1]))
    );

    // derivatives and evaluation on raw expressions
    let f = m.parse("exp(x1)/x2").unwrap();
    println!(
        "d/dx2 of {} = {}",
        m.render(&f),
        m.render(&expr::simplify(&expr::differentiate(&f, 1)))
    );
}

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{self, Expr, NormError};

use super::chart::ChartManifold;
use super::field::{indices, TensorField};

/// Sign applied to the whole Riemann tensor (and hence to everything
/// contracted from it: Ricci, scalar curvature, the derived tensors).
/// `Negative` makes the Ricci tensor of a round sphere negative definite,
/// which is the convention of the structure-detection formulas here;
/// `Positive` is the textbook sign. Either way both sides of every identity
/// scale together, so identity checks are convention-stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureSign {
    #[default]
    Negative,
    Positive,
}

impl CurvatureSign {
    fn apply(self, e: Expr) -> Expr {
        match self {
            CurvatureSign::Negative => expr::neg(&e),
            CurvatureSign::Positive => expr::simplify(&e),
        }
    }
}

/// Slot order of the lowered curvature tensor: `ZThenW` stores
/// R(X,Y,Z,W) = g(R(X,Y)Z, W); `WThenZ` stores g(R(X,Y)W, Z), which flips
/// the sign of every component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoweredSlotOrder {
    #[default]
    ZThenW,
    WThenZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Convention {
    pub curvature_sign: CurvatureSign,
    pub lowered_slot_order: LoweredSlotOrder,
}

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("metric is singular: its determinant is identically zero")]
    SingularMetric,
    #[error("metric is not recognizably symmetric at components ({i},{j})/({j},{i})")]
    AsymmetricMetric { i: usize, j: usize },
    #[error("metric must be a (0,2) tensor, got ({contra},{co})")]
    NotBilinear { contra: usize, co: usize },
    #[error("the plane spanned by the given vectors is degenerate")]
    DegeneratePlane,
    #[error("expression too large to normalize")]
    Norm(#[from] NormError),
}

/// The curvature tower of one metric: inverse, Christoffel symbols, Riemann
/// tensor in both positions, Ricci, and scalar curvature, all exact.
#[derive(Debug)]
pub struct CurvatureBundle {
    manifold: Arc<ChartManifold>,
    convention: Convention,
    metric: TensorField,
    inverse: TensorField,
    det: Expr,
    christoffel: TensorField,
    riemann: TensorField,
    lowered: TensorField,
    ricci: TensorField,
    scalar: Expr,
}

impl CurvatureBundle {
    pub fn new(metric: TensorField, convention: Convention) -> Result<Self, CurvatureError> {
        if (metric.contra(), metric.co()) != (0, 2) {
            return Err(CurvatureError::NotBilinear {
                contra: metric.contra(),
                co: metric.co(),
            });
        }
        let n = metric.dim();
        for i in 0..n {
            for j in i + 1..n {
                if !expr::provably_zero(&expr::sub(metric.get(&[i, j]), metric.get(&[j, i]))) {
                    return Err(CurvatureError::AsymmetricMetric { i, j });
                }
            }
        }
        let manifold = Arc::clone(metric.manifold());

        let (inverse, det) = invert_symmetric(&metric)?;

        // dg[l][i][j] = d g_ij / d x^l
        let mut dg = vec![vec![vec![Expr::zero(); n]; n]; n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    dg[l][i][j] = expr::differentiate(metric.get(&[i, j]), l);
                }
            }
        }

        // Christoffel symbols of the second kind, symmetric in the lower pair
        let mut christoffel = TensorField::zeros(&manifold, 1, 2);
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut terms = Vec::with_capacity(n);
                    for l in 0..n {
                        let inner = expr::sum_of(&[
                            dg[i][j][l].clone(),
                            dg[j][i][l].clone(),
                            expr::neg(&dg[l][i][j]),
                        ]);
                        terms.push(expr::mul(inverse.get(&[k, l]), &inner));
                    }
                    let gamma = expr::mul(&Expr::rational(1, 2), &expr::sum_of(&terms));
                    christoffel.set(&[k, i, j], gamma.clone());
                    christoffel.set(&[k, j, i], gamma);
                }
            }
        }

        // R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik,
        // then the convention sign on the whole tensor
        let mut riemann = TensorField::zeros(&manifold, 1, 3);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for k in 0..n {
                        let mut terms = vec![
                            expr::differentiate(christoffel.get(&[l, j, k]), i),
                            expr::neg(&expr::differentiate(christoffel.get(&[l, i, k]), j)),
                        ];
                        for m in 0..n {
                            terms.push(expr::mul(
                                christoffel.get(&[l, i, m]),
                                christoffel.get(&[m, j, k]),
                            ));
                            terms.push(expr::neg(&expr::mul(
                                christoffel.get(&[l, j, m]),
                                christoffel.get(&[m, i, k]),
                            )));
                        }
                        riemann.set(&[l, i, j, k], convention.curvature_sign.apply(expr::sum_of(&terms)));
                    }
                }
            }
        }

        let mut lowered = TensorField::zeros(&manifold, 0, 4);
        for idx in indices(n, 4) {
            let (i, j, k, w) = (idx[0], idx[1], idx[2], idx[3]);
            let mut terms = Vec::with_capacity(n);
            for m in 0..n {
                let comp = match convention.lowered_slot_order {
                    LoweredSlotOrder::ZThenW => {
                        expr::mul(metric.get(&[m, w]), riemann.get(&[m, i, j, k]))
                    }
                    LoweredSlotOrder::WThenZ => {
                        expr::mul(metric.get(&[m, k]), riemann.get(&[m, i, j, w]))
                    }
                };
                terms.push(comp);
            }
            lowered.set(&idx, expr::sum_of(&terms));
        }

        let mut ricci = TensorField::zeros(&manifold, 0, 2);
        for j in 0..n {
            for k in 0..n {
                let terms: Vec<Expr> =
                    (0..n).map(|l| riemann.get(&[l, l, j, k]).clone()).collect();
                ricci.set(&[j, k], expr::sum_of(&terms));
            }
        }

        let mut scalar_terms = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                scalar_terms.push(expr::mul(inverse.get(&[j, k]), ricci.get(&[j, k])));
            }
        }
        let scalar = expr::sum_of(&scalar_terms);

        Ok(CurvatureBundle {
            manifold,
            convention,
            metric,
            inverse,
            det,
            christoffel,
            riemann,
            lowered,
            ricci,
            scalar,
        })
    }

    pub fn manifold(&self) -> &Arc<ChartManifold> {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn metric(&self) -> &TensorField {
        &self.metric
    }

    /// Inverse metric as a (2,0) tensor.
    pub fn inverse(&self) -> &TensorField {
        &self.inverse
    }

    pub fn det(&self) -> &Expr {
        &self.det
    }

    /// Christoffel symbols as a (1,2) field, upper slot first.
    pub fn christoffel(&self) -> &TensorField {
        &self.christoffel
    }

    /// Riemann tensor R^l_ijk as a (1,3) field, slots [l][i][j][k] with
    /// (i,j) the plane pair and k the argument; convention sign applied.
    pub fn riemann(&self) -> &TensorField {
        &self.riemann
    }

    /// Fully lowered curvature tensor, slot order per the convention.
    pub fn lowered(&self) -> &TensorField {
        &self.lowered
    }

    pub fn ricci(&self) -> &TensorField {
        &self.ricci
    }

    pub fn scalar(&self) -> &Expr {
        &self.scalar
    }

    /// g(X, Y) for contravariant component vectors.
    pub fn metric_dot(&self, x: &[Expr], y: &[Expr]) -> Expr {
        let n = self.dim();
        let mut terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                terms.push(expr::mul(&expr::mul(&x[i], &y[j]), self.metric.get(&[i, j])));
            }
        }
        expr::sum_of(&terms)
    }

    /// Sectional curvature of the plane spanned by `x` and `y`, always in
    /// the geometric sign (positive on round spheres) regardless of the
    /// curvature-sign convention. Fails on degenerate planes.
    pub fn sectional_curvature(&self, x: &[Expr], y: &[Expr]) -> Result<Expr, CurvatureError> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        // v^l = R^l_ijk x^i y^j y^k
        let mut numer_terms = Vec::new();
        for l in 0..n {
            let mut v_terms = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let r = self.riemann.get(&[l, i, j, k]);
                        if r.is_zero_const() {
                            continue;
                        }
                        let c = expr::mul(&expr::mul(&x[i], &y[j]), &y[k]);
                        v_terms.push(expr::mul(r, &c));
                    }
                }
            }
            let v = expr::sum_of(&v_terms);
            // g(v, X)
            for w in 0..n {
                numer_terms.push(expr::mul(&expr::mul(&v, &x[w]), self.metric.get(&[l, w])));
            }
        }
        let mut numer = expr::sum_of(&numer_terms);
        if self.convention.curvature_sign == CurvatureSign::Negative {
            numer = expr::neg(&numer);
        }
        let gxx = self.metric_dot(x, x);
        let gyy = self.metric_dot(y, y);
        let gxy = self.metric_dot(x, y);
        let denom = expr::sub(&expr::mul(&gxx, &gyy), &expr::mul(&gxy, &gxy));
        expr::div(&numer, &denom).map_err(|e| match e {
            NormError::ZeroDenominator => CurvatureError::DegeneratePlane,
            other => CurvatureError::Norm(other),
        })
    }

    /// Sectional curvature of the coordinate plane (a, b).
    pub fn coordinate_sectional(&self, a: usize, b: usize) -> Result<Expr, CurvatureError> {
        let n = self.dim();
        let mut x = vec![Expr::zero(); n];
        let mut y = vec![Expr::zero(); n];
        x[a] = Expr::one();
        y[b] = Expr::one();
        self.sectional_curvature(&x, &y)
    }
}

/// Determinant and adjugate inverse of a symmetric (0,2) field. The inverse
/// is exact; failure means the determinant is identically zero.
fn invert_symmetric(metric: &TensorField) -> Result<(TensorField, Expr), CurvatureError> {
    let n = metric.dim();
    let det = det_expr(metric, &(0..n).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>());
    let mut inverse = TensorField::zeros(metric.manifold(), 2, 0);
    for i in 0..n {
        for j in 0..n {
            // cofactor expansion: adj[i][j] = (-1)^(i+j) det(minor_ji)
            let rows: Vec<usize> = (0..n).filter(|r| *r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|c| *c != i).collect();
            let minor = det_expr(metric, &rows, &cols);
            let signed = if (i + j) % 2 == 0 { minor } else { expr::neg(&minor) };
            let entry = expr::div(&signed, &det).map_err(|e| match e {
                NormError::ZeroDenominator => CurvatureError::SingularMetric,
                other => CurvatureError::Norm(other),
            })?;
            inverse.set(&[i, j], entry);
        }
    }
    Ok((inverse, expr::simplify(&det)))
}

/// Determinant of the submatrix on `rows` x `cols` by memoized expansion
/// along the first row; the memo key is the remaining column set.
fn det_expr(metric: &TensorField, rows: &[usize], cols: &[usize]) -> Expr {
    debug_assert_eq!(rows.len(), cols.len());
    let mut memo: HashMap<u64, Expr> = HashMap::new();
    det_rec(metric, rows, cols, 0, (1u64 << cols.len()) - 1, &mut memo)
}

fn det_rec(
    metric: &TensorField,
    rows: &[usize],
    cols: &[usize],
    row_pos: usize,
    col_mask: u64,
    memo: &mut HashMap<u64, Expr>,
) -> Expr {
    if row_pos == rows.len() {
        return Expr::one();
    }
    if let Some(hit) = memo.get(&col_mask) {
        return hit.clone();
    }
    let mut terms = Vec::new();
    let mut parity = 0u32;
    for (cpos, &col) in cols.iter().enumerate() {
        if col_mask & (1u64 << cpos) == 0 {
            continue;
        }
        let entry = metric.get(&[rows[row_pos], col]);
        if !entry.is_zero_const() {
            let sub = det_rec(metric, rows, cols, row_pos + 1, col_mask & !(1u64 << cpos), memo);
            let term = expr::mul(entry, &sub);
            terms.push(if parity % 2 == 0 { term } else { expr::neg(&term) });
        }
        parity += 1;
    }
    let det = expr::sum_of(&terms);
    memo.insert(col_mask, det.clone());
    det
}

//! Mixed super quasi-Einstein structure data.
//!
//! The structure consists of two distinguished generators `xi1`, `xi2` with
//! metric-dual one-forms `A`, `B`, a symmetric auxiliary tensor `D` that
//! annihilates `xi1`, and five coefficient functions tying them to the Ricci
//! tensor:
//!
//!   Ric = P1 g + P2 A(x)A + P3 B(x)B + P4 (A(x)B + B(x)A) + P5 D
//!
//! On indefinite metrics the generators are unit up to sign, so the
//! normalizations g(xi1,xi1) = eps1 and g(xi2,xi2) = eps2 carry explicit
//! signs. Nothing here asserts that a given metric satisfies the shape; this
//! module only holds the data and assembles the residual of the defining
//! equation. Whether the residual vanishes is the detector's business.

use thiserror::Error;

use crate::expr::{self, Expr};
use crate::tensor::{ops, CurvatureBundle, TensorField};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("generator {which} needs a vector field, a one-form, or both")]
    MissingGenerator { which: &'static str },
    #[error("{what} has {got} components but the chart has {dim} coordinates")]
    WrongLength { what: &'static str, got: usize, dim: usize },
    #[error("auxiliary tensor must be a (0,2) field, got ({contra},{co})")]
    AuxiliaryShape { contra: usize, co: usize },
    #[error("auxiliary tensor must be symmetric; components ({i},{j}) and ({j},{i}) differ")]
    AsymmetricAuxiliary { i: usize, j: usize },
    #[error("normalization sign must be +1 or -1, got {got}")]
    BadSign { got: i8 },
}

/// One generator as supplied by the caller. With only one representation
/// given, the other is resolved through the metric; with both given, the
/// frame audit cross-checks them for duality instead of trusting either.
#[derive(Debug, Clone, Default)]
pub struct GeneratorInput {
    pub vector: Option<Vec<Expr>>,
    pub one_form: Option<Vec<Expr>>,
}

impl GeneratorInput {
    pub fn vector(components: Vec<Expr>) -> Self {
        GeneratorInput { vector: Some(components), one_form: None }
    }

    pub fn one_form(components: Vec<Expr>) -> Self {
        GeneratorInput { vector: None, one_form: Some(components) }
    }

    pub fn both(vector: Vec<Expr>, one_form: Vec<Expr>) -> Self {
        GeneratorInput { vector: Some(vector), one_form: Some(one_form) }
    }
}

/// Resolved structure data tied to one metric.
#[derive(Debug, Clone)]
pub struct MsqeStructure {
    xi1: Vec<Expr>,
    xi2: Vec<Expr>,
    a_form: TensorField,
    b_form: TensorField,
    d_tensor: TensorField,
    psis: Option<[Expr; 5]>,
    eps1: i8,
    eps2: i8,
    // true when the caller supplied both representations, so duality is a
    // claim to audit rather than a construction
    a_independent: bool,
    b_independent: bool,
}

impl MsqeStructure {
    /// Resolve caller input against a metric: derive whichever dual
    /// representation is missing and validate shapes. `psis` may be absent
    /// when the coefficients are a fit target rather than a claim.
    pub fn resolve(
        bundle: &CurvatureBundle,
        xi1: GeneratorInput,
        xi2: GeneratorInput,
        d_tensor: TensorField,
        psis: Option<[Expr; 5]>,
        eps1: i8,
        eps2: i8,
    ) -> Result<Self, StructureError> {
        for eps in [eps1, eps2] {
            if eps != 1 && eps != -1 {
                return Err(StructureError::BadSign { got: eps });
            }
        }
        if (d_tensor.contra(), d_tensor.co()) != (0, 2) {
            return Err(StructureError::AuxiliaryShape {
                contra: d_tensor.contra(),
                co: d_tensor.co(),
            });
        }
        let n = bundle.dim();
        for i in 0..n {
            for j in i + 1..n {
                let gap = expr::sub(d_tensor.get(&[i, j]), d_tensor.get(&[j, i]));
                if !expr::provably_zero(&gap) {
                    return Err(StructureError::AsymmetricAuxiliary { i, j });
                }
            }
        }

        let (xi1, a_form, a_independent) = resolve_generator(bundle, xi1, "xi1")?;
        let (xi2, b_form, b_independent) = resolve_generator(bundle, xi2, "xi2")?;

        Ok(MsqeStructure {
            xi1,
            xi2,
            a_form,
            b_form,
            d_tensor,
            psis,
            eps1,
            eps2,
            a_independent,
            b_independent,
        })
    }

    pub fn xi1(&self) -> &[Expr] {
        &self.xi1
    }

    pub fn xi2(&self) -> &[Expr] {
        &self.xi2
    }

    pub fn a_form(&self) -> &TensorField {
        &self.a_form
    }

    pub fn b_form(&self) -> &TensorField {
        &self.b_form
    }

    pub fn d_tensor(&self) -> &TensorField {
        &self.d_tensor
    }

    pub fn psis(&self) -> Option<&[Expr; 5]> {
        self.psis.as_ref()
    }

    pub fn eps1(&self) -> i8 {
        self.eps1
    }

    pub fn eps2(&self) -> i8 {
        self.eps2
    }

    /// Whether the one-form dual to `xi1` was supplied independently of the
    /// vector (and likewise for `xi2`): if so the duality relation is a
    /// checkable claim, otherwise it holds by construction.
    pub fn duality_is_claim(&self) -> (bool, bool) {
        (self.a_independent, self.b_independent)
    }

    pub fn with_psis(mut self, psis: [Expr; 5]) -> Self {
        self.psis = Some(psis);
        self
    }

    /// The five regressor fields of the defining equation, in coefficient
    /// order: g, A(x)A, B(x)B, A(x)B + B(x)A, D.
    pub fn regressors(&self, metric: &TensorField) -> [TensorField; 5] {
        let aa = form_square(&self.a_form);
        let bb = form_square(&self.b_form);
        let ab = form_symmetric_product(&self.a_form, &self.b_form);
        [metric.clone(), aa, bb, ab, self.d_tensor.clone()]
    }

    /// Right-hand side of the defining equation; `None` without coefficients.
    pub fn defining_rhs(&self, metric: &TensorField) -> Option<TensorField> {
        let psis = self.psis.as_ref()?;
        let regs = self.regressors(metric);
        let mut rhs = TensorField::zeros(metric.manifold(), 0, 2);
        for (psi, reg) in psis.iter().zip(&regs) {
            if expr::provably_zero(psi) {
                continue;
            }
            rhs = rhs.add(&reg.scale(psi));
        }
        Some(rhs)
    }

    /// Ric minus the defining right-hand side; `None` without coefficients.
    pub fn defining_residual(&self, bundle: &CurvatureBundle) -> Option<TensorField> {
        Some(bundle.ricci().sub(&self.defining_rhs(bundle.metric())?))
    }

    /// Metric trace g^ij D_ij of the auxiliary tensor. The defining shape
    /// asks for a trace-free D; a nonzero value here is a finding, not an
    /// input error.
    pub fn d_trace(&self, bundle: &CurvatureBundle) -> Expr {
        let traced = ops::contract_with_inverse(&self.d_tensor, bundle, 0, 1);
        traced.get(&[]).clone()
    }

    /// Signature-aware trace of the defining equation: contracting with the
    /// inverse metric turns it into
    ///   r = n P1 + eps1 P2 + eps2 P3 + P5 tr D
    /// (the cross term drops because the generators are orthogonal). Returns
    /// the scalar residual r - rhs, or `None` without coefficients.
    pub fn trace_residual(&self, bundle: &CurvatureBundle) -> Option<Expr> {
        let [p1, p2, p3, _, p5] = self.psis.as_ref()?;
        let n = Expr::int(bundle.dim() as i64);
        let rhs = expr::sum_of(&[
            expr::mul(&n, p1),
            expr::mul(&Expr::int(self.eps1 as i64), p2),
            expr::mul(&Expr::int(self.eps2 as i64), p3),
            expr::mul(p5, &self.d_trace(bundle)),
        ]);
        Some(expr::sub(bundle.scalar(), &rhs))
    }
}

fn resolve_generator(
    bundle: &CurvatureBundle,
    input: GeneratorInput,
    which: &'static str,
) -> Result<(Vec<Expr>, TensorField, bool), StructureError> {
    let n = bundle.dim();
    let check_len = |what: &'static str, got: usize| {
        if got == n {
            Ok(())
        } else {
            Err(StructureError::WrongLength { what, got, dim: n })
        }
    };
    match (input.vector, input.one_form) {
        (Some(v), Some(w)) => {
            check_len(which, v.len())?;
            check_len(which, w.len())?;
            let form = TensorField::from_components(bundle.manifold(), 0, 1, w);
            Ok((v, form, true))
        }
        (Some(v), None) => {
            check_len(which, v.len())?;
            let form = ops::lower_vector(&v, bundle);
            Ok((v, form, false))
        }
        (None, Some(w)) => {
            check_len(which, w.len())?;
            let form = TensorField::from_components(bundle.manifold(), 0, 1, w);
            let v = ops::raise_oneform(&form, bundle);
            Ok((v, form, false))
        }
        (None, None) => Err(StructureError::MissingGenerator { which }),
    }
}

/// w (x) w as a (0,2) field.
fn form_square(w: &TensorField) -> TensorField {
    let n = w.dim();
    let mut out = TensorField::zeros(w.manifold(), 0, 2);
    for i in 0..n {
        for j in 0..n {
            out.set(&[i, j], expr::mul(w.get(&[i]), w.get(&[j])));
        }
    }
    out
}

/// u (x) w + w (x) u as a (0,2) field.
fn form_symmetric_product(u: &TensorField, w: &TensorField) -> TensorField {
    let n = u.dim();
    let mut out = TensorField::zeros(u.manifold(), 0, 2);
    for i in 0..n {
        for j in 0..n {
            out.set(
                &[i, j],
                expr::add(
                    &expr::mul(u.get(&[i]), w.get(&[j])),
                    &expr::mul(w.get(&[i]), u.get(&[j])),
                ),
            );
        }
    }
    out
}

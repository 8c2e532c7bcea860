use std::sync::Arc;

use crate::expr::{self, evaluate, EvalError, Expr, NumericValue};

use super::chart::ChartManifold;

/// Dense tensor field on a chart: `contra` upper slots followed by `co`
/// lower slots, components stored row-major over the full index cube.
/// Covariant differentiation appends its index as the last (covariant)
/// slot, so mixed tensors keep their upper slots in front.
#[derive(Debug, Clone)]
pub struct TensorField {
    manifold: Arc<ChartManifold>,
    contra: usize,
    co: usize,
    comps: Vec<Expr>,
}

impl TensorField {
    pub fn zeros(manifold: &Arc<ChartManifold>, contra: usize, co: usize) -> Self {
        let len = manifold.dim().pow((contra + co) as u32);
        TensorField {
            manifold: Arc::clone(manifold),
            contra,
            co,
            comps: vec![Expr::zero(); len],
        }
    }

    /// `comps` in row-major order over `dim^(contra+co)` entries.
    pub fn from_components(
        manifold: &Arc<ChartManifold>,
        contra: usize,
        co: usize,
        comps: Vec<Expr>,
    ) -> Self {
        let len = manifold.dim().pow((contra + co) as u32);
        assert_eq!(comps.len(), len, "component count does not match shape");
        TensorField { manifold: Arc::clone(manifold), contra, co, comps }
    }

    /// Rank-0 field holding one scalar expression.
    pub fn scalar(manifold: &Arc<ChartManifold>, e: Expr) -> Self {
        TensorField { manifold: Arc::clone(manifold), contra: 0, co: 0, comps: vec![e] }
    }

    pub fn manifold(&self) -> &Arc<ChartManifold> {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub fn rank(&self) -> usize {
        self.contra + self.co
    }

    pub fn contra(&self) -> usize {
        self.contra
    }

    pub fn co(&self) -> usize {
        self.co
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let n = self.dim();
        let mut off = 0;
        for &i in idx {
            debug_assert!(i < n);
            off = off * n + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        let off = self.offset(idx);
        self.comps[off] = e;
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// All multi-indices of this tensor's shape, odometer order.
    pub fn indices(&self) -> MultiIndexIter {
        MultiIndexIter::new(self.dim(), self.rank())
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        TensorField {
            manifold: Arc::clone(&self.manifold),
            contra: self.contra,
            co: self.co,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &TensorField) -> TensorField {
        self.zip(other, |a, b| expr::add(a, b))
    }

    pub fn sub(&self, other: &TensorField) -> TensorField {
        self.zip(other, |a, b| expr::sub(a, b))
    }

    fn zip(&self, other: &TensorField, f: impl Fn(&Expr, &Expr) -> Expr) -> TensorField {
        assert_eq!(
            (self.contra, self.co, self.dim()),
            (other.contra, other.co, other.dim()),
            "tensor shape mismatch"
        );
        TensorField {
            manifold: Arc::clone(&self.manifold),
            contra: self.contra,
            co: self.co,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Expr) -> TensorField {
        self.map(|c| expr::mul(factor, c))
    }

    pub fn neg(&self) -> TensorField {
        self.map(expr::neg)
    }

    /// Swap two slots (same variance only; the layout keeps upper slots in
    /// front, so mixing variances would silently relabel them).
    pub fn swap_slots(&self, a: usize, b: usize) -> TensorField {
        assert!(
            (a < self.contra) == (b < self.contra),
            "cannot swap slots of different variance"
        );
        let mut out = TensorField::zeros(&self.manifold, self.contra, self.co);
        for idx in self.indices() {
            let mut tgt = idx.clone();
            tgt.swap(a, b);
            out.set(&tgt, self.get(&idx).clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(expr::provably_zero)
    }

    pub fn is_symmetric_in(&self, a: usize, b: usize) -> bool {
        self.sub(&self.swap_slots(a, b)).is_zero()
    }

    pub fn is_antisymmetric_in(&self, a: usize, b: usize) -> bool {
        self.add(&self.swap_slots(a, b)).is_zero()
    }

    /// Evaluate every component at a point.
    pub fn eval(&self, point: &[NumericValue]) -> Result<Vec<NumericValue>, EvalError> {
        self.comps.iter().map(|c| evaluate(c, point)).collect()
    }
}

pub struct MultiIndexIter {
    dim: usize,
    current: Vec<usize>,
    done: bool,
}

impl MultiIndexIter {
    pub fn new(dim: usize, rank: usize) -> Self {
        MultiIndexIter { dim, current: vec![0; rank], done: dim == 0 && rank > 0 }
    }
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        // odometer increment, most significant slot first
        let mut pos = self.current.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.dim {
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}

/// Multi-indices over `dim^rank` without a field in hand.
pub fn indices(dim: usize, rank: usize) -> MultiIndexIter {
    MultiIndexIter::new(dim, rank)
}

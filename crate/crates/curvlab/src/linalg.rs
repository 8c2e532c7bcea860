//! Dense least squares, exact and floating point.
//!
//! The exact path forms the normal equations over the rationals and
//! eliminates with full pivoting, so rank decisions are decisions about
//! exact zeros, not thresholds. Rank-deficient systems return the
//! minimum-norm solution together with a nullspace basis; callers report
//! the indeterminacy instead of silently picking a representative.
//!
//! The float path is Householder QR with column pivoting, used when the
//! inputs are already floats (sample points that touched `exp`).

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct ExactLsq {
    /// Minimum-norm least-squares solution.
    pub solution: Vec<BigRational>,
    pub rank: usize,
    /// Basis of the coefficient matrix's nullspace; empty at full rank.
    pub nullspace: Vec<Vec<BigRational>>,
    /// Squared norm of `A x - b` at the solution.
    pub residual_sq: BigRational,
}

/// Exact least squares `min |A x - b|`. Rows of `a` must have equal length;
/// `b` matches the row count.
pub fn lsq_exact(a: &[Vec<BigRational>], b: &[BigRational]) -> ExactLsq {
    let m = a.len();
    let c = if m == 0 { 0 } else { a[0].len() };
    debug_assert!(a.iter().all(|row| row.len() == c));
    debug_assert_eq!(b.len(), m);
    if c == 0 {
        let residual_sq = b.iter().map(|v| v * v).sum();
        return ExactLsq { solution: vec![], rank: 0, nullspace: vec![], residual_sq };
    }

    // normal equations G x = h with G = A^T A, h = A^T b
    let mut aug = vec![vec![BigRational::zero(); c + 1]; c];
    for i in 0..c {
        for j in 0..c {
            let mut s = BigRational::zero();
            for row in 0..m {
                s += &a[row][i] * &a[row][j];
            }
            aug[i][j] = s;
        }
        let mut s = BigRational::zero();
        for row in 0..m {
            s += &a[row][i] * &b[row];
        }
        aug[i][c] = s;
    }

    let (rref, perm, rank) = rref_full_pivot(aug, c);

    // particular solution: free variables zero
    let mut x = vec![BigRational::zero(); c];
    for (i, row) in rref.iter().enumerate().take(rank) {
        x[perm[i]] = row[c].clone();
    }

    // nullspace basis straight from the reduced rows
    let mut nullspace = Vec::with_capacity(c - rank);
    for free in rank..c {
        let mut v = vec![BigRational::zero(); c];
        v[perm[free]] = BigRational::one();
        for (i, row) in rref.iter().enumerate().take(rank) {
            v[perm[i]] = -row[free].clone();
        }
        nullspace.push(v);
    }

    // project the particular solution off the nullspace for minimum norm
    if !nullspace.is_empty() {
        let k = nullspace.len();
        let mut gram = vec![vec![BigRational::zero(); k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                gram[i][j] = dot(&nullspace[i], &nullspace[j]);
            }
            gram[i][k] = dot(&nullspace[i], &x);
        }
        let (g_rref, g_perm, g_rank) = rref_full_pivot(gram, k);
        debug_assert_eq!(g_rank, k, "nullspace basis is independent");
        let mut y = vec![BigRational::zero(); k];
        for (i, row) in g_rref.iter().enumerate().take(g_rank) {
            y[g_perm[i]] = row[k].clone();
        }
        for (coef, v) in y.iter().zip(&nullspace) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi -= coef * vi;
            }
        }
    }

    let mut residual_sq = BigRational::zero();
    for row in 0..m {
        let mut r = -b[row].clone();
        for (ai, xi) in a[row].iter().zip(&x) {
            r += ai * xi;
        }
        residual_sq += &r * &r;
    }

    ExactLsq { solution: x, rank, nullspace, residual_sq }
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reduced row echelon form with full pivoting over the first `active`
/// columns; trailing columns ride along as right-hand sides. Returns the
/// reduced matrix, the column permutation (position -> original column),
/// and the rank.
fn rref_full_pivot(
    mut m: Vec<Vec<BigRational>>,
    active: usize,
) -> (Vec<Vec<BigRational>>, Vec<usize>, usize) {
    let rows = m.len();
    let mut perm: Vec<usize> = (0..active).collect();
    let mut rank = 0;
    for step in 0..active.min(rows) {
        // largest absolute entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for r in step..rows {
            for c in step..active {
                if m[r][c].is_zero() {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((br, bc)) => m[r][c].abs() > m[*br][*bc].abs(),
                };
                if better {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        m.swap(step, pr);
        if pc != step {
            for row in m.iter_mut() {
                row.swap(step, pc);
            }
            perm.swap(step, pc);
        }
        let pivot = m[step][step].clone();
        for v in m[step][step..].iter_mut() {
            *v /= &pivot;
        }
        for r in 0..rows {
            if r == step || m[r][step].is_zero() {
                continue;
            }
            let factor = m[r][step].clone();
            for c in step..m[r].len() {
                let delta = &factor * &m[step][c];
                m[r][c] -= delta;
            }
        }
        rank = step + 1;
    }
    (m, perm, rank)
}

#[derive(Debug, Clone)]
pub struct FloatLsq {
    /// Basic least-squares solution (free columns zero).
    pub solution: Vec<f64>,
    pub rank: usize,
    /// Norm of `A x - b` at the solution.
    pub residual_norm: f64,
}

/// Floating-point least squares via Householder QR with column pivoting.
/// Rank is decided against a relative tolerance of 1e-12.
pub fn lsq_float(a: &[Vec<f64>], b: &[f64]) -> FloatLsq {
    let m = a.len();
    let c = if m == 0 { 0 } else { a[0].len() };
    debug_assert!(a.iter().all(|row| row.len() == c));
    debug_assert_eq!(b.len(), m);
    if c == 0 {
        let residual_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        return FloatLsq { solution: vec![], rank: 0, residual_norm };
    }
    let mut r: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut piv: Vec<usize> = (0..c).collect();
    let kmax = m.min(c);

    for k in 0..kmax {
        // pivot on the remaining column of largest norm
        let (mut best, mut best_norm) = (k, -1.0f64);
        for j in k..c {
            let norm: f64 = (k..m).map(|i| r[i][j] * r[i][j]).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        if best != k {
            for row in r.iter_mut() {
                row.swap(k, best);
            }
            piv.swap(k, best);
        }
        // Householder vector for column k
        let alpha: f64 = (k..m).map(|i| r[i][k] * r[i][k]).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let alpha = if r[k][k] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = (k..m).map(|i| r[i][k]).collect();
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        for j in k..c {
            let proj: f64 = (k..m).map(|i| v[i - k] * r[i][j]).sum();
            let scale = 2.0 * proj / vnorm_sq;
            for i in k..m {
                r[i][j] -= scale * v[i - k];
            }
        }
        let proj: f64 = (k..m).map(|i| v[i - k] * rhs[i]).sum();
        let scale = 2.0 * proj / vnorm_sq;
        for i in k..m {
            rhs[i] -= scale * v[i - k];
        }
        r[k][k] = alpha;
        for i in k + 1..m {
            r[i][k] = 0.0;
        }
    }

    let tol = 1e-12 * r[0][0].abs().max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for k in 0..kmax {
        if r[k][k].abs() > tol {
            rank = k + 1;
        } else {
            break;
        }
    }

    let mut y = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = rhs[i];
        for j in i + 1..rank {
            s -= r[i][j] * y[j];
        }
        y[i] = s / r[i][i];
    }
    let mut solution = vec![0.0; c];
    for i in 0..rank {
        solution[piv[i]] = y[i];
    }
    let residual_norm = rhs[rank..m].iter().map(|v| v * v).sum::<f64>().sqrt();
    FloatLsq { solution, rank, residual_norm }
}

//! Equality-constrained quadratic minimization through the Lagrange
//! multiplier (KKT) system.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fem::{reverse_cuthill_mckee, SparseMatrix};
use crate::scalar::{norm_inf, Real};

use super::SolveReport;

/// A row whose squared residual after projection onto the preceding kept
/// rows falls below this fraction of its squared norm counts as dependent.
const DEPENDENCE_TOLERANCE: f64 = 1e-11;

/// Indices (ascending) of a maximal linearly independent subset of the rows
/// of `a`. Empty rows are never kept.
///
/// Works on the Gram matrix `A A^T`, reordered by reverse Cuthill-McKee and
/// factorized as a banded Cholesky that skips vanishing pivots.
pub fn independent_rows<T: Real>(a: &SparseMatrix<T>) -> Vec<usize> {
    let m = a.rows();
    if m == 0 {
        return Vec::new();
    }
    let g = a.mul(&a.transpose());
    let perm = reverse_cuthill_mckee(&g);
    let mut inv = vec![0; m];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let w = g.triplets().iter().map(|&(i, j, _)| inv[i].abs_diff(inv[j])).max().unwrap_or(0);
    let width = w + 1;
    // l[i * width + (j + w - i)] holds entry (i, j), i - w <= j <= i
    let mut l = vec![T::zero(); m * width];
    for (i, j, v) in g.triplets() {
        let (pi, pj) = (inv[i], inv[j]);
        if pj <= pi {
            l[pi * width + pj + w - pi] = v;
        }
    }
    let diag: Vec<T> = (0..m).map(|i| l[i * width + w]).collect();
    let tol = T::tol(DEPENDENCE_TOLERANCE);
    let mut dropped = vec![false; m];
    for i in 0..m {
        let lo_i = i.saturating_sub(w);
        for j in lo_i..=i {
            let lo = lo_i.max(j.saturating_sub(w));
            let mut s = l[i * width + j + w - i];
            for k in lo..j {
                s -= l[i * width + k + w - i] * l[j * width + k + w - j];
            }
            if j < i {
                l[i * width + j + w - i] = if dropped[j] { T::zero() } else { s / l[j * width + w] };
            } else if diag[i] <= T::zero() || s <= tol * diag[i] {
                dropped[i] = true;
                for k in lo_i..=i {
                    l[i * width + k + w - i] = T::zero();
                }
            } else {
                l[i * width + w] = s.sqrt();
            }
        }
    }
    let mut keep: Vec<usize> = (0..m).filter(|&p| !dropped[p]).map(|p| perm[p]).collect();
    keep.sort_unstable();
    keep
}

/// Minimizes `1/2 u^T Q u - b^T u` subject to `A u = c` and `u[i] = v` for
/// every `(i, v)` in `fixed`.
///
/// Fixed values are substituted out, dependent constraint rows are dropped
/// (their multipliers are reported as zero, and they must still hold at the
/// solution), and the saddle system `[[Q, A^T], [A, 0]]` is factorized.
/// `Q` only needs to be symmetric; the solve succeeds whenever the reduced
/// saddle matrix is nonsingular.
pub fn solve_kkt<T: Real>(
    q: &SparseMatrix<T>,
    b: &[T],
    a: &SparseMatrix<T>,
    c: &[T],
    fixed: &[(usize, T)],
) -> Result<SolveReport<T>> {
    let n = q.rows();
    if q.cols() != n || b.len() != n || a.cols() != n || c.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "KKT data: Q {}x{}, b {}, A {}x{}, c {}",
            q.rows(),
            q.cols(),
            b.len(),
            a.rows(),
            a.cols(),
            c.len()
        )));
    }
    if !q.is_symmetric(T::tol(1e-12) * q.norm_inf()) {
        return Err(Error::InvalidArgument("quadratic term is not symmetric".into()));
    }
    let mut pinned: BTreeMap<usize, T> = BTreeMap::new();
    for &(i, v) in fixed {
        if i >= n {
            return Err(Error::InvalidArgument(format!("fixed index {i} out of range {n}")));
        }
        if let Some(old) = pinned.insert(i, v) {
            if old != v {
                return Err(Error::Infeasible { residual: (old - v).abs().as_f64() });
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|i| !pinned.contains_key(i)).collect();
    let mut x_fixed = vec![T::zero(); n];
    for (&i, &v) in &pinned {
        x_fixed[i] = v;
    }

    let qx = q.mul_vec(&x_fixed);
    let b_free: Vec<T> = free.iter().map(|&i| b[i] - qx[i]).collect();
    let ax = a.mul_vec(&x_fixed);
    let c_red: Vec<T> = c.iter().zip(&ax).map(|(ci, ai)| *ci - *ai).collect();
    let a_free = a.select_cols(&free);

    let scale = norm_inf(c).max(norm_inf(&x_fixed)).max(T::one());
    for i in 0..a_free.rows() {
        if a_free.row(i).next().is_none() && c_red[i].abs() > T::tol(1e-9) * scale {
            return Err(Error::Infeasible { residual: c_red[i].abs().as_f64() });
        }
    }
    let keep = independent_rows(&a_free);
    let a_keep = a_free.select_rows(&keep);
    let q_ff = q.select_rows(&free).select_cols(&free);
    let a_keep_t = a_keep.transpose();
    let kkt = SparseMatrix::from_blocks(&[vec![Some(&q_ff), Some(&a_keep_t)], vec![Some(&a_keep), None]]);
    let mut rhs = b_free;
    rhs.extend(keep.iter().map(|&i| c_red[i]));

    let sol = kkt.factor_symmetric()?.solve(&rhs)?;
    let mut u = x_fixed;
    for (k, &i) in free.iter().enumerate() {
        u[i] = sol[k];
    }
    let mut multipliers = vec![T::zero(); a.rows()];
    for (k, &i) in keep.iter().enumerate() {
        multipliers[i] = sol[free.len() + k];
    }

    let au = a.mul_vec(&u);
    let constraint_residual = norm_inf(&au.iter().zip(c).map(|(x, y)| *x - *y).collect::<Vec<_>>());
    let tol = T::tol(1e-9) * norm_inf(&u).max(norm_inf(c)).max(T::default_epsilon());
    if constraint_residual > tol {
        return Err(Error::Infeasible { residual: constraint_residual.as_f64() });
    }
    let qu = q.mul_vec(&u);
    let atl = a.tr_mul_vec(&multipliers);
    let stationarity: Vec<T> = free.iter().map(|&i| qu[i] - b[i] + atl[i]).collect();
    let energy = qu.iter().zip(&u).fold(T::zero(), |s, (a, b)| s + *a * *b) * T::lit(0.5)
        - b.iter().zip(&u).fold(T::zero(), |s, (a, b)| s + *a * *b);

    Ok(SolveReport {
        u,
        z: None,
        multipliers,
        multipliers_z: None,
        constraint_residual,
        stationarity_residual: norm_inf(&stationarity),
        energy,
        dropped_rows: a.rows() - keep.len(),
        offsets: vec![0, n],
    })
}

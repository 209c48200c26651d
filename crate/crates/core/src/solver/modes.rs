//! Generalized eigenpairs of `(L, M)` restricted to the null space of a
//! constraint matrix. Dense; meant for desk-scale problems.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fem::SparseMatrix;
use crate::scalar::Real;

/// Basis of `{x : A x = 0}` from a reduced row echelon form of `A`
/// computed with complete pivoting. Column `k` of the result is the unit
/// vector of the `k`-th free variable, completed on the pivot variables.
pub fn null_space_basis<T: Real>(a: &SparseMatrix<T>) -> DMatrix<T> {
    let n = a.cols();
    let mut r = a.to_dense();
    let m = r.nrows();
    let tiny = a.max_abs() * T::tol(1e-10);
    let mut pivots: Vec<usize> = Vec::new();
    let mut is_pivot = vec![false; n];
    for row in 0..m {
        // largest remaining entry in the unreduced block
        let mut best = (T::zero(), 0, 0);
        for i in row..m {
            for j in (0..n).filter(|&j| !is_pivot[j]) {
                let v = r[(i, j)].abs();
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        if best.0 <= tiny {
            break;
        }
        let (_, pi, pj) = best;
        r.swap_rows(row, pi);
        let p = r[(row, pj)];
        for j in 0..n {
            r[(row, j)] /= p;
        }
        for i in (0..m).filter(|&i| i != row) {
            let f = r[(i, pj)];
            if f != T::zero() {
                for j in 0..n {
                    let v = r[(row, j)];
                    r[(i, j)] -= f * v;
                }
            }
        }
        pivots.push(pj);
        is_pivot[pj] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let mut basis = DMatrix::zeros(n, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis[(f, k)] = T::one();
        for (row, &p) in pivots.iter().enumerate() {
            basis[(p, k)] = -r[(row, f)];
        }
    }
    basis
}

/// The `k` smallest eigenpairs of `L x = lambda M x` over `{x : A x = 0}`,
/// eigenvalues ascending and eigenvectors `M`-orthonormal. Each vector is
/// signed so that its largest-magnitude entry is positive.
pub fn constrained_modes<T: Real>(
    l: &SparseMatrix<T>,
    m: &SparseMatrix<T>,
    a: &SparseMatrix<T>,
    k: usize,
) -> Result<Vec<(T, Vec<T>)>> {
    let n = l.rows();
    if l.cols() != n || m.rows() != n || m.cols() != n || a.cols() != n {
        return Err(Error::Dimension(format!(
            "eigenproblem: L {}x{}, M {}x{}, A {}x{}",
            l.rows(),
            l.cols(),
            m.rows(),
            m.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let nb = null_space_basis(a);
    let dim = nb.ncols();
    let lnb = sparse_times_dense(l, &nb);
    let mnb = sparse_times_dense(m, &nb);
    let kr = nb.transpose() * lnb;
    let mr = nb.transpose() * mnb;
    let chol = mr.cholesky().ok_or(Error::Singular { size: dim, rank: 0 })?;
    let lower = chol.l();
    // C = Lc^-1 Kr Lc^-T
    let left = lower.solve_lower_triangular(&kr).ok_or(Error::Singular { size: dim, rank: 0 })?;
    let c = lower
        .solve_lower_triangular(&left.transpose())
        .ok_or(Error::Singular { size: dim, rank: 0 })?;
    let c = (&c + c.transpose()) * T::lit(0.5);
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let lt = lower.transpose();
    let mut out = Vec::with_capacity(k.min(dim));
    for &i in order.iter().take(k) {
        let w = eig.eigenvectors.column(i).into_owned();
        let y = lt.solve_upper_triangular(&w).ok_or(Error::Singular { size: dim, rank: 0 })?;
        let mut v: Vec<T> = (&nb * y).as_slice().to_vec();
        let peak = v.iter().fold(T::zero(), |p, x| if x.abs() > p.abs() { *x } else { p });
        if peak < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        out.push((eig.eigenvalues[i], v));
    }
    Ok(out)
}

fn sparse_times_dense<T: Real>(s: &SparseMatrix<T>, d: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(s.rows(), d.ncols());
    for i in 0..s.rows() {
        for (j, v) in s.row(i) {
            for c in 0..d.ncols() {
                out[(i, c)] += v * d[(j, c)];
            }
        }
    }
    out
}

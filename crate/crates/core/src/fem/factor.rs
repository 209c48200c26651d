//! Direct solver for sparse symmetric (possibly indefinite) systems.
//!
//! The matrix is reordered with reverse Cuthill-McKee and factorized as a
//! banded LU with partial pivoting. When the band would be wider than the
//! matrix itself and the system is small, a dense LU is used instead.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, LU, Dyn};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::SparseMatrix;

/// Systems up to this size may take the dense path.
pub const DENSE_LIMIT: usize = 2000;

const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone)]
enum Kind<T: Real> {
    Band(BandLu<T>),
    Dense(LU<T, Dyn, Dyn>),
}

/// Factorization of a square symmetric matrix, reused across solves.
#[derive(Debug, Clone)]
pub struct SymmetricFactor<T: Real> {
    matrix: SparseMatrix<T>,
    kind: Kind<T>,
}

impl<T: Real> SymmetricFactor<T> {
    pub fn new(a: &SparseMatrix<T>) -> Result<Self> {
        let n = a.rows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let band = a
            .triplets()
            .iter()
            .map(|&(i, j, _)| inv[i].abs_diff(inv[j]))
            .max()
            .unwrap_or(0);
        let tiny = a.max_abs() * T::tol(1e-13);
        let kind = if n <= DENSE_LIMIT && 3 * band + 1 >= n {
            let lu = a.to_dense().lu();
            let u = lu.u();
            let rank = (0..n).filter(|&i| u[(i, i)].abs() > tiny).count();
            if rank < n {
                return Err(Error::Singular { size: n, rank });
            }
            Kind::Dense(lu)
        } else {
            Kind::Band(BandLu::factor(a, perm, inv, band, tiny)?)
        };
        Ok(Self { matrix: a.clone(), kind })
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, Kind::Dense(_))
    }

    fn solve_once(&self, b: &[T]) -> Vec<T> {
        match &self.kind {
            Kind::Band(lu) => lu.solve(b),
            Kind::Dense(lu) => {
                let x = lu.solve(&DVector::from_column_slice(b)).expect("nonsingular factor");
                x.as_slice().to_vec()
            }
        }
    }

    /// Solves `A x = b` with a few steps of iterative refinement.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.matrix.rows() {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.matrix.rows()
            )));
        }
        let mut x = self.solve_once(b);
        for _ in 0..REFINEMENT_STEPS {
            let ax = self.matrix.mul_vec(&x);
            let r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
            let dx = self.solve_once(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += *di);
        }
        Ok(x)
    }
}

#[derive(Debug, Clone)]
struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn factor(a: &SparseMatrix<T>, perm: Vec<usize>, inv: Vec<usize>, band: usize, tiny: T) -> Result<Self> {
        let n = a.rows();
        let (kl, ku) = (band, band);
        let width = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, width, data: vec![T::zero(); n * width], pivots: vec![0; n], perm };
        for (i, j, v) in a.triplets() {
            let k = lu.at(inv[i], inv[j]);
            lu.data[k] += v;
        }
        let mut rank = n;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.at(k, k)].abs();
            for i in k + 1..=last {
                let v = lu.data[lu.at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.pivots[k] = p;
            if best <= tiny {
                rank -= 1;
                continue;
            }
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (x, y) = (lu.at(k, j), lu.at(p, j));
                    lu.data.swap(x, y);
                }
            }
            let pivot = lu.data[lu.at(k, k)];
            for i in k + 1..=last {
                let ik = lu.at(i, k);
                if lu.data[ik] == T::zero() {
                    continue;
                }
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                let (row_i, row_k) = (i * width + kl - i, k * width + kl - k);
                for j in k + 1..=jmax {
                    let u = lu.data[row_k + j];
                    if u != T::zero() {
                        lu.data[row_i + j] -= l * u;
                    }
                }
            }
        }
        if rank < n {
            return Err(Error::Singular { size: n, rank });
        }
        Ok(lu)
    }

    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            x.swap(k, p);
            let xk = x[k];
            if xk != T::zero() {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.data[self.at(i, k)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                s -= self.data[self.at(k, j)] * x[j];
            }
            x[k] = s / self.data[self.at(k, k)];
        }
        let mut out = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized sparsity pattern.
/// Entry `k` of the result is the original index placed at position `k`.
pub fn reverse_cuthill_mckee<T: Real>(a: &SparseMatrix<T>) -> Vec<usize> {
    let n = a.rows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|l| l.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, &degree, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut v = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(adj, v);
        let far = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if far <= ecc && ecc > 0 {
            break;
        }
        ecc = far;
        let candidate = (0..adj.len())
            .filter(|&w| level[w] == far)
            .min_by_key(|&w| (degree[w], w))
            .unwrap_or(v);
        if candidate == v {
            break;
        }
        v = candidate;
    }
    v
}

/// Dense solve used by tests and small problems: `a x = b`.
pub fn dense_solve<T: Real>(a: DMatrix<T>, b: &[T]) -> Option<Vec<T>> {
    a.lu().solve(&DVector::from_column_slice(b)).map(|x| x.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_1d(n: usize) -> SparseMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn band_solve_tridiagonal() {
        let n = 3000;
        let a = laplacian_1d(n);
        let f = a.factor_symmetric().unwrap();
        assert!(!f.is_dense());
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.01).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = f.solve(&b).unwrap();
        let err = x.iter().zip(&x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "error {err}");
    }

    #[test]
    fn saddle_point_with_zero_diagonal() {
        // [[I, C^T], [C, 0]] on a scrambled pattern
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 1.0 + rng.random::<f64>()));
        }
        let m = 10;
        for r in 0..m {
            let a = rng.random_range(0..n);
            let b = (a + 1 + rng.random_range(0..n - 1)) % n;
            t.push((n + r, a, 1.0));
            t.push((a, n + r, 1.0));
            t.push((n + r, b, -0.5));
            t.push((b, n + r, -0.5));
        }
        let k = SparseMatrix::from_triplets(n + m, n + m, &t);
        let b: Vec<f64> = (0..n + m).map(|i| (i as f64).cos()).collect();
        let x = k.solve(&b).unwrap();
        let dense = dense_solve(k.to_dense(), &b).unwrap();
        for (a, b) in x.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_is_reported() {
        // pure Neumann Laplacian: constant null space
        let mut a = laplacian_1d(2500);
        let mut t = a.triplets();
        t.retain(|&(i, j, _)| !(i == 0 && j == 0) && !(i == 2499 && j == 2499));
        t.push((0, 0, 1.0));
        t.push((2499, 2499, 1.0));
        a = SparseMatrix::from_triplets(2500, 2500, &t);
        match a.factor_symmetric() {
            Err(Error::Singular { size: 2500, rank }) => assert_eq!(rank, 2499),
            other => panic!("expected singular, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(50);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }
}

//! Sparse assembly, reverse Cuthill–McKee ordering and banded LU with partial
//! pivoting for the finite-element systems.

use std::collections::{BTreeMap, VecDeque};

use crate::{Error, Result};

/// Symmetric-pattern sparse matrix in row-map form, used during assembly.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self { rows: vec![BTreeMap::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        *self.rows[i].entry(j).or_insert(0.0) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].get(&j).copied().unwrap_or(0.0)
    }

    /// Replaces row and column `i` by the identity.
    pub fn pin(&mut self, i: usize) {
        let cols: Vec<usize> = self.rows[i].keys().copied().collect();
        for j in cols {
            if j != i {
                self.rows[j].remove(&i);
            }
        }
        self.rows[i].clear();
        self.rows[i].insert(i, 1.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|(j, v)| v * x[*j]).sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows.iter().map(|r| r.values().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().all(|r| r.values().all(|v| v.is_finite()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                worst = worst.max((v - self.get(*j, i)).abs());
            }
        }
        worst
    }

    /// Reverse Cuthill–McKee permutation: `perm[new] = old`.
    pub fn rcm_order(&self) -> Vec<usize> {
        let n = self.dim();
        let degree: Vec<usize> = self.rows.iter().map(|r| r.len()).collect();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let start = (0..n).filter(|i| !visited[*i]).min_by_key(|i| degree[*i]).unwrap_or(0);
            let start = pseudo_peripheral(self, start);
            let mut queue = VecDeque::from([start]);
            visited[start] = true;
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut next: Vec<usize> = self.rows[v].keys().copied().filter(|j| !visited[*j]).collect();
                next.sort_by_key(|j| degree[*j]);
                for j in next {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        order.reverse();
        order
    }

    /// Half-bandwidth under a permutation `perm[new] = old`.
    pub fn bandwidth(&self, perm: &[usize]) -> usize {
        let mut inv = vec![0; perm.len()];
        for (new, old) in perm.iter().enumerate() {
            inv[*old] = new;
        }
        let mut bw = 0;
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.keys() {
                bw = bw.max(inv[i].abs_diff(inv[*j]));
            }
        }
        bw
    }
}

fn pseudo_peripheral(a: &SparseMatrix, start: usize) -> usize {
    let mut node = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(a, node);
        let max = *levels.iter().filter(|l| **l != usize::MAX).max().unwrap_or(&0);
        if max <= ecc {
            break;
        }
        ecc = max;
        node = (0..a.dim())
            .filter(|i| levels[*i] == max)
            .min_by_key(|i| a.rows[*i].len())
            .unwrap_or(node);
    }
    node
}

fn bfs_levels(a: &SparseMatrix, start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; a.dim()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for j in a.rows[v].keys() {
            if level[*j] == usize::MAX {
                level[*j] = level[v] + 1;
                queue.push_back(*j);
            }
        }
    }
    level
}

/// LU factorisation with partial pivoting of a banded matrix, stored column
/// by column with `kl` extra rows for fill.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
    zero_pivot: bool,
}

impl BandLu {
    /// Factorises `a` after reverse Cuthill–McKee reordering.
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite("system matrix"));
        }
        let n = a.dim();
        let perm = a.rcm_order();
        let mut inv = vec![0; n];
        for (new, old) in perm.iter().enumerate() {
            inv[*old] = new;
        }
        let bw = a.bandwidth(&perm);
        let (kl, ku) = (bw, bw);
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ld * n];
        for (i_old, row) in a.rows.iter().enumerate() {
            for (j_old, v) in row {
                let (i, j) = (inv[i_old], inv[*j_old]);
                ab[j * ld + kl + ku + i - j] += v;
            }
        }
        let mut lu = Self { n, kl, ku, ld, ab, pivots: vec![0; n], perm, zero_pivot: false };
        lu.eliminate();
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    fn eliminate(&mut self) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.at(k, k)].abs();
            for i in k + 1..=last {
                let v = self.ab[self.at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.pivots[k] = p;
            if best == 0.0 {
                self.zero_pivot = true;
                continue;
            }
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.at(k, j), self.at(p, j));
                    self.ab.swap(a, b);
                }
            }
            let piv = self.ab[self.at(k, k)];
            for i in k + 1..=last {
                let idx = self.at(i, k);
                self.ab[idx] /= piv;
            }
            for j in k + 1..=jmax {
                let ukj = self.ab[self.at(k, j)];
                if ukj == 0.0 {
                    continue;
                }
                let base_k = self.at(k + 1, j);
                let base_l = self.at(k + 1, k);
                for off in 0..last - k {
                    self.ab[base_k + off] -= self.ab[base_l + off] * ukj;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kl
    }

    /// True when elimination met an exactly zero pivot column.
    pub fn is_singular(&self) -> bool {
        self.zero_pivot
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut x: Vec<f64> = self.perm.iter().map(|old| b[*old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                let base = self.at(k + 1, k);
                for off in 0..(k + kl).min(n - 1) - k {
                    x[k + 1 + off] -= self.ab[base + off] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let d = self.ab[self.at(k, k)];
            x[k] = if d == 0.0 { 0.0 } else { x[k] / d };
            let xk = x[k];
            if xk != 0.0 {
                let lo = k.saturating_sub(kl + ku);
                for i in lo..k {
                    x[i] -= self.ab[self.at(i, k)] * xk;
                }
            }
        }
        let mut out = vec![0.0; n];
        for (new, old) in self.perm.iter().enumerate() {
            out[*old] = x[new];
        }
        out
    }
}

/// Estimate of the smallest singular value of a symmetric matrix by power
/// iteration on its inverse.
pub fn sigma_min_estimate(lu: &BandLu, iterations: usize) -> f64 {
    if lu.is_singular() {
        return 0.0;
    }
    let n = lu.dim();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0).collect();
    let mut growth = 0.0;
    for _ in 0..iterations {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let y = lu.solve(&x);
        growth = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !growth.is_finite() {
            return 0.0;
        }
        x = y;
    }
    if growth == 0.0 {
        f64::INFINITY
    } else {
        1.0 / growth
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> SparseMatrix {
        let mut a = SparseMatrix::new(n);
        for i in 0..n {
            a.add(i, i, 2.0 - shift);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn band_solve_matches_matrix() {
        // Scrambled 2-D grid Laplacian with an indefinite shift.
        let m = 12;
        let n = m * m;
        let label = |i: usize| (i * 37) % n;
        let mut a = SparseMatrix::new(n);
        for i in 0..m {
            for j in 0..m {
                let p = label(i * m + j);
                a.add(p, p, 4.0 - 1.3);
                for (di, dj) in [(1i64, 0i64), (0, 1)] {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < m as i64 && jj < m as i64 {
                        let q = label(ii as usize * m + jj as usize);
                        a.add(p, q, -1.0);
                        a.add(q, p, -1.0);
                    }
                }
            }
        }
        let perm = a.rcm_order();
        assert!(a.bandwidth(&perm) <= 2 * m);
        let lu = BandLu::factor(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let x = lu.solve(&b);
        let r = a.mul_vec(&x);
        let err = r.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn sigma_min_of_path_laplacian() {
        let n = 50;
        let a = laplacian_1d(n, 0.0);
        let lu = BandLu::factor(&a).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let est = sigma_min_estimate(&lu, 400);
        assert!((est - exact).abs() < 1e-3 * exact, "{est} vs {exact}");
    }

    #[test]
    fn exactly_singular_matrix_is_flagged() {
        let mut a = SparseMatrix::new(3);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            a.add(i, j, if i == j { 1.0 } else { -1.0 });
        }
        a.add(2, 2, 1.0);
        let lu = BandLu::factor(&a).unwrap();
        assert!(lu.is_singular() || sigma_min_estimate(&lu, 30) < 1e-12);
    }

    #[test]
    fn pin_makes_row_identity() {
        let mut a = laplacian_1d(4, 0.0);
        a.pin(1);
        assert_eq!(a.get(1, 1), 1.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.get(1, 2), 0.0);
        assert_eq!(a.max_asymmetry(), 0.0);
    }
}

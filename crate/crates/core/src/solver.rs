//! Sparse symmetric assembly and SPD solves.
//!
//! Matrices are assembled as lower-triangle triplets, compacted as they grow,
//! and factored with faer's sparse Cholesky. A Jacobi-preconditioned conjugate
//! gradient is kept as a fallback and as an independent check in tests.

use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::linalg::solvers::Solve;
use faer::Side;

use crate::{Error, Result};

/// Target relative residual for every linear solve.
pub const RELATIVE_RESIDUAL: f64 = 1e-8;

const COMPACT_EVERY: usize = 1 << 22;

/// Accumulates a symmetric matrix from (row, col, value) contributions.
#[derive(Clone, Debug)]
pub struct SymmetricBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    compacted: usize,
}

impl SymmetricBuilder {
    pub fn new(n: usize) -> Self {
        SymmetricBuilder {
            n,
            entries: Vec::new(),
            compacted: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `value` at (i, j) and, implicitly, at (j, i).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (c, r) = if i < j { (i, j) } else { (j, i) };
        self.entries.push((c, r, value));
        if self.entries.len() - self.compacted > COMPACT_EVERY {
            self.compact();
        }
    }

    fn compact(&mut self) {
        self.entries.sort_unstable_by_key(|&(c, r, _)| (c, r));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len() / 2);
        for &(c, r, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == c && last.1 == r => last.2 += v,
                _ => out.push((c, r, v)),
            }
        }
        self.entries = out;
        self.compacted = self.entries.len();
    }

    pub fn build(mut self) -> SymmetricMatrix {
        self.compact();
        let mut col_ptr = vec![0usize; self.n + 1];
        for &(c, _, _) in &self.entries {
            col_ptr[c + 1] += 1;
        }
        for c in 0..self.n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let (row_idx, values) = self.entries.iter().map(|&(_, r, v)| (r, v)).unzip();
        SymmetricMatrix {
            n: self.n,
            col_ptr,
            row_idx,
            values,
        }
    }
}

/// Symmetric matrix stored as its lower triangle in compressed columns.
#[derive(Clone, Debug)]
pub struct SymmetricMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_lower(&self) -> usize {
        self.values.len()
    }

    /// Lower-triangle entries (row >= col).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (r, c, v) in self.entries() {
            if r == c {
                d[r] += v;
            }
        }
        d
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.mul(x);
        let num = ax.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let den = norm(b);
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Solves `A x = b` for SPD `A` to [`RELATIVE_RESIDUAL`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut sols = self.solve_many(&[b])?;
        Ok(sols.pop().unwrap())
    }

    /// Factors once and solves for several right-hand sides.
    pub fn solve_many(&self, rhs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        assert!(rhs.iter().all(|b| b.len() == self.n));
        if self.n == 0 {
            return Ok(rhs.iter().map(|_| Vec::new()).collect());
        }
        let symbolic = SymbolicSparseColMat::<usize>::new_checked(
            self.n,
            self.n,
            self.col_ptr.clone(),
            None,
            self.row_idx.clone(),
        );
        let matrix = SparseColMat::<usize, f64>::new(symbolic, self.values.clone());
        let llt = matrix.sp_cholesky(Side::Lower);
        let mut out = Vec::with_capacity(rhs.len());
        for b in rhs {
            if norm(b) == 0.0 {
                out.push(vec![0.0; self.n]);
                continue;
            }
            let mut x = match &llt {
                Ok(llt) => {
                    let mut x = vec![0.0; self.n];
                    let mut col = faer::Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
                    llt.solve_in_place(col.as_mut());
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi = col[(i, 0)];
                    }
                    // Iterative refinement.
                    for _ in 0..3 {
                        if !(self.relative_residual(&x, b) > 1e-2 * RELATIVE_RESIDUAL) {
                            break;
                        }
                        let ax = self.mul(&x);
                        let mut r = faer::Mat::<f64>::from_fn(self.n, 1, |i, _| b[i] - ax[i]);
                        llt.solve_in_place(r.as_mut());
                        for (i, xi) in x.iter_mut().enumerate() {
                            *xi += r[(i, 0)];
                        }
                    }
                    x
                }
                Err(_) => {
                    if self.diagonal().iter().any(|&d| !(d > 0.0)) {
                        return Err(Error::Singular("matrix has a non-positive diagonal entry".into()));
                    }
                    vec![0.0; self.n]
                }
            };
            let mut res = self.relative_residual(&x, b);
            if !(res <= RELATIVE_RESIDUAL) {
                log::debug!("direct solve residual {res:e}; continuing with conjugate gradient");
                x = conjugate_gradient(self, b, Some(&x), 1e-2 * RELATIVE_RESIDUAL, 20 * self.n + 1000);
                res = self.relative_residual(&x, b);
            }
            if !(res <= RELATIVE_RESIDUAL) {
                return Err(if llt.is_err() {
                    Error::Singular(format!("factorization failed, iterative residual {res:e}"))
                } else {
                    Error::NotConverged { residual: res }
                });
            }
            out.push(x);
        }
        Ok(out)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradient.
pub fn conjugate_gradient(
    a: &SymmetricMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let ax = a.mul(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        if norm(&r) / bnorm <= tol {
            break;
        }
        let ap = a.mul(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Weighted linear least squares `min sum_k w_k (a_k . x - b_k)^2` with some
/// variables pinned to fixed values, solved through the normal equations.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    normal: SymmetricBuilder,
    rhs: Vec<f64>,
    fixed: Vec<Option<f64>>,
    scratch: Vec<(usize, f64)>,
}

impl LeastSquares {
    pub fn new(n: usize) -> Self {
        LeastSquares {
            normal: SymmetricBuilder::new(n),
            rhs: vec![0.0; n],
            fixed: vec![None; n],
            scratch: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Adds the residual row `weight * (sum a_i x_i - target)^2`.
    pub fn add_row(&mut self, entries: &[(usize, f64)], target: f64, weight: f64) {
        if weight == 0.0 {
            return;
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(entries);
        self.scratch.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(self.scratch.len());
        for &(i, a) in &self.scratch {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => merged.push((i, a)),
            }
        }
        for (p, &(i, ai)) in merged.iter().enumerate() {
            for &(j, aj) in &merged[p..] {
                self.normal.add(i, j, weight * ai * aj);
            }
            self.rhs[i] += weight * ai * target;
        }
    }

    /// Adds `weight * value` directly to the normal matrix at (i, j) and (j, i).
    pub fn add_normal(&mut self, i: usize, j: usize, value: f64) {
        self.normal.add(i, j, value);
    }

    pub fn fix(&mut self, var: usize, value: f64) {
        self.fixed[var] = Some(value);
    }

    pub fn is_fixed(&self, var: usize) -> bool {
        self.fixed[var].is_some()
    }

    pub fn solve(self) -> Result<Vec<f64>> {
        let n = self.rhs.len();
        let mut compact = vec![usize::MAX; n];
        let mut free = 0;
        for v in 0..n {
            if self.fixed[v].is_none() {
                compact[v] = free;
                free += 1;
            }
        }
        let full = self.normal.build();
        let mut reduced = SymmetricBuilder::new(free);
        let mut rhs: Vec<f64> = (0..n)
            .filter(|&v| self.fixed[v].is_none())
            .map(|v| self.rhs[v])
            .collect();
        for (r, c, v) in full.entries() {
            match (self.fixed[r], self.fixed[c]) {
                (None, None) => reduced.add(compact[r], compact[c], v),
                (None, Some(xc)) => rhs[compact[r]] -= v * xc,
                (Some(xr), None) => rhs[compact[c]] -= v * xr,
                (Some(_), Some(_)) => {}
            }
        }
        let reduced = reduced.build();
        if let Some(k) = reduced.diagonal().iter().position(|&d| !(d > 0.0)) {
            let var = (0..n).find(|&v| compact[v] == k).unwrap();
            return Err(Error::Singular(format!("variable {var} is not constrained by any term")));
        }
        let xf = reduced.solve(&rhs)?;
        Ok((0..n)
            .map(|v| self.fixed[v].unwrap_or_else(|| xf[compact[v]]))
            .collect())
    }
}

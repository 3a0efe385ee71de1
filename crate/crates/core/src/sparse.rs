//! Sparse assembly and a reusable LU factorization backed by `faer`.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

/// Coordinate-format builder for a square sparse matrix. Duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::with_capacity(5 * n) }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        if value != 0.0 {
            self.entries.push(Triplet::new(row, col, value));
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn build(self) -> Result<SparseMatrix> {
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &self.entries)
            .map_err(|e| Error::InvalidArgument(format!("sparse assembly failed: {e:?}")))?;
        Ok(SparseMatrix { mat })
    }
}

/// Compressed-column square matrix.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    mat: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.mat.compute_nnz()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        let m = self.mat.as_ref();
        for (col, &xc) in x.iter().enumerate() {
            if xc == 0.0 {
                continue;
            }
            for (row, v) in m.row_idx_of_col(col).zip(m.val_of_col(col)) {
                y[row] += v * xc;
            }
        }
        y
    }

    /// `b − A x` accumulated per row in double-double (error-free products and sums), so the
    /// residual is accurate even when it is far below `ε‖A‖‖x‖`.
    pub fn residual_compensated(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut hi = b.to_vec();
        let mut lo = vec![0.0; b.len()];
        let m = self.mat.as_ref();
        for (col, &xc) in x.iter().enumerate() {
            if xc == 0.0 {
                continue;
            }
            for (row, &v) in m.row_idx_of_col(col).zip(m.val_of_col(col)) {
                let p = -v * xc;
                let pe = (-v).mul_add(xc, -p);
                let s = hi[row] + p;
                let bb = s - hi[row];
                let se = (hi[row] - (s - bb)) + (p - bb);
                hi[row] = s;
                lo[row] += se + pe;
            }
        }
        hi.iter().zip(&lo).map(|(h, l)| h + l).collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0f64; self.dim()];
        let m = self.mat.as_ref();
        for col in 0..self.dim() {
            for (row, v) in m.row_idx_of_col(col).zip(m.val_of_col(col)) {
                rows[row] += v.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Entries of one row as `(col, value)` pairs; linear in the number of nonzeros.
    pub fn row_entries(&self, row: usize) -> Vec<(usize, f64)> {
        let m = self.mat.as_ref();
        let mut out = Vec::new();
        for col in 0..self.dim() {
            for (r, v) in m.row_idx_of_col(col).zip(m.val_of_col(col)) {
                if r == row {
                    out.push((col, *v));
                }
            }
        }
        out
    }
}

/// Outcome of one factorized solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    /// Normwise backward error `‖b − Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
    pub relative_residual: f64,
    pub refinement_steps: usize,
}

/// LU factorization with partial pivoting, reusable across right-hand sides.
///
/// Solves are read-only on the factorization and may run concurrently.
pub struct Factorization {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    norm_inf: f64,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("dim", &self.matrix.dim())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl Factorization {
    pub fn new(matrix: SparseMatrix) -> Result<Self> {
        let lu = matrix
            .mat
            .sp_lu()
            .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        let norm_inf = matrix.norm_inf();
        Ok(Self { matrix, lu, norm_inf })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solves `A x = b` with iterative refinement. Refinement continues while it at least halves
    /// the residual (up to `max_refinements` steps); the best iterate must meet `tol`.
    pub fn solve(&self, b: &[f64], tol: f64, max_refinements: usize) -> Result<(Vec<f64>, SolveStats)> {
        if b.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("rhs of length {}", self.dim()),
                got: b.len().to_string(),
            });
        }
        let b_norm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if b_norm == 0.0 {
            return Ok((vec![0.0; b.len()], SolveStats { relative_residual: 0.0, refinement_steps: 0 }));
        }
        let mut x = self.raw_solve(b);
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut steps = 0;
        loop {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Singular("non-finite solution; the matrix is numerically singular".into()));
            }
            let r = self.matrix.residual_compensated(b, &x);
            let r_norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let x_norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rel = r_norm / (self.norm_inf * x_norm + b_norm);
            let previous = best.as_ref().map(|b| b.1);
            if previous.is_none_or(|p| rel < p) {
                best = Some((x.clone(), rel));
            }
            let stalled = previous.is_some_and(|p| rel > 0.5 * p);
            if rel == 0.0 || stalled || steps >= max_refinements {
                break;
            }
            let dx = self.raw_solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            steps += 1;
        }
        let (x, rel) = best.expect("at least one iterate");
        if rel <= tol {
            Ok((x, SolveStats { relative_residual: rel, refinement_steps: steps }))
        } else {
            Err(Error::NotConverged { residual: rel, tol, iterations: steps })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_nonsymmetric_system() {
        // [ 4 1 0 ; 2 5 1 ; 0 3 6 ] x = [1 2 3]
        let mut t = TripletBuilder::new(3);
        for (r, c, v) in [(0, 0, 4.0), (0, 1, 1.0), (1, 0, 2.0), (1, 1, 5.0), (1, 2, 1.0), (2, 1, 3.0), (2, 2, 6.0)] {
            t.push(r, c, v);
        }
        let f = Factorization::new(t.build().unwrap()).unwrap();
        let (x, stats) = f.solve(&[1.0, 2.0, 3.0], 1e-14, 3).unwrap();
        let ax = f.matrix().mul_vec(&x);
        for (a, b) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(stats.relative_residual <= 1e-14);
        assert_eq!(f.matrix().norm_inf(), 9.0);
        assert_eq!(f.matrix().row_entries(2), vec![(1, 3.0), (2, 6.0)]);
        // compensated residual sees the cancellation a plain product misses
        let r = f.matrix().residual_compensated(&[1.0, 2.0, 3.0], &x);
        let plain: Vec<f64> = [1.0, 2.0, 3.0].iter().zip(f.matrix().mul_vec(&x)).map(|(b, a)| b - a).collect();
        for (c, p) in r.iter().zip(&plain) {
            assert!((c - p).abs() <= 1e-15);
        }
    }

    #[test]
    fn zero_pivot_needs_pivoting() {
        // saddle-like: [0 1 ; 1 0]
        let mut t = TripletBuilder::new(2);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        let f = Factorization::new(t.build().unwrap()).unwrap();
        let (x, _) = f.solve(&[2.0, 3.0], 1e-14, 2).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut t = TripletBuilder::new(2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        let result = Factorization::new(t.build().unwrap()).and_then(|f| f.solve(&[1.0, 2.0], 1e-12, 2).map(|_| ()));
        assert!(result.is_err());
    }
}

//! Sparse SPD solves (Cholesky with iterative refinement) and a block
//! shift-invert Lanczos solver for the smallest eigenpairs of `A x = λ B x`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{axpy, dot, norm2, SparseMatrix};

pub const DEFAULT_EIG_TOL: f64 = 1e-10;

/// Sparse Cholesky factor of an SPD matrix.
pub struct SpdFactor {
    n: usize,
    llt: Llt<usize, f64>,
}

impl std::fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdFactor")
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

impl SpdFactor {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if !a.is_symmetric() {
            return Err(Error::Argument(
                "Cholesky factorization needs a symmetric matrix".into(),
            ));
        }
        let n = a.dim();
        // lower triangle in column-major order is the upper triangle of the
        // symmetric row-major storage
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut rows = Vec::with_capacity(a.nnz() / 2 + n);
        let mut vals = Vec::with_capacity(a.nnz() / 2 + n);
        col_ptr.push(0);
        for j in 0..n {
            for (i, v) in a.row(j) {
                if i >= j {
                    rows.push(i);
                    vals.push(v);
                }
            }
            col_ptr.push(rows.len());
        }
        let sym = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, rows);
        let mat = SparseColMat::new(sym, vals);
        let llt = mat.sp_cholesky(Side::Lower).map_err(|e| {
            Error::Numerical(format!(
                "Cholesky factorization of a {n}x{n} matrix failed: {e:?}"
            ))
        })?;
        Ok(SpdFactor { n, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.llt.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }

    /// Solves for several right-hand sides at once, in place.
    pub fn solve_many(&self, cols: &mut [Vec<f64>]) {
        if cols.is_empty() {
            return;
        }
        let mut m = Mat::<f64>::from_fn(self.n, cols.len(), |i, j| cols[j][i]);
        self.llt.solve_in_place(m.as_mut());
        for (j, c) in cols.iter_mut().enumerate() {
            for (i, x) in c.iter_mut().enumerate() {
                *x = m[(i, j)];
            }
        }
    }

    /// Solution with `‖A x − rhs‖₂ ≤ tol·‖rhs‖₂`, refining iteratively if needed.
    pub fn solve_refined(&self, a: &SparseMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
        if !(tol > 0.0) {
            return Err(Error::Argument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if rhs.len() != self.n || a.dim() != self.n {
            return Err(Error::Argument(format!(
                "dimension mismatch: matrix {}, factor {}, rhs {}",
                a.dim(),
                self.n,
                rhs.len()
            )));
        }
        let bnorm = norm2(rhs);
        if bnorm == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let mut x = self.solve(rhs);
        let mut r = vec![0.0; self.n];
        let mut res = f64::INFINITY;
        for _ in 0..5 {
            a.mul_vec_into(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(rhs) {
                *ri = bi - *ri;
            }
            res = norm2(&r);
            if res <= tol * bnorm {
                return Ok(x);
            }
            let d = self.solve(&r);
            axpy(1.0, &d, &mut x);
        }
        Err(Error::Numerical(format!(
            "linear solve stalled at relative residual {:e} (requested {tol:e}); matrix may be ill-conditioned",
            res / bnorm
        )))
    }

    /// Solution with normwise backward error
    /// `‖A x − rhs‖∞ / (‖A‖∞ ‖x‖∞ + ‖rhs‖∞) ≤ tol`.
    ///
    /// Unlike the relative residual, this criterion stays attainable when
    /// rounding in `A x` dominates, as for finely resolved H(div) systems.
    pub fn solve_backward_stable(
        &self,
        a: &SparseMatrix,
        rhs: &[f64],
        tol: f64,
    ) -> Result<Vec<f64>> {
        if !(tol > 0.0) {
            return Err(Error::Argument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if rhs.len() != self.n || a.dim() != self.n {
            return Err(Error::Argument("dimension mismatch in linear solve".into()));
        }
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let bnorm = inf(rhs);
        if bnorm == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let anorm = a.norm_inf();
        let mut x = self.solve(rhs);
        let mut r = vec![0.0; self.n];
        let mut err = f64::INFINITY;
        for _ in 0..5 {
            a.mul_vec_into(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(rhs) {
                *ri = bi - *ri;
            }
            err = inf(&r) / (anorm * inf(&x) + bnorm);
            if err <= tol {
                return Ok(x);
            }
            let d = self.solve(&r);
            axpy(1.0, &d, &mut x);
        }
        Err(Error::Numerical(format!(
            "linear solve stalled at backward error {err:e} (requested {tol:e})"
        )))
    }
}

/// Solves `A x = rhs` for SPD `A` with relative residual at most `tol`.
pub fn solve_spd(a: &SparseMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    SpdFactor::new(a)?.solve_refined(a, rhs, tol)
}

/// Eigenvalue with its eigenvector over the matrix index space.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Normalised to `xᵀ B x = 1`, largest-magnitude entry positive.
    pub vector: Vec<f64>,
    /// `‖A x − λ B x‖₂ / ‖x‖₂`
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct EigOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            tol: DEFAULT_EIG_TOL,
            max_iterations: 400,
            seed: 0x5eed_1a2c,
        }
    }
}

/// The `m` smallest eigenpairs of the SPD pencil `(A, B)`, in increasing order.
pub fn eig_smallest(
    a: &SparseMatrix,
    b: &SparseMatrix,
    m: usize,
    tol: f64,
) -> Result<Vec<EigenPair>> {
    eig_smallest_with(
        a,
        b,
        m,
        &EigOptions {
            tol,
            ..EigOptions::default()
        },
    )
}

pub fn eig_smallest_with(
    a: &SparseMatrix,
    b: &SparseMatrix,
    m: usize,
    opts: &EigOptions,
) -> Result<Vec<EigenPair>> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::Argument(format!(
            "pencil dimensions differ: {n} and {}",
            b.dim()
        )));
    }
    if m == 0 || m > n {
        return Err(Error::Argument(format!(
            "cannot compute {m} eigenpairs of a {n}x{n} pencil"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let factor = SpdFactor::new(a)?;
    Lanczos::new(a, b, &factor, m, opts).run()
}

struct Lanczos<'a> {
    a: &'a SparseMatrix,
    b: &'a SparseMatrix,
    factor: &'a SpdFactor,
    m: usize,
    block: usize,
    max_basis: usize,
    opts: &'a EigOptions,
    rng: ChaCha8Rng,
    /// B-orthonormal basis and its image under B
    v: Vec<Vec<f64>>,
    bv: Vec<Vec<f64>>,
    /// projected matrix Vᵀ A V, row-major, grown incrementally
    h: Vec<Vec<f64>>,
}

impl<'a> Lanczos<'a> {
    fn new(
        a: &'a SparseMatrix,
        b: &'a SparseMatrix,
        factor: &'a SpdFactor,
        m: usize,
        opts: &'a EigOptions,
    ) -> Self {
        let n = a.dim();
        let block = (m + 1).min(n);
        Lanczos {
            a,
            b,
            factor,
            m,
            block,
            max_basis: (5 * block + m).max(20).min(n),
            opts,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            v: Vec::new(),
            bv: Vec::new(),
            h: Vec::new(),
        }
    }

    fn n(&self) -> usize {
        self.a.dim()
    }

    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.n())
            .map(|_| self.rng.random_range(-1.0..1.0))
            .collect()
    }

    /// B-orthogonalises `w` against the basis and appends it; returns false
    /// if nothing independent was left.
    fn push(&mut self, mut w: Vec<f64>) -> bool {
        let mut bw = self.b.mul_vec(&w);
        let norm0 = dot(&w, &bw).max(0.0).sqrt();
        if norm0 == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for (vi, bvi) in self.v.iter().zip(&self.bv) {
                let c = dot(bvi, &w);
                axpy(-c, vi, &mut w);
            }
            self.b.mul_vec_into(&w, &mut bw);
        }
        let norm = dot(&w, &bw).max(0.0).sqrt();
        if norm <= 1e-10 * norm0 {
            return false;
        }
        let s = 1.0 / norm;
        w.iter_mut().for_each(|x| *x *= s);
        bw.iter_mut().for_each(|x| *x *= s);
        let aw = self.a.mul_vec(&w);
        let mut row: Vec<f64> = self.v.iter().map(|vi| dot(vi, &aw)).collect();
        row.push(dot(&w, &aw));
        for (hi, &x) in self.h.iter_mut().zip(&row) {
            hi.push(x);
        }
        self.h.push(row);
        self.v.push(w);
        self.bv.push(bw);
        true
    }

    fn push_or_random(&mut self, w: Vec<f64>) {
        if self.push(w) {
            return;
        }
        for _ in 0..10 {
            let r = self.random_vector();
            if self.push(r) {
                return;
            }
        }
    }

    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let k = self.v.len();
        let h = DMatrix::from_fn(k, k, |i, j| 0.5 * (self.h[i][j] + self.h[j][i]));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
        (vals, vecs)
    }

    fn combine(&self, basis: &[Vec<f64>], s: &DMatrix<f64>, col: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        for (i, vi) in basis.iter().enumerate() {
            axpy(s[(i, col)], vi, &mut x);
        }
        x
    }

    fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let ax = self.a.mul_vec(x);
        let bx = self.b.mul_vec(x);
        let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect();
        norm2(&r) / norm2(x)
    }

    fn run(mut self) -> Result<Vec<EigenPair>> {
        let n = self.n();
        for _ in 0..self.block {
            let r = self.random_vector();
            let w = self.factor.solve(&self.b.mul_vec(&r));
            self.push_or_random(w);
        }
        let mut worst = f64::INFINITY;
        for _ in 0..self.opts.max_iterations {
            let (vals, s) = self.ritz();
            let k = self.v.len();
            let nw = self.m.min(k);
            let mut xs = Vec::with_capacity(nw);
            worst = 0.0f64;
            for c in 0..nw {
                let x = self.combine(&self.v, &s, c);
                let r = self.residual(&x, vals[c]);
                worst = worst.max(r);
                xs.push((vals[c], x, r));
            }
            if nw == self.m && worst <= self.opts.tol {
                return Ok(finish(self.b, xs));
            }
            if k >= n {
                break;
            }

            // expansion directions A⁻¹(A x − θ B x) for the leading Ritz pairs;
            // they span the same space as A⁻¹ B x but carry no cancellation
            // once x has converged
            let nb = self.block.min(k);
            let mut dirs: Vec<Vec<f64>> = (0..nb)
                .map(|c| {
                    let x = if c < xs.len() {
                        std::mem::take(&mut xs[c].1)
                    } else {
                        self.combine(&self.v, &s, c)
                    };
                    let mut r = self.a.mul_vec(&x);
                    axpy(-vals[c], &self.b.mul_vec(&x), &mut r);
                    r
                })
                .collect();
            self.factor.solve_many(&mut dirs);
            drop(xs);

            if k + nb > self.max_basis {
                self.restart(&s, (self.m + self.block).min(k));
            }
            for d in dirs {
                if self.v.len() >= n {
                    break;
                }
                self.push_or_random(d);
            }
        }
        Err(Error::NotConverged {
            iterations: self.opts.max_iterations,
            achieved: worst,
            requested: self.opts.tol,
        })
    }

    /// Thick restart on the `keep` leading Ritz vectors.
    fn restart(&mut self, s: &DMatrix<f64>, keep: usize) {
        let v: Vec<Vec<f64>> = (0..keep).map(|c| self.combine(&self.v, s, c)).collect();
        let old = std::mem::take(&mut self.v);
        self.bv.clear();
        self.h.clear();
        drop(old);
        for x in v {
            self.push_or_random(x);
        }
    }
}

fn finish(b: &SparseMatrix, pairs: Vec<(f64, Vec<f64>, f64)>) -> Vec<EigenPair> {
    pairs
        .into_iter()
        .map(|(value, mut x, residual)| {
            let nb = b.quadratic_form(&x).sqrt();
            let imax = (0..x.len()).fold(
                0,
                |best, i| if x[i].abs() > x[best].abs() { i } else { best },
            );
            let s = if x[imax] < 0.0 { -1.0 / nb } else { 1.0 / nb };
            x.iter_mut().for_each(|v| *v *= s);
            EigenPair {
                value,
                vector: x,
                residual,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd_random(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &g * g.transpose() + DMatrix::identity(n, n) * n as f64
    }

    #[test]
    fn identity_solve() {
        let a = SparseMatrix::identity(4);
        let x = solve_spd(&a, &[1.0, 2.0, 3.0, 4.0], 1e-14).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn two_by_two_solve() {
        let a = SparseMatrix::from_triplets(
            2,
            vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)],
            true,
        );
        let x = solve_spd(&a, &[1.0, 1.0], 1e-14).unwrap();
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_matches_dense_solve() {
        let d = spd_random(50, 1);
        let a = SparseMatrix::from_dense(&d, true);
        let rhs: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let x = solve_spd(&a, &rhs, 1e-13).unwrap();
        let xd = d
            .clone()
            .cholesky()
            .unwrap()
            .solve(&nalgebra::DVector::from_vec(rhs));
        for i in 0..50 {
            assert!((x[i] - xd[i]).abs() <= 1e-9 * xd.amax());
        }
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = SparseMatrix::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)],
            true,
        );
        assert!(matches!(
            solve_spd(&a, &[1.0, 0.0], 1e-12),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn diagonal_pencil() {
        let a = SparseMatrix::from_triplets(3, vec![(0, 0, 2.0), (1, 1, 5.0), (2, 2, 9.0)], true);
        let b = SparseMatrix::identity(3);
        let pairs = eig_smallest(&a, &b, 2, 1e-12).unwrap();
        assert!((pairs[0].value - 2.0).abs() < 1e-12);
        assert!((pairs[1].value - 5.0).abs() < 1e-12);
        assert!(pairs[0].vector[0] > 0.0);
    }

    #[test]
    fn bad_arguments() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(
            eig_smallest(&a, &a, 0, 1e-10),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            eig_smallest(&a, &a, 4, 1e-10),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            solve_spd(&a, &[1.0; 3], 0.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn tridiagonal_pencil_against_closed_form() {
        // 1D Laplacian eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 400;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, t, true);
        let b = SparseMatrix::identity(n);
        let pairs = eig_smallest(&a, &b, 5, 1e-12).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!(
                (p.value - exact).abs() < 1e-12 * exact.max(1e-3),
                "{k}: {} vs {exact}",
                p.value
            );
            assert!(p.residual <= 1e-12);
        }
    }
}

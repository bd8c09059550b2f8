//! Dense reference computations shared by the integration tests.

#![allow(dead_code)]

use eigenbound::sparse::SparseMatrix;
use nalgebra::{DMatrix, DVector};

pub fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let n = a.dim();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            d[(i, j)] += v;
        }
    }
    d
}

/// All eigenpairs of `A x = λ B x` by Cholesky reduction, ascending, with
/// `B`-normalized eigenvectors.
pub fn dense_generalized_eigen(a: &SparseMatrix, b: &SparseMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let (a, b) = (dense(a), dense(b));
    let l = b.cholesky().expect("B is SPD").l();
    let linv = l.clone().try_inverse().expect("invertible factor");
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| linv.transpose() * eig.eigenvectors.column(i))
            .collect::<Vec<DVector<f64>>>(),
    );
    (vals, vecs)
}

/// Dense Cholesky solve.
pub fn dense_solve(a: &SparseMatrix, rhs: &[f64]) -> Vec<f64> {
    let x = dense(a)
        .cholesky()
        .expect("SPD")
        .solve(&DVector::from_column_slice(rhs));
    x.iter().copied().collect()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

//! Small dense eigen-solver helpers.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};

use crate::operators::C64;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending and
/// eigenvectors as matching columns.
pub fn eigh_sorted<T>(m: DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])].clone()
    });
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    eigh_sorted(m.clone()).0
}

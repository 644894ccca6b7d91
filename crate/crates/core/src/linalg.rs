//! Dense helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// decreasing order. Columns of the returned matrix are the matching
/// unit eigenvectors.
pub fn sorted_eigen(sym: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let p = sym.nrows();
    let eig = SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(p, p, |i, k| eig.eigenvectors[(i, order[k])]);
    (values, vectors)
}

/// `Q diag(values) Qᵀ`.
pub fn reconstruct(vectors: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(v);
    }
    let mut out = &scaled * vectors.transpose();
    // symmetrize away rounding
    let t = out.transpose();
    out += t;
    out *= 0.5;
    out
}

/// `‖QᵀQ − I‖_max`.
pub fn orthonormality_defect(vectors: &DMatrix<f64>) -> f64 {
    let gram = vectors.transpose() * vectors;
    let p = gram.nrows();
    (&gram - DMatrix::<f64>::identity(p, p)).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_descending_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0]);
        let (vals, vecs) = sorted_eigen(&m);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        assert!(orthonormality_defect(&vecs) < 1e-12);
        let back = reconstruct(&vecs, &vals);
        assert!((back - m).amax() < 1e-12);
    }
}

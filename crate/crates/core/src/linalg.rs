//! Dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order
/// with eigenvector columns permuted to match.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Average the matrix with its conjugate transpose.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Orthonormal basis of the orthogonal complement of the column span of `xi`.
///
/// Left singular directions with singular value below `rel_tol * sigma_max`
/// are treated as absent from the span, so they end up in the complement.
/// `dim` is the ambient dimension (needed when `xi` has no columns).
pub fn orthogonal_complement(xi: &CMatrix, dim: usize, rel_tol: f64) -> CMatrix {
    if xi.ncols() == 0 {
        return CMatrix::identity(dim, dim);
    }
    let svd = xi.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sigma.len())
        .filter(|&i| smax > 0.0 && sigma[i] >= rel_tol * smax)
        .collect();
    let span_rank = keep.len();
    if span_rank == 0 {
        return CMatrix::identity(dim, dim);
    }
    if span_rank >= dim {
        return CMatrix::zeros(dim, 0);
    }
    let basis = CMatrix::from_fn(dim, span_rank, |r, c| u[(r, keep[c])]);
    let qr = basis.qr();
    let mut q_adj = CMatrix::identity(dim, dim);
    qr.q_tr_mul(&mut q_adj);
    let q = q_adj.adjoint();
    q.columns(span_rank, dim - span_rank).into_owned()
}

/// `|| A^H A - I ||_F`.
pub fn orthonormality_error(a: &CMatrix) -> f64 {
    let g = a.adjoint() * a;
    (g - CMatrix::identity(a.ncols(), a.ncols())).norm()
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

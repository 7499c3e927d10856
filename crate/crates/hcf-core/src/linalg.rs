//! Small dense complex linear algebra helpers shared by the geometry and
//! positivity modules. Everything here is n <= 4, so plain nalgebra dynamic
//! matrices are more than enough.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = m.clone().symmetric_eigen();
    let mut ev: Vec<f64> = sym.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Smallest eigenpair of the Hermitian pencil (A, G) in the tensor-index
/// form convention: minimizes Σ A[(i,a)] x_i x̄_a subject to
/// Σ G[(i,a)] x_i x̄_a = 1, with G positive definite. Returns (lambda, x)
/// with x G-unit. Note Σ M[(i,a)] x_i x̄_a = x* Mᵀ x, which is why the
/// pencil is transposed before the standard reduction.
pub fn min_generalized_eigenpair(a: &CMatrix, g: &CMatrix) -> (f64, CVector) {
    let a = a.transpose();
    let g = g.transpose();
    let l = g.clone().cholesky().expect("metric must be positive definite").l();
    let linv = l.clone().try_inverse().expect("triangular inverse");
    let a_hat = &linv * a * linv.adjoint();
    // enforce exact hermiticity before the symmetric eigensolver
    let a_hat = (&a_hat + a_hat.adjoint()) * Complex64::new(0.5, 0.0);
    let sym = a_hat.symmetric_eigen();
    let mut best = 0usize;
    for k in 1..sym.eigenvalues.len() {
        if sym.eigenvalues[k] < sym.eigenvalues[best] {
            best = k;
        }
    }
    let w = sym.eigenvectors.column(best).into_owned();
    let x = linv.adjoint() * w;
    (sym.eigenvalues[best], x)
}

/// g-norm |x|²_g = Σ g[(i,j)] x_i x̄_j (tensor-index convention, i.e.
/// x* gᵀ x) for Hermitian positive definite g.
pub fn g_norm(g: &CMatrix, x: &CVector) -> f64 {
    let v = (x.adjoint() * g.transpose() * x)[(0, 0)];
    v.re.max(0.0).sqrt()
}

/// g-orthonormal frame: columns e_k with Σ g[(i,j)] (e_k)_i conj((e_l)_j)
/// = δ_kl, from the Cholesky factorization of gᵀ.
pub fn orthonormal_frame(g: &CMatrix) -> CMatrix {
    let l = g.transpose().cholesky().expect("metric must be positive definite").l();
    l.adjoint().try_inverse().expect("triangular inverse")
}

/// Real embedding of the Hermitian block form
///   Q(v ⊕ w) = A(v, v̄) + 2 Re B(v, w) + C(w, w̄)
/// with A(v, v̄) = Σ A_ij v_i v̄_j (Hermitian A, C; B bilinear), on
/// C^n ⊕ C^n, as a real symmetric 4n x 4n matrix; PSD of the embedding is
/// PSD of Q.
pub fn block_form_real_embedding(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> DMatrix<f64> {
    let n = a.nrows();
    let dim = 4 * n;
    let mut q = DMatrix::<f64>::zeros(dim, dim);
    // coordinates: v = x + i y, w = s + i t, layout [x, y, s, t]
    // A(v, v̄) = Σ v̄_i A_ij v_j (A Hermitian), similarly C; B(v, w) = Σ B_ij v_i w_j.
    let idx = |block: usize, k: usize| block * n + k;
    for i in 0..n {
        for j in 0..n {
            let aij = a[(i, j)];
            let cij = c[(i, j)];
            let bij = b[(i, j)];
            // A_ij v_i v̄_j: with v = x + iy the real part is
            // Re(aij)(x_i x_j + y_i y_j) + Im(aij)(x_i y_j - y_i x_j)
            q[(idx(0, i), idx(0, j))] += aij.re;
            q[(idx(1, i), idx(1, j))] += aij.re;
            q[(idx(0, i), idx(1, j))] += aij.im;
            q[(idx(1, i), idx(0, j))] -= aij.im;
            // C_ij w_i w̄_j over [s, t]
            q[(idx(2, i), idx(2, j))] += cij.re;
            q[(idx(3, i), idx(3, j))] += cij.re;
            q[(idx(2, i), idx(3, j))] += cij.im;
            q[(idx(3, i), idx(2, j))] -= cij.im;
            // 2 Re B(v, w) = 2 Re(B_ij v_i w_j), bilinear (no conjugates)
            // Re(B_ij (x_i + i y_i)(s_j + i t_j)) =
            //   Re B (x s - y t) - Im B (x t + y s)
            q[(idx(0, i), idx(2, j))] += bij.re;
            q[(idx(2, j), idx(0, i))] += bij.re;
            q[(idx(1, i), idx(3, j))] -= bij.re;
            q[(idx(3, j), idx(1, i))] -= bij.re;
            q[(idx(0, i), idx(3, j))] -= bij.im;
            q[(idx(3, j), idx(0, i))] -= bij.im;
            q[(idx(1, i), idx(2, j))] -= bij.im;
            q[(idx(2, j), idx(1, i))] -= bij.im;
        }
    }
    q
}

pub fn real_symmetric_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()).scale(0.5).symmetric_eigen();
    sym.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Minimum-norm least squares solve of M c = r; returns (c, residual_norm).
pub fn least_squares(m: &CMatrix, r: &CVector) -> (CVector, f64) {
    let svd = m.clone().svd(true, true);
    let c = svd.solve(r, 1e-12).expect("svd solve");
    let res = (m * &c - r).norm();
    (c, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn generalized_eigen_identity_metric() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let g = CMatrix::identity(2, 2);
        let (lam, x) = min_generalized_eigenpair(&a, &g);
        // eigenvalues of [[2, i], [-i, 3]] are (5 ± sqrt(5))/2
        let expected = (5.0 - 5.0f64.sqrt()) / 2.0;
        assert!((lam - expected).abs() < 1e-12);
        assert!((g_norm(&g, &x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_embedding_psd_of_gram_block() {
        // Q built from M M* is PSD by construction
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.5), c(-0.3, 0.2), c(0.7, -1.1), c(0.4, 0.0)],
        );
        let gram = &m * m.adjoint();
        // block with A = C = gram, B = 0 is PSD
        let b = CMatrix::zeros(2, 2);
        let q = block_form_real_embedding(&gram, &b, &gram);
        assert!(real_symmetric_min_eigenvalue(&q) > -1e-12);
    }

    #[test]
    fn orthonormal_frame_is_g_orthonormal() {
        let g = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.5, 0.0)]);
        let e = orthonormal_frame(&g);
        // Gram[k][l] = Σ g[(i,j)] (e_k)_i conj((e_l)_j) = (Eᵀ g Ē)[k][l]
        let gram = e.transpose() * &g * e.conjugate();
        let residual = (&gram - CMatrix::identity(2, 2)).norm();
        assert!(residual < 1e-12);
    }
}

//! Small helpers over nalgebra for complex Hermitian eigenproblems.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Columns spanning the `d` least-dominant directions of a Hermitian PSD
/// matrix, ordered by ascending eigenvalue. Ties are broken by the
/// decomposition's deterministic output order (stable sort).
pub fn least_dominant_eigenvectors(a: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert!(d <= n, "requested {d} eigenvectors of a {n}x{n} matrix");
    // Enforce exact Hermitian symmetry before decomposing.
    let herm = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("non-finite eigenvalue")
    });
    let mut out = DMatrix::zeros(n, d);
    for (col, &idx) in order.iter().take(d).enumerate() {
        out.set_column(col, &eig.eigenvectors.column(idx));
    }
    out
}

/// Squared Frobenius norm of a complex matrix.
pub fn fro_sq(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `|| A^H A - I ||_F`, a measure of column orthonormality loss.
pub fn orthonormality_defect(m: &DMatrix<Complex64>) -> f64 {
    let d = m.ncols();
    let gram = m.adjoint() * m;
    let eye = DMatrix::<Complex64>::identity(d, d);
    fro_sq(&(gram - eye)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn eigenvectors_are_orthonormal_and_ordered() {
        // Hermitian matrix with known spectrum: diag(1, 2, 3) conjugated by a unitary.
        let q = {
            let raw = DMatrix::from_fn(3, 3, |i, j| {
                Complex64::new((i * 3 + j + 1) as f64, (i as f64) - (j as f64))
            });
            raw.qr().q()
        };
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let a = &q * lambda * q.adjoint();
        let v = least_dominant_eigenvectors(&a, 2);
        assert!(orthonormality_defect(&v) < 1e-12);
        // Rayleigh quotients recover the two smallest eigenvalues in order.
        let r0 = (v.column(0).adjoint() * &a * v.column(0))[(0, 0)].re;
        let r1 = (v.column(1).adjoint() * &a * v.column(1))[(0, 0)].re;
        assert!((r0 - 1.0).abs() < 1e-10);
        assert!((r1 - 2.0).abs() < 1e-10);
    }
}

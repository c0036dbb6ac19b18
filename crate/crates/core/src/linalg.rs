//! Small helpers around the standard symplectic structure on R^{2d}.

use nalgebra::DMatrix;

/// The standard symplectic form `J = [[0, -I], [I, 0]]` on `R^{2d}`.
pub fn j_matrix(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, d + i)] = -1.0;
        j[(d + i, i)] = 1.0;
    }
    j
}

/// `max |(M^T J M - J)_{ij}|`: zero exactly when `M` is symplectic.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows() / 2;
    let j = j_matrix(d);
    (m.transpose() * &j * m - j).abs().max()
}

/// `max |(A^T J + J A)_{ij}|`: zero exactly when `A` lies in sp(2d).
pub fn algebra_defect(a: &DMatrix<f64>) -> f64 {
    let d = a.nrows() / 2;
    let j = j_matrix(d);
    (a.transpose() * &j + &j * a).abs().max()
}

/// `max |(Q^T Q - I)_{ij}|`.
pub fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    (q.transpose() * q - DMatrix::identity(q.nrows(), q.ncols()))
        .abs()
        .max()
}

/// `max |(M - M^T)_{ij}|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

/// Smallest eigenvalue of the symmetrized part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of the symmetrized part of `m`.
pub fn max_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Complex eigenvalues via a bounded Schur iteration. The unbounded
/// QR iteration can stall on matrices with symmetric spectra (symplectic
/// return maps are exactly that shape), so convergence is capped and the
/// computation retried under random orthogonal similarity, which leaves
/// the spectrum untouched but breaks the stall pattern.
pub fn complex_eigenvalues_bounded(
    m: &DMatrix<f64>,
) -> Option<Vec<nalgebra::Complex<f64>>> {
    use rand::{Rng, SeedableRng};
    let n = m.nrows();
    let max_iter = 50 * n.max(8);
    if let Some(schur) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, max_iter) {
        return Some(schur.complex_eigenvalues().iter().cloned().collect());
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q = g.qr().q();
        let sim = q.transpose() * m * &q;
        if let Some(schur) = nalgebra::Schur::try_new(sim, f64::EPSILON, max_iter) {
            return Some(schur.complex_eigenvalues().iter().cloned().collect());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_squares_to_minus_identity() {
        let j = j_matrix(3);
        assert!((&j * &j + DMatrix::identity(6, 6)).abs().max() < 1e-15);
        assert!(symplectic_defect(&j) < 1e-15);
    }

    #[test]
    fn jacobi_generator_in_algebra() {
        // A = [[0, I], [-R, 0]] with R symmetric lies in sp(2d)
        let r = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let mut a = DMatrix::zeros(4, 4);
        a.view_mut((0, 2), (2, 2))
            .copy_from(&DMatrix::identity(2, 2));
        a.view_mut((2, 0), (2, 2)).copy_from(&(-&r));
        assert!(algebra_defect(&a) < 1e-15);
    }
}

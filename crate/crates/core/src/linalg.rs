//! Dense complex linear-algebra helpers shared by the quantum modules.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `max |m_ij − conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |m_ij|`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Rotates `v` by a global phase so that its largest-modulus component
/// (first one on ties within 1e-12) is real and positive.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        let n = z.norm();
        if n > best_norm + 1e-12 {
            best = i;
            best_norm = n;
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / best_norm;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending and
/// each eigenvector phase-fixed by [`fix_phase`].
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let decomposition = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomposition.eigenvalues[a].total_cmp(&decomposition.eigenvalues[b]));
    let values = order.iter().map(|&i| decomposition.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = decomposition.eigenvectors.column(i).into_owned();
        fix_phase(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// `V · diag(f(λ)) · V†`.
pub fn spectral_function(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let factor = f(l);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= factor;
        }
    }
    scaled * vectors.adjoint()
}

/// `⟨a|b⟩`.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// Squared overlap `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`; insensitive to norm and global
/// phase.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    let na = a.norm_squared();
    let nb = b.norm_squared();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    inner(a, b).norm_sqr() / (na * nb)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

/// Orthonormalises the given columns with modified Gram–Schmidt followed by
/// a second re-orthogonalisation pass. Columns whose residual norm falls
/// below `drop_tol` are discarded.
pub fn orthonormalize(columns: &[CVector], drop_tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::with_capacity(columns.len());
    for col in columns {
        let mut v = col.clone();
        for _pass in 0..2 {
            for b in &basis {
                let proj = inner(b, &v);
                v.axpy(-proj, b, Complex64::new(1.0, 0.0));
            }
        }
        let n = v.norm();
        if n > drop_tol {
            basis.push(v.unscale(n));
        }
    }
    basis
}

pub fn columns_to_matrix(rows: usize, columns: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, columns.len());
    for (j, v) in columns.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Principal angles between the column spans of two matrices with
/// orthonormal columns, largest first. Computed as `asin` of the singular
/// values of `(I − A A†) B`, which stays accurate for tiny angles.
pub fn principal_angles(a: &CMatrix, b: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), actual: b.nrows() });
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), actual: b.ncols() });
    }
    if b.ncols() == 0 {
        return Ok(Vec::new());
    }
    let residual = b - a * (a.adjoint() * b);
    let mut angles: Vec<f64> = residual.svd(false, false).singular_values.iter().map(|s| s.min(1.0).asin()).collect();
    angles.sort_by(|x, y| y.total_cmp(x));
    Ok(angles)
}

/// `‖A†A − I‖_max`.
pub fn orthonormality_defect(a: &CMatrix) -> f64 {
    let gram = a.adjoint() * a;
    max_abs(&(gram - CMatrix::identity(a.ncols(), a.ncols())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermitian(n: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        hermitize(&a)
    }

    #[test]
    fn eigh_is_sorted_unitary_and_diagonalizing() {
        let h = hermitian(12, 1);
        let (e, v) = eigh(&h);
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
        assert!(orthonormality_defect(&v) < 1e-12);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(e.len(), e.iter().map(|&x| c(x))));
        assert!(max_abs(&(&h * &v - &v * d)) < 1e-12);
    }

    #[test]
    fn principal_angles_of_rotated_spans() {
        let mut a = CMatrix::zeros(3, 1);
        a[(0, 0)] = c(1.0);
        let theta: f64 = 1e-9;
        let mut b = CMatrix::zeros(3, 1);
        b[(0, 0)] = c(theta.cos());
        b[(1, 0)] = c(theta.sin());
        let angles = principal_angles(&a, &b).unwrap();
        assert!((angles[0] - theta).abs() < 1e-20);
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let v1 = CVector::from_vec(vec![c(1.0), c(1.0), c(0.0)]);
        let v2 = CVector::from_vec(vec![c(2.0), c(2.0), c(0.0)]);
        let v3 = CVector::from_vec(vec![c(0.0), I, c(1.0)]);
        let basis = orthonormalize(&[v1, v2, v3], 1e-10);
        assert_eq!(basis.len(), 2);
        assert!(orthonormality_defect(&columns_to_matrix(3, &basis)) < 1e-15);
    }

    #[test]
    fn fidelity_ignores_phase_and_norm() {
        let a = CVector::from_vec(vec![c(1.0), I]);
        let b = a.map(|z| z * Complex64::from_polar(3.0, 0.7));
        assert!((fidelity(&a, &b) - 1.0).abs() < 1e-15);
    }
}

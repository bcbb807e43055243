//! Built-in truncated system Hamiltonians and position-window projectors.
//!
//! Oscillator-family models are written in the number basis of a reference
//! oscillator with frequency `omega`, using truncated ladder operators:
//! `q = (a + a†) / √(2ω)`, `p = i √(ω/2) (a† − a)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, CMatrix, CVector, Complex64};
use crate::{Error, Result};

fn check_levels(levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::invalid("model needs at least one level"));
    }
    Ok(())
}

fn annihilation(levels: usize) -> CMatrix {
    CMatrix::from_fn(levels, levels, |r, col| if col == r + 1 { c((col as f64).sqrt()) } else { c(0.0) })
}

/// Truncated position operator; its eigenvalues are Gauss–Hermite nodes
/// scaled by `1/√ω`.
pub fn position(levels: usize, omega: f64) -> CMatrix {
    let a = annihilation(levels);
    (&a + a.adjoint()).scale((2.0 * omega).sqrt().recip())
}

pub fn momentum(levels: usize, omega: f64) -> CMatrix {
    let a = annihilation(levels);
    (a.adjoint() - &a) * Complex64::new(0.0, (0.5 * omega).sqrt())
}

/// `diag(0, gap)`.
pub fn qubit(gap: f64) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0), c(gap)]))
}

/// `ω (n + 1/2)` for `n = 0..levels`.
pub fn oscillator(levels: usize, omega: f64) -> Result<CMatrix> {
    check_levels(levels)?;
    Ok(CMatrix::from_diagonal(&CVector::from_iterator(levels, (0..levels).map(|n| c(omega * (n as f64 + 0.5))))))
}

/// `p² / 2` with the truncated momentum operator.
pub fn free_particle(levels: usize, omega: f64) -> Result<CMatrix> {
    check_levels(levels)?;
    let p = momentum(levels, omega);
    Ok(linalg::hermitize(&(&p * &p).scale(0.5)))
}

/// `p² / 2 + q⁴ / 4` with truncated operators.
pub fn quartic(levels: usize, omega: f64) -> Result<CMatrix> {
    check_levels(levels)?;
    let p = momentum(levels, omega);
    let q = position(levels, omega);
    let q2 = &q * &q;
    Ok(linalg::hermitize(&((&p * &p).scale(0.5) + (&q2 * &q2).scale(0.25))))
}

/// GUE-like sample `scale · (A + A†) / 2` with standard normal entries.
pub fn random_hermitian<R: Rng + ?Sized>(levels: usize, scale: f64, rng: &mut R) -> Result<CMatrix> {
    check_levels(levels)?;
    let a = CMatrix::from_fn(levels, levels, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    Ok(linalg::hermitize(&a).scale(scale))
}

/// Projector onto the eigenvectors of the truncated position operator whose
/// eigenvalues (quadrature nodes) lie in `[lo, hi]`.
pub fn position_window(levels: usize, omega: f64, lo: f64, hi: f64) -> Result<CMatrix> {
    check_levels(levels)?;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::invalid(format!("empty position window [{lo}, {hi}]")));
    }
    let (nodes, vectors) = linalg::eigh(&position(levels, omega));
    let mut proj = CMatrix::zeros(levels, levels);
    for (j, &x) in nodes.iter().enumerate() {
        if (lo..=hi).contains(&x) {
            let v = vectors.column(j);
            proj += v * v.adjoint();
        }
    }
    Ok(proj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_commutator_except_truncation_corner() {
        let n = 6;
        let q = position(n, 1.3);
        let p = momentum(n, 1.3);
        let comm = &q * &p - &p * &q;
        for i in 0..n - 1 {
            assert!((comm[(i, i)] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn position_nodes_are_symmetric() {
        let (nodes, _) = linalg::eigh(&position(5, 1.0));
        for (a, b) in nodes.iter().zip(nodes.iter().rev()) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn position_window_is_a_projector() {
        let p = position_window(8, 1.0, -0.5, 2.0).unwrap();
        assert!(linalg::max_abs(&(&p * &p - &p)) < 1e-12);
        let full = position_window(8, 1.0, -100.0, 100.0).unwrap();
        assert!(linalg::max_abs(&(full - CMatrix::identity(8, 8))) < 1e-12);
    }

    #[test]
    fn oscillator_levels() {
        let h = oscillator(3, 2.0).unwrap();
        assert_eq!(h[(2, 2)].re, 5.0);
    }
}

use serde::Serialize;

use crate::linalg::{self, c, CMatrix, CVector, Complex64};
use crate::{Error, Result};

/// Input Hermiticity tolerance; inputs within it are symmetrised.
const HERMITIAN_INPUT_TOL: f64 = 1e-10;

/// Truncated system Hilbert space with its sorted eigendecomposition.
#[derive(Debug, Clone)]
pub struct SystemSpace {
    hamiltonian: CMatrix,
    energies: Vec<f64>,
    eigenvectors: CMatrix,
}

/// One eigenvalue moved onto the clock frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapRecord {
    pub level: usize,
    pub original: f64,
    pub snapped: f64,
    /// Grid index `k` with `snapped = k · step`.
    pub grid_index: i64,
}

pub fn build_system_space(h: &CMatrix) -> Result<SystemSpace> {
    if h.nrows() != h.ncols() {
        return Err(Error::invalid(format!("Hamiltonian must be square, got {}x{}", h.nrows(), h.ncols())));
    }
    if h.nrows() == 0 {
        return Err(Error::invalid("Hamiltonian must have at least one level"));
    }
    if h.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("Hamiltonian has non-finite entries"));
    }
    let violation = linalg::hermitian_deviation(h);
    if violation > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian { violation });
    }
    let hamiltonian = linalg::hermitize(h);
    let (energies, eigenvectors) = linalg::eigh(&hamiltonian);
    Ok(SystemSpace { hamiltonian, energies, eigenvectors })
}

impl SystemSpace {
    /// Builds `H = V diag(E) V†` from a prescribed spectrum. `vectors` must be
    /// unitary to 1e-12; the pairs are re-sorted by energy.
    pub fn from_spectrum(energies: Vec<f64>, vectors: CMatrix) -> Result<Self> {
        let n = energies.len();
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: vectors.ncols() });
        }
        if linalg::orthonormality_defect(&vectors) > 1e-12 {
            return Err(Error::invalid("eigenvector matrix is not unitary"));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| energies[i]).collect();
        let mut eigenvectors = CMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            eigenvectors.set_column(col, &vectors.column(i));
        }
        let hamiltonian = linalg::hermitize(&linalg::spectral_function(&sorted, &eigenvectors, c));
        Ok(Self { hamiltonian, energies: sorted, eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// Eigenvalues, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Column `i` is the eigenvector of `energies()[i]`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> CVector {
        self.eigenvectors.column(i).into_owned()
    }

    /// `exp(−i H t)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        linalg::spectral_function(&self.energies, &self.eigenvectors, |e| Complex64::from_polar(1.0, -e * t))
    }

    /// Moves every eigenvalue to the nearest multiple of `step`, keeping the
    /// eigenvectors. Exact half-way ties go to the lower multiple.
    pub fn snapped(&self, step: f64) -> Result<(SystemSpace, Vec<SnapRecord>)> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(format!("snap step must be positive, got {step}")));
        }
        let records: Vec<SnapRecord> = self
            .energies
            .iter()
            .enumerate()
            .map(|(level, &e)| {
                let k = (e / step - 0.5).ceil();
                SnapRecord { level, original: e, snapped: k * step, grid_index: k as i64 }
            })
            .collect();
        let space = SystemSpace::from_spectrum(records.iter().map(|r| r.snapped).collect(), self.eigenvectors.clone())?;
        Ok((space, records))
    }

    /// `‖H V − V diag(E)‖_max`.
    pub fn eigen_residual(&self) -> f64 {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(self.dim(), self.energies.iter().map(|&e| c(e))));
        linalg::max_abs(&(&self.hamiltonian * &self.eigenvectors - &self.eigenvectors * d))
    }
}

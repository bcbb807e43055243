use std::sync::OnceLock;

use serde::Serialize;

use super::clock::{ClockSpace, Sign};
use super::system::SystemSpace;
use crate::linalg::{self, c, CMatrix, CVector, Complex64};
use crate::{Error, Result};

/// `H_s ⊗ I_M + σ · I_{N_s} ⊗ S` on the system-major product basis.
#[derive(Debug)]
pub struct ExtendedSpace {
    system: SystemSpace,
    clock: ClockSpace,
    hamiltonian: CMatrix,
    spectrum: OnceLock<(Vec<f64>, CMatrix)>,
}

impl Clone for ExtendedSpace {
    fn clone(&self) -> Self {
        Self {
            system: self.system.clone(),
            clock: self.clock.clone(),
            hamiltonian: self.hamiltonian.clone(),
            spectrum: self.spectrum.get().cloned().map(OnceLock::from).unwrap_or_default(),
        }
    }
}

pub fn build_extended(system: &SystemSpace, clock: &ClockSpace) -> ExtendedSpace {
    let ns = system.dim();
    let m = clock.size();
    let s = clock.sign().value();
    let mut h = system.hamiltonian().kronecker(&CMatrix::identity(m, m));
    h += CMatrix::identity(ns, ns).kronecker(clock.momentum()).scale(s);
    ExtendedSpace {
        system: system.clone(),
        clock: clock.clone(),
        hamiltonian: linalg::hermitize(&h),
        spectrum: OnceLock::new(),
    }
}

impl ExtendedSpace {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn system(&self) -> &SystemSpace {
        &self.system
    }

    pub fn clock(&self) -> &ClockSpace {
        &self.clock
    }

    pub fn sign(&self) -> Sign {
        self.clock.sign()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// Dense eigendecomposition of `H_ex`, computed on first use.
    pub fn spectrum(&self) -> &(Vec<f64>, CMatrix) {
        self.spectrum.get_or_init(|| linalg::eigh(&self.hamiltonian))
    }

    /// Basis index of `|i⟩ ⊗ |m⟩`.
    pub fn index(&self, system: usize, clock: usize) -> usize {
        system * self.clock.size() + clock
    }

    /// Largest absolute row sum of `H_ex`.
    pub fn row_sum_norm(&self) -> f64 {
        self.hamiltonian.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `I ⊗ T`.
    pub fn time_operator(&self) -> CMatrix {
        let ns = self.system.dim();
        CMatrix::identity(ns, ns).kronecker(&self.clock.time_operator())
    }

    /// `I ⊗ S`.
    pub fn clock_momentum(&self) -> CMatrix {
        let ns = self.system.dim();
        CMatrix::identity(ns, ns).kronecker(self.clock.momentum())
    }

    /// `‖H_ex ψ‖`.
    pub fn residual(&self, psi: &CVector) -> f64 {
        (&self.hamiltonian * psi).norm()
    }

    pub fn product_state(&self, system: &CVector, clock: &CVector) -> Result<ExtendedState> {
        if system.len() != self.system.dim() {
            return Err(Error::DimensionMismatch { expected: self.system.dim(), actual: system.len() });
        }
        if clock.len() != self.clock.size() {
            return Err(Error::DimensionMismatch { expected: self.clock.size(), actual: clock.len() });
        }
        ExtendedState::new(system.kronecker(clock))
    }

    fn check(&self, psi: &ExtendedState) -> Result<()> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: psi.len() });
        }
        Ok(())
    }

    /// System-traced clock distribution `p_m = Σ_i |ψ_{i,m}|²`.
    pub fn clock_marginal(&self, psi: &ExtendedState) -> Vec<f64> {
        let m = self.clock.size();
        let mut p = vec![0.0; m];
        for (idx, z) in psi.amplitudes().iter().enumerate() {
            p[idx % m] += z.norm_sqr();
        }
        p
    }

    /// `⟨T_m| ψ⟩` as a system vector (unnormalised).
    pub fn clock_slice(&self, psi: &ExtendedState, m: usize) -> CVector {
        let ns = self.system.dim();
        CVector::from_iterator(ns, (0..ns).map(|i| psi.amplitudes()[self.index(i, m)]))
    }
}

/// Normalised vector of the extended Hilbert space. Global phase and scale
/// carry no physical meaning; compare with [`linalg::fidelity`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    amplitudes: CVector,
}

impl ExtendedState {
    pub fn new(v: CVector) -> Result<Self> {
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("state has non-finite amplitudes"));
        }
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::invalid("zero vector is not a state"));
        }
        Ok(Self { amplitudes: v.unscale(n) })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_vector(self) -> CVector {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn fidelity(&self, other: &ExtendedState) -> f64 {
        linalg::fidelity(&self.amplitudes, &other.amplitudes)
    }
}

/// `exp(−i H_ex θ) ψ` through the eigendecomposition of `H_ex`.
pub fn evolve_extended(ext: &ExtendedSpace, psi: &ExtendedState, theta: f64) -> Result<ExtendedState> {
    ext.check(psi)?;
    if !theta.is_finite() {
        return Err(Error::invalid("evolution parameter must be finite"));
    }
    let (values, vectors) = ext.spectrum();
    let mut coeffs = vectors.ad_mul(psi.amplitudes());
    for (z, &l) in coeffs.iter_mut().zip(values) {
        *z *= Complex64::from_polar(1.0, -l * theta);
    }
    Ok(ExtendedState { amplitudes: vectors * coeffs })
}

/// `(exp(−i H_s θ) ⊗ exp(−i σ S θ)) ψ`, using that the two Kronecker
/// summands of `H_ex` commute. Independent of the dense eigendecomposition.
pub fn evolve_kronecker(ext: &ExtendedSpace, psi: &ExtendedState, theta: f64) -> Result<ExtendedState> {
    ext.check(psi)?;
    let ns = ext.system.dim();
    let m = ext.clock.size();
    let us = ext.system.propagator(theta);
    let ut = ext.clock.propagator(theta);
    // Row i of `grid` holds the clock amplitudes of system level i.
    let grid = CMatrix::from_row_iterator(ns, m, psi.amplitudes().iter().copied());
    let out = us * grid * ut.transpose();
    let v = CVector::from_iterator(ns * m, (0..ns).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| out[(i, j)]));
    Ok(ExtendedState { amplitudes: v })
}

/// Evolves the two factors of a separable state independently:
/// `(exp(−i H_s t) ψ_s, exp(−i σ S t) ψ_T)`.
pub fn evolve_factored(
    system: &SystemSpace,
    clock: &ClockSpace,
    psi_s: &CVector,
    psi_t: &CVector,
    t: f64,
) -> Result<(CVector, CVector)> {
    if psi_s.len() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), actual: psi_s.len() });
    }
    if psi_t.len() != clock.size() {
        return Err(Error::DimensionMismatch { expected: clock.size(), actual: psi_t.len() });
    }
    Ok((system.propagator(t) * psi_s, clock.propagator(t) * psi_t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Uncertainty {
    pub energy_spread: f64,
    pub time_spread: f64,
    pub product: f64,
}

/// Spreads of `H_ex` and of `I ⊗ T` in `ψ`. The energy spread is computed as
/// `‖(H_ex − ⟨H_ex⟩) ψ‖`, which avoids the cancellation in `⟨H²⟩ − ⟨H⟩²`.
///
/// The idealised bound `ΔH_ex ΔT ≥ 1/2` is only expected for states
/// localised away from the clock-grid edges.
pub fn uncertainty_product(ext: &ExtendedSpace, psi: &ExtendedState) -> Result<Uncertainty> {
    ext.check(psi)?;
    let v = psi.amplitudes();
    let hv = &ext.hamiltonian * v;
    let mean = linalg::inner(v, &hv).re;
    let energy_spread = (hv - v * c(mean)).norm();

    let p = ext.clock_marginal(psi);
    let times = ext.clock.times();
    let t_mean: f64 = p.iter().zip(times).map(|(w, t)| w * t).sum();
    let t_var: f64 = p.iter().zip(times).map(|(w, t)| w * (t - t_mean).powi(2)).sum();
    let time_spread = t_var.max(0.0).sqrt();
    Ok(Uncertainty { energy_spread, time_spread, product: energy_spread * time_spread })
}

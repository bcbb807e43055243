use serde::Serialize;

use super::TimePOVM;
use crate::constraint::{make_physical_state, project_physical, PhysicalState, PhysicalSubspace};
use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::{evolve_extended, ExtendedSpace, ExtendedState};
use crate::{Error, Result};

fn check_dim(povm: &TimePOVM, coefficients: &CVector) -> Result<()> {
    if coefficients.len() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), actual: coefficients.len() });
    }
    Ok(())
}

/// Born-rule distribution `p_m = c† E_m c` over the clock bins.
pub fn time_distribution(povm: &TimePOVM, phys: &PhysicalState) -> Result<Vec<f64>> {
    let c = phys.coefficients();
    check_dim(povm, c)?;
    let p: Vec<f64> = povm.factors().iter().map(|f| (f.adjoint() * c).norm_squared()).collect();
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::numerical(format!("time distribution sums to {total}")));
    }
    Ok(p)
}

/// `(Σ_m T_m p_m, c† T_phys c)`: the distribution mean and the expectation
/// of the restricted time operator.
pub fn first_moment(povm: &TimePOVM, phys: &PhysicalState) -> Result<(f64, f64)> {
    let p = time_distribution(povm, phys)?;
    let mean = p.iter().zip(povm.times()).map(|(p, t)| p * t).sum();
    let c = phys.coefficients();
    Ok((mean, linalg::inner(c, &(povm.t_phys() * c)).re))
}

/// System state conditioned on clock reading `T_m`: `⟨T_m|ψ⟩`, normalised.
pub fn conditional_state(ext: &ExtendedSpace, phys: &PhysicalState, m: usize) -> Result<CVector> {
    if phys.state().len() != ext.dim() {
        return Err(Error::DimensionMismatch { expected: ext.dim(), actual: phys.state().len() });
    }
    if m >= ext.clock().size() {
        return Err(Error::invalid(format!("clock index {m} outside 0..{}", ext.clock().size())));
    }
    let v = ext.clock_slice(phys.state(), m);
    let n = v.norm();
    if n.is_nan() || n <= 1e-14 {
        return Err(Error::numerical(format!("state has no weight at clock bin {m}")));
    }
    Ok(v.unscale(n))
}

/// `min_m F(ψ_{m+1}, exp(−iσ H_s ΔT) ψ_m)` over all bins, cyclically.
pub fn conditional_propagator_fidelity(ext: &ExtendedSpace, phys: &PhysicalState) -> Result<f64> {
    let size = ext.clock().size();
    let step = ext.sign().value() * ext.clock().step();
    let u = ext.system().propagator(step);
    let states = (0..size).map(|m| conditional_state(ext, phys, m)).collect::<Result<Vec<_>>>()?;
    Ok((0..size).map(|m| linalg::fidelity(&states[(m + 1) % size], &(&u * &states[m]))).fold(1.0, f64::min))
}

/// `Π_V ⊗ Σ_{m ∈ window} |T_m⟩⟨T_m|`: the system found in `V` while the
/// clock reads inside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct EventOperator {
    system_projector: CMatrix,
    window: Vec<usize>,
}

impl EventOperator {
    pub fn new(system_projector: CMatrix, mut window: Vec<usize>, clock_size: usize) -> Result<Self> {
        if !system_projector.is_square() {
            return Err(Error::invalid("system projector must be square"));
        }
        let deviation = linalg::hermitian_deviation(&system_projector);
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { violation: deviation });
        }
        let idempotency = linalg::max_abs(&(&system_projector * &system_projector - &system_projector));
        if idempotency > 1e-10 {
            return Err(Error::invalid(format!("system projector is not idempotent ({idempotency:e})")));
        }
        if let Some(&m) = window.iter().find(|&&m| m >= clock_size) {
            return Err(Error::invalid(format!("clock index {m} outside 0..{clock_size}")));
        }
        window.sort_unstable();
        window.dedup();
        Ok(EventOperator { system_projector, window })
    }

    pub fn system_projector(&self) -> &CMatrix {
        &self.system_projector
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }
}

pub fn event_probability(ev: &EventOperator, sub: &PhysicalSubspace, phys: &PhysicalState) -> Result<f64> {
    let ns = sub.system_dim();
    let size = sub.clock_size();
    if ev.system_projector.nrows() != ns {
        return Err(Error::DimensionMismatch { expected: ns, actual: ev.system_projector.nrows() });
    }
    let psi = phys.state().amplitudes();
    if psi.len() != ns * size {
        return Err(Error::DimensionMismatch { expected: ns * size, actual: psi.len() });
    }
    Ok(ev
        .window
        .iter()
        .map(|&m| {
            let slice = CVector::from_iterator(ns, (0..ns).map(|i| psi[i * size + m]));
            linalg::inner(&slice, &(&ev.system_projector * &slice)).re
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub theta: f64,
    /// `θ / ΔT`.
    pub bins: f64,
    /// Expected shift of the clock marginal, `σ · round(θ / ΔT)`.
    pub shift: i64,
    /// Set when `θ` is not a whole number of bins; the comparison then uses
    /// the nearest bin and is not exact.
    pub interpolated: bool,
    /// `max_m |p_θ(m) − p_0(m − shift)|` for the given state.
    pub marginal_deviation: f64,
    /// `‖P ψ‖²`.
    pub physical_weight: f64,
    /// `max_m |p_θ(m) − p_0(m)|` for the physical projection of the state.
    pub physical_marginal_deviation: Option<f64>,
    /// Shifting the system alone by `exp(−i H_s θ)` moves the time
    /// distribution by `−shift` bins; maximum deviation from that.
    pub povm_shift_deviation: Option<f64>,
}

fn shifted(p: &[f64], by: i64) -> Vec<f64> {
    let n = p.len() as i64;
    (0..n).map(|m| p[(m - by).rem_euclid(n) as usize]).collect()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn covariance_report(
    ext: &ExtendedSpace,
    povm: &TimePOVM,
    sub: &PhysicalSubspace,
    psi: &ExtendedState,
    theta: f64,
) -> Result<CovarianceReport> {
    if !theta.is_finite() {
        return Err(Error::invalid("evolution parameter must be finite"));
    }
    let bins = theta / ext.clock().step();
    let whole = bins.round();
    let interpolated = (bins - whole).abs() > 1e-9;
    let shift = ext.sign().value() as i64 * whole as i64;

    let before = ext.clock_marginal(psi);
    let after = ext.clock_marginal(&evolve_extended(ext, psi, theta)?);
    let marginal_deviation = max_gap(&after, &shifted(&before, shift));

    let (projected, physical_weight) = project_physical(sub, psi)?;
    let (physical_marginal_deviation, povm_shift_deviation) = match projected {
        None => (None, None),
        Some(phys) => {
            let p0 = ext.clock_marginal(phys.state());
            let p1 = ext.clock_marginal(&evolve_extended(ext, phys.state(), theta)?);

            let size = ext.clock().size();
            let system_step = sub.restrict_product(&ext.system().propagator(theta), &CMatrix::identity(size, size));
            let moved = make_physical_state(sub, &(system_step * phys.coefficients()))?;
            let q0 = time_distribution(povm, &phys)?;
            let q1 = time_distribution(povm, &moved)?;
            (Some(max_gap(&p0, &p1)), Some(max_gap(&q1, &shifted(&q0, -shift))))
        }
    };
    Ok(CovarianceReport {
        theta,
        bins,
        shift,
        interpolated,
        marginal_deviation,
        physical_weight,
        physical_marginal_deviation,
        povm_shift_deviation,
    })
}

//! Time observable on the physical subspace.
//!
//! The effects are compressions of the clock projectors onto the physical
//! subspace, read out through the coherent system vector
//!
//! ```text
//! E_m = B† (R ⊗ |T_m⟩⟨T_m|) B,   R = Σ_r |χ_r⟩⟨χ_r|
//! ```
//!
//! where `χ_r` sums the matched system eigenvectors of colour `r`. Levels
//! sharing a clock frequency get distinct colours, which is what makes
//! `Σ_m E_m = I_d` exact. Without degeneracy a single colour suffices, every
//! `E_m` is rank one and `E_m[a, b] = conj(u_a(T_m)) u_b(T_m)` in the matched
//! basis.

mod audit;
mod dynamics;

pub use audit::{
    gram_of_restricted_time_states, pm_violation_report, rank_one_closed_form, PmViolationReport, RankOneForm,
};
pub use dynamics::{
    conditional_propagator_fidelity, conditional_state, covariance_report, event_probability, first_moment,
    time_distribution, CovarianceReport, EventOperator,
};

use serde::{Deserialize, Serialize};

use crate::constraint::PhysicalSubspace;
use crate::linalg::{self, c, CMatrix, CVector};
use crate::quantum::{ClockSpace, ExtendedSpace, Sign};
use crate::{Error, Result};

pub const POSITIVITY_TOL: f64 = 1e-12;
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Clock grid metadata attached to every POVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(rename = "M")]
    pub size: usize,
    #[serde(rename = "deltaT")]
    pub step: f64,
    #[serde(rename = "T0")]
    pub origin: f64,
}

impl Grid {
    pub fn of(clock: &ClockSpace) -> Self {
        Grid { size: clock.size(), step: clock.step(), origin: clock.origin() }
    }

    pub fn time(&self, m: usize) -> f64 {
        self.origin + m as f64 * self.step
    }
}

#[derive(Debug, Clone)]
pub struct TimePOVM {
    effects: Vec<CMatrix>,
    /// `F_m` with `E_m = F_m F_m†`; one column per readout colour.
    factors: Vec<CMatrix>,
    grid: Grid,
    sign: Sign,
    t_phys: CMatrix,
    min_eigenvalue: f64,
    completeness_residual: f64,
}

impl TimePOVM {
    /// Builds the effects `F_m F_m†` and checks positivity and completeness.
    pub fn from_factors(factors: Vec<CMatrix>, grid: Grid, sign: Sign) -> Result<Self> {
        if factors.len() != grid.size {
            return Err(Error::DimensionMismatch { expected: grid.size, actual: factors.len() });
        }
        let d = factors.first().map_or(0, |f| f.nrows());
        if d == 0 {
            return Err(Error::NoPhysicalStates);
        }
        if let Some(f) = factors.iter().find(|f| f.nrows() != d) {
            return Err(Error::DimensionMismatch { expected: d, actual: f.nrows() });
        }
        let effects: Vec<CMatrix> = factors.iter().map(|f| linalg::hermitize(&(f * f.adjoint()))).collect();

        let min_eigenvalue = effects.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -POSITIVITY_TOL {
            return Err(Error::numerical(format!("effect has negative eigenvalue {min_eigenvalue:e}")));
        }
        let total = effects.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
        let completeness_residual = linalg::max_abs(&(total - CMatrix::identity(d, d)));
        if completeness_residual.is_nan() || completeness_residual >= COMPLETENESS_TOL {
            return Err(Error::numerical(format!(
                "effects do not resolve the identity: residual {completeness_residual:e}"
            )));
        }
        let t_phys = effects.iter().enumerate().fold(CMatrix::zeros(d, d), |acc, (m, e)| acc + e * c(grid.time(m)));
        Ok(TimePOVM { effects, factors, grid, sign, t_phys, min_eigenvalue, completeness_residual })
    }

    pub fn dim(&self) -> usize {
        self.t_phys.nrows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, m: usize) -> &CMatrix {
        &self.effects[m]
    }

    /// `E_m / ΔT`, comparable across grid sizes.
    pub fn density_effect(&self, m: usize) -> CMatrix {
        self.effects[m].unscale(self.grid.step)
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    /// Number of readout colours; 1 means every effect is rank one.
    pub fn readout_rank(&self) -> usize {
        self.factors.first().map_or(0, |f| f.ncols())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.grid.size).map(|m| self.grid.time(m)).collect()
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// First moment `Σ_m T_m E_m`: the restricted time operator.
    pub fn t_phys(&self) -> &CMatrix {
        &self.t_phys
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn completeness_residual(&self) -> f64 {
        self.completeness_residual
    }
}

/// Greedy colouring of the matched levels: levels that share a clock
/// frequency get different colours, lowest system index first.
fn readout_colours(sub: &PhysicalSubspace) -> Vec<Vec<usize>> {
    let mut levels: Vec<usize> = sub.pairs().iter().map(|p| p.system_index).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut colour_of: Vec<(usize, usize)> = Vec::new();
    for &i in &levels {
        let clash: Vec<usize> = sub
            .pairs()
            .iter()
            .filter(|p| p.system_index == i)
            .flat_map(|p| sub.pairs().iter().filter(move |q| q.clock_index == p.clock_index && q.system_index != i))
            .filter_map(|q| colour_of.iter().find(|(j, _)| *j == q.system_index).map(|(_, col)| *col))
            .collect();
        let colour = (0..).find(|col| !clash.contains(col)).unwrap();
        colour_of.push((i, colour));
    }
    let n_colours = colour_of.iter().map(|(_, col)| col + 1).max().unwrap_or(0);
    (0..n_colours).map(|col| colour_of.iter().filter(|(_, k)| *k == col).map(|(i, _)| *i).collect()).collect()
}

/// Readout vectors `χ_r`, one per colour.
pub fn readout_vectors(sub: &PhysicalSubspace, ext: &ExtendedSpace) -> Vec<CVector> {
    readout_colours(sub)
        .into_iter()
        .map(|levels| {
            levels.iter().fold(CVector::zeros(ext.system().dim()), |acc, &i| acc + ext.system().eigenvector(i))
        })
        .collect()
}

/// Builds the time POVM of a physical subspace and asserts that its first
/// moment equals the direct compression `B† (R ⊗ T) B`.
pub fn build_time_povm(sub: &PhysicalSubspace, ext: &ExtendedSpace) -> Result<TimePOVM> {
    if sub.is_empty() {
        return Err(Error::NoPhysicalStates);
    }
    if sub.basis().nrows() != ext.dim() {
        return Err(Error::DimensionMismatch { expected: ext.dim(), actual: sub.basis().nrows() });
    }
    let ns = ext.system().dim();
    let m_size = ext.clock().size();
    let d = sub.dim();
    let chis = readout_vectors(sub, ext);

    // projections[r][(m, a)] = ⟨b_a | χ_r ⊗ T_m⟩
    let projections: Vec<CMatrix> = chis
        .iter()
        .map(|chi| {
            let mut out = CMatrix::zeros(m_size, d);
            for (a, col) in sub.basis().column_iter().enumerate() {
                let grid = CMatrix::from_row_iterator(ns, m_size, col.iter().copied());
                let v = grid.adjoint() * chi;
                out.set_column(a, &v);
            }
            out
        })
        .collect();
    let factors: Vec<CMatrix> = (0..m_size)
        .map(|m| {
            let mut f = CMatrix::zeros(d, chis.len());
            for (r, p) in projections.iter().enumerate() {
                f.set_column(r, &p.row(m).transpose());
            }
            f
        })
        .collect();
    let povm = TimePOVM::from_factors(factors, Grid::of(ext.clock()), ext.sign())?;

    let readout = chis.iter().fold(CMatrix::zeros(ns, ns), |acc, chi| acc + chi * chi.adjoint());
    let direct = sub.restrict_product(&readout, &ext.clock().time_operator());
    let scale = ext.clock().times().iter().fold(1.0f64, |a, t| a.max(t.abs()));
    let gap = linalg::max_abs(&(direct - povm.t_phys()));
    if gap > 1e-10 * scale {
        return Err(Error::numerical(format!("first moment differs from the restricted time operator by {gap:e}")));
    }
    Ok(povm)
}

/// Clock projectors `|T_m⟩⟨T_m|` on the bare clock space (`B = I`); the
/// projector-valued control.
pub fn unrestricted_clock_povm(clock: &ClockSpace) -> Result<TimePOVM> {
    let factors = (0..clock.size())
        .map(|m| CMatrix::from_column_slice(clock.size(), 1, clock.time_state(m).as_slice()))
        .collect();
    TimePOVM::from_factors(factors, Grid::of(clock), clock.sign())
}

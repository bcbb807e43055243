//! The physical-event subspace: states annihilated by the extended
//! Hamiltonian, `(H_s ⊗ I + σ I ⊗ S) ψ = 0`.
//!
//! Two independent routes are provided. [`solve_constraint_spectral`] pairs
//! system eigenvalues `E_i` with clock frequencies `ω_k` such that
//! `E_i + σ ω_k ≈ 0` and emits the product vectors `|E_i⟩ ⊗ |ω_k⟩`.
//! [`solve_constraint_kernel`] diagonalises the dense `H_ex` and keeps the
//! near-null eigenvectors. On a discretised clock an exact kernel exists only
//! when the system spectrum is commensurate with the frequency grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix, CVector, Complex64};
use crate::quantum::{evolve_extended, ClockSpace, ExtendedSpace, ExtendedState, Sign};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    SpectralMatching,
    KernelEigendecomposition,
}

/// System level `i` paired with clock mode `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub system_index: usize,
    /// Column of [`ClockSpace::modes`].
    pub clock_index: usize,
    /// Centred integer `k` of the clock frequency.
    pub wavenumber: i64,
    pub energy: f64,
    /// Eigenvalue of `S` on the matched mode, `≈ −σ E_i`.
    pub clock_eigenvalue: f64,
    /// `E_i + σ ω_k`.
    pub mismatch: f64,
}

/// A system level without a partner within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchMiss {
    pub system_index: usize,
    pub energy: f64,
    pub nearest_wavenumber: i64,
    /// `min_k |E_i + σ ω_k|`.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct PhysicalSubspace {
    basis: CMatrix,
    pairs: Vec<MatchedPair>,
    misses: Vec<MatchMiss>,
    tolerance: f64,
    method: SolveMethod,
    sign: Sign,
    system_dim: usize,
    clock_size: usize,
}

/// Half the clock frequency spacing, `π / (M ΔT)`: the widest tolerance that
/// still pairs each energy with at most its nearest grid frequency.
pub fn default_tolerance(clock: &ClockSpace) -> f64 {
    PI / (clock.size() as f64 * clock.step())
}

fn check_tolerance(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("matching tolerance must be positive, got {eps}")));
    }
    Ok(())
}

fn nearest(ext: &ExtendedSpace, energy: f64) -> (usize, f64) {
    let s = ext.sign().value();
    ext.clock()
        .frequencies()
        .iter()
        .enumerate()
        .map(|(j, w)| (j, (energy + s * w).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("clock has at least eight modes")
}

fn misses_for(ext: &ExtendedSpace, pairs: &[MatchedPair]) -> Vec<MatchMiss> {
    let clock = ext.clock();
    ext.system()
        .energies()
        .iter()
        .enumerate()
        .filter(|(i, _)| !pairs.iter().any(|p| p.system_index == *i))
        .map(|(i, &e)| {
            let (j, distance) = nearest(ext, e);
            MatchMiss { system_index: i, energy: e, nearest_wavenumber: clock.wavenumbers()[j], distance }
        })
        .collect()
}

fn pair(ext: &ExtendedSpace, i: usize, j: usize) -> MatchedPair {
    let clock = ext.clock();
    let energy = ext.system().energies()[i];
    let w = clock.frequencies()[j];
    MatchedPair {
        system_index: i,
        clock_index: j,
        wavenumber: clock.wavenumbers()[j],
        energy,
        clock_eigenvalue: w,
        mismatch: energy + ext.sign().value() * w,
    }
}

/// Spectral matching: for every `E_i`, every clock frequency with
/// `|E_i + σ ω_k| ≤ eps` contributes `|E_i⟩ ⊗ |ω_k⟩`. With `eps` at or below
/// half the grid spacing, an exact half-way tie keeps only the lower `k`.
pub fn solve_constraint_spectral(ext: &ExtendedSpace, eps: f64) -> Result<PhysicalSubspace> {
    check_tolerance(eps)?;
    let clock = ext.clock();
    let sys = ext.system();
    let s = ext.sign().value();
    let single_match = eps <= default_tolerance(clock) * (1.0 + 1e-12);

    let mut pairs = Vec::new();
    for (i, &e) in sys.energies().iter().enumerate() {
        let mut hits: Vec<usize> =
            clock.frequencies().iter().enumerate().filter(|(_, w)| (e + s * *w).abs() <= eps).map(|(j, _)| j).collect();
        if single_match && hits.len() > 1 {
            hits.sort_by(|&a, &b| {
                let da = (e + s * clock.frequencies()[a]).abs();
                let db = (e + s * clock.frequencies()[b]).abs();
                da.total_cmp(&db).then(clock.wavenumbers()[a].cmp(&clock.wavenumbers()[b]))
            });
            // Equal distances only arise at an exact half-way tie.
            let best = hits[0];
            let best_d = (e + s * clock.frequencies()[best]).abs();
            let tied: Vec<usize> = hits
                .iter()
                .copied()
                .filter(|&j| ((e + s * clock.frequencies()[j]).abs() - best_d).abs() <= 1e-12 * eps)
                .collect();
            hits = vec![*tied.iter().min_by_key(|&&j| clock.wavenumbers()[j]).unwrap()];
        }
        pairs.extend(hits.into_iter().map(|j| pair(ext, i, j)));
    }

    let columns: Vec<CVector> =
        pairs.iter().map(|p| sys.eigenvector(p.system_index).kronecker(&clock.mode(p.clock_index))).collect();
    let misses = misses_for(ext, &pairs);
    Ok(PhysicalSubspace {
        basis: linalg::columns_to_matrix(ext.dim(), &columns),
        pairs,
        misses,
        tolerance: eps,
        method: SolveMethod::SpectralMatching,
        sign: ext.sign(),
        system_dim: sys.dim(),
        clock_size: clock.size(),
    })
}

/// Direct route: eigenvectors of the dense `H_ex` with `|λ| ≤ eps`, ordered
/// by (eigenvalue, components), orthonormalised by modified Gram–Schmidt with
/// re-orthogonalisation and phase-fixed.
///
/// The pairs table is recovered afterwards by testing every product vector
/// `|E_i⟩ ⊗ |ω_k⟩` for membership in the computed span (weight > 1/2); this
/// labelling does not alter the basis.
pub fn solve_constraint_kernel(ext: &ExtendedSpace, eps: f64) -> Result<PhysicalSubspace> {
    check_tolerance(eps)?;
    let (values, vectors) = ext.spectrum();
    let mut selected: Vec<(f64, CVector)> = values
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() <= eps)
        .map(|(j, &l)| (l, vectors.column(j).into_owned()))
        .collect();
    selected.sort_by(|(la, va), (lb, vb)| {
        la.total_cmp(lb).then_with(|| {
            va.iter()
                .zip(vb.iter())
                .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let raw: Vec<CVector> = selected.into_iter().map(|(_, v)| v).collect();
    let mut columns = linalg::orthonormalize(&raw, 1e-8);
    if columns.len() != raw.len() {
        return Err(Error::numerical("kernel eigenvectors are numerically dependent"));
    }
    for v in &mut columns {
        linalg::fix_phase(v);
    }
    let basis = linalg::columns_to_matrix(ext.dim(), &columns);
    let pairs = label_kernel(ext, &basis)?;
    let misses = misses_for(ext, &pairs);
    Ok(PhysicalSubspace {
        basis,
        pairs,
        misses,
        tolerance: eps,
        method: SolveMethod::KernelEigendecomposition,
        sign: ext.sign(),
        system_dim: ext.system().dim(),
        clock_size: ext.clock().size(),
    })
}

fn label_kernel(ext: &ExtendedSpace, basis: &CMatrix) -> Result<Vec<MatchedPair>> {
    let ns = ext.system().dim();
    let m = ext.clock().size();
    let v_adj = ext.system().eigenvectors().adjoint();
    let modes_conj = ext.clock().modes().map(|z| z.conj());
    let mut weights = nalgebra::DMatrix::<f64>::zeros(ns, m);
    for col in basis.column_iter() {
        let grid = CMatrix::from_row_iterator(ns, m, col.iter().copied());
        let overlaps = &v_adj * grid * &modes_conj;
        weights += overlaps.map(|z| z.norm_sqr());
    }
    let mut pairs = Vec::new();
    for i in 0..ns {
        for j in 0..m {
            if weights[(i, j)] > 0.5 {
                pairs.push(pair(ext, i, j));
            }
        }
    }
    if pairs.len() != basis.ncols() {
        return Err(Error::numerical(format!(
            "kernel of dimension {} could not be labelled by product states ({} found)",
            basis.ncols(),
            pairs.len()
        )));
    }
    Ok(pairs)
}

impl PhysicalSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    /// `(N_s·M) × d` matrix of orthonormal basis columns.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn basis_vector(&self, a: usize) -> CVector {
        self.basis.column(a).into_owned()
    }

    pub fn pairs(&self) -> &[MatchedPair] {
        &self.pairs
    }

    /// Levels without a partner, with their nearest-miss distances.
    pub fn misses(&self) -> &[MatchMiss] {
        &self.misses
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn clock_size(&self) -> usize {
        self.clock_size
    }

    /// `B† A B`.
    pub fn restrict(&self, op: &CMatrix) -> CMatrix {
        self.basis.adjoint() * op * &self.basis
    }

    /// `B† (A ⊗ C) B` without forming the Kronecker product: each basis
    /// column is reshaped to an `N_s × M` grid `G` and mapped to `A G Cᵀ`.
    pub fn restrict_product(&self, system_op: &CMatrix, clock_op: &CMatrix) -> CMatrix {
        let (ns, m) = (self.system_dim, self.clock_size);
        let ct = clock_op.transpose();
        let mut image = CMatrix::zeros(ns * m, self.dim());
        for (a, col) in self.basis.column_iter().enumerate() {
            let grid = system_op * CMatrix::from_row_iterator(ns, m, col.iter().copied()) * &ct;
            image.set_column(a, &CVector::from_iterator(ns * m, grid.transpose().iter().copied()));
        }
        self.basis.adjoint() * image
    }

    /// `max_a ‖H_ex b_a‖`.
    pub fn max_basis_residual(&self, ext: &ExtendedSpace) -> f64 {
        let hb = ext.hamiltonian() * &self.basis;
        hb.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// The residual bound `eps · (1 + ‖H_ex‖_row-sum)` each basis vector obeys.
    pub fn residual_bound(&self, ext: &ExtendedSpace) -> f64 {
        self.tolerance * (1.0 + ext.row_sum_norm())
    }
}

/// A normalised element of the physical subspace with its coefficients
/// over the subspace basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalState {
    coefficients: CVector,
    state: ExtendedState,
}

impl PhysicalState {
    pub fn coefficients(&self) -> &CVector {
        &self.coefficients
    }

    pub fn state(&self) -> &ExtendedState {
        &self.state
    }
}

/// `Σ_a c_a b_a` with `c` normalised.
pub fn make_physical_state(sub: &PhysicalSubspace, c: &CVector) -> Result<PhysicalState> {
    if sub.is_empty() {
        return Err(Error::NoPhysicalStates);
    }
    if c.len() != sub.dim() {
        return Err(Error::DimensionMismatch { expected: sub.dim(), actual: c.len() });
    }
    let n = c.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::invalid("coefficient vector must be non-zero and finite"));
    }
    let coefficients = c.unscale(n);
    let state = ExtendedState::new(&sub.basis * &coefficients)?;
    Ok(PhysicalState { coefficients, state })
}

/// Orthogonal projection onto the subspace. Returns the normalised projected
/// state (or `None` when the weight is below `1e-14`) and the weight
/// `‖P ψ‖²`.
pub fn project_physical(sub: &PhysicalSubspace, psi: &ExtendedState) -> Result<(Option<PhysicalState>, f64)> {
    if psi.len() != sub.basis.nrows() {
        return Err(Error::DimensionMismatch { expected: sub.basis.nrows(), actual: psi.len() });
    }
    if sub.is_empty() {
        return Ok((None, 0.0));
    }
    let c = sub.basis.adjoint() * psi.amplitudes();
    let weight = c.norm_squared();
    if weight < 1e-14 {
        return Ok((None, weight));
    }
    Ok((Some(make_physical_state(sub, &c)?), weight))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    /// `(θ, |⟨ψ| exp(−i H_ex θ) |ψ⟩|)`.
    pub samples: Vec<(f64, f64)>,
    pub min_fidelity: f64,
}

/// Overlap modulus `|⟨ψ| U_ex(θ) |ψ⟩|` for each θ. Exactly matched physical
/// states are zero-eigenvalue eigenvectors, so the overlap stays at 1; a
/// residual `r = ‖H_ex ψ‖` bounds the loss by `(r θ)² / 2`.
pub fn stationarity_check(ext: &ExtendedSpace, phys: &PhysicalState, thetas: &[f64]) -> Result<StationarityReport> {
    let mut samples = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let f = if theta == 0.0 {
            1.0
        } else {
            let out = evolve_extended(ext, phys.state(), theta)?;
            linalg::inner(phys.state().amplitudes(), out.amplitudes()).norm()
        };
        samples.push((theta, f));
    }
    let min_fidelity = samples.iter().map(|s| s.1).fold(1.0, f64::min);
    Ok(StationarityReport { samples, min_fidelity })
}

/// Dimension and largest principal angle between two subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agreement {
    pub dims: (usize, usize),
    pub max_angle: f64,
}

impl Agreement {
    pub fn agrees(&self, angle_tol: f64) -> bool {
        self.dims.0 == self.dims.1 && self.max_angle < angle_tol
    }
}

pub fn subspace_agreement(a: &PhysicalSubspace, b: &PhysicalSubspace) -> Result<Agreement> {
    let dims = (a.dim(), b.dim());
    if dims.0 != dims.1 {
        return Ok(Agreement { dims, max_angle: f64::INFINITY });
    }
    let angles = linalg::principal_angles(&a.basis, &b.basis)?;
    Ok(Agreement { dims, max_angle: angles.first().copied().unwrap_or(0.0) })
}

/// `⟨b_a| I ⊗ S |b_b⟩`, the clock momentum restricted to the subspace.
pub fn restricted_clock_momentum(ext: &ExtendedSpace, sub: &PhysicalSubspace) -> CMatrix {
    let ns = ext.system().dim();
    sub.restrict_product(&CMatrix::identity(ns, ns), ext.clock().momentum())
}

/// `⟨b_a| H_s ⊗ I |b_b⟩`.
pub fn restricted_system_energy(ext: &ExtendedSpace, sub: &PhysicalSubspace) -> CMatrix {
    let m = ext.clock().size();
    sub.restrict_product(ext.system().hamiltonian(), &CMatrix::identity(m, m))
}

pub(crate) fn unit(n: usize, a: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[a] = Complex64::new(1.0, 0.0);
    v
}

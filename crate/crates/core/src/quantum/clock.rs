use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, CMatrix, CVector, Complex64, I};
use crate::{Error, Result};

/// Global sign convention: the clock momentum enters the extended
/// Hamiltonian as `H_s + σ S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// `M`-point clock: `T_m = T0 + m·ΔT` and the DFT-conjugate momentum
/// `S = F† diag(ω) F` with centred frequencies `ω_k = 2πk / (M ΔT)`,
/// `k ∈ [−M/2, M/2)`.
///
/// `S` has the plane waves `u_k(m) = exp(i ω_k T_m) / √M` as eigenvectors,
/// acts as `−i d/dT` on band-limited data and generates cyclic translations:
/// `exp(−i a S)` shifts by `a` whenever `a` is a multiple of `ΔT`. The
/// canonical relation `[T, S] = i` holds only approximately, for states
/// that vanish near the grid edges.
#[derive(Debug, Clone)]
pub struct ClockSpace {
    size: usize,
    step: f64,
    origin: f64,
    sign: Sign,
    times: Vec<f64>,
    wavenumbers: Vec<i64>,
    frequencies: Vec<f64>,
    modes: CMatrix,
    momentum: CMatrix,
}

pub fn build_clock(size: usize, step: f64, origin: f64, sign: Sign) -> Result<ClockSpace> {
    if size < 8 || !size.is_multiple_of(2) {
        return Err(Error::invalid(format!("clock size must be even and at least 8, got {size}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!("clock spacing must be positive, got {step}")));
    }
    if !origin.is_finite() {
        return Err(Error::invalid("clock origin must be finite"));
    }

    let m = size as f64;
    let half = (size / 2) as i64;
    let times: Vec<f64> = (0..size).map(|j| origin + j as f64 * step).collect();
    let wavenumbers: Vec<i64> = (-half..half).collect();
    let frequencies: Vec<f64> = wavenumbers.iter().map(|&k| 2.0 * PI * k as f64 / (m * step)).collect();

    let norm = m.sqrt().recip();
    let modes = CMatrix::from_fn(size, size, |row, col| Complex64::from_polar(norm, frequencies[col] * times[row]));

    // S is circulant: S_{m,m'} = (1/M) Σ_k ω_k exp(2πi k (m − m') / M).
    let kernel: Vec<Complex64> = (0..size)
        .map(|j| {
            wavenumbers
                .iter()
                .zip(&frequencies)
                .map(|(&k, &w)| {
                    let phase = 2.0 * PI * ((k * j as i64).rem_euclid(size as i64)) as f64 / m;
                    Complex64::from_polar(w, phase)
                })
                .sum::<Complex64>()
                / m
        })
        .collect();
    let circulant = CMatrix::from_fn(size, size, |r, col| kernel[(r + size - col) % size]);
    let momentum = linalg::hermitize(&circulant);

    Ok(ClockSpace { size, step, origin, sign, times, wavenumbers, frequencies, modes, momentum })
}

impl ClockSpace {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Same grid with the opposite sign convention.
    pub fn with_sign(&self, sign: Sign) -> ClockSpace {
        ClockSpace { sign, ..self.clone() }
    }

    /// Grid times `T_m`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Centred integers `k`, in the order used by [`frequencies`](Self::frequencies)
    /// and the columns of [`modes`](Self::modes).
    pub fn wavenumbers(&self) -> &[i64] {
        &self.wavenumbers
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Frequency spacing `2π / (M ΔT)`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / (self.size as f64 * self.step)
    }

    /// Column `j`: `u(m) = exp(i ω_j T_m) / √M`.
    pub fn modes(&self) -> &CMatrix {
        &self.modes
    }

    pub fn mode(&self, j: usize) -> CVector {
        self.modes.column(j).into_owned()
    }

    /// Position of wavenumber `k` in the frequency list.
    pub fn wavenumber_index(&self, k: i64) -> Option<usize> {
        let half = (self.size / 2) as i64;
        (-half..half).contains(&k).then(|| (k + half) as usize)
    }

    /// Clock momentum `S`.
    pub fn momentum(&self) -> &CMatrix {
        &self.momentum
    }

    /// `diag(T_m)`.
    pub fn time_operator(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(self.size, self.times.iter().map(|&t| c(t))))
    }

    /// `|T_m⟩`.
    pub fn time_state(&self, m: usize) -> CVector {
        let mut v = CVector::zeros(self.size);
        v[m] = c(1.0);
        v
    }

    /// `exp(−i σ S t)`, the clock factor of the extended propagator.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let s = self.sign.value();
        linalg::spectral_function(&self.frequencies, &self.modes, |w| Complex64::from_polar(1.0, -s * w * t))
    }

    /// Normalised Gaussian packet `exp(−4 ln2 (T − center)² / fwhm²) · exp(i carrier T)`.
    /// `fwhm` is the full width at half maximum of the amplitude.
    pub fn gaussian(&self, center: f64, fwhm: f64, carrier: f64) -> CVector {
        let a = 4.0 * std::f64::consts::LN_2 / (fwhm * fwhm);
        let v = CVector::from_iterator(
            self.size,
            self.times.iter().map(|&t| Complex64::from_polar((-a * (t - center).powi(2)).exp(), carrier * t)),
        );
        let n = v.norm();
        v.unscale(n)
    }

    /// Midpoint of the grid, `T0 + (M/2)·ΔT`.
    pub fn center(&self) -> f64 {
        self.times[self.size / 2]
    }

    /// Standard deviation of the uniform distribution over the grid,
    /// `ΔT · sqrt((M² − 1) / 12)`.
    pub fn uniform_spread(&self) -> f64 {
        let m = self.size as f64;
        self.step * ((m * m - 1.0) / 12.0).sqrt()
    }
}

/// `‖([T, S] − i) φ‖ / ‖φ‖`, with the commutator formed entrywise as
/// `(T_m − T_m') S_{mm'}`.
///
/// Small only for states negligible near the grid edges; exact canonical
/// commutation is impossible in finite dimension (the trace of `[T, S]`
/// vanishes).
pub fn commutator_residual(clock: &ClockSpace, phi: &CVector) -> f64 {
    let n = clock.size;
    let t = &clock.times;
    let s = &clock.momentum;
    let mut worst = 0.0;
    for r in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..n {
            acc += s[(r, col)] * ((t[r] - t[col]) * phi[col]);
        }
        acc -= I * phi[r];
        worst += acc.norm_sqr();
    }
    worst.sqrt() / phi.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_clock(7, 1.0, 0.0, Sign::Plus).is_err());
        assert!(build_clock(6, 1.0, 0.0, Sign::Plus).is_err());
        assert!(build_clock(8, 0.0, 0.0, Sign::Plus).is_err());
    }

    #[test]
    fn momentum_matches_explicit_dft_product() {
        let clock = build_clock(8, 0.7, -1.3, Sign::Plus).unwrap();
        // F_{k,m} = exp(−i ω_k T_m) / √M; S = F† diag(ω) F.
        let f = clock.modes().adjoint();
        let w = CMatrix::from_diagonal(&CVector::from_iterator(8, clock.frequencies().iter().map(|&x| c(x))));
        let explicit = f.adjoint() * w * f;
        assert!(linalg::max_abs(&(explicit - clock.momentum())) < 1e-13);
        assert!(linalg::orthonormality_defect(clock.modes()) < 1e-14);
    }

    #[test]
    fn momentum_spectrum_is_the_centred_grid() {
        let clock = build_clock(8, 1.0, 0.0, Sign::Plus).unwrap();
        let (e, _) = linalg::eigh(clock.momentum());
        for (k, ev) in (-4..4).zip(&e) {
            assert!((ev - PI * k as f64 / 4.0).abs() < 1e-10, "{k}: {ev}");
        }
        assert!(linalg::hermitian_deviation(clock.momentum()) < 1e-12);
    }

    #[test]
    fn sign_does_not_change_the_momentum_operator() {
        let a = build_clock(16, 0.5, 0.0, Sign::Plus).unwrap();
        let b = build_clock(16, 0.5, 0.0, Sign::Minus).unwrap();
        assert_eq!(a.momentum(), b.momentum());
    }

    #[test]
    fn gaussian_residual_examples() {
        let clock = build_clock(64, 0.1, 0.0, Sign::Plus).unwrap();
        let g = clock.gaussian(clock.center(), 8.0 * 0.1, 0.0);
        assert!(commutator_residual(&clock, &g) < 1e-6);

        let clock = build_clock(128, 0.1, 0.0, Sign::Plus).unwrap();
        let g = clock.gaussian(clock.center(), 128.0 * 0.1 / 8.0, 0.0);
        assert!(commutator_residual(&clock, &g) < 1e-8);
    }

    #[test]
    fn edge_and_uniform_states_violate_the_relation() {
        let clock = build_clock(8, 1.0, 0.0, Sign::Plus).unwrap();
        let edge = clock.time_state(0);
        assert!(commutator_residual(&clock, &edge) > 1.0);

        // S annihilates the constant vector but not the ramp T·1, so the
        // residual is O(1) rather than small.
        let uniform = CVector::from_element(8, c(1.0 / 8f64.sqrt()));
        let r = commutator_residual(&clock, &uniform);
        let direct = {
            let t = clock.time_operator();
            let s = clock.momentum();
            let comm = &t * s - s * &t;
            (comm * &uniform - uniform.map(|z| I * z)).norm()
        };
        assert!((r - direct).abs() < 1e-12);
        assert!(r >= 1.0);
    }

    #[test]
    fn propagator_by_whole_bins_is_a_cyclic_shift() {
        let clock = build_clock(16, 0.25, 0.0, Sign::Plus).unwrap();
        let u = clock.propagator(3.0 * 0.25);
        for m in 0..16 {
            let out = &u * clock.time_state(m);
            assert!((out[(m + 3) % 16].norm() - 1.0).abs() < 1e-12);
        }
    }
}

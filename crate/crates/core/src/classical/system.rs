use rand::Rng;

use super::state::{ExtendedPhaseState, PhaseState};
use crate::{Error, Result};

/// An autonomous Hamiltonian on `R^{2n}`.
///
/// Autonomy is structural: neither method receives the evolution parameter.
pub trait Hamiltonian: Send + Sync {
    fn dim(&self) -> usize;

    fn energy(&self, q: &[f64], p: &[f64]) -> f64;

    /// Returns `(∂H/∂q, ∂H/∂p)`.
    fn gradient(&self, q: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>);

    fn label(&self) -> &str;

    /// Closed-form flow, when one is known.
    fn exact_flow(&self, _x0: &PhaseState, _t: f64) -> Option<PhaseState> {
        None
    }
}

/// `H = (p² + ω² q²) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicOscillator {
    pub omega: f64,
}

impl HarmonicOscillator {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(format!("oscillator frequency must be positive, got {omega}")));
        }
        Ok(Self { omega })
    }
}

impl Default for HarmonicOscillator {
    fn default() -> Self {
        Self { omega: 1.0 }
    }
}

impl Hamiltonian for HarmonicOscillator {
    fn dim(&self) -> usize {
        1
    }

    fn energy(&self, q: &[f64], p: &[f64]) -> f64 {
        0.5 * (p[0] * p[0] + self.omega * self.omega * q[0] * q[0])
    }

    fn gradient(&self, q: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (vec![self.omega * self.omega * q[0]], vec![p[0]])
    }

    fn label(&self) -> &str {
        "harmonic-oscillator"
    }

    fn exact_flow(&self, x0: &PhaseState, t: f64) -> Option<PhaseState> {
        let w = self.omega;
        let (s, c) = (w * t).sin_cos();
        let (q0, p0) = (x0.q[0], x0.p[0]);
        Some(PhaseState { q: vec![q0 * c + p0 * s / w], p: vec![p0 * c - q0 * w * s] })
    }
}

/// `H = p² / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FreeParticle;

impl Hamiltonian for FreeParticle {
    fn dim(&self) -> usize {
        1
    }

    fn energy(&self, _q: &[f64], p: &[f64]) -> f64 {
        0.5 * p[0] * p[0]
    }

    fn gradient(&self, _q: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0], vec![p[0]])
    }

    fn label(&self) -> &str {
        "free-particle"
    }

    fn exact_flow(&self, x0: &PhaseState, t: f64) -> Option<PhaseState> {
        Some(PhaseState { q: vec![x0.q[0] + x0.p[0] * t], p: x0.p.clone() })
    }
}

/// `H = p² / 2 + q⁴ / 4`. No elementary closed form; used as a nonlinear
/// stress case.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuarticOscillator;

impl Hamiltonian for QuarticOscillator {
    fn dim(&self) -> usize {
        1
    }

    fn energy(&self, q: &[f64], p: &[f64]) -> f64 {
        0.5 * p[0] * p[0] + 0.25 * q[0].powi(4)
    }

    fn gradient(&self, q: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (vec![q[0].powi(3)], vec![p[0]])
    }

    fn label(&self) -> &str {
        "quartic-oscillator"
    }
}

/// Largest relative deviation between `gradient` and central finite
/// differences of `energy` (step `1e-5 · max(1, |x|)`) over `probes` random
/// points drawn uniformly from `[-radius, radius]^{2n}`.
pub fn check_gradient<R: Rng + ?Sized>(sys: &dyn Hamiltonian, probes: usize, radius: f64, rng: &mut R) -> f64 {
    let n = sys.dim();
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
        let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
        let (gq, gp) = sys.gradient(&q, &p);
        for i in 0..n {
            let h = 1e-5 * q[i].abs().max(1.0);
            let x = q[i];
            q[i] = x + h;
            let up = sys.energy(&q, &p);
            q[i] = x - h;
            let down = sys.energy(&q, &p);
            q[i] = x;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - gq[i]).abs() / gq[i].abs().max(1.0));

            let h = 1e-5 * p[i].abs().max(1.0);
            let x = p[i];
            p[i] = x + h;
            let up = sys.energy(&q, &p);
            p[i] = x - h;
            let down = sys.energy(&q, &p);
            p[i] = x;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - gp[i]).abs() / gp[i].abs().max(1.0));
        }
    }
    worst
}

/// The extended system with `H_ex = H(q, p) + S` (unit scaling factor).
#[derive(Clone, Copy)]
pub struct ExtendedSystem<'a> {
    inner: &'a dyn Hamiltonian,
}

impl<'a> ExtendedSystem<'a> {
    pub fn new(inner: &'a dyn Hamiltonian) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &'a dyn Hamiltonian {
        self.inner
    }

    /// Number of extended degrees of freedom, `n + 1`.
    pub fn dim(&self) -> usize {
        self.inner.dim() + 1
    }

    pub fn energy(&self, y: &ExtendedPhaseState) -> Result<f64> {
        eval_extended_hamiltonian(self, y)
    }
}

impl std::fmt::Debug for ExtendedSystem<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtendedSystem").field("inner", &self.inner.label()).finish()
    }
}

/// Lifts a state of the original system onto the constraint surface:
/// `T = t0`, `S = -H(q, p)`.
pub fn extend_state(sys: &dyn Hamiltonian, x: &PhaseState, t0: f64) -> Result<ExtendedPhaseState> {
    if x.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), actual: x.dim() });
    }
    ExtendedPhaseState::new(x.clone(), t0, -sys.energy(&x.q, &x.p))
}

/// `H_ex(y) = H(q, p) + S`.
pub fn eval_extended_hamiltonian(ext: &ExtendedSystem<'_>, y: &ExtendedPhaseState) -> Result<f64> {
    if y.dim() != ext.inner.dim() {
        return Err(Error::DimensionMismatch { expected: ext.inner.dim(), actual: y.dim() });
    }
    Ok(ext.inner.energy(&y.base.q, &y.base.p) + y.time_conjugate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn extend_state_examples() {
        let ho = HarmonicOscillator::default();
        let y = extend_state(&ho, &PhaseState::scalar(1.0, 0.0).unwrap(), 0.0).unwrap();
        assert_eq!((y.time, y.time_conjugate), (0.0, -0.5));

        let y = extend_state(&FreeParticle, &PhaseState::scalar(3.0, 0.0).unwrap(), 7.0).unwrap();
        assert_eq!((y.time, y.time_conjugate), (7.0, 0.0));

        let y = extend_state(&ho, &PhaseState::scalar(1.0, 1.0).unwrap(), -2.0).unwrap();
        assert_eq!((y.time, y.time_conjugate), (-2.0, -1.0));
    }

    #[test]
    fn extend_state_rejects_wrong_dimension() {
        let x = PhaseState::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let err = extend_state(&HarmonicOscillator::default(), &x, 0.0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, actual: 2 }));
    }

    #[test]
    fn extended_hamiltonian_examples() {
        let ho = HarmonicOscillator::default();
        let ext = ExtendedSystem::new(&ho);
        let origin = PhaseState::scalar(0.0, 0.0).unwrap();
        let y = ExtendedPhaseState::new(origin, 0.0, 1.0).unwrap();
        assert_eq!(ext.energy(&y).unwrap(), 1.0);

        let y = ExtendedPhaseState::new(PhaseState::scalar(1.0, 0.0).unwrap(), 3.0, -0.5).unwrap();
        assert_eq!(ext.energy(&y).unwrap(), 0.0);
    }

    #[test]
    fn lifted_states_sit_exactly_on_the_constraint_surface() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let systems: [&dyn Hamiltonian; 3] = [&HarmonicOscillator { omega: 1.7 }, &FreeParticle, &QuarticOscillator];
        for sys in systems {
            let ext = ExtendedSystem::new(sys);
            for _ in 0..200 {
                let x = PhaseState::scalar(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)).unwrap();
                let y = extend_state(sys, &x, rng.random_range(-10.0..10.0)).unwrap();
                assert_eq!(ext.energy(&y).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn builtin_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let systems: [&dyn Hamiltonian; 3] = [&HarmonicOscillator { omega: 2.5 }, &FreeParticle, &QuarticOscillator];
        for sys in systems {
            let err = check_gradient(sys, 100, 3.0, &mut rng);
            assert!(err < 1e-6, "{}: {err:e}", sys.label());
        }
    }

    #[test]
    fn oscillator_rejects_nonpositive_frequency() {
        assert!(HarmonicOscillator::new(0.0).is_err());
        assert!(HarmonicOscillator::new(f64::NAN).is_err());
    }
}

use super::state::{ExtendedPhaseState, PhaseState};
use super::system::{ExtendedSystem, Hamiltonian};
use super::trajectory::Trajectory;
use crate::{Error, Result};

/// Fixed-point tolerance of the implicit-midpoint solve, relative to
/// `1 + |z_i|`.
pub const MIDPOINT_TOLERANCE: f64 = 1e-13;
pub const MIDPOINT_MAX_ITERATIONS: usize = 50;

const INTEGRATOR: &str = "implicit-midpoint";

/// One implicit-midpoint step `z1 = z0 + h f((z0 + z1) / 2)`, solved by
/// fixed-point iteration.
fn midpoint_step<F>(field: &F, z0: &[f64], h: f64, step: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = z0.len();
    let mut rate = vec![0.0; n];
    let mut mid = vec![0.0; n];
    field(z0, &mut rate);
    let mut z1: Vec<f64> = z0.iter().zip(&rate).map(|(z, r)| z + h * r).collect();

    for _ in 0..MIDPOINT_MAX_ITERATIONS {
        for i in 0..n {
            mid[i] = 0.5 * (z0[i] + z1[i]);
        }
        field(&mid, &mut rate);
        let mut converged = true;
        for i in 0..n {
            let next = z0[i] + h * rate[i];
            if !next.is_finite() {
                return Err(Error::Divergence { step });
            }
            if (next - z1[i]).abs() > MIDPOINT_TOLERANCE * (1.0 + next.abs()) {
                converged = false;
            }
            z1[i] = next;
        }
        if converged {
            return Ok(z1);
        }
    }
    Err(Error::numerical(format!(
        "implicit midpoint did not converge in {MIDPOINT_MAX_ITERATIONS} iterations at step {step}"
    )))
}

fn grid(end: f64, requested: f64) -> Result<(usize, f64)> {
    if !(end.is_finite() && end > 0.0) {
        return Err(Error::invalid(format!("integration end must be positive, got {end}")));
    }
    if !(requested.is_finite() && requested > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {requested}")));
    }
    let steps = ((end / requested).round() as usize).max(1);
    Ok((steps, end / steps as f64))
}

fn run<S, F>(field: F, start: Vec<f64>, end: f64, requested: f64, decode: impl Fn(&[f64]) -> S) -> Result<Trajectory<S>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let (steps, h) = grid(end, requested)?;
    let mut params = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut z = start;
    params.push(0.0);
    states.push(decode(&z));
    for k in 1..=steps {
        z = midpoint_step(&field, &z, h, k)?;
        params.push(k as f64 * h);
        states.push(decode(&z));
    }
    Ok(Trajectory { params, states, integrator: INTEGRATOR, step: h })
}

/// Integrates Hamilton's equations of the original system over `[0, t_end]`.
///
/// The step actually used is `t_end / round(t_end / dt)` so that the grid is
/// uniform and ends at `t_end`; it is recorded in [`Trajectory::step`].
pub fn integrate_original(
    sys: &dyn Hamiltonian,
    x0: &PhaseState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory<PhaseState>> {
    let n = sys.dim();
    if x0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x0.dim() });
    }
    let field = |z: &[f64], out: &mut [f64]| {
        let (dq, dp) = sys.gradient(&z[..n], &z[n..]);
        out[..n].copy_from_slice(&dp);
        for i in 0..n {
            out[n + i] = -dq[i];
        }
    };
    run(field, x0.to_flat(), t_end, dt, PhaseState::from_flat)
}

/// Integrates the extended canonical equations in `θ` over `[0, theta_end]`:
/// `dq/dθ = ∂H/∂p`, `dp/dθ = -∂H/∂q`, `dT/dθ = 1`, `dS/dθ = 0`.
pub fn integrate_extended(
    ext: &ExtendedSystem<'_>,
    y0: &ExtendedPhaseState,
    theta_end: f64,
    dtheta: f64,
) -> Result<Trajectory<ExtendedPhaseState>> {
    let sys = ext.inner();
    let n = sys.dim();
    if y0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: y0.dim() });
    }
    // Layout [q_1..q_n, T, p_1..p_n, S].
    let field = |z: &[f64], out: &mut [f64]| {
        let (q, p) = (&z[..n], &z[n + 1..2 * n + 1]);
        let (dq, dp) = sys.gradient(q, p);
        out[..n].copy_from_slice(&dp);
        out[n] = 1.0;
        for i in 0..n {
            out[n + 1 + i] = -dq[i];
        }
        out[2 * n + 1] = 0.0;
    };
    run(field, y0.to_flat(), theta_end, dtheta, ExtendedPhaseState::from_flat)
}

/// Comparison of an original trajectory with the `(q, p)` projection of an
/// extended one on the same parameter grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EquivalenceReport {
    /// `max_k ‖(q, p)_orig(t_k) − (q, p)_ext(θ_k)‖₂`.
    pub max_phase_deviation: f64,
    /// `max_k |T(θ_k) − t_k|`.
    pub max_time_deviation: f64,
    /// `max_k |S(θ_k) + H(q, p)(θ_k)|`, i.e. the constraint residual.
    pub max_constraint_residual: f64,
    /// `T(0) − t(0)`.
    pub time_offset: f64,
    pub offset_flagged: bool,
}

pub fn check_equivalence(
    sys: &dyn Hamiltonian,
    orig: &Trajectory<PhaseState>,
    ext: &Trajectory<ExtendedPhaseState>,
) -> Result<EquivalenceReport> {
    orig.validate()?;
    ext.validate()?;
    if orig.len() != ext.len() {
        return Err(Error::invalid(format!("grid mismatch: {} original vs {} extended points", orig.len(), ext.len())));
    }
    for (t, th) in orig.params.iter().zip(&ext.params) {
        if (t - th).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::invalid(format!("grid mismatch at t = {t}, θ = {th}")));
        }
    }

    let mut report = EquivalenceReport {
        max_phase_deviation: 0.0,
        max_time_deviation: 0.0,
        max_constraint_residual: 0.0,
        time_offset: ext.states[0].time - orig.params[0],
        offset_flagged: false,
    };
    report.offset_flagged = report.time_offset.abs() > 1e-12;

    for ((t, x), y) in orig.params.iter().zip(&orig.states).zip(&ext.states) {
        let dev =
            x.q.iter()
                .zip(&y.base.q)
                .chain(x.p.iter().zip(&y.base.p))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
        report.max_phase_deviation = report.max_phase_deviation.max(dev);
        report.max_time_deviation = report.max_time_deviation.max((y.time - t).abs());
        let residual = y.time_conjugate + sys.energy(&y.base.q, &y.base.p);
        report.max_constraint_residual = report.max_constraint_residual.max(residual.abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{extend_state, FreeParticle, HarmonicOscillator, QuarticOscillator};
    use std::f64::consts::PI;

    fn distance(a: &PhaseState, b: &PhaseState) -> f64 {
        ((a.q[0] - b.q[0]).powi(2) + (a.p[0] - b.p[0]).powi(2)).sqrt()
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let ho = HarmonicOscillator::default();
        let x0 = PhaseState::scalar(1.0, 0.0).unwrap();
        let tr = integrate_original(&ho, &x0, 2.0 * PI, 1e-3).unwrap();
        assert!(distance(tr.last().unwrap(), &x0) < 1e-5);
        assert_eq!(tr.len(), 6284);
        tr.validate().unwrap();
    }

    #[test]
    fn free_particle_drift_is_exact() {
        let x0 = PhaseState::scalar(0.0, 1.0).unwrap();
        let tr = integrate_original(&FreeParticle, &x0, 1.0, 1e-3).unwrap();
        assert!((tr.last().unwrap().q[0] - 1.0).abs() < 1e-10);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn halving_the_step_quarters_the_error() {
        let ho = HarmonicOscillator::default();
        let x0 = PhaseState::scalar(1.0, 0.0).unwrap();
        let exact = ho.exact_flow(&x0, 2.0 * PI).unwrap();
        let err = |dt: f64| {
            let tr = integrate_original(&ho, &x0, 2.0 * PI, dt).unwrap();
            distance(tr.last().unwrap(), &exact)
        };
        let ratio = err(2e-2) / err(1e-2);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn extended_time_channel_is_affine_and_conjugate_is_constant() {
        let ho = HarmonicOscillator::default();
        let ext = ExtendedSystem::new(&ho);
        let y0 = extend_state(&ho, &PhaseState::scalar(1.0, 0.0).unwrap(), 0.0).unwrap();
        let tr = integrate_extended(&ext, &y0, 2.0 * PI, 1e-3).unwrap();
        let end = tr.last().unwrap();
        assert!((end.time - y0.time - 2.0 * PI).abs() < 1e-10);
        for (th, y) in tr.params.iter().zip(&tr.states) {
            assert!((y.time - th).abs() < 1e-10);
            assert!((y.time_conjugate + 0.5).abs() < 1e-10);
            assert!(ext.energy(y).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn quartic_constraint_drift_scales_with_step_squared() {
        let ext = ExtendedSystem::new(&QuarticOscillator);
        let y0 = extend_state(&QuarticOscillator, &PhaseState::scalar(1.5, 0.0).unwrap(), 0.0).unwrap();
        let drift = |h: f64| {
            let tr = integrate_extended(&ext, &y0, 10.0, h).unwrap();
            tr.states.iter().map(|y| ext.energy(y).unwrap().abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (drift(2e-2), drift(1e-2));
        assert!(fine < coarse);
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn equivalence_of_the_two_formulations() {
        let ho = HarmonicOscillator::default();
        let x0 = PhaseState::scalar(1.0, 0.0).unwrap();
        let orig = integrate_original(&ho, &x0, 2.0 * PI, 1e-3).unwrap();
        let ext = integrate_extended(&ExtendedSystem::new(&ho), &extend_state(&ho, &x0, 0.0).unwrap(), 2.0 * PI, 1e-3)
            .unwrap();
        let r = check_equivalence(&ho, &orig, &ext).unwrap();
        assert!(r.max_phase_deviation < 1e-9);
        assert!(r.max_time_deviation < 1e-10);
        assert!(r.max_constraint_residual < 1e-10);
        assert!(!r.offset_flagged);
    }

    #[test]
    fn free_particle_equivalence_is_at_machine_precision() {
        let x0 = PhaseState::scalar(0.5, -2.0).unwrap();
        let orig = integrate_original(&FreeParticle, &x0, 3.0, 1e-2).unwrap();
        let y0 = extend_state(&FreeParticle, &x0, 0.0).unwrap();
        let ext = integrate_extended(&ExtendedSystem::new(&FreeParticle), &y0, 3.0, 1e-2).unwrap();
        let r = check_equivalence(&FreeParticle, &orig, &ext).unwrap();
        assert!(r.max_phase_deviation < 1e-14, "{}", r.max_phase_deviation);
    }

    #[test]
    fn mismatched_time_origin_is_flagged() {
        let ho = HarmonicOscillator::default();
        let x0 = PhaseState::scalar(1.0, 0.0).unwrap();
        let orig = integrate_original(&ho, &x0, 1.0, 1e-2).unwrap();
        let y0 = extend_state(&ho, &x0, 0.25).unwrap();
        let ext = integrate_extended(&ExtendedSystem::new(&ho), &y0, 1.0, 1e-2).unwrap();
        let r = check_equivalence(&ho, &orig, &ext).unwrap();
        assert!(r.offset_flagged);
        assert!((r.time_offset - 0.25).abs() < 1e-15);
        assert!((r.max_time_deviation - 0.25).abs() < 1e-12);
        assert!(r.max_phase_deviation < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let ho = HarmonicOscillator::default();
        let x0 = PhaseState::scalar(1.0, 0.0).unwrap();
        let orig = integrate_original(&ho, &x0, 1.0, 1e-2).unwrap();
        let y0 = extend_state(&ho, &x0, 0.0).unwrap();
        let ext = integrate_extended(&ExtendedSystem::new(&ho), &y0, 1.0, 2e-2).unwrap();
        assert!(matches!(check_equivalence(&ho, &orig, &ext), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bad_steps_are_rejected() {
        let ho = HarmonicOscillator::default();
        let x0 = PhaseState::scalar(1.0, 0.0).unwrap();
        assert!(integrate_original(&ho, &x0, 1.0, 0.0).is_err());
        assert!(integrate_original(&ho, &x0, -1.0, 1e-3).is_err());
    }

    #[test]
    fn divergence_reports_the_step() {
        struct Blowup;
        impl Hamiltonian for Blowup {
            fn dim(&self) -> usize {
                1
            }
            fn energy(&self, _q: &[f64], _p: &[f64]) -> f64 {
                0.0
            }
            fn gradient(&self, q: &[f64], _p: &[f64]) -> (Vec<f64>, Vec<f64>) {
                let v = if q[0] > 0.5 { f64::INFINITY } else { 0.0 };
                (vec![0.0], vec![v + 1.0])
            }
            fn label(&self) -> &str {
                "blowup"
            }
        }
        let x0 = PhaseState::scalar(0.0, 0.0).unwrap();
        let err = integrate_original(&Blowup, &x0, 1.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 5 } | Error::Divergence { step: 6 }), "{err}");
    }
}

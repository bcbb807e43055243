use super::state::ExtendedPhaseState;
use crate::{Error, Result};

/// Central-difference settings for bracket evaluation. The step along a
/// coordinate `x` is `relative_step · max(1, |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    pub relative_step: f64,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self { relative_step: 1e-5 }
    }
}

impl FiniteDifference {
    fn step(&self, x: f64) -> f64 {
        self.relative_step * x.abs().max(1.0)
    }
}

/// Partial derivatives of `f` at `y` along all `2(n+1)` extended canonical
/// coordinates, returned as `(∂f/∂q_ext, ∂f/∂p_ext)` with the time pair last.
fn partials<F>(f: &F, y: &ExtendedPhaseState, fd: FiniteDifference) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&ExtendedPhaseState) -> f64 + ?Sized,
{
    let mut coords = y.coordinates();
    let mut momenta = y.momenta();
    let n = coords.len();
    let mut dq = vec![0.0; n];
    let mut dp = vec![0.0; n];

    for i in 0..n {
        let x = coords[i];
        let h = fd.step(x);
        coords[i] = x + h;
        let up = f(&ExtendedPhaseState::from_canonical(&coords, &momenta));
        coords[i] = x - h;
        let down = f(&ExtendedPhaseState::from_canonical(&coords, &momenta));
        coords[i] = x;
        dq[i] = (up - down) / (2.0 * h);

        let x = momenta[i];
        let h = fd.step(x);
        momenta[i] = x + h;
        let up = f(&ExtendedPhaseState::from_canonical(&coords, &momenta));
        momenta[i] = x - h;
        let down = f(&ExtendedPhaseState::from_canonical(&coords, &momenta));
        momenta[i] = x;
        dp[i] = (up - down) / (2.0 * h);
    }

    if dq.iter().chain(&dp).any(|d| !d.is_finite()) {
        return Err(Error::numerical("non-finite derivative in Poisson bracket"));
    }
    Ok((dq, dp))
}

/// `{f, g} = Σ_{i=1}^{n+1} (∂f/∂q_i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q_i)`, with the
/// derivatives taken by central differences and the sum running over the
/// original pairs and the time pair `(T, S)`.
pub fn poisson_bracket<F, G>(f: &F, g: &G, y: &ExtendedPhaseState, fd: FiniteDifference) -> Result<f64>
where
    F: Fn(&ExtendedPhaseState) -> f64 + ?Sized,
    G: Fn(&ExtendedPhaseState) -> f64 + ?Sized,
{
    let (fq, fp) = partials(f, y, fd)?;
    let (gq, gp) = partials(g, y, fd)?;
    Ok(fq.iter().zip(&gp).map(|(a, b)| a * b).sum::<f64>() - fp.iter().zip(&gq).map(|(a, b)| a * b).sum::<f64>())
}

/// Largest deviation from the canonical table of the clock pair:
/// `{T, S} = 1` and `{T, q_1} = {T, p_1} = {S, q_1} = {S, p_1} = 0`.
pub fn clock_bracket_defect(y: &ExtendedPhaseState, fd: FiniteDifference) -> Result<f64> {
    if y.dim() == 0 {
        return Err(Error::invalid("bracket table needs at least one degree of freedom"));
    }
    let t = |z: &ExtendedPhaseState| z.time;
    let s = |z: &ExtendedPhaseState| z.time_conjugate;
    let q = |z: &ExtendedPhaseState| z.base.q[0];
    let p = |z: &ExtendedPhaseState| z.base.p[0];
    let table = [
        (poisson_bracket(&t, &s, y, fd)?, 1.0),
        (poisson_bracket(&t, &q, y, fd)?, 0.0),
        (poisson_bracket(&t, &p, y, fd)?, 0.0),
        (poisson_bracket(&s, &q, y, fd)?, 0.0),
        (poisson_bracket(&s, &p, y, fd)?, 0.0),
    ];
    Ok(table.iter().map(|(got, want)| (got - want).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{Hamiltonian, HarmonicOscillator, PhaseState};

    fn point() -> ExtendedPhaseState {
        ExtendedPhaseState::new(PhaseState::scalar(0.3, -1.2).unwrap(), 4.5, -0.8).unwrap()
    }

    #[test]
    fn canonical_table() {
        let y = point();
        let fd = FiniteDifference::default();
        let t = |y: &ExtendedPhaseState| y.time;
        let s = |y: &ExtendedPhaseState| y.time_conjugate;
        let q = |y: &ExtendedPhaseState| y.base.q[0];
        let p = |y: &ExtendedPhaseState| y.base.p[0];
        assert!((poisson_bracket(&t, &s, &y, fd).unwrap() - 1.0).abs() < 1e-8);
        assert!(poisson_bracket(&t, &q, &y, fd).unwrap().abs() < 1e-8);
        assert!((poisson_bracket(&q, &p, &y, fd).unwrap() - 1.0).abs() < 1e-8);
        assert!((poisson_bracket(&s, &t, &y, fd).unwrap() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn bracket_with_extended_hamiltonian_generates_the_flow() {
        let ho = HarmonicOscillator { omega: 2.0 };
        let y = point();
        let fd = FiniteDifference::default();
        let h_ex = |y: &ExtendedPhaseState| ho.energy(&y.base.q, &y.base.p) + y.time_conjugate;
        let t = |y: &ExtendedPhaseState| y.time;
        let q = |y: &ExtendedPhaseState| y.base.q[0];
        // dT/dθ = {T, H_ex} = 1, dq/dθ = {q, H_ex} = ∂H/∂p.
        assert!((poisson_bracket(&t, &h_ex, &y, fd).unwrap() - 1.0).abs() < 1e-8);
        assert!((poisson_bracket(&q, &h_ex, &y, fd).unwrap() - y.base.p[0]).abs() < 1e-8);
    }

    #[test]
    fn non_finite_derivative_is_reported() {
        let y = point();
        let bad = |y: &ExtendedPhaseState| if y.time > 4.5 { f64::INFINITY } else { 0.0 };
        let t = |y: &ExtendedPhaseState| y.time;
        let err = poisson_bracket(&bad, &t, &y, FiniteDifference::default()).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }
}

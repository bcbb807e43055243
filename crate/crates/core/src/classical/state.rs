use crate::{Error, Result};

/// Canonical coordinates `(q, p)` of the original system.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::invalid("phase state needs at least one degree of freedom"));
        }
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: q.len(), actual: p.len() });
        }
        if q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(Error::invalid("phase state has non-finite entries"));
        }
        Ok(Self { q, p })
    }

    /// One degree of freedom.
    pub fn scalar(q: f64, p: f64) -> Result<Self> {
        Self::new(vec![q], vec![p])
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Flattened `[q..., p...]`.
    pub(crate) fn to_flat(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub(crate) fn from_flat(z: &[f64]) -> Self {
        let n = z.len() / 2;
        Self { q: z[..n].to_vec(), p: z[n..].to_vec() }
    }
}

/// A point of the extended phase space: the original coordinates plus the
/// time coordinate `T = q_{n+1}` and its conjugate momentum `S = p_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPhaseState {
    pub base: PhaseState,
    pub time: f64,
    pub time_conjugate: f64,
}

impl ExtendedPhaseState {
    pub fn new(base: PhaseState, time: f64, time_conjugate: f64) -> Result<Self> {
        if !(time.is_finite() && time_conjugate.is_finite()) {
            return Err(Error::invalid("extended phase state has non-finite time pair"));
        }
        Ok(Self { base, time, time_conjugate })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Extended coordinates `[q_1..q_n, T]`.
    pub fn coordinates(&self) -> Vec<f64> {
        let mut c = self.base.q.clone();
        c.push(self.time);
        c
    }

    /// Extended momenta `[p_1..p_n, S]`.
    pub fn momenta(&self) -> Vec<f64> {
        let mut m = self.base.p.clone();
        m.push(self.time_conjugate);
        m
    }

    /// Inverse of [`coordinates`](Self::coordinates) / [`momenta`](Self::momenta).
    pub fn from_canonical(coords: &[f64], momenta: &[f64]) -> Self {
        let n = coords.len() - 1;
        Self {
            base: PhaseState { q: coords[..n].to_vec(), p: momenta[..n].to_vec() },
            time: coords[n],
            time_conjugate: momenta[n],
        }
    }

    /// Flattened `[q..., T, p..., S]`.
    pub(crate) fn to_flat(&self) -> Vec<f64> {
        let mut z = self.coordinates();
        z.extend(self.momenta());
        z
    }

    pub(crate) fn from_flat(z: &[f64]) -> Self {
        let half = z.len() / 2;
        Self::from_canonical(&z[..half], &z[half..])
    }
}

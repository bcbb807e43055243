use std::io::Write;

use super::state::{ExtendedPhaseState, PhaseState};
use crate::{Error, Result};

/// A state type that can be written as one CSV row.
pub trait CsvRecord {
    fn dim(&self) -> usize;
    fn header(n: usize) -> Vec<String>;
    fn values(&self) -> Vec<f64>;
}

impl CsvRecord for PhaseState {
    fn dim(&self) -> usize {
        self.q.len()
    }

    fn header(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("q{i}")).chain((1..=n).map(|i| format!("p{i}"))).collect()
    }

    fn values(&self) -> Vec<f64> {
        self.to_flat()
    }
}

impl CsvRecord for ExtendedPhaseState {
    fn dim(&self) -> usize {
        self.base.q.len()
    }

    fn header(n: usize) -> Vec<String> {
        let mut h = PhaseState::header(n);
        h.push("T".into());
        h.push("S".into());
        h
    }

    fn values(&self) -> Vec<f64> {
        let mut v = self.base.to_flat();
        v.push(self.time);
        v.push(self.time_conjugate);
        v
    }
}

/// Dense trajectory on a uniform parameter grid; `params[i]` labels `states[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub params: Vec<f64>,
    pub states: Vec<S>,
    pub integrator: &'static str,
    pub step: f64,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    /// Checks the grid invariants: equal lengths, strictly increasing and
    /// uniform to `1e-12` relative.
    pub fn validate(&self) -> Result<()> {
        if self.params.len() != self.states.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), actual: self.states.len() });
        }
        for (i, w) in self.params.windows(2).enumerate() {
            let d = w[1] - w[0];
            if d <= 0.0 || (d - self.step).abs() > 1e-12 * self.step.abs().max(w[1].abs()) {
                return Err(Error::invalid(format!("non-uniform parameter grid at index {i}")));
            }
        }
        Ok(())
    }
}

impl<S: CsvRecord> Trajectory<S> {
    /// Writes `param,q1..qn,p1..pn[,T,S]`, one row per stored state, with 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.states.first().map_or(0, CsvRecord::dim);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["param".to_string()];
        header.extend(S::header(n));
        let wrap = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
        w.write_record(&header).map_err(wrap)?;
        for (t, s) in self.params.iter().zip(&self.states) {
            let row = std::iter::once(*t).chain(s.values()).map(|x| format!("{x:.16e}"));
            w.write_record(row).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

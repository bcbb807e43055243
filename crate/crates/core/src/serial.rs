//! JSON containers for operators, states and physical subspaces.
//!
//! Complex entries are stored row-major as `[re, im]` pairs. Extended-space
//! objects use system-major ordering: index `i·M + m` for system level `i`
//! and clock bin `m`. Values round-trip exactly.

use serde::{Deserialize, Serialize};

use crate::constraint::{PhysicalSubspace, SolveMethod};
use crate::linalg::{CMatrix, Complex64};
use crate::quantum::Sign;
use crate::time_observable::Grid;
use crate::{Error, Result};

pub const BASIS_ORDERING: &str = "system-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRecord {
    pub shape: [usize; 2],
    pub entries: Vec<[f64; 2]>,
    pub basis_ordering: String,
    pub sigma: Sign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

impl OperatorRecord {
    /// Vectors are stored as single-column matrices.
    pub fn from_matrix(m: &CMatrix, sigma: Sign, grid: Option<Grid>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
            .collect();
        OperatorRecord { shape: [m.nrows(), m.ncols()], entries, basis_ordering: BASIS_ORDERING.into(), sigma, grid }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let [rows, cols] = self.shape;
        if self.entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, actual: self.entries.len() });
        }
        if self.basis_ordering != BASIS_ORDERING {
            return Err(Error::invalid(format!("unsupported basis ordering '{}'", self.basis_ordering)));
        }
        Ok(CMatrix::from_row_iterator(rows, cols, self.entries.iter().map(|[re, im]| Complex64::new(*re, *im))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct PairRecord {
    pub i: usize,
    pub k: i64,
    pub E_i: f64,
    pub s_k: f64,
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceRecord {
    pub basis: OperatorRecord,
    pub pairs: Vec<PairRecord>,
    pub tolerance: f64,
    pub method: SolveMethod,
}

impl SubspaceRecord {
    pub fn new(sub: &PhysicalSubspace, grid: Grid) -> Self {
        SubspaceRecord {
            basis: OperatorRecord::from_matrix(sub.basis(), sub.sign(), Some(grid)),
            pairs: sub
                .pairs()
                .iter()
                .map(|p| PairRecord {
                    i: p.system_index,
                    k: p.wavenumber,
                    E_i: p.energy,
                    s_k: p.clock_eigenvalue,
                    mismatch: p.mismatch,
                })
                .collect(),
            tolerance: sub.tolerance(),
            method: sub.method(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::invalid(format!("serialization failed: {e}")))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))
}

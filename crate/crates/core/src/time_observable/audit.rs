use serde::Serialize;

use super::{Grid, TimePOVM};
use crate::linalg::{self, CMatrix, Complex64};

/// How far a POVM is from a projector-valued measure. Both numbers vanish
/// for a PM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmViolationReport {
    /// `max_{m≠m'} ‖E_m E_m'‖₂`.
    pub orthogonality_defect: f64,
    pub worst_pair: (usize, usize),
    /// `max_m ‖E_m² − E_m‖₂`.
    pub idempotency_defect: f64,
    pub worst_bin: usize,
}

/// Uses the factorisation `E_m = F_m F_m†`: with `F_m = Q_m R_m`,
/// `‖E_m E_m'‖ = ‖R_m (F_m† F_m') R_m'†‖` and the eigenvalues of
/// `E_m² − E_m` are `λ(λ − 1)` for the eigenvalues `λ` of `F_m† F_m`.
/// Everything reduces to matrices of the readout rank.
pub fn pm_violation_report(povm: &TimePOVM) -> PmViolationReport {
    let factors = povm.factors();
    let rs: Vec<CMatrix> = factors.iter().map(|f| f.clone().qr().r()).collect();

    let mut report =
        PmViolationReport { orthogonality_defect: 0.0, worst_pair: (0, 0), idempotency_defect: 0.0, worst_bin: 0 };
    for m in 0..factors.len() {
        for n in (m + 1)..factors.len() {
            let core = &rs[m] * (factors[m].adjoint() * &factors[n]) * rs[n].adjoint();
            let norm = linalg::spectral_norm(&core);
            if norm > report.orthogonality_defect {
                report.orthogonality_defect = norm;
                report.worst_pair = (m, n);
            }
        }
        let gram = linalg::hermitize(&(factors[m].adjoint() * &factors[m]));
        let defect = gram.symmetric_eigenvalues().iter().map(|l| (l * (l - 1.0)).abs()).fold(0.0, f64::max);
        if defect > report.idempotency_defect {
            report.idempotency_defect = defect;
            report.worst_bin = m;
        }
    }
    report
}

/// Predicted defects for rank-one effects built from `d` matched clock
/// frequencies `ν_a` on a flat clock, where `‖t_m‖² = d/M` and
/// `⟨t_m|t_m'⟩ = (1/M) Σ_a exp(i ν_a (T_m' − T_m))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankOneForm {
    pub orthogonality_defect: f64,
    pub idempotency_defect: f64,
}

pub fn rank_one_closed_form(frequencies: &[f64], grid: Grid) -> RankOneForm {
    let m = grid.size as f64;
    let weight = frequencies.len() as f64 / m;
    let overlap = (1..grid.size)
        .map(|lag| {
            let tau = lag as f64 * grid.step;
            frequencies.iter().map(|&w| Complex64::from_polar(1.0, w * tau)).sum::<Complex64>().norm() / m
        })
        .fold(0.0, f64::max);
    RankOneForm { orthogonality_defect: overlap * weight, idempotency_defect: (1.0 - weight) * weight }
}

/// Gram matrix of the restricted time states, `G = Σ_r C_r† C_r` where
/// column `m` of `C_r` is `B† (χ_r ⊗ |T_m⟩)`, i.e. column `r` of `F_m`.
/// For rank-one effects `|G_mm'|` is the overlap that enters
/// `‖E_m E_m'‖`; a PM gives `G = I`.
pub fn gram_of_restricted_time_states(povm: &TimePOVM) -> CMatrix {
    let n = povm.len();
    let mut g = CMatrix::zeros(n, n);
    for m in 0..n {
        for k in m..n {
            let v = povm.factors()[m].zip_map(&povm.factors()[k], |a, b| a.conj() * b).sum();
            g[(m, k)] = v;
            g[(k, m)] = v.conj();
        }
    }
    g
}

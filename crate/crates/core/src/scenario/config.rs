//! Scenario files: TOML with dotted sections (`clock.M = 64` or a `[clock]`
//! table), strict about unknown keys.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quantum::Sign;
use crate::{Error, Result};

/// Largest extended dimension `N_s · M` accepted; the kernel route
/// diagonalises a dense matrix of this size.
pub const MAX_EXTENDED_DIM: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ClassicalEquivalence,
    QuantumEquivalence,
    ConstraintSolve,
    PovmAudit,
    TimeDistribution,
    Covariance,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::ClassicalEquivalence,
        Suite::QuantumEquivalence,
        Suite::ConstraintSolve,
        Suite::PovmAudit,
        Suite::TimeDistribution,
        Suite::Covariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClassicalEquivalence => "classical-equivalence",
            Suite::QuantumEquivalence => "quantum-equivalence",
            Suite::ConstraintSolve => "constraint-solve",
            Suite::PovmAudit => "povm-audit",
            Suite::TimeDistribution => "time-distribution",
            Suite::Covariance => "covariance",
        }
    }

    pub fn is_quantum(self) -> bool {
        self != Suite::ClassicalEquivalence
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Oscillator,
    Qubit,
    FreeParticle,
    Quartic,
    RandomHermitian,
    ExplicitMatrix,
}

impl SystemKind {
    fn has_classical_model(self) -> bool {
        matches!(self, SystemKind::Oscillator | SystemKind::FreeParticle | SystemKind::Quartic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub kind: SystemKind,
    /// Truncation `N_s`; defaults to 2 for a qubit, the matrix size for an
    /// explicit matrix and 8 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_re: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<Vec<f64>>>,
    /// Move every energy onto the clock frequency grid before matching.
    #[serde(default)]
    pub snap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockSpec {
    #[serde(rename = "M")]
    pub size: usize,
    #[serde(rename = "deltaT")]
    pub step: f64,
    #[serde(rename = "T0", default)]
    pub origin: f64,
    #[serde(default = "plus")]
    pub sigma: Sign,
}

impl ClockSpec {
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / (self.size as f64 * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Matching tolerance; defaults to half the clock frequency spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_match: Option<f64>,
    /// Classical `(q, p)` agreement between the two formulations.
    #[serde(default = "default_equivalence")]
    pub equivalence: f64,
    /// Classical bound on `|S + H|` along the extended trajectory.
    #[serde(default = "default_drift")]
    pub drift: f64,
    /// Classical bound on `|H_ex|` along the extended trajectory.
    #[serde(default = "default_constraint")]
    pub constraint: f64,
    /// Fidelity defect allowed in stationarity and conditional dynamics.
    #[serde(default = "default_fidelity")]
    pub fidelity: f64,
    /// Largest principal angle between the two constraint routes.
    #[serde(default = "default_angle")]
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_match: None,
            equivalence: default_equivalence(),
            drift: default_drift(),
            constraint: default_constraint(),
            fidelity: default_fidelity(),
            angle: default_angle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    pub dt: f64,
    pub t_end: f64,
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// Number of system levels expected to find no clock partner. A deficit
    /// turns the full-rank check into an expected failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_deficit: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for the JSON report and plot data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Defaults to every suite the other sections support.
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub seed: u64,
    /// Repeat the quantum suites with the opposite sign and compare.
    #[serde(default)]
    pub compare_sign: bool,
    pub system: SystemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock: Option<ClockSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub expect: Expectations,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> f64 {
    1.0
}

fn plus() -> Sign {
    Sign::Plus
}

fn default_equivalence() -> f64 {
    1e-9
}

fn default_drift() -> f64 {
    1e-10
}

fn default_constraint() -> f64 {
    1e-8
}

fn default_fidelity() -> f64 {
    1e-10
}

fn default_angle() -> f64 {
    1e-8
}

/// Parses and validates a scenario, filling documented defaults. Syntax
/// errors carry line and column; semantic violations are all reported
/// together.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string().trim_end().to_string()]))?;
    let violations = validate(&cfg);
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    fill_defaults(&mut cfg);
    Ok(cfg)
}

pub fn to_toml(cfg: &ScenarioConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::invalid(format!("cannot serialise scenario: {e}")))
}

impl ScenarioConfig {
    pub fn levels(&self) -> usize {
        self.system.levels.unwrap_or_else(|| default_levels(&self.system))
    }

    pub fn runs(&self, suite: Suite) -> bool {
        self.suites.contains(&suite)
    }

    /// Whether the sections needed by `suite` are present.
    pub fn supports(&self, suite: Suite) -> bool {
        if suite.is_quantum() {
            self.clock.is_some()
        } else {
            self.classical.is_some()
        }
    }
}

fn default_levels(system: &SystemSpec) -> usize {
    match system.kind {
        SystemKind::Qubit => 2,
        SystemKind::ExplicitMatrix => system.matrix_re.as_ref().map_or(0, Vec::len),
        _ => 8,
    }
}

fn fill_defaults(cfg: &mut ScenarioConfig) {
    cfg.system.levels = Some(cfg.levels());
    if cfg.suites.is_empty() {
        cfg.suites = Suite::ALL
            .into_iter()
            .filter(|s| if s.is_quantum() { cfg.clock.is_some() } else { cfg.classical.is_some() })
            .collect();
    }
    cfg.suites.sort();
    cfg.suites.dedup();
    if let Some(clock) = cfg.clock {
        cfg.tolerances.eps_match.get_or_insert(0.5 * clock.frequency_step());
    }
}

fn positive(out: &mut Vec<String>, field: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        out.push(format!("{field} must be a positive finite number, got {v}"));
    }
}

fn validate(cfg: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.name.trim().is_empty() {
        out.push("name must not be empty".into());
    }
    let sys = &cfg.system;
    positive(&mut out, "system.omega", sys.omega);
    positive(&mut out, "system.scale", sys.scale);
    let levels = cfg.levels();
    if levels == 0 {
        out.push("system.levels must be at least 1".into());
    }
    match sys.kind {
        SystemKind::Qubit => {
            match sys.gap {
                None => out.push("system.gap is required for a qubit".into()),
                Some(g) if !g.is_finite() => out.push(format!("system.gap must be finite, got {g}")),
                _ => {}
            }
            if levels != 2 {
                out.push(format!("system.levels must be 2 for a qubit, got {levels}"));
            }
        }
        SystemKind::ExplicitMatrix => match &sys.matrix_re {
            None => out.push("system.matrix_re is required for an explicit matrix".into()),
            Some(re) => {
                let n = re.len();
                if re.iter().any(|row| row.len() != n) {
                    out.push("system.matrix_re must be square".into());
                }
                if sys.levels.is_some_and(|l| l != n) {
                    out.push(format!("system.levels ({levels}) disagrees with the matrix size {n}"));
                }
                if let Some(im) = &sys.matrix_im {
                    if im.len() != n || im.iter().any(|row| row.len() != n) {
                        out.push("system.matrix_im must have the shape of system.matrix_re".into());
                    }
                }
                if re.iter().chain(sys.matrix_im.iter().flatten()).flatten().any(|x| !x.is_finite()) {
                    out.push("system matrix entries must be finite".into());
                }
            }
        },
        _ => {}
    }
    if sys.kind != SystemKind::ExplicitMatrix && (sys.matrix_re.is_some() || sys.matrix_im.is_some()) {
        out.push("system.matrix_re/matrix_im are only valid for kind = \"explicit-matrix\"".into());
    }
    if sys.kind != SystemKind::Qubit && sys.gap.is_some() {
        out.push("system.gap is only valid for kind = \"qubit\"".into());
    }

    if let Some(clock) = &cfg.clock {
        if clock.size % 2 != 0 || !(8..=1024).contains(&clock.size) {
            out.push(format!("clock.M must be even and within [8, 1024], got {}", clock.size));
        }
        positive(&mut out, "clock.deltaT", clock.step);
        if !clock.origin.is_finite() {
            out.push(format!("clock.T0 must be finite, got {}", clock.origin));
        }
        if levels * clock.size > MAX_EXTENDED_DIM {
            out.push(format!(
                "system.levels × clock.M = {} exceeds the dense limit {MAX_EXTENDED_DIM}",
                levels * clock.size
            ));
        }
    }
    if let Some(eps) = cfg.tolerances.eps_match {
        positive(&mut out, "tolerances.eps_match", eps);
    }
    let t = &cfg.tolerances;
    for (field, v) in [
        ("tolerances.equivalence", t.equivalence),
        ("tolerances.drift", t.drift),
        ("tolerances.constraint", t.constraint),
        ("tolerances.fidelity", t.fidelity),
        ("tolerances.angle", t.angle),
    ] {
        positive(&mut out, field, v);
    }

    if let Some(cl) = &cfg.classical {
        positive(&mut out, "classical.dt", cl.dt);
        positive(&mut out, "classical.t_end", cl.t_end);
        if !cl.t0.is_finite() {
            out.push(format!("classical.t0 must be finite, got {}", cl.t0));
        }
        if cl.q0.len() != 1 || cl.p0.len() != 1 {
            out.push(format!(
                "classical.q0 and classical.p0 must each hold one value, got {} and {}",
                cl.q0.len(),
                cl.p0.len()
            ));
        }
        if cl.q0.iter().chain(&cl.p0).any(|x| !x.is_finite()) {
            out.push("classical initial state must be finite".into());
        }
        if !sys.kind.has_classical_model() {
            out.push(format!("system.kind {:?} has no classical counterpart", sys.kind));
        }
    }
    for suite in cfg.suites.iter().filter(|s| !cfg.supports(**s)) {
        let section = if suite.is_quantum() { "[clock]" } else { "[classical]" };
        out.push(format!("suite {} needs a {section} section", suite.name()));
    }
    if cfg.suites.is_empty() && cfg.clock.is_none() && cfg.classical.is_none() {
        out.push("scenario needs a [clock] or a [classical] section".into());
    }
    if cfg.compare_sign && cfg.clock.is_none() {
        out.push("compare_sign needs a [clock] section".into());
    }
    if let (Some(deficit), Some(_)) = (cfg.expect.kernel_deficit, &cfg.clock) {
        if deficit > levels {
            out.push(format!("expect.kernel_deficit ({deficit}) exceeds system.levels ({levels})"));
        }
    }
    out
}

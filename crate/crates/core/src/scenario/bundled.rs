//! Scenario files shipped with the crate.

use super::config::{parse_config, ScenarioConfig};
use crate::{Error, Result};

pub const BUNDLED: [(&str, &str); 6] = [
    ("classical_harmonic", include_str!("../../scenarios/classical_harmonic.toml")),
    ("classical_quartic", include_str!("../../scenarios/classical_quartic.toml")),
    ("qubit_commensurate", include_str!("../../scenarios/qubit_commensurate.toml")),
    ("oscillator_snapped", include_str!("../../scenarios/oscillator_snapped.toml")),
    ("incommensurate_demo", include_str!("../../scenarios/incommensurate_demo.toml")),
    ("sign_convention", include_str!("../../scenarios/sign_convention.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

pub fn bundled(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::invalid(format!("no bundled scenario '{name}'")))?;
    parse_config(text)
}

pub fn all_bundled() -> Result<Vec<ScenarioConfig>> {
    bundled_names().map(bundled).collect()
}

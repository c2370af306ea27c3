use super::scenario::{parse_scenario, Scenario};
use super::HarnessError;

/// Scenarios shipped with the crate, by name.
pub const BUNDLED: [(&str, &str); 5] = [
    ("paper_derivation13", include_str!("../../scenarios/paper_derivation13.toml")),
    ("paper_printed22", include_str!("../../scenarios/paper_printed22.toml")),
    ("units_c2", include_str!("../../scenarios/units_c2.toml")),
    ("angular_circular", include_str!("../../scenarios/angular_circular.toml")),
    ("oracle_crosscheck", include_str!("../../scenarios/oracle_crosscheck.toml")),
];

pub fn bundled_scenario(name: &str) -> Option<Result<Scenario, HarnessError>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text))
}

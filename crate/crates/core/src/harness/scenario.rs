use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::conservation::{box_center, IdentityKind, Tolerances};
use crate::correlators::ConventionTag;
use crate::mode_basis::{AmplitudeConvention, ModeEntry, ModeSet, ModeSetParams, SpacetimePoint};
use crate::quantum_state::{make_state, FockSpace, StateSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedState {
    pub name: String,
    #[serde(flatten)]
    pub spec: StateSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSampling {
    pub seed: u64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConventionChoice {
    #[serde(rename = "printed_22")]
    Printed22,
    #[serde(rename = "derivation_13")]
    Derivation13,
    #[serde(rename = "both")]
    Both,
}

impl ConventionChoice {
    pub fn tags(self) -> Vec<ConventionTag> {
        match self {
            ConventionChoice::Printed22 => vec![ConventionTag::Printed22],
            ConventionChoice::Derivation13 => vec![ConventionTag::Derivation13],
            ConventionChoice::Both => ConventionTag::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdentitySelection {
    Keyword(String),
    List(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeSetFile {
    box_length: f64,
    c: Option<f64>,
    hbar: Option<f64>,
    convention: Option<AmplitudeConvention>,
    modes: Vec<ModeEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    mode_set: ModeSetFile,
    cutoffs: Vec<usize>,
    states: Vec<NamedState>,
    fixed_points: Vec<SpacetimePoint>,
    sample_points: Option<Vec<SpacetimePoint>>,
    sampling: Option<PointSampling>,
    identities: Option<IdentitySelection>,
    conventions: Option<ConventionChoice>,
    r0: Option<[f64; 3]>,
    tolerances: Option<Tolerances>,
    integral_times: Option<Vec<f64>>,
    fd_step: Option<f64>,
    helicity_pairs: Option<Vec<[String; 2]>>,
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub mode_set: ModeSet,
    pub space: FockSpace,
    pub states: Vec<NamedState>,
    pub fixed_points: Vec<SpacetimePoint>,
    pub sampling: Option<PointSampling>,
    pub sample_points: Vec<SpacetimePoint>,
    pub identities: Vec<IdentityKind>,
    pub conventions: Vec<ConventionTag>,
    pub r0: [f64; 3],
    pub tolerances: Tolerances,
    pub integral_times: Vec<f64>,
    pub fd_step: f64,
    /// Index pairs into `states`.
    pub helicity_pairs: Vec<(usize, usize)>,
    /// `key=value` notes for every field filled from a default.
    pub defaults_applied: Vec<String>,
}

const DEFAULT_SAMPLE_COUNT: usize = 20;
const DEFAULT_SEED: u64 = 20_240_601;

fn sample_points(ms: &ModeSet, sampling: &PointSampling) -> Vec<SpacetimePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let l = ms.box_length();
    let period = l / ms.c();
    (0..sampling.count)
        .map(|_| {
            let r = [rng.gen::<f64>() * l, rng.gen::<f64>() * l, rng.gen::<f64>() * l];
            SpacetimePoint::new(r, rng.gen::<f64>() * period)
        })
        .collect()
}

impl Scenario {
    /// Re-seeds generated sample points; explicit point lists are kept.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let Some(s) = self.sampling.as_mut() {
            s.seed = seed;
            self.sample_points = sample_points(&self.mode_set, s);
        }
        self
    }

    /// Overrides the analytic tolerance.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerances.analytic = tol;
        self
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, HarnessError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    validate(file)
}

fn validate(file: ScenarioFile) -> Result<Scenario, HarnessError> {
    fn v(field: impl Into<String>, message: impl std::fmt::Display) -> HarnessError {
        HarnessError::validation(field, message)
    }
    let mut defaults = Vec::new();
    if file.name.trim().is_empty() {
        return Err(v("name", "must not be empty"));
    }
    let params = ModeSetParams {
        box_length: file.mode_set.box_length,
        c: file.mode_set.c.unwrap_or_else(|| {
            defaults.push("mode_set.c=1".into());
            1.0
        }),
        hbar: file.mode_set.hbar.unwrap_or_else(|| {
            defaults.push("mode_set.hbar=1".into());
            1.0
        }),
        convention: file.mode_set.convention.unwrap_or_else(|| {
            defaults.push("mode_set.convention=physical".into());
            AmplitudeConvention::Physical
        }),
    };
    let mut seen = Vec::new();
    for (i, m) in file.mode_set.modes.iter().enumerate() {
        if seen.contains(&(m.n, m.pol)) {
            return Err(v(format!("mode_set.modes[{i}]"), "duplicate mode entry"));
        }
        seen.push((m.n, m.pol));
    }
    let mode_set =
        ModeSet::new(params, &file.mode_set.modes).map_err(|e| v("mode_set", e))?;
    if mode_set.is_empty() {
        return Err(v("mode_set.modes", "at least one mode is required"));
    }
    if file.cutoffs.len() != mode_set.len() {
        return Err(v(
            "cutoffs",
            format!("{} cutoffs for {} modes", file.cutoffs.len(), mode_set.len()),
        ));
    }
    for (i, &c) in file.cutoffs.iter().enumerate() {
        if c < 1 {
            return Err(v(format!("cutoffs[{i}]"), "cutoff must be at least 1"));
        }
    }
    let space = FockSpace::new(&file.cutoffs).map_err(|e| v("cutoffs", e))?;
    let mut names: Vec<&str> = Vec::new();
    for (i, s) in file.states.iter().enumerate() {
        if names.contains(&s.name.as_str()) {
            return Err(v(format!("states[{i}].name"), "duplicate state name"));
        }
        names.push(&s.name);
        make_state(&space, &s.spec).map_err(|e| v(format!("states[{i}]"), e))?;
    }
    if file.fixed_points.len() != 3 {
        return Err(v("fixed_points", "exactly three points are required"));
    }
    if file.fixed_points.iter().any(|p| !p.is_finite()) {
        return Err(v("fixed_points", "points must be finite"));
    }
    let (sampling, points) = match (file.sample_points, file.sampling) {
        (Some(_), Some(_)) => {
            return Err(v("sampling", "give either sample_points or sampling, not both"))
        }
        (Some(points), None) => {
            if points.iter().any(|p| !p.is_finite()) {
                return Err(v("sample_points", "points must be finite"));
            }
            (None, points)
        }
        (None, sampling) => {
            let s = sampling.unwrap_or_else(|| {
                defaults.push(format!("sampling.seed={DEFAULT_SEED}"));
                defaults.push(format!("sampling.count={DEFAULT_SAMPLE_COUNT}"));
                PointSampling {
                    seed: DEFAULT_SEED,
                    count: DEFAULT_SAMPLE_COUNT,
                }
            });
            if s.count == 0 {
                return Err(v("sampling.count", "must be positive"));
            }
            (Some(s), sample_points(&mode_set, &s))
        }
    };
    let identities = match file.identities {
        None => {
            defaults.push("identities=all".into());
            IdentityKind::ALL.to_vec()
        }
        Some(IdentitySelection::Keyword(k)) if k == "all" => IdentityKind::ALL.to_vec(),
        Some(IdentitySelection::Keyword(k)) => {
            return Err(v("identities", format!("unknown keyword {k:?}")))
        }
        Some(IdentitySelection::List(list)) => list
            .iter()
            .enumerate()
            .map(|(i, s)| {
                IdentityKind::parse(s)
                    .ok_or_else(|| v(format!("identities[{i}]"), format!("unknown identity {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let conventions = file
        .conventions
        .unwrap_or_else(|| {
            defaults.push("conventions=both".into());
            ConventionChoice::Both
        })
        .tags();
    let r0 = file.r0.unwrap_or_else(|| {
        defaults.push("r0=box_center".into());
        box_center(&mode_set)
    });
    let tolerances = file.tolerances.unwrap_or_else(|| {
        defaults.push("tolerances=default".into());
        Tolerances::default()
    });
    for (field, t) in [
        ("tolerances.analytic", tolerances.analytic),
        ("tolerances.identity", tolerances.identity),
        ("tolerances.potential", tolerances.potential),
        ("tolerances.path", tolerances.path),
        ("tolerances.coherent", tolerances.coherent),
        ("tolerances.wick", tolerances.wick),
    ] {
        if !(t > 0.0) {
            return Err(v(field, "tolerance must be positive"));
        }
    }
    let [lo, hi] = tolerances.fd_order_window;
    if !(lo > 0.0 && lo < hi) {
        return Err(v("tolerances.fd_order_window", "need 0 < low < high"));
    }
    let longest_period = mode_set
        .modes()
        .iter()
        .map(|m| 2.0 * std::f64::consts::PI / m.omega)
        .fold(0.0, f64::max);
    let integral_times = file.integral_times.unwrap_or_else(|| {
        defaults.push("integral_times=9 samples over the longest mode period".into());
        (0..9).map(|k| k as f64 * longest_period / 8.0).collect()
    });
    if integral_times.len() < 3 {
        return Err(v("integral_times", "at least three samples are required"));
    }
    let fd_step = file.fd_step.unwrap_or_else(|| {
        defaults.push("fd_step=min_wavelength/(100 c)".into());
        mode_set.min_wavelength() / (100.0 * mode_set.c())
    });
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(v("fd_step", "must be positive"));
    }
    let helicity_pairs = file
        .helicity_pairs
        .unwrap_or_default()
        .iter()
        .enumerate()
        .map(|(i, [a, b])| {
            let find = |name: &String, k: usize| {
                names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| v(format!("helicity_pairs[{i}][{k}]"), format!("unknown state {name:?}")))
            };
            Ok((find(a, 0)?, find(b, 1)?))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(Scenario {
        name: file.name,
        mode_set,
        space,
        states: file.states,
        fixed_points: file.fixed_points,
        sampling,
        sample_points: points,
        identities,
        conventions,
        r0,
        tolerances,
        integral_times,
        fd_step,
        helicity_pairs,
        defaults_applied: defaults,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "minimal"
cutoffs = [2]
fixed_points = [{ r = [0.0, 0.0, 0.0], t = 0.0 }, { r = [1.0, 0.0, 0.0], t = 0.0 }, { r = [0.0, 1.0, 0.0], t = 0.0 }]

[mode_set]
box_length = 6.283185307179586
modes = [{ n = [0, 0, 1], pol = 1 }]

[[states]]
name = "vacuum"
kind = "vacuum"
"#;

    #[test]
    fn minimal_scenario_records_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.identities, IdentityKind::ALL.to_vec());
        assert_eq!(s.conventions, ConventionTag::ALL.to_vec());
        assert_eq!(s.sample_points.len(), DEFAULT_SAMPLE_COUNT);
        assert!(s.defaults_applied.iter().any(|d| d == "identities=all"));
        assert!(s.defaults_applied.iter().any(|d| d == "r0=box_center"));
        assert_eq!(s.integral_times.len(), 9);
    }

    #[test]
    fn cutoff_zero_names_field() {
        let text = MINIMAL.replace("cutoffs = [2]", "cutoffs = [0]");
        match parse_scenario(&text) {
            Err(HarnessError::Validation { field, .. }) => assert_eq!(field, "cutoffs[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_mode_rejected() {
        let text = MINIMAL.replace(
            "modes = [{ n = [0, 0, 1], pol = 1 }]",
            "modes = [{ n = [0, 0, 1], pol = 1 }, { n = [0, 0, 1], pol = 1 }]",
        );
        let text = text.replace("cutoffs = [2]", "cutoffs = [2, 2]");
        match parse_scenario(&text) {
            Err(HarnessError::Validation { field, .. }) => assert_eq!(field, "mode_set.modes[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_and_unknown_identities() {
        assert!(matches!(parse_scenario("name = "), Err(HarnessError::Parse(_))));
        let text = format!("identities = [\"eq99\"]\n{MINIMAL}");
        assert!(matches!(
            parse_scenario(&text),
            Err(HarnessError::Validation { field, .. }) if field == "identities[0]"
        ));
    }

    #[test]
    fn seed_changes_points_deterministically() {
        let a = parse_scenario(MINIMAL).unwrap().with_seed(5);
        let b = parse_scenario(MINIMAL).unwrap().with_seed(5);
        let c = parse_scenario(MINIMAL).unwrap().with_seed(6);
        assert_eq!(a.sample_points, b.sample_points);
        assert_ne!(a.sample_points, c.sample_points);
    }
}

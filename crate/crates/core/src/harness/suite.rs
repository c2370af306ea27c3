use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::HarnessError;
use crate::conservation::{
    entry, helicity_report, relative, Analysis, Family, IdentityId, IdentityKind, ResidualReport,
    Verdict, Volume,
};
use crate::correlators::{coherent_factorized, wick_gaussian, ConventionTag, CorrelatorField};
use crate::mode_basis::{AmplitudeConvention, SpacetimePoint};
use crate::oracle::{convergence_order, dense_correlator, fd_energy_residual, ConvergenceFit, FrozenNamed};
use crate::quantum_state::{make_state, DensityOperator};
use crate::tensor::CTensor;

/// Every identity the suite knows how to run.
pub const RUNNABLE_IDENTITIES: [IdentityKind; 26] = IdentityKind::ALL;

/// Sample points used by the finite-difference energy check.
const FD_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub c: f64,
    pub hbar: f64,
    pub amplitude_convention: AmplitudeConvention,
    pub box_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub state: String,
    pub report: ResidualReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub scenario: String,
    pub environment: Environment,
    pub defaults_applied: Vec<String>,
    pub checks: Vec<SuiteCheck>,
    pub overall: SuiteVerdict,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &SuiteCheck> {
        self.checks.iter().filter(|c| c.report.verdict == Verdict::Fail)
    }

    pub fn find(&self, state: &str, kind: IdentityKind, convention: ConventionTag) -> Vec<&ResidualReport> {
        self.checks
            .iter()
            .filter(|c| {
                c.state == state
                    && c.report.identity.kind == kind
                    && c.report.identity.convention == convention
            })
            .map(|c| &c.report)
            .collect()
    }
}

pub fn run_suite(s: &Scenario) -> Result<SuiteReport, HarnessError> {
    let jobs: Vec<(usize, ConventionTag)> = (0..s.states.len())
        .flat_map(|i| s.conventions.iter().map(move |&c| (i, c)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(i, conv)| state_checks(s, i, conv))
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks: Vec<SuiteCheck> = per_job.into_iter().flatten().collect();
    if s.identities.contains(&IdentityKind::Eq35Helicity) {
        let pairs: Vec<(usize, usize, ConventionTag)> = s
            .helicity_pairs
            .iter()
            .flat_map(|&(a, b)| s.conventions.iter().map(move |&c| (a, b, c)))
            .collect();
        let helicity = pairs
            .par_iter()
            .map(|&(a, b, conv)| helicity_check(s, a, b, conv))
            .collect::<Result<Vec<_>, _>>()?;
        checks.extend(helicity);
    }
    let overall = if checks.iter().any(|c| c.report.verdict == Verdict::Fail) {
        SuiteVerdict::Fail
    } else {
        SuiteVerdict::Pass
    };
    let params = s.mode_set.params();
    Ok(SuiteReport {
        scenario: s.name.clone(),
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            c: params.c,
            hbar: params.hbar,
            amplitude_convention: params.convention,
            box_length: params.box_length,
        },
        defaults_applied: s.defaults_applied.clone(),
        checks,
        overall,
    })
}

fn build_rho(s: &Scenario, index: usize) -> Result<DensityOperator, HarnessError> {
    let st = &s.states[index];
    make_state(&s.space, &st.spec).map_err(|e| HarnessError::module(format!("state {}", st.name), e))
}

fn state_checks(s: &Scenario, index: usize, conv: ConventionTag) -> Result<Vec<SuiteCheck>, HarnessError> {
    let state = &s.states[index];
    let rho = build_rho(s, index)?;
    let ctx = |kind: IdentityKind| format!("state {}, identity {kind}, convention {conv}", state.name);
    let analysis = Analysis::new(conv, &rho, &s.space, &s.mode_set, &s.fixed_points)
        .map_err(|e| HarnessError::module(format!("state {}, convention {conv}", state.name), e))?;
    let tol = &s.tolerances;
    let pts = &s.sample_points;
    let mut out = Vec::new();
    for &kind in &s.identities {
        let t = tol.for_kind(kind);
        let reports: Vec<ResidualReport> = match kind.family() {
            Family::Curl | Family::Slotwise => vec![analysis.curl_residual(kind, pts, t)],
            Family::Divergence => vec![analysis.divergence_residual(kind, pts, t)],
            Family::Continuity => vec![analysis.continuity_residual(kind, pts, s.r0, t)],
            Family::Integral => [Volume::FullBox, Volume::HalfBox]
                .iter()
                .map(|&v| analysis.integral_balance(kind, v, &s.integral_times, s.fd_step, tol))
                .collect(),
            Family::Potential => vec![analysis.potential_residual(t)],
            Family::Angular => vec![analysis.angular_residual(s.r0, s.integral_times[0], t)],
            Family::Helicity => Vec::new(),
            Family::FiniteDifference => vec![fd_energy_report(s, &rho, conv)],
            Family::Crosscheck => crosscheck(s, index, &rho, &analysis, kind).into_iter().collect(),
        }
        .into_iter()
        .collect::<crate::Result<Vec<_>>>()
        .map_err(|e| HarnessError::module(ctx(kind), e))?;
        out.extend(reports.into_iter().map(|report| SuiteCheck {
            state: state.name.clone(),
            report,
        }));
    }
    Ok(out)
}

fn helicity_check(s: &Scenario, a: usize, b: usize, conv: ConventionTag) -> Result<SuiteCheck, HarnessError> {
    let split = |i: usize| -> Result<_, HarnessError> {
        let rho = build_rho(s, i)?;
        Analysis::new(conv, &rho, &s.space, &s.mode_set, &s.fixed_points)
            .and_then(|an| an.angular_split(s.r0, s.integral_times[0]))
            .map_err(|e| {
                HarnessError::module(format!("state {}, identity eq35_helicity", s.states[i].name), e)
            })
    };
    let (sa, sb) = (split(a)?, split(b)?);
    Ok(SuiteCheck {
        state: format!("{}~{}", s.states[a].name, s.states[b].name),
        report: helicity_report(conv, &sa, &sb, s.tolerances.analytic),
    })
}

/// Independent evaluation of named pattern `k` at slot points.
type Reference<'a> = Box<dyn Fn(usize, &[SpacetimePoint]) -> crate::Result<CTensor> + 'a>;

fn with_slot1(p: &SpacetimePoint, fixed: &[SpacetimePoint]) -> Vec<SpacetimePoint> {
    let mut v = vec![*p];
    v.extend_from_slice(fixed);
    v
}

/// Compares the plane-wave correlators against an independent path at every
/// sample point, for the four named patterns of the convention.
fn crosscheck(
    s: &Scenario,
    index: usize,
    rho: &DensityOperator,
    analysis: &Analysis<'_>,
    kind: IdentityKind,
) -> Option<crate::Result<ResidualReport>> {
    let spec = &s.states[index].spec;
    let n = s.mode_set.len();
    let conv = analysis.convention();
    let patterns = conv.patterns();
    let fields: [&CorrelatorField; 4] = analysis.named.all();
    let (tol, other): (f64, Reference<'_>) = match kind {
        IdentityKind::CrosscheckDense => (
            s.tolerances.path,
            Box::new(|k, pts| dense_correlator(rho, &s.space, &s.mode_set, &patterns[k], pts)),
        ),
        IdentityKind::CrosscheckCoherent => {
            let amps = spec.coherent_amplitudes(n)?;
            (
                s.tolerances.coherent,
                Box::new(move |k, pts| coherent_factorized(&amps, &s.mode_set, &patterns[k], pts)),
            )
        }
        IdentityKind::CrosscheckWick => {
            let cov = spec.gaussian_covariance(n)?;
            (
                s.tolerances.wick,
                Box::new(move |k, pts| wick_gaussian(&cov, &s.mode_set, &patterns[k], pts)),
            )
        }
        _ => return None,
    };
    let run = || -> crate::Result<ResidualReport> {
        let mut entries = Vec::with_capacity(s.sample_points.len());
        for (idx, p) in s.sample_points.iter().enumerate() {
            let pts = with_slot1(p, &s.fixed_points);
            let mut residual = 0.0f64;
            let mut scale = 0.0f64;
            for (k, f) in fields.iter().enumerate() {
                let reference = other(k, &pts)?;
                residual = residual.max(f.evaluate(p).sub(&reference).norm());
                scale = scale.max(reference.norm());
            }
            entries.push(entry(idx, residual, scale));
        }
        Ok(ResidualReport::from_entries(
            IdentityId { kind, convention: conv },
            entries,
            tol,
        ))
    };
    Some(run())
}

/// Energy continuity from central differences of dense-trace densities; the
/// verdict rests on the fitted order over `h, h/2, h/4`.
fn fd_energy_report(s: &Scenario, rho: &DensityOperator, conv: ConventionTag) -> crate::Result<ResidualReport> {
    let [lo, hi] = s.tolerances.fd_order_window;
    let nominal = 2.0;
    let steps = [s.fd_step, s.fd_step / 2.0, s.fd_step / 4.0];
    let mut entries = Vec::new();
    let mut worst = 0.0f64;
    let mut in_window = true;
    let mut floors = 0usize;
    let mut orders = Vec::new();
    let frozen = FrozenNamed::new(conv, rho, &s.space, &s.mode_set, &s.fixed_points)?;
    for (idx, p) in s.sample_points.iter().take(FD_POINTS).enumerate() {
        let mut samples = Vec::new();
        let mut last = (0.0, 0.0);
        for &h in &steps {
            let (res, scale) = fd_energy_residual(&frozen, p, h);
            samples.push((h, relative(res, scale)));
            last = (res, scale);
        }
        entries.push(entry(idx, last.0, last.1));
        match convergence_order(&samples)? {
            ConvergenceFit::Order(order) => {
                orders.push(order);
                worst = worst.max((order - nominal).abs());
                in_window &= order >= lo && order <= hi;
            }
            ConvergenceFit::FloorReached => floors += 1,
        }
    }
    let mut report = ResidualReport::from_entries(
        IdentityId {
            kind: IdentityKind::Eq23Fd,
            convention: conv,
        },
        entries,
        (nominal - lo).max(hi - nominal),
    );
    report.detail("fd_step", s.fd_step);
    for (k, o) in orders.iter().enumerate() {
        report.detail(format!("order_{k}"), *o);
    }
    if floors > 0 {
        report.flags.push(format!("floor_reached at {floors} points"));
    }
    report.residual_norm = worst;
    report.scale = nominal;
    report.relative = worst;
    report.judge(in_window);
    Ok(report)
}

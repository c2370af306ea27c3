//! Acceptance criteria, one printed line each. Reports come from the bundled
//! scenarios, run twice so the second run doubles as the determinism check.

use std::collections::BTreeMap;
use std::time::Instant;

use qclab_core::conservation::{Analysis, IdentityKind, ResidualReport, Verdict};
use qclab_core::correlators::ConventionTag;
use qclab_core::field_ops::maxwell_residuals;
use qclab_core::harness::{bundled_scenario, render_report, run_suite, ReportFormat, SuiteReport, BUNDLED};
use qclab_core::mode_basis::{build_mode_set, AmplitudeConvention, ModeEntry, Sign, SpacetimePoint};
use qclab_core::quantum_state::{make_state, FockSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ConventionTag::{Derivation13, Printed22};
use IdentityKind::*;

const OPERATOR_TOL: f64 = 1e-12;
const IDENTITY_TOL: f64 = 1e-12;
const ANALYTIC_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;
const POTENTIAL_TOL: f64 = 1e-13;
const ORDER_WINDOW: [f64; 2] = [1.8, 2.2];
const PATH_TOL: f64 = 1e-12;
const COHERENT_TOL: f64 = 1e-10;
const WICK_TOL: f64 = 1e-6;

/// Criteria recorded in the decisions ledger as blocked; they are printed and
/// checked to still be red rather than asserted green.
const KNOWN_RED: [&str; 1] = ["9a"];

struct Line {
    id: &'static str,
    pass: bool,
    text: String,
}

struct Runs {
    first: BTreeMap<&'static str, SuiteReport>,
    second: BTreeMap<&'static str, SuiteReport>,
    seconds: f64,
}

fn run_bundled() -> Runs {
    let start = Instant::now();
    let run = || {
        BUNDLED
            .iter()
            .map(|(name, _)| {
                let s = bundled_scenario(name).unwrap().unwrap();
                (*name, run_suite(&s).unwrap())
            })
            .collect::<BTreeMap<_, _>>()
    };
    let first = run();
    let seconds = start.elapsed().as_secs_f64();
    let second = run();
    Runs { first, second, seconds }
}

/// Reports matching `kinds` and `conv` across the named scenarios, with the
/// state label attached.
fn select<'a>(
    runs: &'a Runs,
    scenarios: &[&str],
    kinds: &[IdentityKind],
    conv: Option<ConventionTag>,
) -> Vec<(&'a str, &'a ResidualReport)> {
    scenarios
        .iter()
        .flat_map(|s| runs.first[*s].checks.iter())
        .filter(|c| kinds.contains(&c.report.identity.kind))
        .filter(|c| conv.is_none_or(|cv| c.report.identity.convention == cv))
        .map(|c| (c.state.as_str(), &c.report))
        .collect()
}

fn worst(reports: &[(&str, &ResidualReport)]) -> f64 {
    reports.iter().map(|(_, r)| r.relative).fold(0.0, f64::max)
}

fn all_below(reports: &[(&str, &ResidualReport)], tol: f64) -> bool {
    !reports.is_empty() && reports.iter().all(|(_, r)| r.relative < tol && r.verdict == Verdict::Pass)
}

fn criterion_1() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut count = 0;
    for c in [1.0, 2.0] {
        for _ in 0..3 {
            let mut entries: Vec<ModeEntry> = Vec::new();
            while entries.len() < 2 {
                let n = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
                let pol = rng.gen_range(1..=2);
                if n != [0, 0, 0] && !entries.iter().any(|e| e.n == n && e.pol == pol) {
                    entries.push(ModeEntry { n, pol });
                }
            }
            let length = rng.gen_range(1.0..5.0);
            let ms = build_mode_set(length, &entries, c, AmplitudeConvention::Physical).unwrap();
            let space = FockSpace::new(&[3, 3]).unwrap();
            for _ in 0..20 {
                let p = SpacetimePoint::new(
                    [rng.gen::<f64>() * length, rng.gen::<f64>() * length, rng.gen::<f64>() * length],
                    rng.gen::<f64>() * length / c,
                );
                for sign in [Sign::Plus, Sign::Minus] {
                    worst = worst.max(maxwell_residuals(&space, &ms, sign, &p).unwrap().max());
                    count += 1;
                }
            }
        }
    }
    Line {
        id: "1",
        pass: worst < OPERATOR_TOL,
        text: format!("operator Maxwell system, 6 mode sets (c = 1, 2), {count} evaluations: worst relative {worst:.3e} < {OPERATOR_TOL:.0e}"),
    }
}

fn criterion_2(runs: &Runs) -> Line {
    let kinds = [Eq11, Eq12, Eq13, Eq14, Eq17, Eq18];
    let r = select(runs, &["paper_derivation13", "paper_printed22", "units_c2"], &kinds, None);
    let states: std::collections::BTreeSet<_> = r.iter().map(|(s, _)| *s).collect();
    let convs: std::collections::BTreeSet<_> = r.iter().map(|(_, x)| x.identity.convention.name()).collect();
    Line {
        id: "2",
        pass: all_below(&r, IDENTITY_TOL) && states.len() == 7 && convs.len() == 2,
        text: format!(
            "divergence identities, {} states x {} conventions: worst termwise {:.3e} < {IDENTITY_TOL:.0e}",
            states.len(),
            convs.len(),
            worst(&r)
        ),
    }
}

fn criterion_3(runs: &Runs) -> Line {
    let kinds = [Eq7, Eq8, Eq9, Eq10, Eq15, Eq16];
    let r = select(runs, &["paper_derivation13", "units_c2"], &kinds, Some(Derivation13));
    let points = r.iter().map(|(_, x)| x.entries.len()).min().unwrap_or(0);
    Line {
        id: "3",
        pass: all_below(&r, IDENTITY_TOL),
        text: format!(
            "curl and combined systems (derivation_13), {} reports, >= {points} points each: worst {:.3e} < {IDENTITY_TOL:.0e}",
            r.len(),
            worst(&r)
        ),
    }
}

fn criterion_4(runs: &Runs) -> Line {
    let slotwise = select(runs, &["paper_derivation13", "paper_printed22"], &[Eq2Slotwise, Eq3Slotwise], None);
    let printed = select(runs, &["paper_printed22"], &[Eq15, Eq16], Some(Printed22));
    let archived = printed
        .iter()
        .filter(|(s, _)| *s == "coherent_two_mode")
        .all(|(_, r)| r.verdict == Verdict::ReportedOnly && r.residual_norm > 0.0);
    let exact = printed
        .iter()
        .filter(|(s, _)| *s == "vacuum" || *s == "fock1")
        .all(|(_, r)| r.residual_norm == 0.0);
    let archived_value = printed
        .iter()
        .filter(|(s, _)| *s == "coherent_two_mode")
        .map(|(_, r)| r.relative)
        .fold(0.0, f64::max);
    Line {
        id: "4",
        pass: all_below(&slotwise, IDENTITY_TOL) && archived && exact,
        text: format!(
            "slot-wise identities worst {:.3e} < {IDENTITY_TOL:.0e}; printed combined curls archived (two-mode coherent {archived_value:.3e}), exactly 0 for vacuum and fock1: {}",
            worst(&slotwise),
            exact
        ),
    }
}

fn criterion_5(runs: &Runs) -> Line {
    let analytic = select(
        runs,
        &["paper_derivation13", "units_c2", "angular_circular"],
        &[Eq23],
        Some(Derivation13),
    );
    let fd = select(runs, &["oracle_crosscheck"], &[Eq23Fd], Some(Derivation13));
    let orders: Vec<f64> = fd
        .iter()
        .flat_map(|(_, r)| r.details.iter().filter(|d| d.name.starts_with("order_")).map(|d| d.value))
        .collect();
    let in_window = !orders.is_empty() && orders.iter().all(|o| (ORDER_WINDOW[0]..=ORDER_WINDOW[1]).contains(o));
    let (lo, hi) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &o| (a.min(o), b.max(o)));
    Line {
        id: "5",
        pass: all_below(&analytic, ANALYTIC_TOL) && in_window && fd.iter().all(|(_, r)| r.passed()),
        text: format!(
            "energy continuity: analytic worst {:.3e} < {ANALYTIC_TOL:.0e}; fd orders {} fits in [{lo:.4}, {hi:.4}] within [{}, {}]",
            worst(&analytic),
            orders.len(),
            ORDER_WINDOW[0],
            ORDER_WINDOW[1]
        ),
    }
}

fn criterion_6(runs: &Runs) -> Line {
    let r = select(runs, &["paper_derivation13", "units_c2", "angular_circular"], &[Eq27, Eq36], Some(Derivation13));
    let printed_sign = r
        .iter()
        .filter_map(|(_, x)| x.printed_sign_relative)
        .fold(0.0, f64::max);
    let flipped = r.iter().filter(|(_, x)| x.sign_flipped).count();
    let mut asym = 0.0f64;
    let mut min_w = f64::INFINITY;
    for name in ["paper_derivation13", "units_c2"] {
        let s = bundled_scenario(name).unwrap().unwrap();
        for st in &s.states {
            let rho = make_state(&s.space, &st.spec).unwrap();
            let a = Analysis::new(Derivation13, &rho, &s.space, &s.mode_set, &s.fixed_points).unwrap();
            for p in &s.sample_points {
                let b = a.density_bundle(p, s.r0);
                asym = asym.max(b.asymmetry);
                min_w = min_w.min(b.w);
            }
        }
    }
    Line {
        id: "6",
        pass: all_below(&r, ANALYTIC_TOL) && asym < SYMMETRY_TOL && min_w >= 0.0,
        text: format!(
            "momentum and angular continuity worst {:.3e} < {ANALYTIC_TOL:.0e} ({flipped}/{} with flux sign reversed, printed sign worst {printed_sign:.3e}); stress asymmetry {asym:.3e} < {SYMMETRY_TOL:.0e}; min W {min_w:.3e} >= 0",
            worst(&r),
            r.len()
        ),
    }
}

fn criterion_7(runs: &Runs) -> Line {
    let all = select(runs, &["paper_derivation13", "units_c2"], &[Eq24, Eq28], Some(Derivation13));
    let full: Vec<_> = all.iter().filter(|(_, r)| r.identity.kind == Eq24 && r.variant.as_deref() == Some("full_box")).cloned().collect();
    let half: Vec<_> = all.iter().filter(|(_, r)| r.identity.kind == Eq28 && r.variant.as_deref() == Some("half_box")).cloned().collect();
    let orders: Vec<f64> = half.iter().filter_map(|(_, r)| r.detail_value("fd_order")).collect();
    let floors = half.iter().filter(|(_, r)| r.flags.iter().any(|f| f.contains("floor"))).count();
    let (lo, hi) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &o| (a.min(o), b.max(o)));
    let times = bundled_scenario("paper_derivation13").unwrap().unwrap().integral_times.len();
    Line {
        id: "7",
        pass: all_below(&full, ANALYTIC_TOL)
            && all_below(&half, ANALYTIC_TOL)
            && !orders.is_empty()
            && orders.iter().all(|o| (ORDER_WINDOW[0]..=ORDER_WINDOW[1]).contains(o)),
        text: format!(
            "full-box energy constant over {times} times worst {:.3e} < {ANALYTIC_TOL:.0e}; half-box balance worst {:.3e}, dt orders in [{lo:.4}, {hi:.4}] ({} fits, {floors} at floor)",
            worst(&full),
            worst(&half),
            orders.len()
        ),
    }
}

fn criterion_8(runs: &Runs) -> Line {
    let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
    let r = select(runs, &names, &[Eq29], None);
    let curl = r.iter().filter_map(|(_, x)| x.detail_value("curl_relative")).fold(0.0, f64::max);
    let div = r.iter().filter_map(|(_, x)| x.detail_value("divergence_relative")).fold(0.0, f64::max);
    Line {
        id: "8",
        pass: all_below(&r, POTENTIAL_TOL) && curl < POTENTIAL_TOL && div < POTENTIAL_TOL,
        text: format!("tensor potential, {} reports: curl mismatch {curl:.3e}, divergence {div:.3e} < {POTENTIAL_TOL:.0e}", r.len()),
    }
}

fn criterion_9(runs: &Runs) -> [Line; 3] {
    let split = select(runs, &["angular_circular"], &[Eq35], Some(Derivation13));
    let failing: Vec<&str> = split.iter().filter(|(_, r)| !r.passed()).map(|(s, _)| *s).collect();
    let worst_abs = split.iter().map(|(_, r)| r.residual_norm).fold(0.0, f64::max);
    let closure = split
        .iter()
        .filter_map(|(_, r)| r.detail_value("closure_with_boundary"))
        .fold(0.0, f64::max);
    let hel = select(runs, &["angular_circular"], &[Eq35Helicity], Some(Derivation13));
    let hel_worst = worst(&hel);
    [
        Line {
            id: "9a",
            pass: all_below(&split, ANALYTIC_TOL),
            text: format!(
                "|L_total - L_orbital - L_spin| split: {} of {} states above 1e-10 relative {:?}, worst absolute {worst_abs:.3e}",
                failing.len(),
                split.len(),
                failing
            ),
        },
        Line {
            id: "9b",
            pass: all_below(&hel, ANALYTIC_TOL),
            text: format!("helicity flip negates L_spin: {} pairs, worst {hel_worst:.3e} < {ANALYTIC_TOL:.0e}", hel.len()),
        },
        Line {
            id: "9+",
            pass: !split.is_empty() && closure < ANALYTIC_TOL,
            text: format!("supplementary: L_total = L_orbital + L_spin + L_boundary closes to {closure:.3e}"),
        },
    ]
}

fn criterion_10(runs: &Runs) -> Line {
    let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
    let dense = select(runs, &names, &[CrosscheckDense], None);
    let scenarios_with_dense: std::collections::BTreeSet<_> = names
        .iter()
        .filter(|n| runs.first[**n].checks.iter().any(|c| c.report.identity.kind == CrosscheckDense))
        .collect();
    let coherent = select(runs, &["oracle_crosscheck"], &[CrosscheckCoherent], None);
    let wick = select(runs, &["oracle_crosscheck"], &[CrosscheckWick], None);
    Line {
        id: "10",
        pass: scenarios_with_dense.len() == names.len()
            && all_below(&dense, PATH_TOL)
            && all_below(&coherent, COHERENT_TOL)
            && all_below(&wick, WICK_TOL),
        text: format!(
            "dense-trace agreement on {} scenarios worst {:.3e} < {PATH_TOL:.0e}; coherent {:.3e} < {COHERENT_TOL:.0e}; wick {:.3e} < {WICK_TOL:.0e}",
            scenarios_with_dense.len(),
            worst(&dense),
            worst(&coherent),
            worst(&wick)
        ),
    }
}

fn criterion_11(runs: &Runs) -> Line {
    let mut identical = true;
    for (name, a) in &runs.first {
        let b = &runs.second[name];
        for f in [ReportFormat::Json, ReportFormat::Csv] {
            identical &= render_report(a, f).unwrap() == render_report(b, f).unwrap();
        }
    }
    Line {
        id: "11",
        pass: identical,
        text: format!("two runs of every bundled scenario render byte-identical json and csv: {identical}"),
    }
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut lines = vec![criterion_1()];
    let runs = run_bundled();
    lines.extend([
        criterion_2(&runs),
        criterion_3(&runs),
        criterion_4(&runs),
        criterion_5(&runs),
        criterion_6(&runs),
        criterion_7(&runs),
        criterion_8(&runs),
    ]);
    lines.extend(criterion_9(&runs));
    lines.extend([criterion_10(&runs), criterion_11(&runs)]);
    for l in &lines {
        println!("[{}] criterion {:<3} {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.text);
    }
    println!(
        "bundled suites {:.1} s per pass, total {:.1} s",
        runs.seconds,
        start.elapsed().as_secs_f64()
    );
    for l in &lines {
        if KNOWN_RED.contains(&l.id) {
            assert!(!l.pass, "criterion {} now passes; update the ledger", l.id);
        } else {
            assert!(l.pass, "criterion {}: {}", l.id, l.text);
        }
    }
}

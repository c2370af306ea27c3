use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qclab_core::conservation::{IdentityKind, Verdict};
use qclab_core::correlators::ConventionTag;
use qclab_core::harness::{
    bundled_scenario, emit_report, load_scenario, render_report, run_suite, HarnessError,
    ReportFormat, Scenario, SuiteReport, SuiteVerdict, BUNDLED,
};

#[derive(Parser)]
#[command(name = "qclab", version, about = "Residual checks for quantum correlation tensors of the free field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Directory for the report file; the report goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        /// Override the analytic tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Override the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print every identity id with its residual formula.
    ListIdentities,
    /// Run all bundled scenarios.
    Demo {
        #[arg(long, default_value = "qclab-demo")]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            format,
            tol,
            seed,
        } => run(&scenario, out.as_deref(), format, tol, seed),
        Command::ListIdentities => {
            list_identities();
            Ok(true)
        }
        Command::Demo { out, format } => demo(&out, format),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn list_identities() {
    for kind in IdentityKind::ALL {
        let modes: Vec<String> = ConventionTag::ALL
            .iter()
            .map(|&c| format!("{}={:?}", c.name(), kind.verdict_mode(c)))
            .collect();
        println!("{:<20} {:<60} {}", kind.name(), kind.description(), modes.join(" "));
    }
}

fn apply_overrides(mut s: Scenario, tol: Option<f64>, seed: Option<u64>) -> Result<Scenario, HarnessError> {
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(HarnessError::Validation {
                field: "--tol".into(),
                message: "tolerance must be positive".into(),
            });
        }
        s = s.with_tolerance(t);
    }
    if let Some(seed) = seed {
        s = s.with_seed(seed);
    }
    Ok(s)
}

fn run(
    path: &Path,
    out: Option<&Path>,
    format: ReportFormat,
    tol: Option<f64>,
    seed: Option<u64>,
) -> Result<bool, HarnessError> {
    let scenario = apply_overrides(load_scenario(path)?, tol, seed)?;
    let report = run_suite(&scenario)?;
    match out {
        Some(dir) => {
            let written = emit_report(&report, format, dir)?;
            summarize(&report, &mut std::io::stdout());
            println!("report: {}", written.display());
        }
        None => {
            print!("{}", render_report(&report, format)?);
            summarize(&report, &mut std::io::stderr());
        }
    }
    Ok(report.overall == SuiteVerdict::Pass)
}

fn demo(out: &Path, format: ReportFormat) -> Result<bool, HarnessError> {
    let mut all_pass = true;
    for (name, _) in BUNDLED {
        let scenario = bundled_scenario(name).expect("bundled name")?;
        let report = run_suite(&scenario)?;
        let written = emit_report(&report, format, out)?;
        summarize(&report, &mut std::io::stdout());
        println!("report: {}", written.display());
        all_pass &= report.overall == SuiteVerdict::Pass;
    }
    Ok(all_pass)
}

/// One line per failing check, then the scenario verdict.
fn summarize(report: &SuiteReport, w: &mut dyn std::io::Write) {
    let mut failed = 0usize;
    let mut reported = 0usize;
    for check in &report.checks {
        match check.report.verdict {
            Verdict::Fail => {
                failed += 1;
                let _ = writeln!(
                    w,
                    "  FAIL {} [{}] {}: relative {:.3e} > {:.1e}",
                    check.report.label(),
                    check.report.identity.convention.name(),
                    check.state,
                    check.report.relative,
                    check.report.tolerance
                );
            }
            Verdict::ReportedOnly => reported += 1,
            Verdict::Pass => {}
        }
    }
    let verdict = match report.overall {
        SuiteVerdict::Pass => "PASS",
        SuiteVerdict::Fail => "FAIL",
    };
    let _ = writeln!(
        w,
        "{verdict} {}: {} checks, {failed} failed, {reported} reported-only",
        report.scenario,
        report.checks.len()
    );
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plate_lab::config::SolverChoice;
use plate_lab::error::LabError;
use plate_lab::report::{
    emit_report, write_asymptotics, write_convergence, write_functionals, write_inequality, write_json,
    write_sequence, write_spectra, write_trial,
};
use plate_lab::study::{
    convergence_study, oracle_section, run_study, sequence_suite, solve_level, solve_levels, summarize,
    trial_section,
};
use plate_lab::StudyConfig;

/// Clamped plate eigenvalues and universal inequality checks.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Study configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Force the dense solver.
    #[arg(long, global = true, conflicts_with = "shift_invert")]
    dense: bool,
    /// Force the shift-invert solver.
    #[arg(long, global = true)]
    shift_invert: bool,
    /// Eigenpair residual tolerance; overrides `solver.tol`.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues on every configured grid.
    Solve,
    /// First-mode functionals and the constant C per grid.
    Functionals,
    /// Full study: spectra, inequalities, trial functions, convergence.
    Verify,
    /// Trial-function identities and margins on the finest grid.
    Trialfn,
    /// Random and extremal instances of the weighted-mean bound.
    Lemma21 {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
    /// Checks on the analytic reference spectrum (unit interval or unit disk).
    Oracle,
    /// Observed convergence orders across the configured grids.
    Converge,
}

const VIOLATION: u8 = 2;

fn load(common: &Common) -> Result<(StudyConfig, PathBuf), LabError> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| LabError::Config("--config is required for this command".into()))?;
    let mut cfg = StudyConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = common.tol {
        cfg.solver.tol = tol;
    }
    if common.dense {
        cfg.solver.method = SolverChoice::Dense;
    }
    if common.shift_invert {
        cfg.solver.method = SolverChoice::ShiftInvert;
    }
    cfg.validate()?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, out))
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<u8, LabError> {
    let common = &cli.common;
    match cli.command {
        Command::Lemma21 { instances } => {
            let seed = common.seed.unwrap_or(0x5eed);
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let suite = sequence_suite(seed, instances)?;
            announce(&write_sequence(&out, &suite)?);
            println!(
                "{} instances, min slack {:e}, max two-point error {:e}",
                suite.rows.len(),
                suite.min_slack,
                suite.max_two_point_error
            );
            Ok(if suite.min_slack < -1e-12 || suite.max_two_point_error > 1e-12 {
                VIOLATION
            } else {
                0
            })
        }
        Command::Solve => {
            let (cfg, out) = load(common)?;
            let levels = solve_levels(&cfg)?;
            let spectra = levels.iter().map(summarize).collect::<Result<Vec<_>, _>>()?;
            for s in &spectra {
                println!(
                    "{:?}: Γ₁ = {:.10}, method {:?}",
                    s.divisions, s.eigenvalues[0], s.method
                );
            }
            announce(&[
                write_spectra(&out, &spectra)?,
                write_json(&out, "spectra.json", &spectra)?,
            ]);
            Ok(0)
        }
        Command::Functionals => {
            let (cfg, out) = load(common)?;
            let per_level: Vec<_> = solve_levels(&cfg)?
                .iter()
                .map(|l| (l.divisions[0], l.functionals, l.constant_c))
                .collect();
            for (d, f, c) in &per_level {
                println!(
                    "{d}: ‖∇u₁‖² = {:.10}, √Γ₁ = {:.10}, C = {c:.6}",
                    f.grad_norm_sq,
                    f.gamma1.sqrt()
                );
            }
            announce(&[write_functionals(&out, &per_level)?]);
            Ok(0)
        }
        Command::Verify => {
            let (cfg, out) = load(common)?;
            let report = run_study(&cfg)?;
            announce(&emit_report(&report, &out)?);
            let violations = report.violations();
            for v in &violations {
                eprintln!("violation: {v}");
            }
            Ok(if violations.is_empty() { 0 } else { VIOLATION })
        }
        Command::Trialfn => {
            let (cfg, out) = load(common)?;
            let d = *cfg.grid.divisions.last().expect("validated");
            let trial = trial_section(&cfg, &solve_level(&cfg, d)?)?;
            announce(&write_trial(&out, &trial)?);
            Ok(0)
        }
        Command::Oracle => {
            let (cfg, out) = load(common)?;
            let d = *cfg.grid.divisions.last().expect("validated");
            let level = solve_level(&cfg, d)?;
            let Some(section) = oracle_section(&cfg, &level.functionals)? else {
                return Err(LabError::Config(
                    "reference spectra exist only for the unit interval and the unit disk".into(),
                ));
            };
            let mut paths = vec![
                write_json(&out, "oracle.json", &section)?,
                write_asymptotics(&out, &section.asymptotics)?,
            ];
            for r in &section.inequalities {
                paths.push(write_inequality(&out, "oracle", r)?);
            }
            announce(&paths);
            let bad = section
                .inequalities
                .iter()
                .any(|r| r.asserted && r.verdict == plate_core::inequalities::Verdict::Violated);
            Ok(if bad { VIOLATION } else { 0 })
        }
        Command::Converge => {
            let (cfg, out) = load(common)?;
            let table = convergence_study(&cfg)?;
            for r in &table.rows {
                match r.order {
                    Some(p) => println!("{:<40} order {p:.3}", r.quantity),
                    None => println!("{:<40} order undefined", r.quantity),
                }
            }
            announce(&write_convergence(&out, &table)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors share the configuration code so that 2 always means a violation.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

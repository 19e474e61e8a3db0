//! Command-line front door: fidelities, POVM files, invariant verification,
//! direction-set solving, and CSV tables.
//!
//! Exit codes: 0 success, 1 check or convergence failure, 2 usage/config
//! error. `MIXMEAS_QUAD_ORDER` sets the default quadrature order.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use mixmeas::design::{self, DirectionSet};
use mixmeas::error::Error;
use mixmeas::fidelity::{self, format_17};
use mixmeas::povm;
use mixmeas::prior::{parse_prior_spec, RadialPrior};
use mixmeas::quad;
use mixmeas::verify;

#[derive(Parser)]
#[command(
    name = "mixmeas",
    version,
    about = "Optimal minimal measurements of mixed qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Direct,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal mean fidelity for N copies under a prior
    Fidelity {
        /// Number of copies N
        #[arg(long)]
        copies: u32,
        /// Prior: pure | random | uniform-ball | two-point:m1@b1,m2@b2 |
        /// inline JSON | path to a JSON file
        #[arg(long)]
        prior: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Quadrature order (default MIXMEAS_QUAD_ORDER or 64)
        #[arg(long)]
        order: Option<usize>,
        /// Emit a CSV row instead of the human-readable table
        #[arg(long)]
        csv: bool,
    },
    /// Build the minimal POVM and write it as JSON
    Povm {
        #[arg(long)]
        copies: u32,
        #[arg(long)]
        prior: String,
        /// Output path for the POVM document
        #[arg(long)]
        out: PathBuf,
        /// Include the dense operator matrices in the file
        #[arg(long)]
        with_matrices: bool,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Run every invariant suite for one configuration
    Verify {
        #[arg(long)]
        copies: u32,
        #[arg(long)]
        prior: String,
        #[arg(long, default_value_t = 1234)]
        seed: u64,
        #[arg(long)]
        order: Option<usize>,
        /// Additionally verify a direction-set file
        #[arg(long)]
        design_file: Option<PathBuf>,
        /// Print the machine-readable report
        #[arg(long)]
        json: bool,
    },
    /// Solve for a weighted direction set resolving a symmetric subspace
    Design {
        /// Sector label 2s
        #[arg(long)]
        twice_s: u32,
        /// Number of directions
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = design::DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// CSV fidelity table for N = 1..max over one or more priors
    Table {
        #[arg(long)]
        max_copies: u32,
        /// May be given several times
        #[arg(long = "prior", required = true)]
        priors: Vec<String>,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Lib(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Lib(err)
    }
}

/// Usage and configuration problems exit 2; numerical check and convergence
/// failures exit 1.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SolverFailure { .. }
        | Error::IdentityResolution { .. }
        | Error::QuadratureNonConvergence { .. }
        | Error::OptimizerFailure(_)
        | Error::NotPositive { .. }
        | Error::NotDensityMatrix { .. }
        | Error::UnphysicalCloner { .. } => 1,
        _ => 2,
    }
}

fn load_prior(spec: &str) -> Result<RadialPrior, CliError> {
    Ok(parse_prior_spec(spec)?)
}

fn check_copies(copies: u32) -> Result<(), CliError> {
    if copies == 0 {
        return Err(CliError::Usage("--copies must be at least 1".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let env_order = quad::order_from_env();
    match cli.command {
        Command::Fidelity {
            copies,
            prior,
            method,
            order,
            csv,
        } => {
            check_copies(copies)?;
            let prior = load_prior(&prior)?;
            let order = order.unwrap_or(env_order);
            let mut report = fidelity::fbar_max_closed(&prior, copies, order)?;
            if matches!(method, Method::Direct | Method::Both) {
                let povm = povm::build_povm_with_order(copies, &prior, order)?;
                report.value_direct = Some(fidelity::fbar_direct(&povm, &prior, order)?);
            }
            if csv {
                println!("{}", fidelity::csv_header());
                println!("{}", report.csv_row());
            } else {
                let closed = match method {
                    Method::Direct => "-".to_string(),
                    _ => format!("{:.6}", report.value_closed),
                };
                let direct = report
                    .value_direct
                    .map(|v| format!("{v:.6}"))
                    .unwrap_or_else(|| "-".into());
                let diff = report
                    .abs_diff()
                    .map(|v| format!("{v:.3e}"))
                    .unwrap_or_else(|| "-".into());
                println!("N  prior            closed      direct      |diff|");
                println!(
                    "{:<2} {:<16} {:<11} {:<11} {}",
                    report.n_copies, report.prior_id, closed, direct, diff
                );
                for t in &report.per_sector {
                    println!("   sector 2s={:<2} r = {:.6}  term = {:.6}", t.twice_s, t.guess_r, t.term);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Povm {
            copies,
            prior,
            out,
            with_matrices,
            order,
        } => {
            check_copies(copies)?;
            let prior = load_prior(&prior)?;
            let order = order.unwrap_or(env_order);
            let povm = povm::build_povm_with_order(copies, &prior, order)?;
            let doc = povm.to_document(with_matrices);
            let text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
            std::fs::write(&out, text).map_err(Error::from)?;
            println!(
                "wrote {} elements to {} (identity residual {})",
                povm.elements().len(),
                out.display(),
                format_17(povm.identity_residual())
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            copies,
            prior,
            seed,
            order,
            design_file,
            json,
        } => {
            check_copies(copies)?;
            let prior = load_prior(&prior)?;
            let order = order.unwrap_or(env_order);
            let user_set = match design_file {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(Error::from)?;
                    Some(DirectionSet::from_json_str(&text)?)
                }
                None => None,
            };
            let report = verify::run_suites(copies, &prior, seed, order, user_set.as_ref())?;
            if json {
                println!("{}", report.to_json());
            } else {
                for check in &report.checks {
                    println!(
                        "{} {:<42} residual {:<12.3e} tolerance {:.0e}",
                        if check.pass { "PASS" } else { "FAIL" },
                        check.name,
                        check.residual,
                        check.tolerance
                    );
                }
                println!(
                    "{}: {} checks, N={}, prior={}, seed={}",
                    if report.pass { "PASS" } else { "FAIL" },
                    report.checks.len(),
                    report.n_copies,
                    report.prior_id,
                    report.seed
                );
            }
            if report.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                if let Some(first) = report.first_failure() {
                    eprintln!(
                        "first failing invariant: {} (residual {:.3e}, tolerance {:.0e})",
                        first.name, first.residual, first.tolerance
                    );
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Design {
            twice_s,
            count,
            seed,
            out,
            restarts,
        } => {
            let set = design::solve_direction_set_with(twice_s, count, seed, restarts, 300)?;
            let report = design::verify_direction_set(&set);
            let json = set.to_json_string();
            match out {
                Some(path) => {
                    std::fs::write(&path, &json).map_err(Error::from)?;
                    println!(
                        "wrote {} directions for 2s={} to {} (design residual {})",
                        count,
                        twice_s,
                        path.display(),
                        format_17(report.design_residual)
                    );
                }
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Table {
            max_copies,
            priors,
            method,
            out,
            order,
        } => {
            check_copies(max_copies)?;
            let order = order.unwrap_or(env_order);
            let mut lines = vec![fidelity::csv_header().to_string()];
            for spec in &priors {
                let prior = load_prior(spec)?;
                for n in 1..=max_copies {
                    let mut report = fidelity::fbar_max_closed(&prior, n, order)?;
                    if matches!(method, Method::Direct | Method::Both) {
                        let povm = povm::build_povm_with_order(n, &prior, order)?;
                        report.value_direct =
                            Some(fidelity::fbar_direct(&povm, &prior, order)?);
                    }
                    lines.push(report.csv_row());
                }
            }
            let text = lines.join("\n") + "\n";
            match out {
                Some(path) => std::fs::write(&path, text).map_err(Error::from)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

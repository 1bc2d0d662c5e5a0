use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nbpack_core::approx::k_degree_approx;
use nbpack_core::games::{is_equilibrium, proportional_payoffs, shapley_payoffs};
use nbpack_core::io;
use nbpack_core::oracle::oracle_best_partition;
use nbpack_core::solvers::{solve, Algorithm, InitKind, Selection};
use nbpack_core::{Error, MembershipProfile, SetFunction, SolverConfig, DEFAULT_TOLERANCE};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(
    name = "nbpack",
    version,
    about = "Weighted set packing by near-Boolean local search"
)]
struct Cli {
    /// Comparison tolerance (overrides NBP_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a search and print the run manifest.
    Solve(SolveArgs),
    /// Print the Möbius inversion of the weights.
    Mobius {
        #[arg(long)]
        input: PathBuf,
    },
    /// Best degree-k approximation of the induced partition function.
    Approx {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Payoffs and equilibrium check for a vertex profile.
    Game {
        #[arg(long)]
        input: PathBuf,
        /// Profile JSON, or a list of 1-based blocks.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum, default_value = "shapley")]
        payoff: Payoff,
        /// Comma-separated positive weights, one per element (default all 1).
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
    },
    /// Exhaustive enumeration of feasible partitions.
    Oracle {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Parser)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "local")]
    algorithm: AlgorithmArg,
    /// uniform, weight, or file:PATH
    #[arg(long, default_value = "weight")]
    init: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Break ties at random (seeded) instead of by iteration order.
    #[arg(long)]
    randomize_ties: bool,
    #[arg(long, value_enum, default_value = "min")]
    selection: SelectionArg,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Write the step trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also run the oracle and report the gap to its best weight.
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Roundup,
    Local,
    LocalCost,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    Min,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum Payoff {
    Shapley,
    Proportional,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out).expect("json values serialize");
            match writeln!(std::io::stdout(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: writing output: {e}");
                    ExitCode::from(2)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(core) = e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        return match core {
            Error::Unsupported(_) => 3,
            Error::OracleGuard(_) => 4,
            Error::IterationLimit(_) => 1,
            _ => 2,
        };
    }
    if e.chain().any(|c| c.is::<std::io::Error>()) {
        return 2;
    }
    1
}

fn tolerance(flag: Option<f64>) -> Result<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("NBP_TOL") {
            Ok(v) => v
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("NBP_TOL={v:?} is not a number")))?,
            Err(_) => DEFAULT_TOLERANCE,
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(
            Error::InvalidArgument(format!("tolerance must be positive, got {tol}")).into(),
        );
    }
    Ok(tol)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<(SetFunction, String)> {
    let text = read(path)?;
    let w = io::parse_instance(&text).with_context(|| format!("loading {}", path.display()))?;
    Ok((w, text))
}

fn load_profile(w: &SetFunction, path: &Path) -> Result<MembershipProfile> {
    let text = read(path)?;
    let family = Arc::clone(w.family_arc());
    let q = if text.trim_start().starts_with('[') {
        let p = io::parse_partition(w.n(), &text)?;
        MembershipProfile::from_partition(family, &p)?
    } else {
        io::parse_profile(family, &text)?
    };
    Ok(q)
}

fn run(cli: Cli) -> Result<Value> {
    let tol = tolerance(cli.tol)?;
    match cli.command {
        Command::Solve(args) => cmd_solve(args, tol),
        Command::Mobius { input } => {
            let (w, _) = load_instance(&input)?;
            Ok(io::mobius_to_json(&w))
        }
        Command::Approx { input, k } => {
            let (w, _) = load_instance(&input)?;
            Ok(io::approx_to_json(&k_degree_approx(&w, k)?))
        }
        Command::Game {
            input,
            profile,
            payoff,
            omega,
        } => {
            let (w, _) = load_instance(&input)?;
            let q = load_profile(&w, &profile)?;
            let omega = omega.unwrap_or_else(|| vec![1.0; w.n()]);
            let pay = match payoff {
                Payoff::Shapley => shapley_payoffs(&w, &q, tol)?,
                Payoff::Proportional => proportional_payoffs(&w, &q, &omega)?,
            };
            let eq = is_equilibrium(&w, &q, &omega, tol)?;
            Ok(json!({
                "payoffs": pay.as_slice(),
                "total": pay.total(),
                "worth": nbpack_core::cover::worth(&w, &q),
                "equilibrium": eq,
            }))
        }
        Command::Oracle { input } => {
            let (w, _) = load_instance(&input)?;
            Ok(io::oracle_report_to_json(&oracle_best_partition(&w, tol)?))
        }
    }
}

fn cmd_solve(args: SolveArgs, tol: f64) -> Result<Value> {
    let (w, text) = load_instance(&args.input)?;
    let init = match args.init.as_str() {
        "uniform" => InitKind::Uniform,
        "weight" => InitKind::WeightProportional,
        other => match other.strip_prefix("file:") {
            Some(path) => InitKind::Explicit(load_profile(&w, Path::new(path))?),
            None => {
                return Err(Error::InvalidArgument(format!(
                    "--init must be uniform, weight or file:PATH, got {other:?}"
                ))
                .into())
            }
        },
    };
    let algorithm = match args.algorithm {
        AlgorithmArg::Roundup => Algorithm::RoundUp,
        AlgorithmArg::Local => Algorithm::Local,
        AlgorithmArg::LocalCost => Algorithm::LocalCost,
    };
    let selection = match args.selection {
        SelectionArg::Min => Selection::Min,
        SelectionArg::Sum => Selection::Sum,
    };
    let mut config = SolverConfig::new(algorithm).with_init(init);
    config.tolerance = tol;
    config.seed = args.seed;
    config.randomize_ties = args.randomize_ties;
    config.selection = selection;
    if let Some(m) = args.max_iterations {
        config.max_iterations = m;
    }
    let result = solve(&w, &config)?;

    if let Some(path) = &args.trace {
        let mut file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        for event in &result.trace {
            writeln!(file, "{}", serde_json::to_string(event)?)?;
        }
    }

    let mut out = io::solve_result_to_json(&result);
    if args.oracle_check {
        let report = oracle_best_partition(&w, tol)?;
        out["oracle_best_weight"] = json!(report.best_weight);
        out["gap"] = json!(report.best_weight - result.total_weight);
        out["oracle_local_maximizer"] = json!(report.is_local_maximizer(&result.partition));
    }
    Ok(json!({
        "command": "solve",
        "config": {
            "algorithm": format!("{algorithm:?}"),
            "init": args.init,
            "tol": tol,
            "seed": args.seed,
            "randomize_ties": args.randomize_ties,
            "selection": format!("{selection:?}"),
            "max_iterations": config.max_iterations,
        },
        "input_sha256": hex::encode(Sha256::digest(text.as_bytes())),
        "trace_path": args.trace.as_ref().map(|p| p.display().to_string()),
        "result": out,
    }))
}

//! `ks`: generate instances, search for balanced subsets, compute exact
//! discrepancy, and run the NAE-3SAT reduction.
//!
//! Every invocation prints one JSON object on stdout. Diagnostics go to
//! stderr. Exit codes: 0 success or found, 1 verified negative, 2 usage or
//! I/O error, 3 internal failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ks", version, about = "Balanced subsets of isotropic vector sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded isotropic instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Search for a subset whose matrix is close to half the identity.
    Solve(SolveArgs),
    /// Exact minimum discrepancy by subset enumeration.
    Oracle(OracleArgs),
    /// NAE-3SAT reductions.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Check a subset against the discrepancy bands.
    Verify(VerifyArgs),
    /// Diagnostics for instances, formulas and subsets.
    #[command(subcommand)]
    Check(CheckCommand),
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Whitened Gaussian vectors.
    Random {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// `k` whitened vectors, each emitted twice, with a known exact half.
    Planted {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the planted subset here.
        #[arg(long)]
        subset: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct IsoArg {
    /// Isotropy tolerance applied when loading an instance.
    #[arg(long = "iso-tol", default_value_t = ks_core::instance::DEFAULT_ISO_TOL)]
    iso_tol: f64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constant in the sample-count cap.
    #[arg(long = "C", default_value_t = ks_core::solver::DEFAULT_N_CONSTANT)]
    n_constant: f64,
    /// Replace the derived sample-count cap.
    #[arg(long = "n-override")]
    n_override: Option<u64>,
    /// Abort when a level grows beyond this many entries.
    #[arg(long = "max-level-size")]
    max_level_size: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the found subset here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    iso: IsoArg,
}

#[derive(Args, Debug)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long = "m-limit", default_value_t = ks_core::oracle::DEFAULT_M_LIMIT)]
    m_limit: usize,
    /// Branch and bound instead of full enumeration.
    #[arg(long)]
    pruned: bool,
    /// Also decide feasibility at radius c·√α; exit 1 when infeasible.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    iso: IsoArg,
}

#[derive(Subcommand, Debug)]
enum ReduceCommand {
    /// Rewrite a 3-CNF into restricted form.
    Nae2ksform {
        formula: PathBuf,
        /// Restricted-form DIMACS output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the vector instance of a restricted-form formula.
    Ksform2inst {
        formula: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Both stages.
    Sat2ks {
        formula: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        layout: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    #[arg(long)]
    subset: PathBuf,
    #[arg(long)]
    c: f64,
    /// 0 checks the tight band, positive values the relaxed one.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[command(flatten)]
    iso: IsoArg,
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Isotropy of an instance file; exit 1 when outside tolerance.
    Instance {
        instance: PathBuf,
        #[command(flatten)]
        iso: IsoArg,
    },
    /// Restricted-form conditions of a DIMACS formula; exit 1 on violations.
    Ksform { formula: PathBuf },
    /// NAE-satisfiability by brute force; exit 1 when unsatisfiable.
    Nae {
        formula: PathBuf,
        #[arg(long = "var-limit", default_value_t = ks_core::reduction::DEFAULT_VAR_LIMIT)]
        var_limit: usize,
    },
    /// Violation witness for a subset of a reduction instance; exit 1 when
    /// the subset encodes a satisfying assignment.
    Violation {
        instance: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        subset: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.json);
            ExitCode::from(outcome.code)
        }
        Err(err) => {
            eprintln!("ks: {err}");
            println!("{}", serde_json::json!({ "error": err.to_string() }));
            ExitCode::from(err.code())
        }
    }
}

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use ks_core::instance::{check_subset, gen_planted, gen_random, Instance, InstanceError};
use ks_core::io::{instance_from_json, instance_to_json, subset_from_json, subset_to_json, FormatError};
use ks_core::oracle::{self, OracleError, DEFAULT_M_LIMIT};
use ks_core::reduction::{
    emit_dimacs, find_violation, ks_form_to_instance, nae3sat_to_ks_form, nae_brute_solve, parse_dimacs,
    validate_ks_form, CnfFormula, ReductionError, ReductionLayout, VarSplit, Violation,
};
use ks_core::solver::{derive_params, solve_with, SolveOptions, SolverError};

use crate::{CheckCommand, Command, GenCommand, OracleArgs, ReduceCommand, SolveArgs, VerifyArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Instance(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        match e {
            InstanceError::Linalg(_) => CliError::Internal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InfeasibleParameters(_) | SolverError::ResourceExhausted { .. } => {
                CliError::Usage(e.to_string())
            }
            SolverError::Instance(e) => e.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => CliError::Usage(e.to_string()),
            OracleError::Linalg(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Internal(_) => CliError::Internal(e.to_string()),
            ReductionError::Instance(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// What to print and how to exit.
pub struct Outcome {
    pub json: Value,
    pub code: u8,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, code: 0 }
    }

    /// Exit 0 when `positive`, 1 otherwise.
    fn verdict(json: Value, positive: bool) -> Self {
        Self {
            json,
            code: if positive { 0 } else { 1 },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_instance(path: &Path, iso_tol: f64) -> Result<Instance> {
    let (inst, _) = instance_from_json(&read_text(path)?)?;
    Ok(inst.validate(iso_tol)?)
}

fn load_subset(path: &Path) -> Result<Vec<usize>> {
    Ok(subset_from_json(&read_text(path)?)?)
}

fn load_formula(path: &Path) -> Result<CnfFormula> {
    Ok(parse_dimacs(&read_text(path)?)?)
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON value serializes");
    s.push('\n');
    s
}

fn summary(inst: &Instance) -> Value {
    json!({
        "d": inst.dim(),
        "m": inst.len(),
        "alpha": inst.alpha(),
        "isotropy_deviation": inst.isotropy_deviation(),
    })
}

/// Writes the instance to `out`, or returns it as the result object.
fn emit_instance(inst: &Instance, meta: Value, out: Option<&Path>) -> Result<Value> {
    let text = instance_to_json(inst, Some(&meta));
    match out {
        Some(path) => {
            write_text(path, &text)?;
            let mut v = summary(inst);
            v["out"] = json!(path.display().to_string());
            Ok(v)
        }
        None => serde_json::from_str(&text).map_err(|e| CliError::Internal(e.to_string())),
    }
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Gen(g) => gen(g),
        Command::Solve(args) => solve(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Reduce(r) => reduce(r),
        Command::Verify(args) => verify(args),
        Command::Check(c) => check(c),
    }
}

fn gen(cmd: GenCommand) -> Result<Outcome> {
    match cmd {
        GenCommand::Random { d, m, seed, out } => {
            let inst = gen_random(d, m, seed)?;
            let meta = json!({ "generator": "random", "d": d, "m": m, "seed": seed });
            Ok(Outcome::ok(emit_instance(&inst, meta, out.as_deref())?))
        }
        GenCommand::Planted {
            d,
            k,
            seed,
            out,
            subset,
        } => {
            let (inst, planted) = gen_planted(d, k, seed)?;
            if let Some(path) = &subset {
                write_text(path, &subset_to_json(&planted))?;
            }
            let meta = json!({ "generator": "planted", "d": d, "k": k, "seed": seed, "planted": planted });
            let mut v = emit_instance(&inst, meta, out.as_deref())?;
            if out.is_some() {
                v["planted"] = json!(planted);
            }
            Ok(Outcome::ok(v))
        }
    }
}

fn solve(args: SolveArgs) -> Result<Outcome> {
    let inst = load_instance(&args.instance, args.iso.iso_tol)?;
    let mut params = derive_params(&inst, args.c, args.epsilon, args.n_constant)?
        .with_max_level_size(args.max_level_size);
    if let Some(n) = args.n_override {
        params = params.with_n_override(n);
    }
    let opts = SolveOptions {
        threads: args.threads,
        ..SolveOptions::seeded(args.seed)
    };
    let outcome = solve_with(&inst, &params, &opts)?;
    if let (Some(path), Some(subset)) = (&args.out, outcome.subset()) {
        write_text(path, &subset_to_json(subset))?;
    }
    eprintln!(
        "ks: {:?} after {} levels (peak level size {})",
        outcome.status, outcome.stats.levels_processed, outcome.stats.peak_level_size
    );
    let found = outcome.is_found();
    Ok(Outcome::verdict(outcome.to_json(), found))
}

fn run_oracle(args: OracleArgs) -> Result<Outcome> {
    let inst = load_instance(&args.instance, args.iso.iso_tol)?;
    if args.m_limit > DEFAULT_M_LIMIT && !args.pruned {
        eprintln!(
            "ks: warning: enumeration limit raised to {}; up to 2^{} subsets",
            args.m_limit,
            inst.len()
        );
    }
    let result = if args.pruned {
        oracle::branch_and_bound_w(&inst)?
    } else {
        oracle::brute_force_w_threads(&inst, args.m_limit, args.threads)?
    };
    if let Some(path) = &args.out {
        write_text(path, &subset_to_json(&result.argmin_subset))?;
    }
    let mut v = serde_json::to_value(&result).expect("oracle result serializes");
    v["mode"] = json!(if args.pruned { "branch_and_bound" } else { "exhaustive" });
    match args.c {
        Some(c) => {
            let threshold = c * inst.alpha().sqrt();
            let feasible = result.w_value <= threshold;
            v["threshold"] = json!(threshold);
            v["feasible"] = json!(feasible);
            Ok(Outcome::verdict(v, feasible))
        }
        None => Ok(Outcome::ok(v)),
    }
}

/// Variable map keyed and valued by 1-based DIMACS numbers.
fn varmap_json(map: &[Option<VarSplit>]) -> Value {
    let one_based = |xs: &[usize]| xs.iter().map(|x| x + 1).collect::<Vec<_>>();
    let mut out = Map::new();
    for (var, split) in map.iter().enumerate() {
        let entry = match split {
            Some(s) => json!({ "copies": one_based(&s.copies), "chain": one_based(&s.chain) }),
            None => Value::Null,
        };
        out.insert((var + 1).to_string(), entry);
    }
    Value::Object(out)
}

fn build_instance(formula: &CnfFormula, out: &Path, layout_path: Option<&Path>) -> Result<Value> {
    let (inst, layout) = ks_form_to_instance(formula)?;
    let meta = json!({
        "source": "ksform",
        "num_vars": formula.num_vars(),
        "num_clauses": formula.num_clauses(),
    });
    let mut v = emit_instance(&inst, meta, Some(out))?;
    if let Some(path) = layout_path {
        write_text(path, &pretty(&layout.to_json()))?;
        v["layout"] = json!(path.display().to_string());
    }
    Ok(v)
}

fn reduce(cmd: ReduceCommand) -> Result<Outcome> {
    match cmd {
        ReduceCommand::Nae2ksform { formula, out } => {
            let f = load_formula(&formula)?;
            let (g, map) = nae3sat_to_ks_form(&f)?;
            let text = emit_dimacs(&g);
            let mut v = json!({
                "num_vars": g.num_vars(),
                "num_clauses": g.num_clauses(),
                "varmap": varmap_json(&map),
            });
            match &out {
                Some(path) => {
                    write_text(path, &text)?;
                    v["out"] = json!(path.display().to_string());
                }
                None => v["dimacs"] = json!(text),
            }
            Ok(Outcome::ok(v))
        }
        ReduceCommand::Ksform2inst { formula, out, layout } => {
            let f = load_formula(&formula)?;
            Ok(Outcome::ok(build_instance(&f, &out, layout.as_deref())?))
        }
        ReduceCommand::Sat2ks { formula, out, layout } => {
            let f = load_formula(&formula)?;
            let (g, map) = nae3sat_to_ks_form(&f)?;
            if g.num_clauses() == 0 {
                return Err(CliError::Usage(
                    "every clause was removed by the rewriting; the formula is trivially NAE-satisfiable and has no instance"
                        .into(),
                ));
            }
            let mut v = build_instance(&g, &out, layout.as_deref())?;
            v["ksform"] = json!({
                "num_vars": g.num_vars(),
                "num_clauses": g.num_clauses(),
                "varmap": varmap_json(&map),
            });
            Ok(Outcome::ok(v))
        }
    }
}

fn verify(args: VerifyArgs) -> Result<Outcome> {
    let inst = load_instance(&args.instance, args.iso.iso_tol)?;
    let subset = load_subset(&args.subset)?;
    if !(args.epsilon >= 0.0 && args.epsilon < 1.0) {
        return Err(CliError::Usage(format!("epsilon = {} not in [0, 1)", args.epsilon)));
    }
    let report = check_subset(&inst, &subset, args.c, args.epsilon)?;
    let (band, holds) = if args.epsilon == 0.0 {
        ("tight", report.satisfies_eq1)
    } else {
        ("relaxed", report.satisfies_eq2)
    };
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["distance_half"] = json!(report.distance_half());
    v["band"] = json!(band);
    v["holds"] = json!(holds);
    Ok(Outcome::verdict(v, holds))
}

fn check(cmd: CheckCommand) -> Result<Outcome> {
    match cmd {
        CheckCommand::Instance { instance, iso } => {
            let (inst, _) = instance_from_json(&read_text(&instance)?)?;
            let deviation = inst.measure_isotropy()?;
            let ok = deviation <= iso.iso_tol;
            let v = json!({
                "d": inst.dim(),
                "m": inst.len(),
                "alpha": inst.alpha(),
                "isotropy_deviation": deviation,
                "iso_tol": iso.iso_tol,
                "isotropic": ok,
            });
            Ok(Outcome::verdict(v, ok))
        }
        CheckCommand::Ksform { formula } => {
            let f = load_formula(&formula)?;
            let report = validate_ks_form(&f);
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["valid"] = json!(report.is_valid());
            v["reducible"] = json!(report.is_reducible());
            Ok(Outcome::verdict(v, report.is_reducible()))
        }
        CheckCommand::Nae { formula, var_limit } => {
            let f = load_formula(&formula)?;
            let solution = nae_brute_solve(&f, var_limit)?;
            let v = json!({ "satisfiable": solution.is_some(), "assignment": solution });
            Ok(Outcome::verdict(v, solution.is_some()))
        }
        CheckCommand::Violation {
            instance,
            layout,
            subset,
        } => {
            let (inst, _) = instance_from_json(&read_text(&instance)?)?;
            let layout_json: Value = serde_json::from_str(&read_text(&layout)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", layout.display())))?;
            let layout = ReductionLayout::from_json(&layout_json)?;
            let subset = load_subset(&subset)?;
            match find_violation(&layout, &inst, &subset)? {
                Violation::Witness { y, value, case } => {
                    let v = json!({ "result": "witness", "value": value, "y": y, "case": case });
                    Ok(Outcome::ok(v))
                }
                Violation::IsEncodingSatisfying { assignment } => {
                    let v = json!({ "result": "satisfying_encoding", "assignment": assignment });
                    Ok(Outcome::verdict(v, false))
                }
            }
        }
    }
}

//! `ctlab`: evaluate problems, optimize trees, inspect dynamic-type tables,
//! and emit the catalog of built-in structures.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 a consistency
//! check failed.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ctlab_core::measure::Measure;
use ctlab_core::profile::FnProfile;
use ctlab_core::solver::{psi_a_exact, psi_d_exact, AttributePool};
use ctlab_core::structure::{alpha_values, problem_value, Atom, Problem, StructureInstance};
use ctlab_core::tree::render_text;
use ctlab_core::typelab::{
    delta_u_membership, hasse_diagram, observed_consistency, predicted_table, DeltaUVerdict,
    Hints, DELTA_U_SHAPES,
};
use ctlab_core::zoo::{build_pi, build_tau_pair, witness_problem, TauSequence, TruncationParams};
use ctlab_core::zoo::{pool_expressions, prune_expressions, WitnessKind};

#[derive(Parser)]
#[command(name = "ctlab", version, about = "exact analysis of computation trees")]
struct Cli {
    /// Solver thread count (0 = library default). Output never depends on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Det,
    Nondet,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a problem on one input tuple.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        /// Comma-separated atom values, one per input variable (e.g. "3" or "5,1").
        #[arg(long)]
        input: String,
    },
    /// Find an optimal tree for a problem relative to an attribute pool.
    Optimize {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Drop pool attributes weighing more than this.
        #[arg(long)]
        pool_budget: Option<u64>,
        /// Also write the witness tree to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predicted type tables for a block word, with optional observed verdicts.
    Typelab(TypelabArgs),
    /// Built-in structure and problem catalog.
    Zoo {
        #[command(subcommand)]
        cmd: ZooCmd,
    },
}

#[derive(Args)]
struct TypelabArgs {
    /// Block word such as "2:1,3:inf".
    #[arg(long, required_unless_present = "lattice")]
    tau: Option<String>,
    /// Input-count range, "1..3" or a single number.
    #[arg(long, default_value = "1..1")]
    n: Option<String>,
    /// Cap profile windows at this cost before classifying.
    #[arg(long = "M")]
    m_cap: Option<u64>,
    /// Computed profiles with hints, as JSON [{"profile": .., "hints": ..}].
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Print the order diagram and admissible family shapes instead.
    #[arg(long)]
    lattice: bool,
    /// Echoed into the report so reruns are comparable.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum ZooCmd {
    /// Emit a built-in structure and its measure.
    Build {
        /// Catalog index 2..=7.
        #[arg(long, conflicts_with = "tau")]
        pi: Option<u8>,
        /// Block word; emits the combined multi-level structure.
        #[arg(long)]
        tau: Option<String>,
        /// Truncation "max_index:lo..hi", e.g. "3:0..7".
        #[arg(long)]
        trunc: String,
    },
    /// Emit a named witness problem over a structure.
    Problem {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        kind: String,
        /// The kind's index parameter (point index, pair index, or threshold count).
        #[arg(long)]
        index: u32,
        /// Use the lifted copies at this level.
        #[arg(long)]
        level: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints --help/--version through the error path too.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => return fail(&e.to_string()),
    };
    match pool.install(|| run(&cli)) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": msg }));
    ExitCode::from(1)
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    match &cli.cmd {
        Cmd::Eval {
            structure,
            problem,
            input,
        } => cmd_eval(cli, structure, problem, input),
        Cmd::Optimize {
            structure,
            problem,
            measure,
            mode,
            pool_budget,
            out,
        } => cmd_optimize(cli, structure, problem, measure, *mode, *pool_budget, out),
        Cmd::Typelab(args) => cmd_typelab(cli, args),
        Cmd::Zoo { cmd } => cmd_zoo(cli, cmd),
    }
}

fn load<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Canonical JSON: route through `serde_json::Value`, whose maps sort keys.
fn emit<T: Serialize>(value: &T) -> Result<(), String> {
    let v = serde_json::to_value(value).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?);
    Ok(())
}

fn parse_input(u: &StructureInstance, s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|part| {
            let v: i64 = part
                .trim()
                .parse()
                .map_err(|_| format!("bad input component `{part}`"))?;
            u.atom_index(&Atom::base(v))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn cmd_eval(
    cli: &Cli,
    structure: &PathBuf,
    problem: &PathBuf,
    input: &str,
) -> Result<ExitCode, String> {
    let u: StructureInstance = load(structure)?;
    u.validate().map_err(|e| e.to_string())?;
    let z: Problem = load(problem)?;
    z.validate(&u).map_err(|e| e.to_string())?;
    let tuple = parse_input(&u, input)?;
    if tuple.len() != z.n() {
        return Err(format!("input has {} components, problem has {}", tuple.len(), z.n()));
    }
    let alpha = alpha_values(&u, &z, &tuple).map_err(|e| e.to_string())?;
    let answers: Vec<u64> = problem_value(&u, &z, &tuple)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
    let signature: String = alpha.iter().map(|b| b.to_string()).collect();
    match cli.format {
        Format::Text => {
            println!("alpha     {signature}");
            println!(
                "answers   {{{}}}",
                answers
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        _ => emit(&serde_json::json!({
            "config": { "input": input },
            "alpha": alpha,
            "signature": signature,
            "answers": answers,
        }))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(
    cli: &Cli,
    structure: &PathBuf,
    problem: &PathBuf,
    measure: &PathBuf,
    mode: Mode,
    pool_budget: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<ExitCode, String> {
    let u: StructureInstance = load(structure)?;
    u.validate().map_err(|e| e.to_string())?;
    let z: Problem = load(problem)?;
    let psi: Measure = load(measure)?;
    let mut exprs = pool_expressions(&u, &z.input_vars);
    if let Some(budget) = pool_budget {
        exprs = prune_expressions(&exprs, &psi, budget).map_err(|e| e.to_string())?;
    }
    let pool = AttributePool::build(&u, &z.input_vars, &exprs, &psi).map_err(|e| e.to_string())?;
    let (value, tree) = match mode {
        Mode::Det => psi_d_exact(&u, &z, &pool, &psi),
        Mode::Nondet => psi_a_exact(&u, &z, &pool, &psi),
    }
    .map_err(|e| e.to_string())?;
    if let Some(path) = out {
        let v = serde_json::to_value(&tree).map_err(|e| e.to_string())?;
        std::fs::write(path, serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    match cli.format {
        Format::Text => {
            println!("value {value}");
            print!("{}", render_text(&tree));
        }
        _ => emit(&serde_json::json!({
            "config": { "mode": mode, "pool_budget": pool_budget },
            "value": value,
            "tree": tree,
        }))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    if let Some((a, b)) = s.split_once("..") {
        let a = a.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
        let b = b.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
        if a > b || a == 0 {
            return Err(format!("bad range `{s}`"));
        }
        Ok((a, b))
    } else {
        let a: u32 = s.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
        Ok((a, a))
    }
}

fn cmd_typelab(cli: &Cli, args: &TypelabArgs) -> Result<ExitCode, String> {
    if args.lattice {
        let edges = hasse_diagram();
        let shapes: Vec<Vec<u8>> = DELTA_U_SHAPES.iter().map(|s| s.to_vec()).collect();
        match cli.format {
            Format::Text => {
                println!(
                    "order   {}",
                    edges
                        .iter()
                        .map(|(a, b)| format!("{a}<{b}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                );
                for s in &shapes {
                    println!(
                        "family  {}",
                        s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
                    );
                }
            }
            _ => emit(&serde_json::json!({ "hasse": edges, "families": shapes }))?,
        }
        return Ok(ExitCode::SUCCESS);
    }
    let tau = TauSequence::parse(args.tau.as_deref().expect("required by clap"))
        .map_err(|e| e.to_string())?;
    if let DeltaUVerdict::Rejected { reason } =
        delta_u_membership(&tau.blocks.iter().map(|&(v, _)| v).collect::<Vec<_>>())
    {
        return Err(reason);
    }
    let (lo, hi) = parse_range(args.n.as_deref().unwrap_or("1..1"))?;
    let profiles: Vec<(FnProfile, Hints)> = match &args.profiles {
        Some(path) => {
            #[derive(serde::Deserialize)]
            struct Entry {
                profile: FnProfile,
                hints: Hints,
            }
            let entries: Vec<Entry> = load(path)?;
            entries
                .into_iter()
                .map(|mut e| {
                    if let Some(m) = args.m_cap {
                        e.profile.values.truncate(m as usize + 1);
                    }
                    (e.profile, e.hints)
                })
                .collect()
        }
        None => Vec::new(),
    };
    let mut reports = Vec::new();
    let mut all_ok = true;
    for n in lo..=hi {
        let (k, upper, lower, paired) = predicted_table(&tau, n);
        let consistency = if profiles.is_empty() {
            None
        } else {
            let rep = observed_consistency(&tau, n, &profiles).map_err(|e| e.to_string())?;
            all_ok &= rep.all_consistent && rep.duality_ok;
            Some(rep)
        };
        match cli.format {
            Format::Text => {
                println!("n={n}  family {k}");
                println!("upper:\n{}", upper.render());
                println!("lower:\n{}", lower.render());
                if let Some(rep) = &consistency {
                    for c in &rep.cells {
                        println!(
                            "cell {}{}{}  predicted {}  {}",
                            if c.upper { 'U' } else { 'L' },
                            c.b.letter(),
                            c.c.letter(),
                            c.predicted,
                            if c.consistent { "ok" } else { "INCONSISTENT" }
                        );
                    }
                }
            }
            Format::Csv => {
                for (p, _) in &profiles {
                    print!("{}", p.to_csv());
                }
            }
            Format::Json => reports.push(serde_json::json!({
                "n": n,
                "family": k,
                "upper": upper,
                "lower": lower,
                "paired": paired,
                "consistency": consistency,
            })),
        }
    }
    if cli.format == Format::Json {
        emit(&serde_json::json!({
            "config": { "tau": args.tau, "n": args.n, "M": args.m_cap, "seed": args.seed },
            "reports": reports,
        }))?;
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn parse_trunc(s: &str) -> Result<TruncationParams, String> {
    let bad = || format!("bad truncation `{s}`, expected max_index:lo..hi");
    let (idx, span) = s.split_once(':').ok_or_else(bad)?;
    let idx: u32 = idx.trim().parse().map_err(|_| bad())?;
    let (lo, hi) = span.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    TruncationParams::new(idx, lo, hi).map_err(|e| e.to_string())
}

fn cmd_zoo(cli: &Cli, cmd: &ZooCmd) -> Result<ExitCode, String> {
    match cmd {
        ZooCmd::Build { pi, tau, trunc } => {
            let trunc = parse_trunc(trunc)?;
            let (u, psi, blocks) = match (pi, tau) {
                (Some(r), None) => {
                    let (u, psi) = build_pi(*r, &trunc).map_err(|e| e.to_string())?;
                    (u, psi, Vec::new())
                }
                (None, Some(tau)) => {
                    let tau = TauSequence::parse(tau).map_err(|e| e.to_string())?;
                    build_tau_pair(&tau, &trunc).map_err(|e| e.to_string())?
                }
                _ => return Err("give exactly one of --pi and --tau".into()),
            };
            match cli.format {
                Format::Text => {
                    println!("carrier   {}", u.card());
                    for q in &u.predicates {
                        println!("predicate {} /{}", q.name, q.arity);
                    }
                    for (level, family) in &blocks {
                        println!("block     level {level} family {family}");
                    }
                }
                _ => emit(&serde_json::json!({
                    "structure": u,
                    "measure": psi,
                    "blocks": blocks,
                }))?,
            }
        }
        ZooCmd::Problem {
            structure,
            kind,
            index,
            level,
        } => {
            let u: StructureInstance = load(structure)?;
            u.validate().map_err(|e| e.to_string())?;
            let kind = match kind.as_str() {
                "z5" => WitnessKind::Z5 { i: *index },
                "z6" => WitnessKind::Z6 { m: *index },
                "eta7" => WitnessKind::Eta7 { i: *index },
                "zt7" => WitnessKind::Zt7 { t: *index },
                "zbin3" => WitnessKind::Zbin3 { q: *index },
                other => return Err(format!("unknown kind `{other}`")),
            };
            let z = witness_problem(&u, kind, *level).map_err(|e| e.to_string())?;
            match cli.format {
                Format::Text => {
                    let vars: BTreeSet<usize> = z.input_vars.clone();
                    println!(
                        "vars {:?}  r {}  seq {}",
                        vars,
                        z.r(),
                        z.seq
                            .iter()
                            .map(|e| e.to_string())
                            .collect::<Vec<_>>()
                            .join("; ")
                    );
                }
                _ => emit(&z)?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

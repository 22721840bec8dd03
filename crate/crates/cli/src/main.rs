use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use sscflp_core::amount::Decimal;
use sscflp_core::io::{
    compute_sdr_ccr, default_mloops, generate_geographic, load_benchmark, load_canonical,
    read_solution_file, save_canonical, sweep, write_solution_file, Family, GeneratorParams,
};
use sscflp_core::report::{read_bounds, BoundRecord, RunReport, REPORT_HEADER};
use sscflp_core::subsolver::emit_mps;
use sscflp_core::{
    check_feasibility, run_repeats, AdjacencyGraph, Cardinality, Instance, ProblemSpec, RunConfig,
    SolverChoice, Variant,
};

#[derive(Parser)]
#[command(name = "sscflp", version, about = "Single-source capacitated facility location solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the matheuristic and write a report, the best solution and logs.
    Solve(SolveArgs),
    /// Derive geographic instances from a base instance with coordinates.
    Generate(GenerateArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Write the full model in MPS format.
    EmitMps(EmitArgs),
    /// Merge run reports and recompute gaps against a bounds sidecar.
    Report(ReportArgs),
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "canonical")]
    format: String,
    #[arg(long, default_value = "sscflp")]
    problem: String,
    /// Exact number of open facilities.
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "Kmin")]
    kmin: Option<usize>,
    #[arg(long = "Kmax")]
    kmax: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Non-improving iterations before stopping; defaults by dataset group.
    #[arg(long)]
    mloops: Option<usize>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds per subproblem. Switches the built-in solver from its node
    /// budget to wall-clock limits, so runs are no longer reproducible.
    #[arg(long)]
    sub_time_limit: Option<f64>,
    #[arg(long)]
    sub_node_limit: Option<u64>,
    #[arg(long, default_value = "builtin")]
    solver: String,
    #[arg(long)]
    bounds: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Write the MPS model to this path and skip solving.
    #[arg(long)]
    emit_mps: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Canonical base instance with coordinates.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    capacity_factor: f64,
    #[arg(long, default_value_t = 1.0)]
    uplift: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit all 15 capacity x uplift combinations.
    #[arg(long)]
    sweep: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args)]
struct EmitArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    bounds: Option<PathBuf>,
    /// Report files written by `solve`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
}

struct Loaded {
    name: String,
    instance: Instance,
    graph: Option<AdjacencyGraph>,
    spec: ProblemSpec,
    default_mloops: usize,
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, message).exit()
}

fn build_spec(args: &ProblemArgs) -> ProblemSpec {
    let variant: Variant = match args.problem.parse() {
        Ok(v) => v,
        Err(e) => usage_error(ErrorKind::InvalidValue, e),
    };
    let range = args.kmin.is_some() || args.kmax.is_some();
    if args.k.is_some() && range {
        usage_error(ErrorKind::ArgumentConflict, "--K cannot be combined with --Kmin/--Kmax");
    }
    let cardinality = match (args.k, args.kmin, args.kmax) {
        (Some(k), _, _) => Some(Cardinality::Exact(k)),
        (None, Some(lo), Some(hi)) => Some(Cardinality::Range { min: lo, max: hi }),
        (None, None, None) => None,
        _ => usage_error(ErrorKind::MissingRequiredArgument, "--Kmin and --Kmax must be given together"),
    };
    if variant.requires_cardinality() && cardinality.is_none() {
        usage_error(
            ErrorKind::MissingRequiredArgument,
            format!("--problem {} requires --K or --Kmin/--Kmax", variant.name()),
        );
    }
    if !variant.requires_cardinality() && cardinality.is_some() {
        usage_error(
            ErrorKind::ArgumentConflict,
            format!("--problem {} takes no facility count", variant.name()),
        );
    }
    ProblemSpec::new(variant, cardinality)
}

fn load(args: &ProblemArgs) -> anyhow::Result<Loaded> {
    let spec = build_spec(args);
    let path = &args.instance;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string();
    let (instance, graph, default) = if args.format.eq_ignore_ascii_case("canonical") {
        let (inst, graph) = load_canonical(path)?;
        (inst, graph, RunConfig::default().mloops)
    } else {
        let family: Family = match args.format.parse() {
            Ok(f) => f,
            Err(e) => usage_error(ErrorKind::InvalidValue, e),
        };
        (load_benchmark(path, family)?, None, default_mloops(family, &name))
    };
    spec.validate(&instance, graph.as_ref())?;
    Ok(Loaded { name, instance, graph, spec, default_mloops: default })
}

fn bound_for(path: Option<&Path>, name: &str) -> anyhow::Result<Option<BoundRecord>> {
    let Some(path) = path else { return Ok(None) };
    let records = read_bounds(path)?;
    Ok(records.into_iter().find(|r| r.instance == name))
}

fn solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let solver: SolverChoice = match args.solver.parse() {
        Ok(s) => s,
        Err(e) => usage_error(ErrorKind::InvalidValue, e),
    };
    if args.repeats == 0 {
        usage_error(ErrorKind::InvalidValue, "--repeats must be at least 1");
    }
    let job = load(&args.problem)?;
    if let Some(mps) = &args.emit_mps {
        emit_mps(&job.instance, &job.spec, job.graph.as_ref(), mps)?;
        println!("wrote {}", mps.display());
        return Ok(ExitCode::SUCCESS);
    }
    let mut config = RunConfig {
        mloops: args.mloops.unwrap_or(job.default_mloops),
        seed: args.seed,
        solver: solver.clone(),
        ..RunConfig::default()
    };
    if let Some(secs) = args.sub_time_limit {
        if !(secs > 0.0 && secs.is_finite()) {
            usage_error(ErrorKind::InvalidValue, "--sub-time-limit must be positive");
        }
        config.sub_time_limit = Duration::from_secs_f64(secs);
        config.sub_node_limit = None;
    }
    if args.sub_node_limit.is_some() {
        config.sub_node_limit = args.sub_node_limit;
    }

    let outcomes = run_repeats(&job.instance, &job.spec, job.graph.as_ref(), &config, args.repeats)?;
    let scale = job.instance.scale();
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let stem = format!("{}.{}", job.name, job.spec.variant.name().to_ascii_lowercase());

    let mut best = None;
    for (r, out) in outcomes.iter().enumerate() {
        let log = args.out.join(format!("{stem}.seed{}.log", out.stats.seed));
        fs::write(&log, out.stats.log_text(scale))?;
        println!("run {r}: {}", out.stats);
        let key = (!out.stats.feasible, out.best.penalized(out.stats.penalty));
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, r));
        }
    }
    let (_, b) = best.expect("at least one repeat");
    let winner = &outcomes[b];
    write_solution_file(&args.out.join(format!("{stem}.sol")), &job.instance, &winner.best)?;

    let report = RunReport {
        instance: job.name.clone(),
        problem: job.spec.variant.name().to_string(),
        solver: solver.describe(),
        seeds: outcomes.iter().map(|o| o.stats.seed).collect(),
        objectives: outcomes
            .iter()
            .map(|o| Decimal { mantissa: o.best.objective(), decimals: scale })
            .collect(),
        times: outcomes.iter().map(|o| o.stats.wall_time.as_secs_f64()).collect(),
        feasible: outcomes.iter().map(|o| o.stats.feasible).collect(),
        bound: bound_for(args.bounds.as_deref(), &job.name)?,
    };
    let tsv = report.to_tsv()?;
    fs::write(args.out.join(format!("{stem}.report.tsv")), &tsv)?;
    print!("{tsv}");

    let check = check_feasibility(&job.instance, &job.spec, &winner.best, job.graph.as_ref())?;
    Ok(if winner.stats.feasible && check.is_feasible() {
        ExitCode::SUCCESS
    } else {
        eprintln!("best solution is infeasible");
        ExitCode::FAILURE
    })
}

fn generate(args: GenerateArgs) -> anyhow::Result<ExitCode> {
    let (base, graph) = load_canonical(&args.instance)?;
    let params = GeneratorParams {
        mu: args.mu,
        epsilon: args.epsilon,
        capacity_factor: args.capacity_factor,
        uplift: args.uplift,
        seed: args.seed,
        ..GeneratorParams::default()
    };
    let stem = args
        .instance
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance");
    let members = if args.sweep {
        sweep(&base, &params)?
            .into_iter()
            .map(|m| (m.label, m.instance))
            .collect()
    } else {
        vec![("gen".to_string(), generate_geographic(&base, &params)?)]
    };
    fs::create_dir_all(&args.out)?;
    println!("Name\tSDR\tCCR");
    for (label, inst) in members {
        let path = args.out.join(format!("{stem}_{label}.txt"));
        save_canonical(&inst, graph.as_ref(), &path)?;
        let (sdr, ccr) = compute_sdr_ccr(&inst)?;
        println!("{}\t{}\t{}", path.display(), sdr.truncated(2), ccr.truncated(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> anyhow::Result<ExitCode> {
    let job = load(&args.problem)?;
    let file = read_solution_file(&args.solution, &job.instance)?;
    let report = check_feasibility(&job.instance, &job.spec, &file.solution, job.graph.as_ref())?;
    let objective = job.instance.format_amount(file.solution.objective());
    println!("open facilities: {}", report.open_count);
    println!("objective: {objective}");
    if file.objective_matches(&job.instance) == Some(false) {
        let stated = file.stated_objective.expect("mismatch implies a stated objective");
        eprintln!(
            "warning: stated objective {} differs from recomputed {objective}",
            sscflp_core::amount::format_scaled(stated.mantissa, stated.decimals)
        );
    }
    let violations = report.violations();
    if violations.is_empty() {
        println!("feasible");
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        println!("infeasible");
        Ok(ExitCode::FAILURE)
    }
}

fn emit(args: EmitArgs) -> anyhow::Result<ExitCode> {
    let job = load(&args.problem)?;
    emit_mps(&job.instance, &job.spec, job.graph.as_ref(), &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

/// Rebuilds a `RunReport` from a file written by `solve`.
fn parse_report(path: &Path) -> anyhow::Result<RunReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut seeds = Vec::new();
    let mut objectives = Vec::new();
    let mut row = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# seeds:") {
            seeds = rest
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .with_context(|| format!("{}: bad seed list", path.display()))?;
        } else if let Some(rest) = line.strip_prefix("# objectives:") {
            objectives = rest
                .split_whitespace()
                .map(|t| Decimal::parse(t).with_context(|| format!("{}: bad objective `{t}`", path.display())))
                .collect::<anyhow::Result<_>>()?;
        } else if !line.starts_with('#') && line != REPORT_HEADER && !line.trim().is_empty() {
            row = Some(line.to_string());
        }
    }
    let Some(row) = row else { bail!("{}: no report row", path.display()) };
    let cols: Vec<&str> = row.split('\t').collect();
    if cols.len() != REPORT_HEADER.split('\t').count() {
        bail!("{}: report row has {} columns", path.display(), cols.len());
    }
    if objectives.is_empty() || objectives.len() != seeds.len() {
        bail!("{}: seeds and objectives disagree", path.display());
    }
    let n = objectives.len();
    let time: f64 = cols[10].parse().with_context(|| format!("{}: bad time", path.display()))?;
    let (ok, total) = cols[11]
        .split_once('/')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .filter(|&(a, b)| b == n && a <= b)
        .with_context(|| format!("{}: bad feasible column", path.display()))?;
    Ok(RunReport {
        instance: cols[0].to_string(),
        problem: cols[1].to_string(),
        solver: cols[2].to_string(),
        seeds,
        objectives,
        times: vec![time; n],
        feasible: (0..total).map(|r| r < ok).collect(),
        bound: None,
    })
}

fn report(args: ReportArgs) -> anyhow::Result<ExitCode> {
    let bounds = match &args.bounds {
        Some(p) => read_bounds(p)?,
        None => Vec::new(),
    };
    println!("{REPORT_HEADER}");
    for path in &args.reports {
        let mut rep = parse_report(path)?;
        rep.bound = bounds.iter().find(|b| b.instance == rep.instance).cloned();
        println!("{}", rep.row()?);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Generate(a) => generate(a),
        Command::Validate(a) => validate(a),
        Command::EmitMps(a) => emit(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

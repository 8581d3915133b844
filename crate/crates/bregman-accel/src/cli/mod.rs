//! Batch command-line front end.
//!
//! Six subcommands: `gen` writes instance files, `bp` and `mc` run a solver
//! on a saved instance and emit trace/summary/plot artifacts, `verify` runs
//! the property suites, and `repro-table1` / `repro-table2` run the
//! comparison grids against the embedded reference results.
//!
//! Exit codes are a stable contract for scripts: 0 converged (or command
//! succeeded), 1 usage/config error or failed verification, 2 iteration cap
//! reached.

pub mod repro;
pub mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::diagnostics::{summary_json, trace_to_csv, RunStatus, Trace};
use crate::error::Error;
use crate::problems::{
    gen_bp, gen_mc, load_instance, rng_algorithm, save_instance, write_atomic, MatrixKind,
    ProblemInstance, SignalKind,
};
use crate::prox::ObjectiveKind;
use crate::solvers::{default_tau, run, McShrinkArg, ScheduleKind, SolverConfig, TauRule, Variant};

#[derive(Debug, Parser)]
#[command(
    name = "bregman-accel",
    version,
    about = "Sparse recovery and matrix completion by plain and accelerated linearized Bregman iterations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a reproducible problem instance file
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Solve a saved sparse-recovery instance
    Bp(SolveArgs),
    /// Solve a saved matrix-completion instance
    Mc(SolveArgs),
    /// Run machine-checked property suites; any FAIL line exits nonzero
    Verify(VerifyArgs),
    /// Sparse-recovery grid against the embedded reference results (Table 1)
    #[command(name = "repro-table1")]
    ReproTable1(ReproArgs),
    /// Completion grid against the embedded reference results (Table 2)
    #[command(name = "repro-table2")]
    ReproTable2(Repro2Args),
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Sparse-recovery instance: planted s-sparse signal, b = A x
    Bp {
        /// Measurement ensemble: gaussian | normalized-gaussian | bernoulli-pm1
        #[arg(long, default_value = "gaussian")]
        matrix: String,
        /// Planted signal values: gaussian | uniform
        #[arg(long, default_value = "gaussian")]
        signal: String,
        /// Signal dimension
        #[arg(long)]
        n: usize,
        /// Measurement count; defaults to 0.4 n
        #[arg(long)]
        m: Option<usize>,
        /// Planted support size; defaults to 0.2 m
        #[arg(long)]
        s: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// File stem; defaults to a descriptive one
        #[arg(long)]
        name: Option<String>,
    },
    /// Matrix-completion instance: rank-r n x n target, sampled entries
    Mc {
        /// Side length of the square target
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        rank: usize,
        /// Degrees-of-freedom ratio; sample count is round(r(2n-r)/fr)
        #[arg(long)]
        fr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// File stem; defaults to a descriptive one
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Instance header (.json) written by `gen`
    instance: PathBuf,
    /// lb | alb | lb-primal | lb-dual | alb-primal | alb-dual | bregman | auglag
    #[arg(long)]
    variant: Option<String>,
    /// Smoothing weight; defaults to the instance file's recommendation
    #[arg(long)]
    mu: Option<f64>,
    /// Explicit step size; wins over --tau-rule
    #[arg(long)]
    tau: Option<f64>,
    /// paper-cs | theory-safe | paper-mc
    #[arg(long)]
    tau_rule: Option<String>,
    /// tseng | constant:<weight>
    #[arg(long)]
    schedule: Option<String>,
    /// l1 | l1-nonneg | nuclear; defaults to the instance family's objective
    #[arg(long)]
    objective: Option<String>,
    /// tilde | as-printed (accelerated completion step only)
    #[arg(long)]
    mc_shrink_arg: Option<String>,
    /// Relative residual stopping tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Subproblem tolerance for the exact bregman/auglag variants
    #[arg(long)]
    inner_tol: Option<f64>,
    /// Directory for trace.csv, summary.json and plot data
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// JSON config file; explicit flags win over its fields
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// equivalence | rates | prox; omit to run all three
    #[arg(long)]
    suite: Option<String>,
    /// Base seed for the suites' instances
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ReproArgs {
    /// Dimension scale in (0, 1] applied to n
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Base seed; cells use seed + index * stride
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the markdown and CSV comparison tables
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the iteration cap (smoke runs)
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Args)]
struct Repro2Args {
    #[command(flatten)]
    base: ReproArgs,
    /// Largest reference n to include; 500 runs the full grid
    #[arg(long, default_value_t = 200)]
    max_n: usize,
}

/// Solver settings accepted from a JSON file. Field names match the long
/// flags; unknown keys are rejected so typos cannot silently fall back to
/// defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    variant: Option<String>,
    mu: Option<f64>,
    tau: Option<f64>,
    tau_rule: Option<String>,
    schedule: Option<String>,
    objective: Option<String>,
    mc_shrink_arg: Option<String>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    inner_tol: Option<f64>,
}

fn load_file_config(path: &Path) -> Result<FileConfig, Error> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

fn rule_applies(rule: TauRule, instance: &ProblemInstance) -> Result<(), Error> {
    let ok = matches!(
        (rule, instance),
        (TauRule::PaperCs | TauRule::TheorySafe, ProblemInstance::Bp(_))
            | (TauRule::PaperMc, ProblemInstance::Mc(_))
    );
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "tau rule {rule} does not apply to this instance kind"
        )))
    }
}

/// Flags, then config-file fields, then per-family defaults.
fn resolve_config(
    args: &SolveArgs,
    file: &FileConfig,
    instance: &ProblemInstance,
    mu_default: f64,
) -> Result<(SolverConfig, Variant), Error> {
    let is_mc = matches!(instance, ProblemInstance::Mc(_));
    let pick = |flag: &Option<String>, from_file: &Option<String>| -> Option<String> {
        flag.clone().or_else(|| from_file.clone())
    };

    let variant: Variant = match pick(&args.variant, &file.variant) {
        Some(s) => s.parse()?,
        None => Variant::Alb,
    };
    let objective: ObjectiveKind = match pick(&args.objective, &file.objective) {
        Some(s) => s.parse()?,
        None if is_mc => ObjectiveKind::Nuclear,
        None => ObjectiveKind::L1,
    };
    let mu = args.mu.or(file.mu).unwrap_or(mu_default);
    let tau = match (args.tau.or(file.tau), pick(&args.tau_rule, &file.tau_rule)) {
        (Some(t), _) => t,
        (None, Some(rule)) => {
            let rule: TauRule = rule.parse()?;
            rule_applies(rule, instance)?;
            default_tau(rule, instance, mu)
        }
        (None, None) => {
            let rule = if is_mc { TauRule::PaperMc } else { TauRule::PaperCs };
            default_tau(rule, instance, mu)
        }
    };

    let mut config = SolverConfig::new(mu, tau);
    config.objective = objective;
    if let Some(s) = pick(&args.schedule, &file.schedule) {
        config.schedule = s.parse::<ScheduleKind>()?;
    }
    if let Some(s) = pick(&args.mc_shrink_arg, &file.mc_shrink_arg) {
        config.mc_shrink_arg = s.parse::<McShrinkArg>()?;
    }
    config.residual_tol = args
        .tol
        .or(file.tol)
        .unwrap_or(if is_mc { 1e-4 } else { 1e-5 });
    config.max_iters = args
        .max_iters
        .or(file.max_iters)
        .unwrap_or(if is_mc { 2000 } else { 5000 });
    if let Some(t) = args.inner_tol.or(file.inner_tol) {
        config.inner_tol = t;
    }
    config.validate()?;
    Ok((config, variant))
}

/// trace.csv, summary.json, and the two-column plot files (`k value` rows)
/// under `dir`, all written atomically.
fn write_outputs(dir: &Path, trace: &Trace) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("trace.csv"), trace_to_csv(trace).as_bytes())?;
    let mut summary = serde_json::to_vec_pretty(&summary_json(trace))?;
    summary.push(b'\n');
    write_atomic(&dir.join("summary.json"), &summary)?;

    let mut residual = String::new();
    for r in &trace.records {
        let _ = writeln!(residual, "{} {}", r.k, r.residual_rel);
    }
    write_atomic(&dir.join("residual.dat"), residual.as_bytes())?;

    let mut rel_error = String::new();
    let mut have_rel = false;
    for r in &trace.records {
        if let Some(e) = r.rel_error {
            have_rel = true;
            let _ = writeln!(rel_error, "{} {}", r.k, e);
        }
    }
    if have_rel {
        write_atomic(&dir.join("rel_error.dat"), rel_error.as_bytes())?;
    }
    Ok(())
}

fn cmd_gen(what: GenCommand) -> Result<i32, Error> {
    match what {
        GenCommand::Bp { matrix, signal, n, m, s, seed, out, name } => {
            let matrix: MatrixKind = matrix.parse()?;
            let signal: SignalKind = signal.parse()?;
            let m = m.unwrap_or((0.4 * n as f64).round() as usize);
            let s = s.unwrap_or((0.2 * m as f64).round() as usize);
            let problem = gen_bp(matrix, signal, n, m, s, seed)?;
            let name = name.unwrap_or_else(|| format!("bp-{matrix}-{signal}-n{n}-seed{seed}"));
            let (json_path, _) = save_instance(&ProblemInstance::Bp(problem), &out, &name)?;
            println!("wrote {}", json_path.display());
            println!(
                "bp n={n} m={m} s={s} matrix={matrix} signal={signal} seed={seed} rng={}",
                rng_algorithm()
            );
            Ok(0)
        }
        GenCommand::Mc { n, rank, fr, seed, out, name } => {
            let problem = gen_mc(n, rank, fr, seed)?;
            let meta = problem.gen_meta.expect("generator sets metadata");
            let name = name.unwrap_or_else(|| format!("mc-n{n}-r{rank}-seed{seed}"));
            let (json_path, _) = save_instance(&ProblemInstance::Mc(problem), &out, &name)?;
            println!("wrote {}", json_path.display());
            println!(
                "mc n={n} r={rank} p={} fr={:.4} sr={:.4} seed={seed} rng={}",
                meta.p,
                meta.fr,
                meta.sr,
                rng_algorithm()
            );
            Ok(0)
        }
    }
}

fn cmd_solve(args: &SolveArgs, expect_mc: bool) -> Result<i32, Error> {
    let (instance, mu_default) = load_instance(&args.instance)?;
    match (&instance, expect_mc) {
        (ProblemInstance::Mc(_), false) => {
            return Err(Error::invalid(
                "this is a completion instance; use the mc subcommand",
            ))
        }
        (ProblemInstance::Bp(_), true) => {
            return Err(Error::invalid(
                "this is a sparse-recovery instance; use the bp subcommand",
            ))
        }
        _ => {}
    }
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let (config, variant) = resolve_config(args, &file, &instance, mu_default)?;
    let trace = run(&instance, &config, variant)?;
    write_outputs(&args.out, &trace)?;
    let last = trace.last();
    let mut digest = format!(
        "variant={variant} status={} iterations={}",
        trace.status,
        trace.iterations()
    );
    if let Some(r) = last {
        let _ = write!(digest, " residual_rel={:.6e}", r.residual_rel);
        if let Some(e) = r.rel_error {
            let _ = write!(digest, " rel_error={:.6e}", e);
        }
    }
    println!("{digest}");
    println!("outputs in {}", args.out.display());
    Ok(match trace.status {
        RunStatus::Converged => 0,
        RunStatus::IterCap => 2,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32, Error> {
    let suites: Vec<&str> = match &args.suite {
        Some(s) => vec![s.as_str()],
        None => verify::SUITES.to_vec(),
    };
    let mut total = 0usize;
    let mut failed = 0usize;
    for suite in suites {
        for outcome in verify::run_suite(suite, args.seed)? {
            println!("{}", outcome.line());
            total += 1;
            if !outcome.passed {
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {total} properties failed");
        Ok(1)
    } else {
        println!("all {total} properties hold");
        Ok(0)
    }
}

fn write_tables(out: &Path, stem: &str, md: &str, csv: &str) -> Result<(), Error> {
    std::fs::create_dir_all(out)?;
    write_atomic(&out.join(format!("{stem}.md")), md.as_bytes())?;
    write_atomic(&out.join(format!("{stem}.csv")), csv.as_bytes())?;
    Ok(())
}

fn report_grid(cells: &[repro::GridCell], table: u8, args: &ReproArgs, stem: &str) -> Result<i32, Error> {
    let md = repro::render_markdown(cells, table);
    let csv = repro::render_csv(cells, table);
    print!("{md}");
    write_tables(&args.out, stem, &md, &csv)?;
    let failed: Vec<&repro::GridCell> = cells
        .iter()
        .filter(|c| c.lb.is_err() || c.alb.is_err())
        .collect();
    for cell in &failed {
        let msg = cell
            .lb
            .as_ref()
            .err()
            .or(cell.alb.as_ref().err())
            .expect("filtered on error");
        eprintln!("cell {} failed: {}", cell.label, msg);
    }
    println!(
        "wrote {} and {} ({} cells, {} failed)",
        args.out.join(format!("{stem}.md")).display(),
        args.out.join(format!("{stem}.csv")).display(),
        cells.len(),
        failed.len(),
    );
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Gen { what } => cmd_gen(what),
        Command::Bp(args) => cmd_solve(&args, false),
        Command::Mc(args) => cmd_solve(&args, true),
        Command::Verify(args) => cmd_verify(&args),
        Command::ReproTable1(args) => {
            let cells = repro::run_table1(args.scale, args.seed, args.max_iters)?;
            report_grid(&cells, 1, &args, "table1")
        }
        Command::ReproTable2(args) => {
            let cells =
                repro::run_table2(args.base.scale, args.base.seed, args.max_n, args.base.max_iters)?;
            report_grid(&cells, 2, &args.base, "table2")
        }
    }
}

/// Parses arguments and runs one command, returning the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

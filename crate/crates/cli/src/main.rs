//! `maxsat-pso`: solve, generate and benchmark weighted Max-Sat instances
//! with binary particle swarms.
//!
//! Exit codes: 0 success, 2 input error, 3 capability refusal, 4 nothing
//! succeeded, 64 usage error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maxsat_pso::bpso;
use maxsat_pso::harness::{self, load_plan, run_experiment_with_progress};
use maxsat_pso::stats::{self, pairwise_anova};
use maxsat_pso::wcnf::{brute_force_optimum, generate_random, parse_wcnf, serialize_wcnf, GeneratorParams, WcnfError};
use maxsat_pso::{SwarmConfig, TopologyKind};

const EXIT_INPUT: u8 = 2;
const EXIT_REFUSED: u8 = 3;
const EXIT_ALL_FAILED: u8 = 4;
const EXIT_USAGE: u8 = 64;

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "maxsat-pso", version, about = "Binary particle swarm optimization for weighted Max-Sat")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on a WCNF file.
    Solve(SolveArgs),
    /// Write a random weighted k-CNF instance.
    Gen(GenArgs),
    /// Solve a small instance exhaustively.
    Oracle {
        instance: PathBuf,
    },
    /// Execute an experiment plan and write tables and CSV files.
    Experiment {
        plan: PathBuf,
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
        /// Override the plan's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Pairwise one-way ANOVA over a CSV with columns `algorithm,value`.
    Anova {
        csv: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Gbest,
    Lbest,
    Grid,
    Hierarchy,
}

impl From<TopologyArg> for TopologyKind {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Gbest => TopologyKind::GlobalBest,
            TopologyArg::Lbest => TopologyKind::LocalBestRing,
            TopologyArg::Grid => TopologyKind::SquareGrid,
            TopologyArg::Hierarchy => TopologyKind::AdaptiveHierarchy,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "gbest")]
    topology: TopologyArg,
    /// Use the guaranteed-convergence update for the best particle.
    #[arg(long)]
    gc: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    swarm_size: Option<usize>,
    #[arg(long)]
    stagnation: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    w_floor: Option<f64>,
    #[arg(long, requires = "grid_cols")]
    grid_rows: Option<usize>,
    #[arg(long, requires = "grid_rows")]
    grid_cols: Option<usize>,
    #[arg(long)]
    start_degree: Option<usize>,
    #[arg(long)]
    min_degree: Option<usize>,
    #[arg(long)]
    adapt_interval: Option<usize>,
    /// Also print the best assignment.
    #[arg(long)]
    print_assignment: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    vars: usize,
    #[arg(long)]
    clauses: usize,
    #[arg(long, default_value_t = 3)]
    len: usize,
    #[arg(long, default_value_t = 1)]
    wmin: u64,
    #[arg(long, default_value_t = 100)]
    wmax: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Embed the exhaustive optimum as `c opt` (at most 24 variables).
    #[arg(long)]
    with_opt: bool,
    #[arg(long)]
    name: Option<String>,
}

fn read_instance(path: &Path) -> Result<maxsat_pso::WcnfInstance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse_wcnf(&text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn solve(args: SolveArgs) -> CmdResult {
    let instance = read_instance(&args.instance)?;
    let mut config = SwarmConfig {
        seed: args.seed,
        gc_enabled: args.gc,
        ..SwarmConfig::default()
    };
    if let Some(v) = args.swarm_size {
        config.swarm_size = v;
    }
    if let Some(v) = args.stagnation {
        config.stagnation_window = v;
    }
    if let Some(v) = args.max_iterations {
        config.max_iterations = v;
    }
    if let Some(v) = args.w_floor {
        config.w_floor = v;
    }
    if let (Some(r), Some(c)) = (args.grid_rows, args.grid_cols) {
        config.topology.grid_shape = Some((r, c));
    }
    if let Some(v) = args.start_degree {
        config.topology.start_degree = v;
    }
    if let Some(v) = args.min_degree {
        config.topology.min_degree = v;
    }
    if let Some(v) = args.adapt_interval {
        config.topology.adapt_interval = v;
    }

    let result = bpso::run(&instance, args.topology.into(), &config)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    println!("best={}", result.best_fitness);
    if let Some(opt) = instance.known_optimum().filter(|&o| o > 0) {
        let pct = stats::percent_of_optimum(result.best_fitness as f64, opt)
            .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
        println!("optimum={opt}");
        println!("percent={pct:.2}");
    }
    println!("iterations={}", result.iterations_run);
    println!("converged={}", result.converged);
    if args.print_assignment {
        println!("assignment={}", result.best_assignment);
    }
    Ok(())
}

fn gen(args: GenArgs) -> CmdResult {
    let params = GeneratorParams {
        num_vars: args.vars,
        num_clauses: args.clauses,
        clause_len: args.len,
        weight_lo: args.wmin,
        weight_hi: args.wmax,
        seed: args.seed,
    };
    let mut instance = generate_random(&params).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    if let Some(name) = args.name {
        instance = instance.with_name(name);
    }
    if args.with_opt {
        let (opt, _) = brute_force_optimum(&instance).map_err(|e| match e {
            WcnfError::TooLarge { .. } => Failure::new(EXIT_REFUSED, e.to_string()),
            other => Failure::new(EXIT_INPUT, other.to_string()),
        })?;
        instance = instance
            .with_known_optimum(opt)
            .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    }
    let text = serialize_wcnf(&instance);
    match args.out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn oracle(path: &Path) -> CmdResult {
    let instance = read_instance(path)?;
    let (opt, assignment) = brute_force_optimum(&instance).map_err(|e| match e {
        WcnfError::TooLarge { .. } => Failure::new(EXIT_REFUSED, e.to_string()),
        other => Failure::new(EXIT_INPUT, other.to_string()),
    })?;
    println!("optimum={opt}");
    println!("assignment={assignment}");
    Ok(())
}

fn experiment(plan_path: &Path, out_dir: &Path, workers: Option<usize>) -> CmdResult {
    let mut plan = load_plan(plan_path).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    if workers.is_some() {
        plan.workers = workers;
        plan.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    }
    let report = run_experiment_with_progress(&plan, |r| {
        eprintln!(
            "done {} on {} run {}: best={} iterations={}",
            r.algorithm,
            r.dataset,
            r.run + 1,
            r.best_fitness,
            r.iterations
        );
    })
    .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;

    let summary = harness::summarize(&report);
    let write = |name: &str, body: &str| {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
    };
    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", out_dir.display())))?;
    write(
        "report.txt",
        &format!(
            "{}\n{}\n{}",
            summary.tables_text, summary.significance_text, summary.metadata_text
        ),
    )?;
    write("runs.csv", &summary.runs_csv)?;
    write("summary.csv", &summary.rows_csv)?;
    write("significance.csv", &summary.significance_csv)?;

    print!("{}", summary.tables_text);
    print!("{}", summary.significance_text);
    for ex in &report.exclusions {
        eprintln!("excluded {}: {}", ex.dataset, ex.reason);
    }
    if report.rows.is_empty() {
        return Err(Failure::new(EXIT_ALL_FAILED, "no dataset could be loaded"));
    }
    Ok(())
}

fn anova(path: &Path) -> CmdResult {
    let input = |msg: String| Failure::new(EXIT_INPUT, format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| input(e.to_string()))?;
    let headers = reader.headers().map_err(|e| input(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| input(format!("missing column {name:?}")))
    };
    let (alg_col, value_col) = (col("algorithm")?, col("value")?);

    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input(e.to_string()))?;
        let line = i + 2;
        let algorithm = record.get(alg_col).unwrap_or_default().trim().to_string();
        let raw = record.get(value_col).unwrap_or_default().trim();
        let value: f64 = raw
            .parse()
            .map_err(|_| input(format!("malformed value {raw:?}, line {line}")))?;
        match groups.iter_mut().find(|(a, _)| *a == algorithm) {
            Some((_, values)) => values.push(value),
            None => groups.push((algorithm, vec![value])),
        }
    }
    if groups.len() < 2 {
        return Err(input(format!("need at least 2 algorithms, found {}", groups.len())));
    }
    let pairs = pairwise_anova(&groups).map_err(|e| input(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    for ((a, b), r) in pairs {
        let _ = writeln!(
            out,
            "{a} vs {b}: F={} v1={} v2={} Fcrit={:.2} {}",
            harness::format_f(r.f_statistic),
            r.v1,
            r.v2,
            r.f_critical,
            if r.significant { "significant" } else { "not-significant" }
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Gen(args) => gen(args),
        Command::Oracle { instance } => oracle(&instance),
        Command::Experiment {
            plan,
            out_dir,
            workers,
        } => experiment(&plan, &out_dir, workers),
        Command::Anova { csv } => anova(&csv),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

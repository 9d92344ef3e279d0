//! `truncpivot`: experiment runner for correlation clustering via
//! truncated pivot.
//!
//! Subcommands: `gen` (write a graph file), `run` (execute an experiment
//! spec into JSON + CSV reports), `replay` (reproduce a recorded run and
//! verify it), `report` (summarize an existing JSON report).
//!
//! Exit codes: 0 success, 1 replay mismatch, 2 spec error, 3 capacity
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use truncpivot_cli::replay::{verify, ReplayFile};
use truncpivot_cli::report::ExperimentReport;
use truncpivot_cli::runner::{run, RunError};
use truncpivot_cli::spec::{AlgoKind, ExperimentSpec, GeneratorSpec, MpcLeader, MpcPlacement, OrderSpec};

#[derive(Parser)]
#[command(
    name = "truncpivot",
    version,
    about = "Correlation clustering experiments: pivot variants, streaming memory traces, MPC simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file.
    Gen(GenArgs),
    /// Run an experiment and write JSON/CSV reports.
    Run(RunArgs),
    /// Re-execute a recorded run and verify it reproduces.
    Replay(ReplayArgs),
    /// Summarize an existing JSON report.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Er,
    Planted,
    Complete,
    Star,
    File,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderKind {
    Random,
    Adversary,
    File,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    gen: GenKind,
    #[arg(long)]
    n: usize,
    /// ER edge probability.
    #[arg(long)]
    p: Option<f64>,
    /// Planted cluster count.
    #[arg(long)]
    k: Option<usize>,
    /// Planted noise rate.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON config with the same fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    gen: Option<GenKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    /// Graph file for `--gen file`.
    #[arg(long)]
    graph_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<AlgoKind>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "c")]
    c: Option<f64>,
    #[arg(long, value_enum)]
    order: Option<OrderKind>,
    /// Stream file for `--order file`.
    #[arg(long)]
    order_file: Option<PathBuf>,
    /// Comma-separated seed list; `a..b` ranges allowed.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Rank bit-length factor for the adaptive streaming variant.
    #[arg(long)]
    rank_bits: Option<u32>,
    #[arg(long)]
    mpc_machines: Option<usize>,
    /// Per-machine word budget for the MPC simulator.
    #[arg(long)]
    mpc_words: Option<u64>,
    /// Node-to-machine placement for the MPC simulator.
    #[arg(long, value_enum)]
    mpc_placement: Option<MpcPlacement>,
    /// Leader layout for the MPC simulator.
    #[arg(long, value_enum)]
    mpc_leader: Option<MpcLeader>,
    /// Report path; JSON there, CSV alongside. Prints JSON when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Replay file written by `run` for a violating run.
    #[arg(long, conflicts_with_all = ["report", "seed", "trial"])]
    file: Option<PathBuf>,
    /// Alternatively: a report plus the (seed, trial) cell to reproduce.
    #[arg(long, requires = "seed", requires = "trial")]
    report: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trial: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Also write the CSV projection here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Spec(String),
    Capacity(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Spec(_) => 2,
            Failure::Capacity(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Spec(m) | Failure::Capacity(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Spec(m) => Failure::Spec(m),
            RunError::Capacity(m) => Failure::Capacity(m),
        }
    }
}

fn spec_err(msg: impl Into<String>) -> Failure {
    Failure::Spec(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let generator = generator_from_flags(
        args.gen,
        Some(args.n),
        args.p,
        args.k,
        args.q,
        None,
    )?;
    let (graph, _) = generator.build(args.seed).map_err(|e| spec_err(e.to_string()))?;
    graph
        .write_file(&args.out)
        .map_err(|e| spec_err(e.to_string()))?;
    println!(
        "wrote {} ({} nodes, {} edges)",
        args.out.display(),
        graph.n(),
        graph.num_edges()
    );
    Ok(())
}

fn generator_from_flags(
    kind: GenKind,
    n: Option<usize>,
    p: Option<f64>,
    k: Option<usize>,
    q: Option<f64>,
    graph_file: Option<PathBuf>,
) -> Result<GeneratorSpec, Failure> {
    let need_n = || n.ok_or_else(|| spec_err("--n is required for this generator"));
    Ok(match kind {
        GenKind::Er => GeneratorSpec::Er {
            n: need_n()?,
            p: p.ok_or_else(|| spec_err("--p is required for er"))?,
        },
        GenKind::Planted => GeneratorSpec::Planted {
            n: need_n()?,
            k: k.ok_or_else(|| spec_err("--k is required for planted"))?,
            q: q.ok_or_else(|| spec_err("--q is required for planted"))?,
        },
        GenKind::Complete => GeneratorSpec::Complete { n: need_n()? },
        GenKind::Star => GeneratorSpec::Star { n: need_n()? },
        GenKind::File => GeneratorSpec::File {
            path: graph_file.ok_or_else(|| spec_err("--graph-file is required for file"))?,
        },
    })
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, Failure> {
    let mut seeds = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let a: u64 = a.parse().map_err(|_| spec_err(format!("bad seed {tok:?}")))?;
            let b: u64 = b.parse().map_err(|_| spec_err(format!("bad seed {tok:?}")))?;
            if a >= b {
                return Err(spec_err(format!("empty seed range {tok:?}")));
            }
            seeds.extend(a..b);
        } else {
            seeds.push(tok.parse().map_err(|_| spec_err(format!("bad seed {tok:?}")))?);
        }
    }
    Ok(seeds)
}

fn build_spec(args: &RunArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec: Option<ExperimentSpec> = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| spec_err(format!("cannot read {}: {e}", path.display())))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| spec_err(format!("bad config {}: {e}", path.display())))?,
            )
        }
        None => None,
    };

    if let Some(kind) = args.gen {
        let generator = generator_from_flags(
            kind,
            args.n,
            args.p,
            args.k,
            args.q,
            args.graph_file.clone(),
        )?;
        match spec.as_mut() {
            Some(s) => s.generator = generator,
            None => {
                spec = Some(ExperimentSpec {
                    generator,
                    algo: AlgoKind::Pivot,
                    epsilon: truncpivot_core::params::DEFAULT_EPSILON,
                    c: truncpivot_core::params::DEFAULT_C,
                    rank_bits_factor: 3,
                    order: OrderSpec::Random,
                    seeds: Vec::new(),
                    trials: 1,
                    mpc_machines: 4,
                    mpc_words: 1 << 40,
                    mpc_placement: MpcPlacement::Contiguous,
                    mpc_leader: MpcLeader::PerTrial,
                })
            }
        }
    }
    let mut spec = spec.ok_or_else(|| spec_err("either --config or --gen must be given"))?;

    if let Some(algo) = args.algo {
        spec.algo = algo;
    }
    if let Some(e) = args.epsilon {
        spec.epsilon = e;
    }
    if let Some(c) = args.c {
        spec.c = c;
    }
    if let Some(order) = args.order {
        spec.order = match order {
            OrderKind::Random => OrderSpec::Random,
            OrderKind::Adversary => OrderSpec::Adversary,
            OrderKind::File => OrderSpec::File {
                path: args
                    .order_file
                    .clone()
                    .ok_or_else(|| spec_err("--order-file is required with --order file"))?,
            },
        };
    }
    if let Some(seeds) = &args.seeds {
        spec.seeds = parse_seeds(seeds)?;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(r) = args.rank_bits {
        spec.rank_bits_factor = r;
    }
    if let Some(m) = args.mpc_machines {
        spec.mpc_machines = m;
    }
    if let Some(w) = args.mpc_words {
        spec.mpc_words = w;
    }
    if let Some(p) = args.mpc_placement {
        spec.mpc_placement = p;
    }
    if let Some(l) = args.mpc_leader {
        spec.mpc_leader = l;
    }
    Ok(spec)
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let spec = build_spec(&args)?;
    let output = run(&spec)?;
    let json = output.report.to_json();
    match &args.out {
        Some(out) => {
            write_file(out, &json)?;
            let csv_path = out.with_extension("csv");
            write_file(&csv_path, &output.report.to_csv())?;
            let mut replay_paths = Vec::new();
            for replay in &output.replays {
                let path = replay_path(out, replay);
                write_file(&path, &replay.to_json())?;
                replay_paths.push(path);
            }
            println!("{}", output.report.summary());
            println!("report: {}", out.display());
            println!("csv: {}", csv_path.display());
            for p in replay_paths {
                println!("violation replay: {}", p.display());
            }
        }
        None => {
            print!("{json}");
            eprintln!("{}", output.report.summary());
        }
    }
    Ok(())
}

fn replay_path(out: &Path, replay: &ReplayFile) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    out.with_file_name(format!(
        "{stem}.violation-seed{}-trial{}.json",
        replay.seed, replay.trial
    ))
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    std::fs::write(path, content)
        .map_err(|e| spec_err(format!("cannot write {}: {e}", path.display())))
}

fn cmd_replay(args: ReplayArgs) -> Result<(), Failure> {
    let replay = match (&args.file, &args.report) {
        (Some(file), None) => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| spec_err(format!("cannot read {}: {e}", file.display())))?;
            ReplayFile::from_json(&text)
                .map_err(|e| spec_err(format!("bad replay file: {e}")))?
        }
        (None, Some(report_path)) => {
            let text = std::fs::read_to_string(report_path)
                .map_err(|e| spec_err(format!("cannot read {}: {e}", report_path.display())))?;
            let report = ExperimentReport::from_json(&text)
                .map_err(|e| spec_err(format!("bad report: {e}")))?;
            let (seed, trial) = (
                args.seed.expect("clap enforces"),
                args.trial.expect("clap enforces"),
            );
            let record = report
                .records
                .iter()
                .find(|r| r.seed == seed && r.trial == trial)
                .ok_or_else(|| {
                    spec_err(format!("no record with seed {seed}, trial {trial}"))
                })?;
            ReplayFile::for_record(&report.spec, seed, trial, record.cost)
        }
        _ => return Err(spec_err("pass either --file or --report with --seed/--trial")),
    };
    let verdict = verify(&replay)?;
    println!("{}", verdict.detail);
    if verdict.reproduced {
        Ok(())
    } else {
        Err(Failure::Mismatch(verdict.detail))
    }
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| spec_err(format!("cannot read {}: {e}", args.input.display())))?;
    let report = ExperimentReport::from_json(&text)
        .map_err(|e| spec_err(format!("bad report: {e}")))?;
    println!("{}", report.summary());
    if let Some(csv) = &args.csv {
        write_file(csv, &report.to_csv())?;
        println!("csv: {}", csv.display());
    }
    Ok(())
}

//! Argument handling and subcommands for the `forage` binary.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use forage_core::export::{self, Manifest, TRACE_FILE};
use forage_core::harness::{CellResult, CellRun};
use forage_core::{
    monte_carlo, run_simulation, run_simulation_traced, Error, ExperimentPlan, ExperimentResult,
    HeuristicKind, SimConfig, SpawnCase,
};
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "forage", version, about = "Emotion-driven swarm foraging simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single simulation.
    Simulate(SimulateArgs),
    /// Run the Monte Carlo grid over heuristics and spawn cases.
    Experiment(ExperimentArgs),
    /// Check a configuration and print the resolved result.
    Validate(ConfigArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct ConfigArgs {
    /// JSON configuration file; missing keys take built-in defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set total_ticks=300`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Number of robots.
    #[arg(long)]
    pub robots: Option<u32>,

    /// Ticks per run.
    #[arg(long)]
    pub ticks: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,

    #[arg(long, env = "FORAGE_SEED", default_value_t = 1)]
    pub seed: u64,

    /// hl, random or invite.
    #[arg(long, value_parser = parse_heuristic)]
    pub heuristic: Option<HeuristicKind>,

    /// a (two corners) or b (four corners).
    #[arg(long, value_parser = parse_case)]
    pub case: Option<SpawnCase>,

    /// Also write a per-tick, per-robot JSON-lines trace.
    #[arg(long)]
    pub trace: bool,

    #[arg(long, value_name = "DIR", default_value = "forage-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub config: ConfigArgs,

    /// Base seed; every run seed is derived from it.
    #[arg(long, env = "FORAGE_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Comma-separated heuristics [default: hl,random,invite].
    #[arg(long, value_delimiter = ',', value_parser = parse_heuristic)]
    pub heuristic: Vec<HeuristicKind>,

    /// Comma-separated spawn cases [default: a,b].
    #[arg(long, value_delimiter = ',', value_parser = parse_case)]
    pub case: Vec<SpawnCase>,

    #[arg(long, default_value_t = forage_core::harness::PAPER_RUNS_PER_CELL)]
    pub runs: u32,

    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    #[arg(long, value_name = "DIR", default_value = "forage-out")]
    pub out: PathBuf,
}

fn parse_heuristic(s: &str) -> Result<HeuristicKind, String> {
    HeuristicKind::from_label(s).ok_or_else(|| format!("unknown heuristic `{s}` (expected hl, random or invite)"))
}

fn parse_case(s: &str) -> Result<SpawnCase, String> {
    SpawnCase::from_label(s).ok_or_else(|| format!("unknown case `{s}` (expected a or b)"))
}

fn config_error(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

/// Apply `KEY=VALUE` to a config. VALUE is read as JSON when it parses,
/// otherwise as a bare string.
pub fn apply_override(cfg: &SimConfig, assignment: &str) -> Result<SimConfig, Error> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_error("set", format!("expected KEY=VALUE, got `{assignment}`")))?;
    let key = key.trim();
    let mut doc = serde_json::to_value(cfg).expect("SimConfig always serializes");
    let slot = doc
        .as_object_mut()
        .and_then(|o| o.get_mut(key))
        .ok_or_else(|| config_error(key, "unknown configuration key"))?;
    *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    serde_json::from_value(doc).map_err(|e| config_error(key, e.to_string()))
}

/// Built-in defaults, then the config file, then command-line flags.
pub fn resolve_config(
    args: &ConfigArgs,
    heuristic: Option<HeuristicKind>,
    case: Option<SpawnCase>,
) -> Result<SimConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
            SimConfig::from_json(&text)?
        }
        None => SimConfig::default(),
    };
    for assignment in &args.overrides {
        cfg = apply_override(&cfg, assignment)?;
    }
    if let Some(n) = args.robots {
        cfg.robot_count = n;
    }
    if let Some(n) = args.ticks {
        cfg.total_ticks = n;
    }
    if let Some(h) = heuristic {
        cfg.heuristic = h;
    }
    if let Some(c) = case {
        cfg.spawn_case = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let cfg = resolve_config(&args.config, args.heuristic, args.case)?;
    let record = if args.trace {
        fs::create_dir_all(&args.out)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", args.out.display())))?;
        let path = args.out.join(TRACE_FILE);
        let file = fs::File::create(&path)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(file);
        let rec = run_simulation_traced(&cfg, args.seed, &mut w)?;
        w.flush()
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        rec
    } else {
        run_simulation(&cfg, args.seed)?
    };
    let cell = CellResult::from_runs(
        cfg.heuristic,
        cfg.spawn_case,
        vec![CellRun {
            run_index: 0,
            record: record.clone(),
        }],
    )?;
    let result = ExperimentResult { cells: vec![cell] };
    let bundle = export::write_bundle(&args.out, &result, &Manifest::for_simulation(&cfg, args.seed))?;
    let _ = writeln!(
        stdout,
        "{} case {} seed {}: removed {} ({:.2}%), invite ticks {}, nu {}, final tick {} -> {}",
        cfg.heuristic,
        cfg.spawn_case.label(),
        args.seed,
        record.content_removed,
        record.percent_removed,
        record.invite_ticks,
        record.nu,
        record.final_tick,
        bundle.runs.display()
    );
    Ok(())
}

fn experiment(args: &ExperimentArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let base = resolve_config(&args.config, None, None)?;
    let plan = ExperimentPlan {
        base_config: base,
        heuristics: if args.heuristic.is_empty() {
            HeuristicKind::ALL.to_vec()
        } else {
            args.heuristic.clone()
        },
        spawn_cases: if args.case.is_empty() {
            SpawnCase::ALL.to_vec()
        } else {
            args.case.clone()
        },
        runs_per_cell: args.runs,
        base_seed: args.seed,
        parallelism: args.workers,
    };
    let result = monte_carlo(&plan)?;
    let bundle = export::write_bundle(&args.out, &result, &Manifest::for_experiment(&plan))?;
    for cell in &result.cells {
        let s = &cell.stats;
        let _ = writeln!(
            stdout,
            "{:>6} case {}: runs {:4}  mean {:6.2}%  median {:6.2}%  >=50%: {:4}  median nu {}",
            cell.heuristic,
            cell.spawn_case.label(),
            s.runs,
            s.percent_mean,
            s.percent_median,
            s.runs_at_least_half_removed,
            s.nu_median.map_or("undefined".to_owned(), |v| format!("{v:.2}")),
        );
    }
    let _ = writeln!(stdout, "wrote {}", bundle.runs.display());
    Ok(())
}

fn validate(args: &ConfigArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let cfg = resolve_config(args, None, None)?;
    let _ = writeln!(stdout, "{}", cfg.to_json_pretty());
    Ok(())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Execute a parsed command, returning the process exit status.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match &cli.command {
        Command::Simulate(a) => simulate(a, stdout),
        Command::Experiment(a) => experiment(a, stdout),
        Command::Validate(a) => validate(a, stdout),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parse `argv` and run. Parse failures exit 1; help and version exit 0.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli, stdout, stderr),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            }
        }
    }
}

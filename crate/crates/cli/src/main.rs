use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use decaylab_cli::config::TaskKind;
use decaylab_cli::run::resolve_task;
use decaylab_cli::{parse_config, run, Profile, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Task {
    Spectral,
    Survive,
    Channels,
    Emission,
    OracleCheck,
}

impl From<Task> for TaskKind {
    fn from(t: Task) -> Self {
        match t {
            Task::Spectral => TaskKind::Spectral,
            Task::Survive => TaskKind::Survive,
            Task::Channels => TaskKind::Channels,
            Task::Emission => TaskKind::Emission,
            Task::OracleCheck => TaskKind::OracleCheck,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Strict,
    Fast,
}

/// Spectral functions, survival probabilities and decay densities of unstable states.
#[derive(Debug, Parser)]
#[command(name = "decaylab", version)]
struct Args {
    /// Task to run; overrides `[task] kind` in the config.
    task: Option<Task>,

    /// Run configuration file.
    #[arg(long, short)]
    config: PathBuf,

    /// Directory for the CSV table and its .meta sidecar.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,

    #[arg(long, value_enum, default_value = "strict")]
    tolerance_profile: ProfileArg,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DECAYLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("DECAYLAB_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let result = parse_config(&text)
        .map_err(RunError::from)
        .and_then(|cfg| {
            let task = resolve_task(args.task.map(Into::into), &cfg)?;
            let profile = match args.tolerance_profile {
                ProfileArg::Strict => Profile::Strict,
                ProfileArg::Fast => Profile::Fast,
            };
            run(&cfg, task, &args.out, profile)
        });
    match result {
        Ok(summary) => {
            println!("wrote {} ({} rows)", summary.csv.display(), summary.table.rows.len());
            println!("wrote {}", summary.meta.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                RunError::Config(c) => eprintln!("error: {}: {c}", args.config.display()),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `lifrecon` command-line runner.
//!
//! Settings are resolved as built-in defaults, then the `--config` JSON, then
//! individual flags. Exit status: 0 on success (audit violations included),
//! 2 for configuration and file errors, 3 for numerical failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lifrecon::Error;
use serde_json::{json, Value};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "lifrecon",
    version,
    about = "LIF sampling, reconstruction and sample-space error estimation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Signal bandwidth.
    #[arg(long, global = true)]
    omega: Option<f64>,
    #[arg(long, global = true)]
    n_atoms: Option<usize>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Grid period of the reconstruction.
    #[arg(long = "period", global = true)]
    period: Option<f64>,
    #[arg(long, global = true)]
    r_min: Option<usize>,
    #[arg(long, global = true)]
    r_max: Option<usize>,
    /// Worker threads for the sweep; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random bandlimited signal and write it as JSON.
    Generate,
    /// LIF-sample a signal and write `t,v` events plus a metadata sidecar.
    Sample {
        /// Signal JSON; drawn from the config seed when omitted.
        #[arg(long)]
        signal: Option<PathBuf>,
    },
    /// Estimate coefficients from events and synthesize the reconstruction.
    Reconstruct {
        #[arg(long)]
        events: PathBuf,
        /// Truncation index; defaults to the sweep's `r_max`.
        #[arg(long)]
        r: Option<usize>,
    },
    /// Error curves over the truncation range.
    Sweep {
        #[arg(long)]
        signal: Option<PathBuf>,
    },
    /// Check both quasi-isometry inequalities on generated pairs.
    Audit,
}

/// Writes `value` at the dotted `path` inside `doc`, creating objects as needed.
fn set_path(doc: &mut Value, path: &[&str], value: Value) {
    let mut node = doc;
    for key in &path[..path.len() - 1] {
        if !node.get(*key).is_some_and(Value::is_object) {
            node[*key] = json!({});
        }
        node = &mut node[*key];
    }
    node[path[path.len() - 1]] = value;
}

fn load_config(common: &Common) -> lifrecon::Result<RunConfig> {
    let mut doc = match &common.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => json!({}),
    };
    if !doc.is_object() {
        return Err(Error::Format("config must be a JSON object".into()));
    }
    let overrides: [(&[&str], Option<Value>); 9] = [
        (
            &["output_dir"],
            common.output_dir.as_ref().map(|p| json!(p)),
        ),
        (&["seed"], common.seed.map(|v| json!(v))),
        (&["signal", "omega"], common.omega.map(|v| json!(v))),
        (&["signal", "n_atoms"], common.n_atoms.map(|v| json!(v))),
        (&["sampler", "theta"], common.theta.map(|v| json!(v))),
        (&["sampler", "alpha"], common.alpha.map(|v| json!(v))),
        (&["window", "T"], common.period.map(|v| json!(v))),
        (&["sweep", "r_min"], common.r_min.map(|v| json!(v))),
        (&["sweep", "r_max"], common.r_max.map(|v| json!(v))),
    ];
    for (path, value) in overrides {
        if let Some(v) = value {
            set_path(&mut doc, path, v);
        }
    }
    if doc.get("signal").is_none() {
        return Err(Error::Parameter(
            "missing field `signal` (with required `signal.omega`)".into(),
        ));
    }
    let cfg: RunConfig = serde_json::from_value(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Numerical(_) | Error::Evaluation { .. } => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> lifrecon::Result<()> {
    let cfg = load_config(&cli.common)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    match &cli.command {
        Command::Generate => commands::generate(&cfg),
        Command::Sample { signal } => commands::sample(&cfg, signal.as_deref()),
        Command::Reconstruct { events, r } => commands::reconstruct(&cfg, events, *r),
        Command::Sweep { signal } => commands::sweep(&cfg, signal.as_deref(), cli.common.jobs),
        Command::Audit => commands::audit(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

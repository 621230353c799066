//! The `rwre` batch front-end.
//!
//! `rwre <command> --config run.json --out dir` reads a strict JSON
//! configuration, fills in every default, runs one library operation and
//! writes its JSON/CSV artifacts plus a `manifest.json` to `dir`.
//! `rwre replay --config dir/manifest.json --out other` reruns a manifest;
//! the artifacts come out byte-identical.
//!
//! Exit status: 0 success, 1 I/O, 2 configuration or invalid input,
//! 3 numerical non-convergence (or an uncertified result), 4 resource cap.

pub mod commands;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches, Parser};
use serde::{Deserialize, Serialize};

use rwre_core::config::RunConfig;
use rwre_core::simulate::rng::resolve_workers;

pub use commands::{lookup, registry, Command, Context};
pub use error::{CliError, CliResult};
pub use output::{Artifact, Output};

/// Environment variable that overrides the worker count (and nothing else).
pub const WORKERS_ENV: &str = "RWRE_WORKERS";

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "rwre", version, about = "Rate functions and simulations for random walks in random environments")]
pub struct Cli {
    /// Operation to run, or `replay` to rerun a manifest.
    pub command: String,
    /// JSON run configuration (for `replay`: a manifest).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "rwre-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; the RWRE_WORKERS variable applies when absent.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Resource cap (DP steps or scanned sites, per command).
    #[arg(long)]
    pub cap: Option<usize>,
}

/// Everything needed to reproduce a run's artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration, with input files inlined.
    pub config: RunConfig,
    /// Configuration file the run started from.
    pub source: String,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_file<T: serde::de::DeserializeOwned>(base: &Path, rel: &str, field: &str) -> CliResult<T> {
    let path = base.join(rel);
    serde_json::from_str(&read(&path)?).map_err(|e| CliError::Config(format!("{field} {}: {e}", path.display())))
}

/// Replaces `*_file` references with the parsed objects, so the stored
/// configuration is self-contained.
pub fn inline_inputs(cfg: &mut RunConfig, base: &Path) -> CliResult<()> {
    if let Some(f) = cfg.environment_file.take() {
        cfg.environment = Some(parse_file(base, &f, "environment_file")?);
    }
    if let Some(f) = cfg.target_file.take() {
        cfg.target = Some(parse_file(base, &f, "target_file")?);
    }
    if let Some(f) = cfg.strip_file.take() {
        cfg.strip = Some(parse_file(base, &f, "strip_file")?);
    }
    Ok(())
}

/// Runs `command` on an already inlined configuration and writes its
/// artifacts and manifest into `out`.
pub fn execute(command: &str, mut cfg: RunConfig, source: &str, workers: Option<usize>, out: &Path) -> CliResult<Manifest> {
    let cmd = lookup(command).ok_or_else(|| CliError::Config(format!("unknown command `{command}`")))?;
    cmd.resolve(&mut cfg);
    let ctx = Context { workers: resolve_workers(workers.or(cfg.workers)) };
    let started = Instant::now();
    let result = cmd.run(&cfg, &ctx)?;
    let wall_time_seconds = started.elapsed().as_secs_f64();
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    for a in &result.artifacts {
        let p = out.join(&a.name);
        std::fs::write(&p, &a.bytes).map_err(|e| CliError::io(p, e))?;
    }
    let manifest = Manifest {
        tool: "rwre".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: cfg,
        source: source.into(),
        outputs: result.artifacts.iter().map(|a| a.name.clone()).collect(),
        wall_time_seconds,
    };
    let p = out.join(MANIFEST);
    std::fs::write(&p, output::to_json(&manifest)?).map_err(|e| CliError::io(p, e))?;
    if let Some(a) = result.primary() {
        print!("{}", String::from_utf8_lossy(&a.bytes));
    }
    match result.uncertified {
        Some(why) => Err(CliError::Uncertified(why)),
        None => Ok(manifest),
    }
}

fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok())
}

/// Parses the command line and runs it.
pub fn run(cli: Cli) -> CliResult<Manifest> {
    let workers = cli.workers.or_else(workers_from_env);
    let text = read(&cli.config)?;
    let source = cli.config.display().to_string();
    let (command, mut cfg) = if cli.command == "replay" {
        let m: Manifest =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("manifest {source}: {e}")))?;
        (m.command, m.config)
    } else {
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{source}: {e}")))?;
        let base = cli.config.parent().unwrap_or(Path::new("."));
        inline_inputs(&mut cfg, base)?;
        (cli.command, cfg)
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
        cfg.seeds = None;
    }
    if let Some(t) = cli.tol {
        cfg.tol = Some(t);
    }
    if let Some(c) = cli.cap {
        cfg.cap = Some(c);
    }
    execute(&command, cfg, &source, workers, &cli.out)
}

fn command_list() -> String {
    let mut s = String::from("Commands:\n");
    for c in registry() {
        s.push_str(&format!("  {:<20} {}\n", c.name(), c.about()));
    }
    s.push_str(&format!("  {:<20} {}\n", "replay", "rerun a manifest"));
    s
}

/// Entry point for the binary; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().after_help(command_list()).try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    match run(cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, ValueEnum};
use serde_json::json;

use horseshoe_cli::commands::{self, Outcome};
use horseshoe_cli::config::{self, RunConfig};
use horseshoe_cli::output::{Output, TOOL, VERSION};

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Command {
    Portrait,
    Admissible,
    FliMap,
    FixedPoints,
    Manifolds,
    Horseshoe,
    FlowCheck,
    SecularPortrait,
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Portrait => "portrait",
            Command::Admissible => "admissible",
            Command::FliMap => "fli_map",
            Command::FixedPoints => "fixed_points",
            Command::Manifolds => "manifolds",
            Command::Horseshoe => "horseshoe",
            Command::FlowCheck => "flow_check",
            Command::SecularPortrait => "secular_portrait",
            Command::Validate => "validate",
        }
    }

    fn run(self, cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
        match self {
            Command::Portrait => commands::portrait(cfg, out),
            Command::Admissible => commands::admissible(cfg, out),
            Command::FliMap => commands::fli(cfg, out),
            Command::FixedPoints => commands::fixed_points(cfg, out),
            Command::Manifolds => commands::manifolds(cfg, out),
            Command::Horseshoe => commands::horseshoe(cfg, out),
            Command::FlowCheck => commands::flow_check(cfg, out),
            Command::SecularPortrait => commands::secular_portrait(cfg, out),
            Command::Validate => commands::validate(cfg, out),
        }
    }
}

/// Numerical experiments on the secular binary-asteroid return map.
#[derive(Debug, Parser)]
#[command(name = "horseshoe-lab", version)]
struct Cli {
    command: Command,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else ./out/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: the config's `workers`, else all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn error_json(command: &str, stage: &str, err: &anyhow::Error) -> serde_json::Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "status": "error",
        "stage": stage,
        "error": err.to_string(),
        "causes": err.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();

    let loaded = match config::load(&cli.config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{}", error_json(name, "config", &e));
            return ExitCode::from(2);
        }
    };
    let cfg = loaded.config;
    if let Some(n) = cli.workers.or(cfg.workers) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", error_json(name, "workers", &e.into()));
            return ExitCode::from(2);
        }
    }
    let dir = cli
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    let mut out = match Output::new(&dir, name, &loaded.hash) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}", error_json(name, "output", &e));
            return ExitCode::from(2);
        }
    };

    match cli.command.run(&cfg, &mut out) {
        Ok(outcome) => {
            let status = match outcome {
                Outcome::Pass => "ok",
                Outcome::Fail => "fail",
            };
            if let Err(e) = out.manifest(status, None) {
                eprintln!("{}", error_json(name, "manifest", &e));
                return ExitCode::from(2);
            }
            match outcome {
                Outcome::Pass => ExitCode::SUCCESS,
                Outcome::Fail => ExitCode::from(1),
            }
        }
        Err(e) => {
            let report = error_json(name, "run", &e);
            eprintln!("{report}");
            // Keep whatever was written so far, and say so.
            let _ = out.json("error.json", &report);
            let _ = out.manifest("error", Some(&e.to_string()));
            ExitCode::from(2)
        }
    }
}

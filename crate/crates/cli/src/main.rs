use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use perclab::config::parse_config;
use perclab::run::{emit_outputs, run_scenario, RunError};
use perclab_core::graph::write_graph;
use perclab_core::Family;

/// Bond percolation experiments on finite transitive graphs.
#[derive(Parser)]
#[command(name = "perclab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write results.csv, report.json, plot.dat.
    Run {
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (falls back to PERCLAB_WORKERS, then one per core).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a graph file, e.g. `perclab gen torus side=10 dim=2 --out g.txt`.
    Gen {
        /// Family name, or a full descriptor such as `torus:side=10,dim=2`.
        family: String,
        /// `key=value` parameters.
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("perclab: {msg}");
    ExitCode::from(code)
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn workers_from_env(flag: Option<usize>) -> Result<usize, String> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match std::env::var("PERCLAB_WORKERS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| format!("PERCLAB_WORKERS: expected a non-negative integer, got `{v}`")),
        _ => Ok(0),
    }
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let mut cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => return fail(2, format!("{}:\n{e}", config.display())),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out = o.display().to_string();
            }
            let workers = match workers_from_env(workers) {
                Ok(w) => w,
                Err(e) => return fail(2, e),
            };
            let result = run_scenario(&cfg, &base_dir(&config), workers)
                .and_then(|run| emit_outputs(&run, Path::new(&cfg.out)).map(|_| run));
            match result {
                Ok(run) => {
                    println!(
                        "{}: wrote {} ({:.2}s, {} workers)",
                        cfg.name, cfg.out, run.report.wall_clock_seconds, run.report.workers
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.exit_code(), e),
            }
        }
        Command::Validate { config } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => return fail(2, format!("{}:\n{e}", config.display())),
            };
            if let perclab::config::GraphSource::File(p) = &cfg.graph {
                let path = base_dir(&config).join(p);
                if let Err(e) = read(&path).and_then(|t| {
                    perclab_core::graph::read_graph(&t)
                        .map_err(|e| fail(2, format!("{}: {e}", path.display())))
                }) {
                    return e;
                }
            }
            println!(
                "{}: ok ({} scenario)",
                config.display(),
                cfg.kind().as_str()
            );
            ExitCode::SUCCESS
        }
        Command::Gen {
            family,
            params,
            out,
        } => {
            let fam = if family.contains(':') {
                if !params.is_empty() {
                    return fail(
                        2,
                        "give parameters either in the descriptor or as key=value, not both",
                    );
                }
                family.parse::<Family>()
            } else {
                let mut kv = Vec::new();
                for p in &params {
                    match p.split_once('=') {
                        Some((k, v)) => kv.push((k.to_string(), v.to_string())),
                        None => return fail(2, format!("expected key=value, got `{p}`")),
                    }
                }
                Family::from_params(&family, &kv)
            };
            let fam = match fam.and_then(|f| f.validate().map(|_| f)) {
                Ok(f) => f,
                Err(e) => return fail(2, e),
            };
            let g = match fam.build() {
                Ok(g) => g,
                Err(e) => return fail(3, e),
            };
            if let Err(e) = std::fs::write(&out, write_graph(&g)) {
                return fail(
                    3,
                    RunError::Io {
                        path: out,
                        source: e,
                    },
                );
            }
            println!("{}: n = {}, m = {}", out.display(), g.n(), g.m());
            ExitCode::SUCCESS
        }
    }
}

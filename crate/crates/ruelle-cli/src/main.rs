//! Experiment runner for the transfer-operator toolkit.
//!
//! `ruelle run <config.toml>` executes one experiment, writes CSV/JSON
//! artifacts into the output directory and exits 0/1/2 for
//! pass/fail/inconclusive (3 on runtime error, 64 on config errors).
//! `ruelle suite <meta.toml>` runs a list of configs; `ruelle describe
//! <experiment>` prints what an experiment computes and its criterion ids.

mod config;
mod experiments;
mod report;

use clap::{Parser, Subcommand};
use config::ExperimentKind;
use report::Status;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ruelle",
    version,
    about = "Transfer-operator experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment config.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $RUELLE_OUT or ./ruelle-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every experiment of a meta-config.
    Suite {
        meta: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent experiments.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Explain an experiment and its criterion ids.
    Describe { experiment: String },
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("RUELLE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ruelle-out"))
}

fn run_single(config_path: &Path, seed: Option<u64>, out_dir: &Path) -> (i32, String) {
    let raw = match std::fs::read(config_path) {
        Ok(b) => b,
        Err(e) => return (64, format!("cannot read {}: {e}", config_path.display())),
    };
    let text = match std::str::from_utf8(&raw) {
        Ok(t) => t,
        Err(e) => return (64, format!("config is not UTF-8: {e}")),
    };
    let cfg = match config::parse_config(text) {
        Ok(c) => c,
        Err(e) => return (64, format!("invalid config: {e}")),
    };
    let seed = seed.unwrap_or(cfg.numerics.seed);
    match experiments::run(&cfg, &raw, seed, out_dir) {
        Ok(report) => {
            let status = report.status;
            let mut lines = vec![format!(
                "{}: {} ({} criteria, artifacts in {})",
                report.experiment,
                match status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Inconclusive => "inconclusive",
                },
                report.criteria.len(),
                out_dir.display()
            )];
            for c in &report.criteria {
                lines.push(format!(
                    "  [{}] {}: {}",
                    if c.pass { "ok" } else { "!!" },
                    c.id,
                    c.detail
                ));
            }
            (status.exit_code(), lines.join("\n"))
        }
        Err(e) => (e.exit_code, e.message),
    }
}

fn cmd_run(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> ExitCode {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    let dir = out_root(out).join(stem);
    let (code, message) = run_single(config, seed, &dir);
    println!("{message}");
    ExitCode::from(code as u8)
}

fn cmd_suite(meta: &Path, seed: Option<u64>, out: Option<PathBuf>, threads: usize) -> ExitCode {
    let text = match std::fs::read_to_string(meta) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", meta.display());
            return ExitCode::from(64);
        }
    };
    let suite = match config::parse_suite(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("invalid meta-config: {e}");
            return ExitCode::from(64);
        }
    };
    let base = meta.parent().unwrap_or(Path::new(".")).to_path_buf();
    let root = out_root(out);
    let jobs: Vec<(String, PathBuf, PathBuf)> = suite
        .experiments
        .iter()
        .map(|e| (e.name.clone(), base.join(&e.config), root.join(&e.name)))
        .collect();

    // experiments are independent and own their output directories; a fixed
    // job order keeps the final summary deterministic regardless of workers
    let threads = threads.max(1);
    let results = std::sync::Mutex::new(Vec::<(usize, String, i32, String)>::new());
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let (name, cfg, dir) = &jobs[i];
                let (code, message) = run_single(cfg, seed, dir);
                results
                    .lock()
                    .unwrap()
                    .push((i, name.clone(), code, message));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|r| r.0);

    let mut worst = Status::Pass;
    let mut summary = Vec::new();
    for (_, name, code, message) in &results {
        let status = match code {
            0 => Status::Pass,
            2 => Status::Inconclusive,
            _ => Status::Fail,
        };
        worst = Status::worst(worst, status);
        println!("=== {name}\n{message}\n");
        summary.push(serde_json::json!({
            "name": name,
            "exit_code": code,
        }));
    }
    let suite_report = serde_json::json!({
        "experiments": summary,
        "status": match worst {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        },
    });
    if std::fs::create_dir_all(&root).is_ok() {
        let mut text =
            serde_json::to_string_pretty(&suite_report).expect("suite report serializes");
        text.push('\n');
        let _ = std::fs::write(root.join("suite_report.json"), text);
    }
    println!(
        "suite: {} ({} experiments)",
        match worst {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Inconclusive => "inconclusive",
        },
        results.len()
    );
    ExitCode::from(worst.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out } => cmd_run(&config, seed, out),
        Command::Suite {
            meta,
            seed,
            out,
            threads,
        } => cmd_suite(&meta, seed, out, threads),
        Command::Describe { experiment } => {
            match ExperimentKind::all()
                .iter()
                .find(|k| k.name() == experiment)
            {
                Some(kind) => {
                    experiments::describe(*kind);
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!(
                        "unknown experiment `{experiment}`; available: {}",
                        ExperimentKind::all()
                            .iter()
                            .map(|k| k.name())
                            .collect::<Vec<_>>()
                            .join(", ")
                    );
                    ExitCode::from(64)
                }
            }
        }
    }
}

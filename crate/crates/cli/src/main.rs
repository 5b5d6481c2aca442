use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fdl_cli::server::{router, AppState};
use fdl_core::config::Config;
use fdl_core::eval::{evaluate, parse_labels, parse_queries};
use fdl_core::ingest::IngestError;
use fdl_core::pipeline::{ingest, write_snapshot, Engine, EngineError, SearchRequest};
use fdl_core::synth::{Fixtures, DEFAULT_SEED};

/// Knowledge-graph search for doctors and locations.
#[derive(Parser)]
#[command(name = "fdl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and validate the graph and keyword index, then write the snapshot.
    Ingest {
        #[arg(long)]
        config: PathBuf,
    },
    /// Answer one question and print the response JSON.
    Query {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long, allow_hyphen_values = true)]
        lat: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lon: Option<f64>,
        #[arg(long)]
        city: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare keyword-only and hybrid coverage over a query file.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        min_gained: Option<usize>,
    },
    /// Regenerate the fixture records, lexicon, queries and labels.
    GenFixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(value).expect("serializable"))
}

fn cmd_ingest(config: &Config) -> Result<ExitCode> {
    match ingest(config) {
        Ok((graph, index, report)) => {
            write_snapshot(&config.snapshot_dir, &graph, &index)?;
            print_json(&report)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(EngineError::Ingest(IngestError::Strict(report))) => {
            print_json(&*report)?;
            eprintln!(
                "error: ingest failed in strict mode: {} dangling references, {} violations",
                report.dangling_refs.len(),
                report.violations.len()
            );
            Ok(ExitCode::FAILURE)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_query(config: &Config, req: SearchRequest) -> Result<ExitCode> {
    let engine = Engine::load(config)?;
    let resp = engine.search(&req)?;
    emit(&resp.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(config: &Config, queries: &Path, labels: Option<&Path>, min_gained: Option<usize>) -> Result<ExitCode> {
    let queries = parse_queries(&read(queries)?);
    let labels = labels.map(|p| read(p).map(|t| parse_labels(&t))).transpose()?.transpose()?;
    let engine = Engine::load(config)?;
    let report = evaluate(&engine, &queries, labels.as_ref())?;
    print_json(&report)?;
    if report.n_queries == 0 {
        eprintln!("error: the queries file has no queries");
        return Ok(ExitCode::FAILURE);
    }
    let min_gained = min_gained.unwrap_or(config.min_gained);
    if !report.passes(min_gained) {
        eprintln!("error: evaluation below threshold (gained must be >= {min_gained}, hybrid precision >= keyword)");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

async fn cmd_serve(config: &Config) -> Result<ExitCode> {
    let engine = match Engine::load(config) {
        Ok(e) => Some(e),
        Err(EngineError::SnapshotMissing(dir)) => {
            eprintln!("warning: no snapshot in {}; /search returns 503 until ingest runs", dir.display());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let app = router(Arc::new(AppState::new(engine)));
    let addr = format!("{}:{}", config.host, config.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .with_context(|| format!("cannot bind {addr}"))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let load = |path: &Path| Config::load(path).map_err(anyhow::Error::from);
    match cli.command {
        Command::Ingest { config } => cmd_ingest(&load(&config)?),
        Command::Query { config, q, lat, lon, city, k } => {
            cmd_query(&load(&config)?, SearchRequest { q, lat, lon, city, k })
        }
        Command::Serve { config } => {
            let config = load(&config)?;
            tokio::runtime::Runtime::new()?.block_on(cmd_serve(&config))
        }
        Command::Eval { config, queries, labels, min_gained } => {
            cmd_eval(&load(&config)?, &queries, labels.as_deref(), min_gained)
        }
        Command::GenFixtures { out, seed } => {
            Fixtures::generate(seed).write(&out)?;
            eprintln!("wrote fixtures to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

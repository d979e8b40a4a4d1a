use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use futures::stream::{self, StreamExt};
use onboard_cli::{load_traces, trace_from_log_text, Replayer, TraceReport};
use serde_json::json;

/// Replays interaction traces against a running onboarding service.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a trace file or every trace in a directory; prints a JSON report.
    Run {
        traces: PathBuf,
        #[arg(long, env = "ONBOARD_ENDPOINT", default_value = "http://127.0.0.1:8080")]
        endpoint: String,
        /// Traces to run at once. Each trace gets its own session.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Convert an exported session log into a trace.
    FromLog {
        log: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Parse and validate traces without running them.
    Check { traces: PathBuf },
}

fn emit(output: Option<PathBuf>, text: String) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

async fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run {
            traces,
            endpoint,
            jobs,
            output,
        } => {
            let traces = load_traces(&traces)?;
            let replayer = Replayer::new(&endpoint);
            let reports: Vec<TraceReport> = stream::iter(traces.iter().map(|(_, t)| replayer.run_trace(t)))
                .buffered(jobs.max(1))
                .collect::<Vec<_>>()
                .await
                .into_iter()
                .collect::<Result<_, _>>()?;
            let passed = reports.iter().all(|r| r.passed);
            for r in &reports {
                eprintln!(
                    "{} {} ({} ms)",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.duration_ms
                );
            }
            let report = json!({
                "passed": passed,
                "traces": reports.len(),
                "failedTraces": reports.iter().filter(|r| !r.passed).count(),
                "reports": reports,
            });
            emit(output, serde_json::to_string_pretty(&report)?)?;
            Ok(passed)
        }
        Command::FromLog { log, name, output } => {
            let text = std::fs::read_to_string(&log)?;
            let trace = trace_from_log_text(&name, &text)?;
            emit(output, serde_json::to_string_pretty(&trace)?)?;
            Ok(true)
        }
        Command::Check { traces } => {
            for (path, trace) in load_traces(&traces)? {
                println!(
                    "{}: {} ({:?}/{:?}, {} steps)",
                    path.display(),
                    trace.name,
                    trace.task_type,
                    trace.difficulty,
                    trace.steps.len()
                );
            }
            Ok(true)
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    match run(Cli::parse()).await {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

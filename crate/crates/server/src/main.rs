use std::path::PathBuf;

use clap::Parser;
use onboard_core::ProviderMode;
use onboard_server::{serve, AppState, Overrides, ServerConfig};
use tracing_subscriber::EnvFilter;

/// Dashboard onboarding assistant HTTP server.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
    /// Chat provider: mock or http.
    #[arg(long)]
    provider: Option<ProviderMode>,
    /// Dashboard document to preload. Repeatable.
    #[arg(long = "dashboard")]
    dashboards: Vec<PathBuf>,
    /// Directory for persisted dashboards and session logs.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();
    let overrides = Overrides {
        port: args.port,
        provider: args.provider,
        dashboards: args.dashboards,
        data_dir: args.data_dir,
    };
    let config = ServerConfig::load(args.config.as_deref(), |k| std::env::var(k).ok(), overrides)?;
    let state = AppState::from_config(&config)?;
    let addr = config.socket_addr()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, provider = ?config.provider.mode, dashboards = ?state.assistant.dashboard_ids(), "listening");
    serve(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}

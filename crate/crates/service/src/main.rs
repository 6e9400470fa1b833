use std::net::SocketAddr;
use std::path::PathBuf;

use braids_service::settings::default_redirect_uri;
use braids_service::{AppState, Obfuscator, ServiceConfig, SessionStore};
use clap::Parser;
use tracing::{info, warn};
use tracing_subscriber::EnvFilter;

/// Curated unified feed for Mastodon.
#[derive(Debug, Parser)]
#[command(name = "braids", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Session store file.
    #[arg(long, default_value = "braids-sessions.json")]
    session_store: PathBuf,
    /// OAuth redirect URI; defaults to the callback on the listen address.
    #[arg(long)]
    redirect_uri: Option<url::Url>,
    /// Log filter, e.g. `info` or `braids_service=debug`.
    #[arg(long, default_value = "info")]
    log_level: String,
    /// Directory with the built UI bundle, served at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Days a login stays valid.
    #[arg(long, default_value_t = 30)]
    session_ttl_days: i64,
    /// Secret for sealing tokens at rest.
    #[arg(long, env = "BRAIDS_SECRET", hide_env_values = true)]
    secret: Option<String>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_new(&args.log_level)?)
        .init();

    let obfuscator = match &args.secret {
        Some(s) if !s.is_empty() => Obfuscator::new(s),
        _ => {
            warn!("BRAIDS_SECRET not set; sessions will not survive a restart");
            Obfuscator::ephemeral()
        }
    };
    let store = SessionStore::open(&args.session_store, obfuscator)?;

    let mut settings = ServiceConfig::new(args.listen);
    settings.redirect_uri = args
        .redirect_uri
        .unwrap_or_else(|| default_redirect_uri(args.listen));
    settings.session_store = Some(args.session_store);
    settings.static_dir = args.static_dir;
    settings.session_ttl = chrono::Duration::days(args.session_ttl_days);

    let listener = tokio::net::TcpListener::bind(args.listen).await?;
    info!(addr = %listener.local_addr()?, redirect = %settings.redirect_uri, "listening");
    let state = AppState::new(settings, store);
    braids_service::serve(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;

/// Serve a corpus as a fake Mastodon instance.
#[derive(Debug, Parser)]
#[command(name = "mock-instance", version)]
struct Args {
    /// Corpus JSON file; the built-in demo corpus when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 4000)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    let args = Args::parse();
    let corpus = match &args.corpus {
        Some(path) => braids_mock::Corpus::load(path)?,
        None => braids_mock::fixture(),
    };
    let server = braids_mock::serve_on(corpus, SocketAddr::new(args.host, args.port)).await?;
    tracing::info!("mock instance listening on {}", server.url());
    println!("{}", server.url());
    tokio::signal::ctrl_c().await?;
    server.stop().await;
    Ok(())
}

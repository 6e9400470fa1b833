//! HTTP service that serves a curated, unified Mastodon feed.

pub mod api;
pub mod feed;
pub mod secret;
pub mod session;
pub mod settings;
pub mod store;
pub mod wire;

pub use api::{router, ApiError, AppState, ConfigAck};
pub use feed::{get_feed, AssembledPage, FeedError};
pub use secret::Obfuscator;
pub use session::{FollowCache, SessionState, FOLLOW_CACHE_TTL};
pub use settings::{ServiceConfig, SESSION_COOKIE};
pub use store::{SessionHandle, SessionStore, StoreError};
pub use wire::{FeedResponse, SourceWarning, WirePost};

use std::future::Future;

use tokio::net::TcpListener;

/// Serves the API on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

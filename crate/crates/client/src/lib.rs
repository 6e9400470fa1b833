//! Read-only client for Mastodon-compatible servers.
//!
//! Covers the authorization-code OAuth flow (scope `read` only), the home,
//! local and trending timelines, per-account statuses, account lookup and
//! follow checks. Statuses are mapped onto [`braids_core::Post`].

pub mod client;
pub mod cursor;
pub mod entities;
pub mod error;
pub mod oauth;

pub use client::{
    http_client, MastodonClient, RetryPolicy, MAX_LIMIT, RELATIONSHIP_BATCH, REQUEST_TIMEOUT,
};
pub use cursor::PageCursor;
pub use entities::html_to_text;
pub use error::{ClientError, Result};
pub use oauth::{
    authorization_url, begin_authorization, parse_instance_url, register_app, InstanceCredentials,
    SCOPE,
};

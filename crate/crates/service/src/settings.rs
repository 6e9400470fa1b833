//! Runtime settings of the service.

use std::net::SocketAddr;
use std::path::PathBuf;

use braids_client::RetryPolicy;
use chrono::Duration;
use url::Url;

pub const SESSION_COOKIE: &str = "braids_session";
pub const DEFAULT_SESSION_TTL: Duration = Duration::days(30);
/// How long a started login may take before its state is forgotten.
pub const LOGIN_TTL: std::time::Duration = std::time::Duration::from_secs(600);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// `None` keeps sessions in memory only.
    pub session_store: Option<PathBuf>,
    /// Must point at this service's `/api/v1/auth/callback`.
    pub redirect_uri: Url,
    /// Built UI bundle served at `/`.
    pub static_dir: Option<PathBuf>,
    pub session_ttl: Duration,
    pub retry: RetryPolicy,
}

impl ServiceConfig {
    pub fn new(listen: SocketAddr) -> Self {
        Self {
            listen,
            session_store: None,
            redirect_uri: default_redirect_uri(listen),
            static_dir: None,
            session_ttl: DEFAULT_SESSION_TTL,
            retry: RetryPolicy::default(),
        }
    }

    /// Cookies are marked `Secure` when the service is reached over https.
    pub fn secure_cookies(&self) -> bool {
        self.redirect_uri.scheme() == "https"
    }
}

pub fn default_redirect_uri(listen: SocketAddr) -> Url {
    let host = if listen.ip().is_unspecified() {
        "127.0.0.1".to_owned()
    } else {
        listen.ip().to_string()
    };
    let host = if listen.is_ipv6() && !listen.ip().is_unspecified() {
        format!("[{host}]")
    } else {
        host
    };
    Url::parse(&format!(
        "http://{host}:{}/api/v1/auth/callback",
        listen.port()
    ))
    .expect("callback url is valid")
}

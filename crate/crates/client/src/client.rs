use std::collections::BTreeSet;
use std::time::Duration;

use braids_core::{AccountHandle, Post, SourceCategory};
use reqwest::{RequestBuilder, Response, StatusCode};
use serde::de::DeserializeOwned;
use tracing::{debug, warn};

use crate::cursor::PageCursor;
use crate::entities::{Relationship, SearchResults, Status, TokenResponse};
use crate::error::{ClientError, Result};
use crate::oauth::{InstanceCredentials, SCOPE};

/// Largest page any timeline endpoint accepts.
pub const MAX_LIMIT: usize = 40;
/// Upper bound on ids per relationships call.
pub const RELATIONSHIP_BATCH: usize = 40;
pub const REQUEST_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    /// Extra attempts after a 429.
    pub max_retries: u32,
    /// Wait used when the server sends no `Retry-After`; doubles per retry.
    pub base_backoff: Duration,
    pub max_wait: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 2,
            base_backoff: Duration::from_millis(500),
            max_wait: Duration::from_secs(10),
        }
    }
}

pub fn http_client() -> reqwest::Client {
    reqwest::Client::builder()
        .timeout(REQUEST_TIMEOUT)
        .user_agent(concat!("braids/", env!("CARGO_PKG_VERSION")))
        .build()
        .expect("static client configuration")
}

/// A read-only session against one instance.
#[derive(Debug, Clone)]
pub struct MastodonClient {
    http: reqwest::Client,
    credentials: InstanceCredentials,
    retry: RetryPolicy,
}

impl MastodonClient {
    pub fn new(credentials: InstanceCredentials) -> Self {
        Self::with_http(http_client(), credentials)
    }

    pub fn with_http(http: reqwest::Client, credentials: InstanceCredentials) -> Self {
        Self {
            http,
            credentials,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn credentials(&self) -> &InstanceCredentials {
        &self.credentials
    }

    pub fn into_credentials(self) -> InstanceCredentials {
        self.credentials
    }

    fn host(&self) -> String {
        self.credentials.instance_host()
    }

    /// Trades an authorization code for a bearer token and keeps it.
    pub async fn exchange_code(&mut self, code: &str, redirect_uri: &url::Url) -> Result<String> {
        if code.trim().is_empty() {
            return Err(ClientError::InvalidArgument(
                "authorization code is empty".into(),
            ));
        }
        let url = self.credentials.endpoint("/oauth/token")?;
        let response = self
            .http
            .post(url)
            .form(&[
                ("grant_type", "authorization_code"),
                ("code", code),
                ("client_id", &self.credentials.client_id),
                ("client_secret", &self.credentials.client_secret),
                ("redirect_uri", redirect_uri.as_str()),
                ("scope", SCOPE),
            ])
            .send()
            .await
            .map_err(|source| self.network(source))?;
        let status = response.status();
        if status.is_client_error() {
            return Err(ClientError::Auth {
                status: status.as_u16(),
                message: response.text().await.unwrap_or_default(),
            });
        }
        let token: TokenResponse = decode(check(response, "token").await?, "token").await?;
        if let Some(granted) = &token.scope {
            if !granted.split_whitespace().any(|s| s == SCOPE) {
                return Err(ClientError::Config(format!(
                    "server granted scope `{granted}` instead of `{SCOPE}`"
                )));
            }
        }
        self.credentials.access_token = Some(token.access_token.clone());
        Ok(token.access_token)
    }

    pub async fn fetch_home(
        &self,
        cursor: &PageCursor,
        limit: usize,
    ) -> Result<(Vec<Post>, PageCursor)> {
        expect_source(cursor, &SourceCategory::FollowingAndHashtags)?;
        self.fetch_chronological("/api/v1/timelines/home", "home", &[], cursor, limit)
            .await
    }

    pub async fn fetch_local(
        &self,
        cursor: &PageCursor,
        limit: usize,
    ) -> Result<(Vec<Post>, PageCursor)> {
        expect_source(cursor, &SourceCategory::Local)?;
        self.fetch_chronological(
            "/api/v1/timelines/public",
            "public",
            &[("local", "true".to_owned())],
            cursor,
            limit,
        )
        .await
    }

    /// Trending statuses in the server's ranking order.
    pub async fn fetch_trending(
        &self,
        cursor: &PageCursor,
        limit: usize,
    ) -> Result<(Vec<Post>, PageCursor)> {
        expect_source(cursor, &SourceCategory::Trending)?;
        check_limit(limit)?;
        let offset = cursor.offset.unwrap_or(0);
        let statuses: Vec<Status> = self
            .get(
                "/api/v1/trends/statuses",
                "trends",
                &[("limit", limit.to_string()), ("offset", offset.to_string())],
            )
            .await?;
        let posts = self.to_posts(statuses);
        let next = cursor.advance(None, posts.len());
        Ok((posts, next))
    }

    pub async fn fetch_account_statuses(
        &self,
        account_id: &str,
        cursor: &PageCursor,
        limit: usize,
    ) -> Result<(Vec<Post>, PageCursor)> {
        if cursor.source.account().is_none() {
            return Err(ClientError::InvalidArgument(format!(
                "cursor for {} used on an account timeline",
                cursor.source
            )));
        }
        if account_id.is_empty() || account_id.contains('/') {
            return Err(ClientError::InvalidArgument(format!(
                "bad account id `{account_id}`"
            )));
        }
        let path = format!("/api/v1/accounts/{account_id}/statuses");
        self.fetch_chronological(&path, "account_statuses", &[], cursor, limit)
            .await
    }

    /// Fetches one page of any source. Prioritized accounts need their
    /// resolved upstream id.
    pub async fn fetch_source(
        &self,
        cursor: &PageCursor,
        account_id: Option<&str>,
        limit: usize,
    ) -> Result<(Vec<Post>, PageCursor)> {
        match &cursor.source {
            SourceCategory::FollowingAndHashtags => self.fetch_home(cursor, limit).await,
            SourceCategory::Local => self.fetch_local(cursor, limit).await,
            SourceCategory::Trending => self.fetch_trending(cursor, limit).await,
            SourceCategory::PrioritizedAccount(handle) => {
                let id = account_id.ok_or_else(|| ClientError::NotFound(handle.to_string()))?;
                self.fetch_account_statuses(id, cursor, limit).await
            }
        }
    }

    /// Looks up the upstream account id for `user@domain`, or for a bare
    /// username on this instance.
    pub async fn resolve_account(&self, handle: &str) -> Result<String> {
        let host = self.host();
        let parsed = AccountHandle::parse_with_default_domain(handle, &host)
            .map_err(|e| ClientError::InvalidArgument(e.to_string()))?;
        let bare = !handle.trim().trim_start_matches('@').contains('@');
        let query = if bare {
            format!("@{}", parsed.user())
        } else {
            format!("@{parsed}")
        };
        let results: SearchResults = self
            .get(
                "/api/v2/search",
                "search",
                &[
                    ("q", query),
                    ("type", "accounts".to_owned()),
                    ("resolve", "true".to_owned()),
                    ("limit", "5".to_owned()),
                ],
            )
            .await?;
        results
            .accounts
            .into_iter()
            .find(|a| {
                if bare {
                    // local accounts come back without a domain
                    a.acct.eq_ignore_ascii_case(parsed.user())
                } else {
                    a.qualified_handle(&host) == parsed.as_str()
                }
            })
            .map(|a| a.id)
            .ok_or_else(|| ClientError::NotFound(handle.trim().to_owned()))
    }

    /// The subset of `author_ids` the authenticated user follows. Queries
    /// are split into batches of [`RELATIONSHIP_BATCH`].
    pub async fn check_follows(&self, author_ids: &[String]) -> Result<BTreeSet<String>> {
        let mut unique: Vec<&String> = Vec::new();
        let mut dedup = BTreeSet::new();
        for id in author_ids {
            if dedup.insert(id) {
                unique.push(id);
            }
        }
        let mut followed = BTreeSet::new();
        for batch in unique.chunks(RELATIONSHIP_BATCH) {
            let query: Vec<(&str, String)> =
                batch.iter().map(|id| ("id[]", (*id).clone())).collect();
            let rels: Vec<Relationship> = self
                .get("/api/v1/accounts/relationships", "relationships", &query)
                .await?;
            followed.extend(
                rels.into_iter()
                    .filter(|r| r.following && dedup.contains(&r.id))
                    .map(|r| r.id),
            );
        }
        Ok(followed)
    }

    async fn fetch_chronological(
        &self,
        path: &str,
        endpoint: &'static str,
        extra: &[(&str, String)],
        cursor: &PageCursor,
        limit: usize,
    ) -> Result<(Vec<Post>, PageCursor)> {
        check_limit(limit)?;
        let mut query: Vec<(&str, String)> = extra.to_vec();
        query.push(("limit", limit.to_string()));
        if let Some(max_id) = &cursor.max_id {
            query.push(("max_id", max_id.clone()));
        }
        let statuses: Vec<Status> = self.get(path, endpoint, &query).await?;
        let posts = self.to_posts(statuses);
        let next = cursor.advance(posts.last().map(|p| p.id.as_str()), posts.len());
        Ok((posts, next))
    }

    fn to_posts(&self, statuses: Vec<Status>) -> Vec<Post> {
        let host = self.host();
        statuses.into_iter().map(|s| s.into_post(&host)).collect()
    }

    async fn get<T: DeserializeOwned>(
        &self,
        path: &str,
        endpoint: &'static str,
        query: &[(&str, String)],
    ) -> Result<T> {
        let url = self.credentials.endpoint(path)?;
        let mut attempt = 0;
        loop {
            let mut req = self.http.get(url.clone()).query(query);
            req = self.authorize(req);
            debug!(%url, attempt, "upstream GET");
            let response = req.send().await.map_err(|source| self.network(source))?;
            match check(response, endpoint).await {
                Err(ClientError::RateLimited { retry_after })
                    if attempt < self.retry.max_retries =>
                {
                    let wait = retry_after
                        .unwrap_or(self.retry.base_backoff * 2u32.pow(attempt))
                        .min(self.retry.max_wait);
                    warn!(endpoint, ?wait, "rate limited, retrying");
                    tokio::time::sleep(wait).await;
                    attempt += 1;
                }
                Err(e) => return Err(e),
                Ok(response) => return decode(response, endpoint).await,
            }
        }
    }

    fn authorize(&self, req: RequestBuilder) -> RequestBuilder {
        match &self.credentials.access_token {
            Some(token) => req.bearer_auth(token),
            None => req,
        }
    }

    fn network(&self, source: reqwest::Error) -> ClientError {
        ClientError::Network {
            url: self.credentials.instance_base_url.to_string(),
            source,
        }
    }
}

fn check_limit(limit: usize) -> Result<()> {
    if (1..=MAX_LIMIT).contains(&limit) {
        Ok(())
    } else {
        Err(ClientError::InvalidArgument(format!(
            "limit {limit} outside 1..={MAX_LIMIT}"
        )))
    }
}

fn expect_source(cursor: &PageCursor, want: &SourceCategory) -> Result<()> {
    if &cursor.source == want {
        Ok(())
    } else {
        Err(ClientError::InvalidArgument(format!(
            "cursor for {} used on the {want} timeline",
            cursor.source
        )))
    }
}

async fn check(response: Response, endpoint: &'static str) -> Result<Response> {
    let status = response.status();
    if status.is_success() {
        return Ok(response);
    }
    if status == StatusCode::TOO_MANY_REQUESTS {
        let retry_after = response
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        return Err(ClientError::RateLimited { retry_after });
    }
    let body = response.text().await.unwrap_or_default();
    if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
        return Err(ClientError::Auth {
            status: status.as_u16(),
            message: body,
        });
    }
    Err(ClientError::Upstream {
        endpoint,
        status: status.as_u16(),
        body,
    })
}

async fn decode<T: DeserializeOwned>(response: Response, endpoint: &'static str) -> Result<T> {
    let bytes = response.bytes().await.map_err(|e| ClientError::Decode {
        endpoint,
        message: e.to_string(),
    })?;
    serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode {
        endpoint,
        message: e.to_string(),
    })
}

//! HTTP routes under `/api/v1`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Redirect, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use braids_client::{
    authorization_url, parse_instance_url, register_app, ClientError, InstanceCredentials,
    MastodonClient,
};
use braids_core::{AccountHandle, CurationConfig};
use chrono::Utc;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;
use tracing::{info, warn};

use crate::feed::{get_feed, FeedError};
use crate::session::SessionState;
use crate::settings::{ServiceConfig, LOGIN_TTL, SESSION_COOKIE};
use crate::store::{SessionHandle, SessionStore, StoreError};
use crate::wire::FeedResponse;

/// Error body: `{"error": code, "message": text, "details": ...}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    fn unauthenticated() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthenticated", "log in first")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(details) = self.details {
            body["details"] = details;
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        warn!(error = %e, "session store failed");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "store", e.to_string())
    }
}

struct PendingLogin {
    credentials: InstanceCredentials,
    started: Instant,
}

#[derive(Clone)]
pub struct AppState {
    settings: Arc<ServiceConfig>,
    store: Arc<SessionStore>,
    http: reqwest::Client,
    pending: Arc<Mutex<HashMap<String, PendingLogin>>>,
}

impl AppState {
    pub fn new(settings: ServiceConfig, store: SessionStore) -> Self {
        Self {
            settings: Arc::new(settings),
            store: Arc::new(store),
            http: braids_client::http_client(),
            pending: Arc::default(),
        }
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn settings(&self) -> &ServiceConfig {
        &self.settings
    }

    fn client(&self, credentials: &InstanceCredentials) -> MastodonClient {
        MastodonClient::with_http(self.http.clone(), credentials.clone())
            .with_retry(self.settings.retry)
    }

    async fn session(&self, headers: &HeaderMap) -> Result<(SessionHandle, String), ApiError> {
        let id = session_cookie(headers).ok_or_else(ApiError::unauthenticated)?;
        let handle = self.store.get(&id).ok_or_else(ApiError::unauthenticated)?;
        let expired = handle
            .lock()
            .await
            .is_expired(Utc::now(), self.settings.session_ttl);
        if expired {
            self.store.remove(&id)?;
            return Err(ApiError::new(
                StatusCode::UNAUTHORIZED,
                "session_expired",
                "session expired, log in again",
            ));
        }
        Ok((handle, id))
    }
}

fn session_cookie(headers: &HeaderMap) -> Option<String> {
    headers
        .get_all(header::COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(';'))
        .filter_map(|pair| pair.trim().split_once('='))
        .find(|(name, _)| *name == SESSION_COOKIE)
        .map(|(_, value)| value.to_owned())
        .filter(|v| !v.is_empty())
}

fn random_token() -> String {
    let mut bytes = [0u8; 32];
    rand::rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/feed", get(feed))
        .route("/config", get(get_config).put(put_config))
        .route("/auth/login", get(login))
        .route("/auth/callback", get(callback))
        .route("/auth/logout", post(logout));
    let router = Router::new().nest("/api/v1", api);
    let router = match &state.settings.static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router.route("/", get(explainer)),
    };
    router.with_state(state)
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn explainer() -> Html<&'static str> {
    Html(include_str!("explainer.html"))
}

#[derive(Debug, Deserialize)]
struct FeedQuery {
    #[serde(default)]
    first_page: bool,
    seed: Option<u64>,
}

async fn feed(
    State(state): State<AppState>,
    headers: HeaderMap,
    query: Result<Query<FeedQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<FeedResponse>, ApiError> {
    let (handle, _) = state.session(&headers).await?;
    let Query(query) =
        query.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_query", e.body_text()))?;
    let mut session = handle.lock().await;
    let client = state.client(&session.credentials);
    let seed = query.seed.unwrap_or_else(|| rand::rng().next_u64());
    let page = get_feed(&mut session, &client, query.first_page, seed, Utc::now())
        .await
        .map_err(|e| match e {
            FeedError::AllSourcesFailed(warnings) => ApiError::new(
                StatusCode::BAD_GATEWAY,
                "all_sources_failed",
                "no source could be fetched",
            )
            .with_details(json!(warnings)),
        })?;
    state.store.save(&session)?;
    Ok(Json(FeedResponse::new(
        &page.page,
        page.seed,
        page.warnings,
    )))
}

async fn get_config(
    State(state): State<AppState>,
    headers: HeaderMap,
) -> Result<Json<CurationConfig>, ApiError> {
    let (handle, _) = state.session(&headers).await?;
    let config = handle.lock().await.config.clone();
    Ok(Json(config))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigAck {
    pub config: CurationConfig,
    /// Prioritized handles that could not be found on the instance.
    pub unresolved: Vec<AccountHandle>,
}

async fn put_config(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Result<Json<CurationConfig>, JsonRejection>,
) -> Result<Json<ConfigAck>, ApiError> {
    let (handle, _) = state.session(&headers).await?;
    let Json(config) = body.map_err(|e| {
        let status = match e {
            JsonRejection::JsonDataError(_) => StatusCode::UNPROCESSABLE_ENTITY,
            JsonRejection::MissingJsonContentType(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, "invalid_config", e.body_text())
    })?;
    config.validate().map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_config",
            e.to_string(),
        )
    })?;

    let mut session = handle.lock().await;
    let client = state.client(&session.credentials);
    let mut ids = BTreeMap::new();
    let mut unresolved = Vec::new();
    for account in &config.accounts {
        let known = session.account_ids.get(&account.handle).cloned().flatten();
        let id = match known {
            Some(id) => Some(id),
            None => match client.resolve_account(account.handle.as_str()).await {
                Ok(id) => Some(id),
                Err(e) => {
                    warn!(handle = %account.handle, error = %e, "account not resolved");
                    None
                }
            },
        };
        if id.is_none() {
            unresolved.push(account.handle.clone());
        }
        ids.insert(account.handle.clone(), id);
    }
    session.set_config(config.clone(), ids);
    state.store.save(&session)?;
    Ok(Json(ConfigAck { config, unresolved }))
}

#[derive(Debug, Deserialize)]
struct LoginQuery {
    instance: String,
}

async fn login(
    State(state): State<AppState>,
    Query(query): Query<LoginQuery>,
) -> Result<Response, ApiError> {
    let instance = parse_instance_url(&query.instance)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_instance", e.to_string()))?;
    let redirect = &state.settings.redirect_uri;
    let credentials = match state.store.app(&instance, redirect) {
        Some(c) => c,
        None => {
            let c = register_app(&state.http, &instance, redirect)
                .await
                .map_err(|e| {
                    ApiError::new(
                        StatusCode::BAD_GATEWAY,
                        "registration_failed",
                        e.to_string(),
                    )
                })?;
            state.store.save_app(redirect, &c)?;
            c
        }
    };
    let login_state = random_token();
    let url = authorization_url(&credentials, redirect, Some(&login_state))
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_instance", e.to_string()))?;
    {
        let mut pending = state.pending.lock().unwrap();
        pending.retain(|_, p| p.started.elapsed() < LOGIN_TTL);
        pending.insert(
            login_state,
            PendingLogin {
                credentials,
                started: Instant::now(),
            },
        );
    }
    Ok(Redirect::to(url.as_str()).into_response())
}

#[derive(Debug, Deserialize)]
struct CallbackQuery {
    code: Option<String>,
    state: Option<String>,
    error: Option<String>,
}

async fn callback(
    State(state): State<AppState>,
    Query(query): Query<CallbackQuery>,
) -> Result<Response, ApiError> {
    // States stay valid until they expire; a replayed code is refused by
    // the instance itself.
    let credentials = query
        .state
        .as_deref()
        .and_then(|s| {
            state
                .pending
                .lock()
                .unwrap()
                .get(s)
                .filter(|p| p.started.elapsed() < LOGIN_TTL)
                .map(|p| p.credentials.clone())
        })
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "bad_state",
                "unknown or expired login state",
            )
        })?;
    if let Some(error) = query.error {
        return Err(ApiError::new(
            StatusCode::UNAUTHORIZED,
            "authorization_denied",
            error,
        ));
    }
    let code = query.code.unwrap_or_default();
    let mut client = state.client(&credentials);
    client
        .exchange_code(&code, &state.settings.redirect_uri)
        .await
        .map_err(|e: ClientError| {
            ApiError::new(StatusCode::UNAUTHORIZED, "exchange_failed", e.to_string())
        })?;

    let session_id = random_token();
    let session = SessionState::new(session_id.clone(), client.into_credentials(), Utc::now());
    info!(instance = %session.credentials.instance_base_url, "login");
    state.store.insert(session)?;

    let mut cookie = format!(
        "{SESSION_COOKIE}={session_id}; HttpOnly; SameSite=Lax; Path=/; Max-Age={}",
        state.settings.session_ttl.num_seconds().max(0)
    );
    if state.settings.secure_cookies() {
        cookie.push_str("; Secure");
    }
    let mut response = Redirect::to("/").into_response();
    response.headers_mut().insert(
        header::SET_COOKIE,
        HeaderValue::from_str(&cookie).expect("cookie is ascii"),
    );
    Ok(response)
}

async fn logout(State(state): State<AppState>, headers: HeaderMap) -> Result<Response, ApiError> {
    if let Some(id) = session_cookie(&headers) {
        state.store.remove(&id)?;
    }
    let mut response = StatusCode::NO_CONTENT.into_response();
    response.headers_mut().insert(
        header::SET_COOKIE,
        HeaderValue::from_static("braids_session=; HttpOnly; SameSite=Lax; Path=/; Max-Age=0"),
    );
    Ok(response)
}

//! HTTP surface of the mock instance.
//!
//! Responses depend only on the corpus, the request and how many times each
//! endpoint has been called, so repeated runs produce identical logs.

#![allow(clippy::result_large_err)]

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Redirect, Response};
use axum::routing::{get, post};
use axum::{Form, Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::corpus::{Corpus, Endpoint, MockAccount, MockPost};
use crate::streams;

const DEFAULT_LIMIT: usize = 20;
const MAX_LIMIT: usize = 40;

/// One request as the mock saw it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoggedRequest {
    pub endpoint: Endpoint,
    pub method: String,
    pub path: String,
    pub query: Vec<(String, String)>,
    pub authorization: Option<String>,
    /// Form fields of POST bodies.
    pub form: Vec<(String, String)>,
}

impl LoggedRequest {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.query
            .iter()
            .chain(&self.form)
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone)]
struct RegisteredApp {
    client_id: String,
    client_secret: String,
    redirect_uri: String,
    scopes: String,
}

#[derive(Default)]
struct Runtime {
    calls: HashMap<Endpoint, u32>,
    apps: Vec<RegisteredApp>,
    issued_codes: usize,
    used_codes: BTreeSet<String>,
    log: Vec<LoggedRequest>,
}

struct Shared {
    corpus: Corpus,
    runtime: Mutex<Runtime>,
}

/// A served corpus. Dropping the handle stops the server.
pub struct MockServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    shutdown: Option<oneshot::Sender<()>>,
    task: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn corpus(&self) -> &Corpus {
        &self.shared.corpus
    }

    pub fn request_log(&self) -> Vec<LoggedRequest> {
        self.shared.runtime.lock().unwrap().log.clone()
    }

    pub fn requests_to(&self, endpoint: Endpoint) -> Vec<LoggedRequest> {
        self.request_log()
            .into_iter()
            .filter(|r| r.endpoint == endpoint)
            .collect()
    }

    pub fn clear_log(&self) {
        self.shared.runtime.lock().unwrap().log.clear();
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            let _ = task.await;
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
    }
}

/// Binds `127.0.0.1:port` (0 picks a free port) and serves `corpus`.
pub async fn serve(corpus: Corpus, port: u16) -> std::io::Result<MockServer> {
    serve_on(corpus, SocketAddr::from(([127, 0, 0, 1], port))).await
}

pub async fn serve_on(corpus: Corpus, addr: SocketAddr) -> std::io::Result<MockServer> {
    let listener = TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let shared = Arc::new(Shared {
        corpus,
        runtime: Mutex::new(Runtime::default()),
    });
    let app = router(shared.clone());
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        let _ = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await;
    });
    Ok(MockServer {
        addr,
        shared,
        shutdown: Some(tx),
        task: Some(task),
    })
}

fn router(shared: Arc<Shared>) -> Router {
    Router::new()
        .route("/api/v1/apps", post(create_app))
        .route("/oauth/authorize", get(authorize))
        .route("/oauth/token", post(token))
        .route("/api/v1/timelines/home", get(home))
        .route("/api/v1/timelines/public", get(public))
        .route("/api/v1/trends/statuses", get(trends))
        .route("/api/v1/accounts/relationships", get(relationships))
        .route("/api/v1/accounts/{id}/statuses", get(account_statuses))
        .route("/api/v2/search", get(search))
        .with_state(shared)
}

fn parse_query(raw: Option<&str>) -> Vec<(String, String)> {
    raw.map(|q| {
        url::form_urlencoded::parse(q.as_bytes())
            .into_owned()
            .collect()
    })
    .unwrap_or_default()
}

fn first<'a>(q: &'a [(String, String)], key: &str) -> Option<&'a str> {
    q.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn error(status: StatusCode, message: &str) -> Response {
    (status, Json(json!({ "error": message }))).into_response()
}

struct Call {
    query: Vec<(String, String)>,
    bearer: Option<String>,
}

impl Shared {
    /// Logs the request, bumps the call count and applies any scripted
    /// fault for this call.
    fn begin(
        &self,
        endpoint: Endpoint,
        method: &Method,
        uri: &Uri,
        headers: &HeaderMap,
        form: Vec<(String, String)>,
    ) -> Result<Call, Response> {
        let query = parse_query(uri.query());
        let authorization = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned);
        let call = {
            let mut rt = self.runtime.lock().unwrap();
            rt.log.push(LoggedRequest {
                endpoint,
                method: method.to_string(),
                path: uri.path().to_owned(),
                query: query.clone(),
                authorization: authorization.clone(),
                form,
            });
            let n = rt.calls.entry(endpoint).or_default();
            *n += 1;
            *n
        };
        if let Some(rule) = self
            .corpus
            .faults
            .iter()
            .find(|r| r.endpoint == endpoint && r.fires_on(call))
        {
            let status =
                StatusCode::from_u16(rule.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            let mut resp = error(status, "scripted fault");
            if status == StatusCode::TOO_MANY_REQUESTS {
                let secs = rule.retry_after.unwrap_or(1).to_string();
                resp.headers_mut()
                    .insert(header::RETRY_AFTER, HeaderValue::from_str(&secs).unwrap());
            }
            return Err(resp);
        }
        let bearer = authorization
            .as_deref()
            .and_then(|a| a.strip_prefix("Bearer "))
            .map(str::to_owned);
        Ok(Call { query, bearer })
    }

    fn require_auth(&self, call: &Call) -> Result<(), Response> {
        match &call.bearer {
            Some(t) if *t == self.corpus.oauth.token => Ok(()),
            _ => Err(error(
                StatusCode::UNAUTHORIZED,
                "The access token is invalid",
            )),
        }
    }

    fn account_json(&self, a: &MockAccount) -> Value {
        let acct = if a.domain() == self.corpus.domain {
            a.username().to_owned()
        } else {
            a.handle.clone()
        };
        json!({
            "id": a.id,
            "username": a.username(),
            "acct": acct,
            "display_name": a.username(),
            "url": format!("https://{}/@{}", a.domain(), a.username()),
        })
    }

    fn status_json(&self, p: &MockPost) -> Value {
        let account = self
            .corpus
            .account(&p.account_id)
            .map(|a| self.account_json(a))
            .unwrap_or(Value::Null);
        let reblog = p
            .reblog_of
            .as_deref()
            .and_then(|id| self.corpus.post(id))
            .map(|o| self.status_json(o))
            .unwrap_or(Value::Null);
        let tags: Vec<Value> = p
            .tags
            .iter()
            .map(|t| json!({"name": t, "url": format!("https://{}/tags/{t}", self.corpus.domain)}))
            .collect();
        json!({
            "id": p.id,
            "created_at": p.created_at.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            "content": p.content,
            "visibility": "public",
            "account": account,
            "reblog": reblog,
            "reblogs_count": p.reblogs_count,
            "favourites_count": p.favourites_count,
            "tags": tags,
        })
    }

    fn page(
        &self,
        stream: Vec<&MockPost>,
        query: &[(String, String)],
    ) -> Result<Response, Response> {
        let limit = limit(query)?;
        let stream = streams::older_than(&self.corpus, stream, first(query, "max_id"));
        let body: Vec<Value> = stream
            .into_iter()
            .take(limit)
            .map(|p| self.status_json(p))
            .collect();
        Ok(Json(body).into_response())
    }
}

fn limit(query: &[(String, String)]) -> Result<usize, Response> {
    match first(query, "limit") {
        None => Ok(DEFAULT_LIMIT),
        Some(raw) => raw
            .parse::<usize>()
            .map(|l| l.clamp(1, MAX_LIMIT))
            .map_err(|_| error(StatusCode::UNPROCESSABLE_ENTITY, "bad limit")),
    }
}

fn unwrap(r: Result<Response, Response>) -> Response {
    r.unwrap_or_else(|e| e)
}

#[derive(Debug, Deserialize)]
struct AppForm {
    client_name: Option<String>,
    redirect_uris: String,
    #[serde(default)]
    scopes: Option<String>,
}

async fn create_app(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
    Form(form): Form<AppForm>,
) -> Response {
    let fields = vec![
        (
            "client_name".to_owned(),
            form.client_name.clone().unwrap_or_default(),
        ),
        ("redirect_uris".to_owned(), form.redirect_uris.clone()),
        ("scopes".to_owned(), form.scopes.clone().unwrap_or_default()),
    ];
    unwrap((|| {
        s.begin(Endpoint::Apps, &method, &uri, &headers, fields)?;
        let mut rt = s.runtime.lock().unwrap();
        let n = rt.apps.len() + 1;
        let app = RegisteredApp {
            client_id: format!("mock-client-{n}"),
            client_secret: format!("mock-secret-{n}"),
            redirect_uri: form.redirect_uris.clone(),
            scopes: form.scopes.clone().unwrap_or_else(|| "read".into()),
        };
        rt.apps.push(app.clone());
        Ok(Json(json!({
            "id": n.to_string(),
            "name": form.client_name.unwrap_or_default(),
            "redirect_uri": app.redirect_uri,
            "client_id": app.client_id,
            "client_secret": app.client_secret,
        }))
        .into_response())
    })())
}

/// Approves immediately and redirects back with the next scripted code.
async fn authorize(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    unwrap((|| {
        let call = s.begin(Endpoint::Authorize, &method, &uri, &headers, Vec::new())?;
        let q = &call.query;
        let client_id = first(q, "client_id").unwrap_or_default();
        let redirect = first(q, "redirect_uri").unwrap_or_default();
        let mut rt = s.runtime.lock().unwrap();
        let app = rt
            .apps
            .iter()
            .find(|a| a.client_id == client_id)
            .ok_or_else(|| error(StatusCode::BAD_REQUEST, "unknown client"))?;
        if app.redirect_uri != redirect {
            return Err(error(StatusCode::BAD_REQUEST, "redirect_uri mismatch"));
        }
        if first(q, "response_type") != Some("code") {
            return Err(error(StatusCode::BAD_REQUEST, "unsupported response_type"));
        }
        let code = s
            .corpus
            .oauth
            .valid_codes
            .get(rt.issued_codes)
            .cloned()
            .ok_or_else(|| error(StatusCode::BAD_REQUEST, "no codes left"))?;
        rt.issued_codes += 1;
        let mut target = url::Url::parse(redirect)
            .map_err(|_| error(StatusCode::BAD_REQUEST, "bad redirect_uri"))?;
        target.query_pairs_mut().append_pair("code", &code);
        if let Some(state) = first(q, "state") {
            target.query_pairs_mut().append_pair("state", state);
        }
        Ok(Redirect::to(target.as_str()).into_response())
    })())
}

async fn token(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
    Form(form): Form<Vec<(String, String)>>,
) -> Response {
    unwrap((|| {
        s.begin(Endpoint::Token, &method, &uri, &headers, form.clone())?;
        let field = |k: &str| first(&form, k).unwrap_or_default();
        let invalid = || error(StatusCode::BAD_REQUEST, "invalid_grant");
        if field("grant_type") != "authorization_code" {
            return Err(error(StatusCode::BAD_REQUEST, "unsupported_grant_type"));
        }
        let mut rt = s.runtime.lock().unwrap();
        let app = rt
            .apps
            .iter()
            .find(|a| {
                a.client_id == field("client_id") && a.client_secret == field("client_secret")
            })
            .cloned()
            .ok_or_else(|| error(StatusCode::UNAUTHORIZED, "invalid_client"))?;
        if app.redirect_uri != field("redirect_uri") {
            return Err(invalid());
        }
        let code = field("code");
        if !s.corpus.oauth.valid_codes.iter().any(|c| c == code)
            || !rt.used_codes.insert(code.to_owned())
        {
            return Err(invalid());
        }
        Ok(Json(json!({
            "access_token": s.corpus.oauth.token,
            "token_type": "Bearer",
            "scope": s.corpus.oauth.granted_scope,
            "created_at": s.corpus.now.timestamp(),
            "requested_scope": app.scopes,
        }))
        .into_response())
    })())
}

async fn home(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    unwrap((|| {
        let call = s.begin(Endpoint::Home, &method, &uri, &headers, Vec::new())?;
        s.require_auth(&call)?;
        s.page(streams::home(&s.corpus), &call.query)
    })())
}

async fn public(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    unwrap((|| {
        let call = s.begin(Endpoint::Public, &method, &uri, &headers, Vec::new())?;
        if s.corpus.require_auth_for_public {
            s.require_auth(&call)?;
        }
        let local = first(&call.query, "local") == Some("true");
        s.page(streams::public(&s.corpus, local), &call.query)
    })())
}

async fn trends(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    unwrap((|| {
        let call = s.begin(Endpoint::Trends, &method, &uri, &headers, Vec::new())?;
        let limit = limit(&call.query)?;
        let offset = match first(&call.query, "offset") {
            None => 0,
            Some(o) => o
                .parse::<usize>()
                .map_err(|_| error(StatusCode::UNPROCESSABLE_ENTITY, "bad offset"))?,
        };
        let body: Vec<Value> = streams::trending(&s.corpus)
            .into_iter()
            .skip(offset)
            .take(limit)
            .map(|p| s.status_json(p))
            .collect();
        Ok(Json(body).into_response())
    })())
}

async fn account_statuses(
    State(s): State<Arc<Shared>>,
    Path(id): Path<String>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    unwrap((|| {
        let call = s.begin(
            Endpoint::AccountStatuses,
            &method,
            &uri,
            &headers,
            Vec::new(),
        )?;
        let account = s
            .corpus
            .account(&id)
            .ok_or_else(|| error(StatusCode::NOT_FOUND, "Record not found"))?;
        if account.suspended {
            return Err(error(StatusCode::GONE, "Account is suspended"));
        }
        s.page(streams::account(&s.corpus, &id), &call.query)
    })())
}

async fn relationships(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    unwrap((|| {
        let call = s.begin(Endpoint::Relationships, &method, &uri, &headers, Vec::new())?;
        s.require_auth(&call)?;
        let body: Vec<Value> = call
            .query
            .iter()
            .filter(|(k, _)| k == "id[]" || k == "id")
            .map(|(_, id)| {
                let following = s
                    .corpus
                    .account(id)
                    .is_some_and(|a| a.followed_by_test_user);
                json!({"id": id, "following": following, "followed_by": false})
            })
            .collect();
        Ok(Json(body).into_response())
    })())
}

async fn search(
    State(s): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    unwrap((|| {
        let call = s.begin(Endpoint::Search, &method, &uri, &headers, Vec::new())?;
        s.require_auth(&call)?;
        let q = first(&call.query, "q")
            .unwrap_or_default()
            .trim()
            .trim_start_matches('@');
        let q = q.to_ascii_lowercase();
        let wanted = if q.contains('@') {
            q
        } else {
            format!("{q}@{}", s.corpus.domain)
        };
        let accounts: Vec<Value> = match first(&call.query, "type") {
            None | Some("accounts") => s
                .corpus
                .accounts
                .iter()
                .filter(|a| a.handle == wanted)
                .map(|a| s.account_json(a))
                .collect(),
            Some(_) => Vec::new(),
        };
        Ok(Json(json!({"accounts": accounts, "statuses": [], "hashtags": []})).into_response())
    })())
}

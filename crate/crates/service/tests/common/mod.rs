//! Mock instance plus a running service, driven over real HTTP.
#![allow(dead_code)]

use braids_core::CurationConfig;
use braids_mock::{Corpus, MockServer};
use braids_service::{AppState, FeedResponse, Obfuscator, ServiceConfig, SessionStore};
use reqwest::header::{COOKIE, LOCATION, SET_COOKIE};
use reqwest::{redirect, StatusCode};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use url::Url;

pub struct Harness {
    pub mock: MockServer,
    pub base: Url,
    pub http: reqwest::Client,
    pub state: AppState,
    shutdown: Option<oneshot::Sender<()>>,
    task: Option<JoinHandle<()>>,
}

pub fn no_redirect_client() -> reqwest::Client {
    reqwest::Client::builder()
        .redirect(redirect::Policy::none())
        .build()
        .unwrap()
}

impl Harness {
    pub async fn start(corpus: Corpus) -> Self {
        Self::start_with(corpus, |_| {}).await
    }

    pub async fn start_with(mut corpus: Corpus, tweak: impl FnOnce(&mut ServiceConfig)) -> Self {
        if corpus.oauth.valid_codes.len() < 20 {
            corpus.oauth.valid_codes = (1..=20).map(|i| format!("code-{i}")).collect();
        }
        let mock = braids_mock::serve(corpus, 0).await.unwrap();
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let mut settings = ServiceConfig::new(addr);
        tweak(&mut settings);
        let store = match &settings.session_store {
            Some(path) => SessionStore::open(path, Obfuscator::new("test-secret")).unwrap(),
            None => SessionStore::in_memory(Obfuscator::new("test-secret")),
        };
        let state = AppState::new(settings, store);
        let (tx, rx) = oneshot::channel::<()>();
        let serve_state = state.clone();
        let task = tokio::spawn(async move {
            braids_service::serve(listener, serve_state, async {
                let _ = rx.await;
            })
            .await
            .unwrap();
        });
        Self {
            mock,
            base: Url::parse(&format!("http://{addr}")).unwrap(),
            http: no_redirect_client(),
            state,
            shutdown: Some(tx),
            task: Some(task),
        }
    }

    pub fn url(&self, path: &str) -> Url {
        self.base.join(path).unwrap()
    }

    /// Starts a login and returns the instance authorize URL.
    pub async fn begin_login(&self) -> Url {
        let r = self
            .http
            .get(self.url("/api/v1/auth/login"))
            .query(&[("instance", self.mock.url())])
            .send()
            .await
            .unwrap();
        assert_eq!(
            r.status(),
            StatusCode::SEE_OTHER,
            "login: {:?}",
            r.text().await
        );
        location(&r)
    }

    /// Has the mock approve `authorize` and returns the callback URL it
    /// redirects to.
    pub async fn approve(&self, authorize: &Url) -> Url {
        let r = self.http.get(authorize.clone()).send().await.unwrap();
        assert!(r.status().is_redirection(), "authorize: {}", r.status());
        location(&r)
    }

    pub async fn callback(&self, callback: &Url) -> reqwest::Response {
        self.http.get(callback.clone()).send().await.unwrap()
    }

    /// Full login; returns the `Cookie` header value.
    pub async fn login(&self) -> String {
        let authorize = self.begin_login().await;
        let callback = self.approve(&authorize).await;
        let r = self.callback(&callback).await;
        assert_eq!(r.status(), StatusCode::SEE_OTHER);
        session_cookie(&r).expect("session cookie")
    }

    pub async fn get(&self, path: &str, cookie: &str) -> reqwest::Response {
        self.http
            .get(self.url(path))
            .header(COOKIE, cookie)
            .send()
            .await
            .unwrap()
    }

    pub async fn put_config(&self, cookie: &str, config: &CurationConfig) -> reqwest::Response {
        self.put_config_raw(cookie, serde_json::to_string(config).unwrap())
            .await
    }

    pub async fn put_config_raw(&self, cookie: &str, body: String) -> reqwest::Response {
        self.http
            .put(self.url("/api/v1/config"))
            .header(COOKIE, cookie)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .await
            .unwrap()
    }

    pub async fn feed_raw(
        &self,
        cookie: &str,
        first_page: bool,
        seed: Option<u64>,
    ) -> reqwest::Response {
        let mut url = self.url("/api/v1/feed");
        url.query_pairs_mut()
            .append_pair("first_page", &first_page.to_string());
        if let Some(seed) = seed {
            url.query_pairs_mut().append_pair("seed", &seed.to_string());
        }
        self.http
            .get(url)
            .header(COOKIE, cookie)
            .send()
            .await
            .unwrap()
    }

    pub async fn feed(&self, cookie: &str, first_page: bool, seed: Option<u64>) -> FeedResponse {
        let r = self.feed_raw(cookie, first_page, seed).await;
        assert_eq!(r.status(), StatusCode::OK, "feed: {:?}", r.text().await);
        r.json().await.unwrap()
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            let _ = task.await;
        }
        self.mock.stop().await;
    }
}

pub fn location(r: &reqwest::Response) -> Url {
    let raw = r.headers()[LOCATION].to_str().unwrap();
    Url::parse(raw).unwrap_or_else(|_| r.url().join(raw).unwrap())
}

/// `name=value` of the session cookie set by `r`.
pub fn session_cookie(r: &reqwest::Response) -> Option<String> {
    r.headers()
        .get_all(SET_COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .find(|v| v.starts_with("braids_session="))
        .map(|v| v.split(';').next().unwrap().to_owned())
}

mod common;

use std::collections::BTreeSet;

use braids_core::{AccountHandle, Badge, CurationConfig, PriorityLevel as L, SourceCategory};
use braids_mock::{fixture, Endpoint, FaultRule};
use braids_service::{ConfigAck, FeedResponse};
use common::Harness;
use reqwest::header::SET_COOKIE;
use reqwest::StatusCode;
use serde_json::Value;

#[tokio::test]
async fn healthz() {
    let h = Harness::start(fixture()).await;
    let r = h.http.get(h.url("/api/v1/healthz")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    assert_eq!(r.json::<Value>().await.unwrap()["status"], "ok");
    h.stop().await;
}

#[tokio::test]
async fn login_sets_cookie_and_gives_default_config() {
    let h = Harness::start(fixture()).await;
    let authorize = h.begin_login().await;
    assert_eq!(authorize.path(), "/oauth/authorize");
    assert!(authorize
        .query_pairs()
        .any(|(k, v)| k == "scope" && v == "read"));
    let callback = h.approve(&authorize).await;
    let r = h.callback(&callback).await;
    assert_eq!(r.status(), StatusCode::SEE_OTHER);
    assert_eq!(r.headers()["location"], "/");
    let set = r.headers()[SET_COOKIE].to_str().unwrap().to_owned();
    for attr in ["HttpOnly", "SameSite=Lax", "Path=/"] {
        assert!(set.contains(attr), "{set}");
    }
    let cookie = common::session_cookie(&r).unwrap();

    let r = h.get("/api/v1/config", &cookie).await;
    assert_eq!(r.status(), StatusCode::OK);
    let config: CurationConfig = r.json().await.unwrap();
    assert_eq!(config, CurationConfig::default());
    assert_eq!(
        (
            config.priorities.following,
            config.priorities.local,
            config.priorities.trending
        ),
        (L::High, L::Low, L::Low)
    );
    assert!(config.accounts.is_empty());
    h.stop().await;
}

#[tokio::test]
async fn app_registration_is_reused() {
    let h = Harness::start(fixture()).await;
    h.login().await;
    h.login().await;
    assert_eq!(h.mock.requests_to(Endpoint::Apps).len(), 1);
    h.stop().await;
}

#[tokio::test]
async fn forged_state_is_rejected() {
    let h = Harness::start(fixture()).await;
    let authorize = h.begin_login().await;
    let mut callback = h.approve(&authorize).await;
    let code = callback
        .query_pairs()
        .find(|(k, _)| k == "code")
        .unwrap()
        .1
        .into_owned();
    callback
        .query_pairs_mut()
        .clear()
        .append_pair("code", &code)
        .append_pair("state", "forged");
    assert_eq!(
        h.callback(&callback).await.status(),
        StatusCode::BAD_REQUEST
    );
    let mut no_state = callback.clone();
    no_state
        .query_pairs_mut()
        .clear()
        .append_pair("code", &code);
    assert_eq!(
        h.callback(&no_state).await.status(),
        StatusCode::BAD_REQUEST
    );
    h.stop().await;
}

#[tokio::test]
async fn replayed_code_is_unauthorized() {
    let h = Harness::start(fixture()).await;
    let authorize = h.begin_login().await;
    let callback = h.approve(&authorize).await;
    assert_eq!(h.callback(&callback).await.status(), StatusCode::SEE_OTHER);
    let r = h.callback(&callback).await;
    assert_eq!(r.status(), StatusCode::UNAUTHORIZED);
    assert!(common::session_cookie(&r).is_none());
    h.stop().await;
}

#[tokio::test]
async fn denied_authorization_is_unauthorized() {
    let h = Harness::start(fixture()).await;
    let authorize = h.begin_login().await;
    let state = authorize
        .query_pairs()
        .find(|(k, _)| k == "state")
        .unwrap()
        .1
        .into_owned();
    let mut url = h.url("/api/v1/auth/callback");
    url.query_pairs_mut()
        .append_pair("error", "access_denied")
        .append_pair("state", &state);
    assert_eq!(h.callback(&url).await.status(), StatusCode::UNAUTHORIZED);
    h.stop().await;
}

#[tokio::test]
async fn unknown_and_missing_sessions_are_unauthorized() {
    let h = Harness::start(fixture()).await;
    for path in ["/api/v1/config", "/api/v1/feed?first_page=true"] {
        let r = h.http.get(h.url(path)).send().await.unwrap();
        assert_eq!(r.status(), StatusCode::UNAUTHORIZED, "{path}");
        let body: Value = r.json().await.unwrap();
        assert_eq!(body["error"], "unauthenticated");
        assert_eq!(
            h.get(path, "braids_session=nope").await.status(),
            StatusCode::UNAUTHORIZED
        );
    }
    let r = h
        .put_config("braids_session=nope", &CurationConfig::default())
        .await;
    assert_eq!(r.status(), StatusCode::UNAUTHORIZED);
    h.stop().await;
}

#[tokio::test]
async fn expired_session_is_unauthorized() {
    let h = Harness::start_with(fixture(), |s| s.session_ttl = chrono::Duration::zero()).await;
    let cookie = h.login().await;
    let r = h.get("/api/v1/config", &cookie).await;
    assert_eq!(r.status(), StatusCode::UNAUTHORIZED);
    assert_eq!(r.json::<Value>().await.unwrap()["error"], "session_expired");
    assert!(h.state.store().is_empty());
    h.stop().await;
}

#[tokio::test]
async fn config_round_trip() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    let config = CurationConfig::new(L::Low, L::Medium, L::High)
        .with_account(
            AccountHandle::parse("dave@hachyderm.io").unwrap(),
            L::Medium,
        )
        .with_filter("crypto");
    let r = h.put_config(&cookie, &config).await;
    assert_eq!(r.status(), StatusCode::OK);
    let ack: ConfigAck = r.json().await.unwrap();
    assert_eq!(ack.config, config);
    assert!(ack.unresolved.is_empty());
    let got: CurationConfig = h.get("/api/v1/config", &cookie).await.json().await.unwrap();
    assert_eq!(got, config);
    h.stop().await;
}

#[tokio::test]
async fn invalid_configs_are_rejected() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    let cases = [
        (
            r#"{"priorities":{"following":"VeryHigh","local":"low","trending":"low"}}"#,
            422,
        ),
        (
            r#"{"accounts":[{"handle":"dave@hachyderm.io","level":"low"},{"handle":"Dave@Hachyderm.io","level":"high"}]}"#,
            422,
        ),
        (
            r#"{"accounts":[{"handle":"dave@hachyderm.io","level":"none"}]}"#,
            422,
        ),
        (r#"{"accounts":[{"handle":"dave","level":"low"}]}"#, 422),
        (r#"{"filters":["  "]}"#, 422),
        (r#"{"colour":"blue"}"#, 422),
        (r#"{"priorities":"#, 400),
    ];
    for (body, status) in cases {
        let r = h.put_config_raw(&cookie, body.to_owned()).await;
        assert_eq!(r.status().as_u16(), status, "{body}");
        let err: Value = r.json().await.unwrap();
        assert_eq!(err["error"], "invalid_config", "{body}");
        assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let got: CurationConfig = h.get("/api/v1/config", &cookie).await.json().await.unwrap();
    assert_eq!(got, CurationConfig::default());
    h.stop().await;
}

#[tokio::test]
async fn fixture_feed_pages() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    let first = h.feed(&cookie, true, Some(42)).await;
    assert_eq!(first.seed, "42");
    assert_eq!(first.page_size_requested, 40);
    assert!(!first.posts.is_empty() && first.posts.len() <= 40);
    assert!(first.warnings.is_empty(), "{:?}", first.warnings);

    let second = h.feed(&cookie, false, None).await;
    let ids = |p: &FeedResponse| {
        p.posts
            .iter()
            .map(|p| p.boost_of.clone().unwrap_or(p.id.clone()))
            .collect::<Vec<_>>()
    };
    let a: BTreeSet<_> = ids(&first).into_iter().collect();
    let b: BTreeSet<_> = ids(&second).into_iter().collect();
    assert_eq!(a.len(), first.posts.len());
    assert!(a.is_disjoint(&b), "second page repeats posts");

    for post in first.posts.iter().chain(&second.posts) {
        assert!(post.badge.is_consistent_with(&post.source), "{post:?}");
        chrono::DateTime::parse_from_rfc3339(&post.created_at).unwrap();
    }
    // home shows alice (followed) and carol's #rust posts (hashtag only)
    assert!(first.posts.iter().any(|p| p.badge == Badge::UserYouFollow));
    assert!(first
        .posts
        .iter()
        .any(|p| p.badge == Badge::HashtagYouFollow));
    h.stop().await;
}

#[tokio::test]
async fn single_account_feed() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    let config = CurationConfig::new(L::None, L::None, L::None).with_account(
        AccountHandle::parse("carol@example.social").unwrap(),
        L::High,
    );
    assert_eq!(
        h.put_config(&cookie, &config).await.status(),
        StatusCode::OK
    );
    let carol = h
        .mock
        .corpus()
        .posts
        .iter()
        .filter(|p| p.account_id == "c1")
        .count();
    let page = h.feed(&cookie, true, None).await;
    assert_eq!(page.posts.len(), carol.min(40));
    assert!(!page.ran_out);
    for p in &page.posts {
        assert_eq!(p.author, "carol@example.social");
        assert_eq!(p.badge, Badge::PrioritizedAccount);
        assert!(
            matches!(&p.source, SourceCategory::PrioritizedAccount(a) if a.as_str() == "carol@example.social")
        );
    }
    let next = h.feed(&cookie, false, None).await;
    assert!(next.posts.is_empty());
    assert!(next.ran_out);
    h.stop().await;
}

#[tokio::test]
async fn unresolved_account_warns_and_runs_out() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    let ghost = AccountHandle::parse("ghost@nowhere.example").unwrap();
    let config = CurationConfig::new(L::None, L::Low, L::None).with_account(ghost.clone(), L::Low);
    let ack: ConfigAck = h.put_config(&cookie, &config).await.json().await.unwrap();
    assert_eq!(ack.unresolved, vec![ghost.clone()]);
    let page = h.feed(&cookie, true, None).await;
    assert!(page.ran_out);
    assert_eq!(page.posts.len(), 20);
    assert!(page.posts.iter().all(|p| p.badge == Badge::LocalPost));
    assert_eq!(page.warnings.len(), 1);
    assert_eq!(
        page.warnings[0].source,
        SourceCategory::PrioritizedAccount(ghost)
    );
    h.stop().await;
}

#[tokio::test]
async fn all_sources_failing_is_bad_gateway() {
    let mut corpus = fixture();
    corpus.add_fault(FaultRule {
        endpoint: Endpoint::Trends,
        status: 500,
        after: 0,
        times: u32::MAX,
        retry_after: None,
    });
    let h = Harness::start(corpus).await;
    let cookie = h.login().await;
    let config = CurationConfig::new(L::None, L::None, L::High);
    h.put_config(&cookie, &config).await;
    let r = h.feed_raw(&cookie, true, None).await;
    assert_eq!(r.status(), StatusCode::BAD_GATEWAY);
    let body: Value = r.json().await.unwrap();
    assert_eq!(body["error"], "all_sources_failed");
    assert_eq!(body["details"][0]["source"], "trending");

    // one failing source among several only warns
    h.put_config(&cookie, &CurationConfig::new(L::High, L::None, L::High))
        .await;
    let page = h.feed(&cookie, true, None).await;
    assert_eq!(page.posts.len(), 20);
    assert_eq!(page.warnings.len(), 1);
    assert_eq!(page.warnings[0].source, SourceCategory::Trending);
    assert!(!page.ran_out);
    h.stop().await;
}

#[tokio::test]
async fn rate_limited_source_is_retried() {
    let mut corpus = fixture();
    corpus.add_fault(FaultRule {
        endpoint: Endpoint::Home,
        status: 429,
        after: 0,
        times: 1,
        retry_after: Some(0),
    });
    let h = Harness::start(corpus).await;
    let cookie = h.login().await;
    let page = h.feed(&cookie, true, None).await;
    assert!(page.warnings.is_empty());
    assert_eq!(h.mock.requests_to(Endpoint::Home).len(), 2);
    h.stop().await;
}

#[tokio::test]
async fn all_none_gives_empty_page() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    h.put_config(&cookie, &CurationConfig::new(L::None, L::None, L::None))
        .await;
    h.mock.clear_log();
    let page = h.feed(&cookie, true, None).await;
    assert!(page.posts.is_empty());
    assert!(!page.ran_out);
    assert!(h.mock.request_log().is_empty());
    h.stop().await;
}

#[tokio::test]
async fn bad_feed_query_is_rejected() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    let r = h.get("/api/v1/feed?first_page=maybe", &cookie).await;
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    let r = h.get("/api/v1/feed?seed=-1", &cookie).await;
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    h.stop().await;
}

#[tokio::test]
async fn logout_ends_session() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    let r = h
        .http
        .post(h.url("/api/v1/auth/logout"))
        .header("cookie", &cookie)
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::NO_CONTENT);
    assert_eq!(
        h.get("/api/v1/config", &cookie).await.status(),
        StatusCode::UNAUTHORIZED
    );
    h.stop().await;
}

#[tokio::test]
async fn sessions_survive_restart_with_tokens_sealed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sessions.json");
    let p = path.clone();
    let h = Harness::start_with(fixture(), move |s| s.session_store = Some(p)).await;
    let cookie = h.login().await;
    h.put_config(&cookie, &CurationConfig::new(L::Low, L::Low, L::High))
        .await;
    let raw = std::fs::read_to_string(&path).unwrap();
    assert!(!raw.contains("mock-token"));

    let store =
        braids_service::SessionStore::open(&path, braids_service::Obfuscator::new("test-secret"))
            .unwrap();
    let id = cookie.trim_start_matches("braids_session=");
    let session = store.get(id).expect("session reloaded");
    let session = session.lock().await;
    assert_eq!(
        session.credentials.access_token.as_deref(),
        Some("mock-token")
    );
    assert_eq!(session.config, CurationConfig::new(L::Low, L::Low, L::High));
    h.stop().await;
}

#[tokio::test]
async fn serves_explainer_or_static_bundle() {
    let h = Harness::start(fixture()).await;
    let r = h.http.get(h.url("/")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    assert!(r.text().await.unwrap().contains("How a page is built"));
    h.stop().await;

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>bundle</p>").unwrap();
    let d = dir.path().to_owned();
    let h = Harness::start_with(fixture(), move |s| s.static_dir = Some(d)).await;
    let r = h.http.get(h.url("/")).send().await.unwrap();
    assert_eq!(r.text().await.unwrap(), "<p>bundle</p>");
    let r = h.http.get(h.url("/api/v1/healthz")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    h.stop().await;
}

#[tokio::test]
async fn same_session_requests_are_serialized() {
    let h = Harness::start(fixture()).await;
    let cookie = h.login().await;
    h.put_config(&cookie, &CurationConfig::new(L::High, L::High, L::None))
        .await;
    h.feed(&cookie, true, None).await;
    let pages = futures::future::join_all((0..4).map(|_| h.feed(&cookie, false, None))).await;
    let mut all = BTreeSet::new();
    let mut total = 0;
    for page in &pages {
        for p in &page.posts {
            total += 1;
            all.insert(p.boost_of.clone().unwrap_or(p.id.clone()));
        }
    }
    assert!(total > 0);
    assert_eq!(all.len(), total, "concurrent pages overlap");
    h.stop().await;
}

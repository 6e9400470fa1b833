//! The fixture a mock instance serves.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Local,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockAccount {
    pub id: String,
    /// Fully qualified `user@domain`.
    pub handle: String,
    #[serde(default)]
    pub followed_by_test_user: bool,
    #[serde(default)]
    pub suspended: bool,
}

impl MockAccount {
    pub fn username(&self) -> &str {
        self.handle.split_once('@').map_or(&self.handle, |(u, _)| u)
    }

    pub fn domain(&self) -> &str {
        self.handle.split_once('@').map_or("", |(_, d)| d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockPost {
    pub id: String,
    pub account_id: String,
    pub created_at: DateTime<Utc>,
    /// HTML body; empty for boosts.
    #[serde(default)]
    pub content: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub origin: Origin,
    #[serde(default)]
    pub reblogs_count: u64,
    #[serde(default)]
    pub favourites_count: u64,
    /// Id of the boosted post, for boosts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reblog_of: Option<String>,
}

impl MockPost {
    pub fn is_boost(&self) -> bool {
        self.reblog_of.is_some()
    }

    pub fn interactions(&self) -> u64 {
        self.reblogs_count + self.favourites_count
    }

    pub fn dedup_key(&self) -> &str {
        self.reblog_of.as_deref().unwrap_or(&self.id)
    }

    pub fn with_tags(&mut self, tags: &[&str]) -> &mut Self {
        self.tags = tags.iter().map(|t| t.to_lowercase()).collect();
        self
    }

    pub fn with_counts(&mut self, reblogs: u64, favourites: u64) -> &mut Self {
        self.reblogs_count = reblogs;
        self.favourites_count = favourites;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OAuthScript {
    /// Codes `/oauth/authorize` hands out, in order. Each works once.
    pub valid_codes: Vec<String>,
    pub token: String,
    /// Scope reported by `/oauth/token`.
    #[serde(default = "default_scope")]
    pub granted_scope: String,
}

fn default_scope() -> String {
    "read".into()
}

impl Default for OAuthScript {
    fn default() -> Self {
        Self {
            valid_codes: vec!["code-1".into(), "code-2".into(), "code-3".into()],
            token: "mock-token".into(),
            granted_scope: default_scope(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Apps,
    Authorize,
    Token,
    Home,
    Public,
    Trends,
    AccountStatuses,
    Relationships,
    Search,
}

/// Answer `status` to calls `after + 1 ..= after + times` of `endpoint`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRule {
    pub endpoint: Endpoint,
    pub status: u16,
    #[serde(default)]
    pub after: u32,
    #[serde(default = "one")]
    pub times: u32,
    /// Seconds sent in `Retry-After` on 429s.
    #[serde(default)]
    pub retry_after: Option<u64>,
}

fn one() -> u32 {
    1
}

impl FaultRule {
    pub fn fires_on(&self, call: u32) -> bool {
        call > self.after && call <= self.after.saturating_add(self.times)
    }
}

fn default_min_interactions() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub domain: String,
    /// Clock used for trending scores.
    pub now: DateTime<Utc>,
    /// Account id of the user the token belongs to.
    pub test_user: String,
    pub accounts: Vec<MockAccount>,
    #[serde(default)]
    pub followed_hashtags: Vec<String>,
    pub posts: Vec<MockPost>,
    #[serde(default)]
    pub oauth: OAuthScript,
    #[serde(default)]
    pub faults: Vec<FaultRule>,
    #[serde(default)]
    pub require_auth_for_public: bool,
    /// Posts need at least this many boosts + favourites to trend.
    #[serde(default = "default_min_interactions")]
    pub trending_min_interactions: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing corpus: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid corpus: {0}")]
    Invalid(String),
}

impl Corpus {
    pub fn new(domain: &str, now: DateTime<Utc>) -> Self {
        let me = MockAccount {
            id: "me".into(),
            handle: format!("me@{domain}"),
            followed_by_test_user: false,
            suspended: false,
        };
        Self {
            domain: domain.to_owned(),
            now,
            test_user: me.id.clone(),
            accounts: vec![me],
            followed_hashtags: Vec::new(),
            posts: Vec::new(),
            oauth: OAuthScript::default(),
            faults: Vec::new(),
            require_auth_for_public: false,
            trending_min_interactions: default_min_interactions(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let corpus: Corpus = serde_json::from_slice(&std::fs::read(path)?)?;
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus serializes")
    }

    /// Adds an account and returns its id.
    pub fn add_account(&mut self, id: &str, handle: &str, followed: bool) -> String {
        self.accounts.push(MockAccount {
            id: id.to_owned(),
            handle: handle.to_ascii_lowercase(),
            followed_by_test_user: followed,
            suspended: false,
        });
        id.to_owned()
    }

    pub fn follow_hashtag(&mut self, tag: &str) {
        self.followed_hashtags.push(tag.to_lowercase());
    }

    /// Adds a post by `account_id` published `minutes_ago` before `now`.
    /// Ids are assigned in insertion order.
    pub fn add_post(&mut self, account_id: &str, minutes_ago: i64, text: &str) -> &mut MockPost {
        let origin = self.origin_of(account_id);
        let id = format!("{:06}", self.posts.len() + 1);
        self.posts.push(MockPost {
            id,
            account_id: account_id.to_owned(),
            created_at: self.now - Duration::minutes(minutes_ago),
            content: format!("<p>{}</p>", html_escape(text)),
            tags: Vec::new(),
            origin,
            reblogs_count: 0,
            favourites_count: 0,
            reblog_of: None,
        });
        self.posts.last_mut().expect("just pushed")
    }

    pub fn add_boost(
        &mut self,
        account_id: &str,
        minutes_ago: i64,
        original_id: &str,
    ) -> &mut MockPost {
        let post = self.add_post(account_id, minutes_ago, "");
        post.content.clear();
        post.reblog_of = Some(original_id.to_owned());
        post
    }

    pub fn add_fault(&mut self, rule: FaultRule) {
        self.faults.push(rule);
    }

    fn origin_of(&self, account_id: &str) -> Origin {
        match self.account(account_id) {
            Some(a) if a.domain() != self.domain => Origin::Remote,
            _ => Origin::Local,
        }
    }

    pub fn account(&self, id: &str) -> Option<&MockAccount> {
        self.accounts.iter().find(|a| a.id == id)
    }

    pub fn account_by_handle(&self, handle: &str) -> Option<&MockAccount> {
        let handle = handle.trim_start_matches('@').to_ascii_lowercase();
        self.accounts.iter().find(|a| a.handle == handle)
    }

    pub fn post(&self, id: &str) -> Option<&MockPost> {
        self.posts.iter().find(|p| p.id == id)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |m: String| Err(CorpusError::Invalid(m));
        let mut ids = HashSet::new();
        for p in &self.posts {
            if p.id.is_empty() || !ids.insert(p.id.as_str()) {
                return invalid(format!("duplicate or empty post id `{}`", p.id));
            }
            if self.account(&p.account_id).is_none() {
                return invalid(format!("post {} has unknown author {}", p.id, p.account_id));
            }
            if p.tags.iter().any(|t| t.chars().any(char::is_uppercase)) {
                return invalid(format!("post {} has a non-lowercase tag", p.id));
            }
        }
        for p in &self.posts {
            if let Some(orig) = &p.reblog_of {
                match self.post(orig) {
                    Some(o) if !o.is_boost() => {}
                    _ => return invalid(format!("boost {} points at missing post {orig}", p.id)),
                }
            }
        }
        let mut account_ids = BTreeSet::new();
        for a in &self.accounts {
            if !account_ids.insert(&a.id) || !a.handle.contains('@') {
                return invalid(format!("bad account `{}` / `{}`", a.id, a.handle));
            }
            let mut stream: Vec<_> = self.posts.iter().filter(|p| p.account_id == a.id).collect();
            stream.sort_by_key(|p| p.created_at);
            if stream
                .windows(2)
                .any(|w| w[0].created_at == w[1].created_at)
            {
                return invalid(format!(
                    "account {} has two posts at the same instant",
                    a.id
                ));
            }
        }
        if self.account(&self.test_user).is_none() {
            return invalid(format!("test user {} is not an account", self.test_user));
        }
        Ok(())
    }
}

fn html_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

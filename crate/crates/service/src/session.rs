use std::collections::{BTreeMap, BTreeSet};

use braids_client::{InstanceCredentials, PageCursor};
use braids_core::{AccountHandle, CurationConfig, SourceCategory};
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

/// How long follow-relationship answers are reused.
pub const FOLLOW_CACHE_TTL: Duration = Duration::minutes(15);

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowCache {
    /// Handles of authors the user follows.
    pub followed: BTreeSet<String>,
    /// Author ids already asked about, followed or not.
    pub checked_ids: BTreeSet<String>,
    pub fetched_at: Option<DateTime<Utc>>,
}

impl FollowCache {
    pub fn expire(&mut self, now: DateTime<Utc>) {
        if self.fetched_at.is_some_and(|t| now - t > FOLLOW_CACHE_TTL) {
            *self = Self::default();
        }
    }
}

/// Per-login state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub credentials: InstanceCredentials,
    pub config: CurationConfig,
    /// Upstream account id per prioritized handle; `None` when lookup failed.
    #[serde(default)]
    pub account_ids: BTreeMap<AccountHandle, Option<String>>,
    #[serde(default)]
    pub cursors: BTreeMap<SourceCategory, PageCursor>,
    #[serde(default)]
    pub seen_ids: BTreeSet<String>,
    #[serde(default)]
    pub follow_cache: FollowCache,
    pub created_at: DateTime<Utc>,
}

impl SessionState {
    pub fn new(session_id: String, credentials: InstanceCredentials, now: DateTime<Utc>) -> Self {
        Self {
            session_id,
            credentials,
            config: CurationConfig::default(),
            account_ids: BTreeMap::new(),
            cursors: BTreeMap::new(),
            seen_ids: BTreeSet::new(),
            follow_cache: FollowCache::default(),
            created_at: now,
        }
    }

    /// Start over from the newest posts with nothing marked as seen.
    pub fn reset_paging(&mut self) {
        self.cursors.clear();
        self.seen_ids.clear();
    }

    pub fn cursor(&self, source: &SourceCategory) -> PageCursor {
        self.cursors
            .get(source)
            .cloned()
            .unwrap_or_else(|| PageCursor::start(source.clone()))
    }

    pub fn account_id(&self, handle: &AccountHandle) -> Option<&str> {
        self.account_ids.get(handle).and_then(|id| id.as_deref())
    }

    /// Replaces the rules; the next page is drawn from scratch.
    pub fn set_config(
        &mut self,
        config: CurationConfig,
        account_ids: BTreeMap<AccountHandle, Option<String>>,
    ) {
        self.config = config;
        self.account_ids = account_ids;
        self.reset_paging();
    }

    pub fn is_expired(&self, now: DateTime<Utc>, ttl: Duration) -> bool {
        now >= self.created_at + ttl
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use braids_core::PriorityLevel;
    use url::Url;

    fn session() -> SessionState {
        let creds = InstanceCredentials {
            instance_base_url: Url::parse("https://example.social").unwrap(),
            client_id: "c".into(),
            client_secret: "s".into(),
            access_token: Some("t".into()),
        };
        SessionState::new("sid".into(), creds, Utc::now())
    }

    #[test]
    fn config_change_resets_cursors_and_seen() {
        let mut s = session();
        s.seen_ids.insert("1".into());
        s.cursors.insert(
            SourceCategory::Local,
            PageCursor::at(SourceCategory::Local, "9"),
        );
        s.set_config(
            CurationConfig::new(PriorityLevel::Low, PriorityLevel::Low, PriorityLevel::Low),
            BTreeMap::new(),
        );
        assert!(s.seen_ids.is_empty() && s.cursors.is_empty());
        assert_eq!(s.cursor(&SourceCategory::Trending).offset, Some(0));
    }

    #[test]
    fn follow_cache_expiry() {
        let now = Utc::now();
        let mut c = FollowCache {
            followed: BTreeSet::from(["a@b.c".to_string()]),
            checked_ids: BTreeSet::from(["1".to_string()]),
            fetched_at: Some(now - Duration::minutes(20)),
        };
        c.expire(now);
        assert_eq!(c, FollowCache::default());
    }

    #[test]
    fn expiry() {
        let s = session();
        assert!(!s.is_expired(s.created_at, Duration::days(1)));
        assert!(s.is_expired(s.created_at, Duration::zero()));
    }
}

//! JSON shapes of the public API.

use braids_core::{AnnotatedPost, Badge, FeedPage, SourceCategory};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WirePost {
    pub id: String,
    pub author: String,
    /// RFC 3339, millisecond precision, UTC.
    pub created_at: String,
    pub html: String,
    pub badge: Badge,
    pub source: SourceCategory,
    pub boost_of: Option<String>,
}

impl From<&AnnotatedPost> for WirePost {
    fn from(a: &AnnotatedPost) -> Self {
        let p = &a.post;
        Self {
            id: p.id.clone(),
            author: p.author_handle.clone(),
            created_at: p
                .created_at
                .to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            html: p.content_html.clone(),
            badge: a.badge,
            source: a.source.clone(),
            boost_of: if p.is_boost {
                p.boosted_id.clone()
            } else {
                None
            },
        }
    }
}

/// A source that contributed nothing (or less than it should) and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceWarning {
    pub source: SourceCategory,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedResponse {
    pub posts: Vec<WirePost>,
    pub ran_out: bool,
    /// Interleave seed as a decimal string (it exceeds JavaScript's safe
    /// integer range); pass it back as `seed=` to replay the page.
    pub seed: String,
    pub page_size_requested: usize,
    pub warnings: Vec<SourceWarning>,
}

impl FeedResponse {
    pub fn new(page: &FeedPage, seed: u64, warnings: Vec<SourceWarning>) -> Self {
        Self {
            posts: page.posts.iter().map(WirePost::from).collect(),
            ran_out: page.ran_out,
            seed: seed.to_string(),
            page_size_requested: page.page_size_requested,
            warnings,
        }
    }

    /// Canonical serialization used for replay comparisons.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("feed page serializes")
    }
}

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::source::SourceCategory;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub boosts: u64,
    pub favorites: u64,
}

/// A status as fetched from one upstream source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    /// Upstream account id of the author (the booster, for boosts).
    pub author_id: String,
    /// Fully qualified `user@domain` of the author.
    pub author_handle: String,
    pub created_at: DateTime<Utc>,
    pub content_text: String,
    pub content_html: String,
    pub is_boost: bool,
    pub boosted_id: Option<String>,
    pub hashtags: Vec<String>,
    pub counts: Counts,
}

impl Post {
    pub fn new(
        id: impl Into<String>,
        author_handle: impl Into<String>,
        created_at: DateTime<Utc>,
    ) -> Self {
        let author_handle = author_handle.into();
        Self {
            id: id.into(),
            author_id: author_handle.clone(),
            author_handle,
            created_at,
            content_text: String::new(),
            content_html: String::new(),
            is_boost: false,
            boosted_id: None,
            hashtags: Vec::new(),
            counts: Counts::default(),
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        let text = text.into();
        self.content_html = format!("<p>{text}</p>");
        self.content_text = text;
        self
    }

    pub fn boosting(mut self, original_id: impl Into<String>) -> Self {
        self.is_boost = true;
        self.boosted_id = Some(original_id.into());
        self
    }

    /// Identity used for duplicate suppression: a boost collapses onto the
    /// status it boosts.
    pub fn dedup_key(&self) -> &str {
        match (&self.boosted_id, self.is_boost) {
            (Some(original), true) => original,
            _ => &self.id,
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.id.is_empty()
            && self
                .hashtags
                .iter()
                .all(|t| !t.chars().any(char::is_uppercase))
    }
}

/// Newest first; equal timestamps fall back to descending id.
pub fn chronological(a: &Post, b: &Post) -> Ordering {
    b.created_at
        .cmp(&a.created_at)
        .then_with(|| b.id.cmp(&a.id))
}

pub fn sort_chronological(posts: &mut [Post]) {
    posts.sort_by(chronological);
}

pub fn is_chronological(posts: &[Post]) -> bool {
    posts
        .windows(2)
        .all(|w| chronological(&w[0], &w[1]) != Ordering::Greater)
}

/// Label shown next to each post naming the source it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Badge {
    UserYouFollow,
    HashtagYouFollow,
    TrendingPost,
    LocalPost,
    PrioritizedAccount,
}

impl Badge {
    pub const fn label(self) -> &'static str {
        match self {
            Self::UserYouFollow => "User you follow",
            Self::HashtagYouFollow => "Hashtag you follow",
            Self::TrendingPost => "Trending post",
            Self::LocalPost => "Local post",
            Self::PrioritizedAccount => "Prioritized account",
        }
    }

    /// Whether this badge can be produced by a post drawn from `source`.
    pub fn is_consistent_with(self, source: &SourceCategory) -> bool {
        match source {
            SourceCategory::FollowingAndHashtags => {
                matches!(self, Self::UserYouFollow | Self::HashtagYouFollow)
            }
            SourceCategory::Local => self == Self::LocalPost,
            SourceCategory::Trending => self == Self::TrendingPost,
            SourceCategory::PrioritizedAccount(_) => self == Self::PrioritizedAccount,
        }
    }
}

impl fmt::Display for Badge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn assign_badge(post: &Post, source: &SourceCategory, follow_set: &BTreeSet<String>) -> Badge {
    match source {
        SourceCategory::FollowingAndHashtags if follow_set.contains(&post.author_handle) => {
            Badge::UserYouFollow
        }
        SourceCategory::FollowingAndHashtags => Badge::HashtagYouFollow,
        SourceCategory::Local => Badge::LocalPost,
        SourceCategory::Trending => Badge::TrendingPost,
        SourceCategory::PrioritizedAccount(_) => Badge::PrioritizedAccount,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedPost {
    pub post: Post,
    pub badge: Badge,
    pub source: SourceCategory,
}

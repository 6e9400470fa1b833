//! What each mock timeline contains, in the order it is served.

use std::cmp::Ordering;

use chrono::{DateTime, Utc};

use crate::corpus::{Corpus, MockPost, Origin};

/// Mock-only popularity score: interactions decayed by age in hours.
///
/// `(boosts + favourites + 1) / (age_hours + 2)^1.5`. This is not the
/// formula any real server uses; it only needs to be monotone in both
/// inputs and deterministic.
pub fn trending_score(post: &MockPost, now: DateTime<Utc>) -> f64 {
    let age_ms = (now - post.created_at).num_milliseconds().max(0) as f64;
    let age_hours = age_ms / 3_600_000.0;
    (post.interactions() as f64 + 1.0) / (age_hours + 2.0).powf(1.5)
}

fn newest_first(a: &MockPost, b: &MockPost) -> Ordering {
    b.created_at
        .cmp(&a.created_at)
        .then_with(|| b.id.cmp(&a.id))
}

fn sorted(mut posts: Vec<&MockPost>) -> Vec<&MockPost> {
    posts.sort_by(|a, b| newest_first(a, b));
    posts
}

/// Posts by followed accounts or the user, plus original posts carrying a
/// followed hashtag.
pub fn home(corpus: &Corpus) -> Vec<&MockPost> {
    sorted(
        corpus
            .posts
            .iter()
            .filter(|p| {
                let author_followed = corpus
                    .account(&p.account_id)
                    .is_some_and(|a| a.followed_by_test_user);
                let tag_followed =
                    !p.is_boost() && p.tags.iter().any(|t| corpus.followed_hashtags.contains(t));
                author_followed || tag_followed || p.account_id == corpus.test_user
            })
            .collect(),
    )
}

/// Original posts, optionally only those from this server.
pub fn public(corpus: &Corpus, local_only: bool) -> Vec<&MockPost> {
    sorted(
        corpus
            .posts
            .iter()
            .filter(|p| !p.is_boost() && (!local_only || p.origin == Origin::Local))
            .collect(),
    )
}

pub fn account<'a>(corpus: &'a Corpus, account_id: &str) -> Vec<&'a MockPost> {
    sorted(
        corpus
            .posts
            .iter()
            .filter(|p| p.account_id == account_id)
            .collect(),
    )
}

/// Original posts with enough interactions, highest score first, ties by
/// ascending id.
pub fn trending(corpus: &Corpus) -> Vec<&MockPost> {
    let mut posts: Vec<(f64, &MockPost)> = corpus
        .posts
        .iter()
        .filter(|p| !p.is_boost() && p.interactions() >= corpus.trending_min_interactions)
        .map(|p| (trending_score(p, corpus.now), p))
        .collect();
    posts.sort_by(|(sa, a), (sb, b)| sb.total_cmp(sa).then_with(|| a.id.cmp(&b.id)));
    posts.into_iter().map(|(_, p)| p).collect()
}

/// The part of a newest-first `stream` strictly older than `max_id`.
pub fn older_than<'a>(
    corpus: &Corpus,
    stream: Vec<&'a MockPost>,
    max_id: Option<&str>,
) -> Vec<&'a MockPost> {
    let Some(max_id) = max_id else {
        return stream;
    };
    match corpus.post(max_id) {
        Some(anchor) => stream
            .into_iter()
            .filter(|p| newest_first(anchor, p) == Ordering::Less)
            .collect(),
        None => {
            let key = |id: &str| (id.len(), id.to_owned());
            stream
                .into_iter()
                .filter(|p| key(&p.id) < key(max_id))
                .collect()
        }
    }
}

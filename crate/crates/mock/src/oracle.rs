//! Expected first-page composition computed straight from a corpus.
//!
//! This deliberately re-derives everything (weights, shares, each source's
//! first window, filtering, dedup) by enumeration over the fixture so it
//! can check the service end to end.

use std::collections::{BTreeMap, BTreeSet};

use braids_core::{CurationConfig, OrderingMode, PriorityLevel, SourceCategory};

use crate::corpus::{Corpus, MockPost, Origin};
use crate::streams::trending_score;

const PAGE: usize = 40;

fn level_weight(level: PriorityLevel) -> usize {
    match level {
        PriorityLevel::None => 0,
        PriorityLevel::Low => 1,
        PriorityLevel::Medium => 2,
        PriorityLevel::High => 3,
    }
}

fn strip_tags(html: &str) -> String {
    let mut out = String::new();
    let mut in_tag = false;
    for c in html.chars() {
        match c {
            '<' => in_tag = true,
            '>' => in_tag = false,
            c if !in_tag => out.push(c),
            _ => {}
        }
    }
    out.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&amp;", "&")
}

fn body<'a>(corpus: &'a Corpus, p: &'a MockPost) -> &'a MockPost {
    p.reblog_of
        .as_deref()
        .and_then(|id| corpus.post(id))
        .unwrap_or(p)
}

fn filtered(corpus: &Corpus, p: &MockPost, filters: &[String]) -> bool {
    let text = strip_tags(&body(corpus, p).content).to_lowercase();
    filters
        .iter()
        .map(|f| f.trim().to_lowercase())
        .any(|f| !f.is_empty() && text.contains(&f))
}

fn by_recency(posts: &mut [&MockPost]) {
    posts.sort_by(|a, b| (b.created_at, &b.id).cmp(&(a.created_at, &a.id)));
}

fn window<'a>(corpus: &'a Corpus, source: &SourceCategory, n: usize) -> Vec<&'a MockPost> {
    let followed = |id: &str| corpus.account(id).is_some_and(|a| a.followed_by_test_user);
    let mut posts: Vec<&MockPost> = match source {
        SourceCategory::FollowingAndHashtags => corpus
            .posts
            .iter()
            .filter(|p| {
                followed(&p.account_id)
                    || p.account_id == corpus.test_user
                    || (p.reblog_of.is_none()
                        && p.tags.iter().any(|t| corpus.followed_hashtags.contains(t)))
            })
            .collect(),
        SourceCategory::Local => corpus
            .posts
            .iter()
            .filter(|p| p.reblog_of.is_none() && p.origin == Origin::Local)
            .collect(),
        SourceCategory::Trending => {
            let mut scored: Vec<(f64, &MockPost)> = corpus
                .posts
                .iter()
                .filter(|p| {
                    p.reblog_of.is_none()
                        && p.reblogs_count + p.favourites_count >= corpus.trending_min_interactions
                })
                .map(|p| (trending_score(p, corpus.now), p))
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
            return scored.into_iter().map(|(_, p)| p).take(n).collect();
        }
        SourceCategory::PrioritizedAccount(handle) => {
            match corpus.account_by_handle(handle.as_str()) {
                Some(a) if !a.suspended => corpus
                    .posts
                    .iter()
                    .filter(|p| p.account_id == a.id)
                    .collect(),
                _ => Vec::new(),
            }
        }
    };
    by_recency(&mut posts);
    posts.truncate(n);
    posts
}

/// Per-source post counts the first page for `config` must show.
///
/// Under strict priority the counts are exact: sources are consumed in
/// descending weight and cross-source duplicates credit the earlier one.
/// Under weighted interleave each count is the availability bound of that
/// source's window on its own; it is exact whenever the windows do not
/// share posts.
pub fn oracle_expected_counts(
    config: &CurationConfig,
    corpus: &Corpus,
) -> BTreeMap<SourceCategory, usize> {
    let mut sources: Vec<(SourceCategory, usize)> = vec![
        (
            SourceCategory::FollowingAndHashtags,
            level_weight(config.priorities.following),
        ),
        (SourceCategory::Local, level_weight(config.priorities.local)),
        (
            SourceCategory::Trending,
            level_weight(config.priorities.trending),
        ),
    ];
    for a in &config.accounts {
        sources.push((
            SourceCategory::PrioritizedAccount(a.handle.clone()),
            level_weight(a.level),
        ));
    }
    let total: usize = sources.iter().map(|(_, w)| w).sum();
    if total == 0 {
        return BTreeMap::new();
    }
    sources.retain(|(_, w)| *w > 0);

    let strict = config.ordering_mode == OrderingMode::StrictPriority;
    if strict {
        sources.sort_by_key(|s| std::cmp::Reverse(s.1));
    }
    let mut counts = BTreeMap::new();
    let mut seen_global: BTreeSet<&str> = BTreeSet::new();
    for (source, w) in &sources {
        let share = w * PAGE / total;
        let mut seen_local: BTreeSet<&str> = BTreeSet::new();
        let mut n = 0;
        for p in window(corpus, source, share) {
            let key = p.reblog_of.as_deref().unwrap_or(&p.id);
            let seen = if strict {
                &mut seen_global
            } else {
                &mut seen_local
            };
            if seen.contains(key) || filtered(corpus, p, &config.filters) {
                continue;
            }
            seen.insert(key);
            n += 1;
        }
        counts.insert(source.clone(), n);
    }
    counts
}

//! Assembling one page of the unified feed for a session.

use std::collections::{BTreeMap, BTreeSet};

use braids_client::{ClientError, MastodonClient, PageCursor};
use braids_core::{
    allocate_fetch_counts, combine_posts, detect_ran_out, sort_chronological, FeedPage, Merge,
    Post, SourceCategory, PAGE_SIZE,
};
use chrono::{DateTime, Utc};
use futures::future::join_all;
use tracing::{debug, warn};

use crate::session::SessionState;
use crate::wire::SourceWarning;

#[derive(Debug, Clone)]
pub struct AssembledPage {
    pub page: FeedPage,
    pub seed: u64,
    pub warnings: Vec<SourceWarning>,
    /// Requested count per source.
    pub requested: BTreeMap<SourceCategory, usize>,
    /// Returned count per source that answered.
    pub returned: BTreeMap<SourceCategory, usize>,
    pub merge: Merge,
}

#[derive(Debug, thiserror::Error)]
pub enum FeedError {
    #[error("every source failed")]
    AllSourcesFailed(Vec<SourceWarning>),
}

enum Fetch {
    Unresolved(SourceCategory),
    Done(SourceCategory, Result<(Vec<Post>, PageCursor), ClientError>),
}

/// Builds the next page (or the first page, resetting cursors and seen
/// ids) and commits the new paging state to `session` on success.
pub async fn get_feed(
    session: &mut SessionState,
    client: &MastodonClient,
    first_page: bool,
    seed: u64,
    now: DateTime<Utc>,
) -> Result<AssembledPage, FeedError> {
    let (mut cursors, mut seen) = if first_page {
        (BTreeMap::new(), BTreeSet::new())
    } else {
        (session.cursors.clone(), session.seen_ids.clone())
    };
    let config = session.config.clone();

    let empty = |seed| AssembledPage {
        page: FeedPage::empty(),
        seed,
        warnings: Vec::new(),
        requested: BTreeMap::new(),
        returned: BTreeMap::new(),
        merge: Merge::default(),
    };
    if config.total_weight() == 0 {
        session.cursors = cursors;
        session.seen_ids = seen;
        return Ok(empty(seed));
    }

    let requested = allocate_fetch_counts(&config, PAGE_SIZE);
    let fetches = requested
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(source, &n)| {
            let cursor = cursors
                .get(source)
                .cloned()
                .unwrap_or_else(|| PageCursor::start(source.clone()));
            let account_id = source
                .account()
                .map(|h| session.account_id(h).map(str::to_owned));
            async move {
                match account_id {
                    Some(None) => Fetch::Unresolved(source.clone()),
                    Some(Some(id)) => Fetch::Done(
                        source.clone(),
                        client.fetch_source(&cursor, Some(&id), n).await,
                    ),
                    None => {
                        Fetch::Done(source.clone(), client.fetch_source(&cursor, None, n).await)
                    }
                }
            }
        });
    let results = join_all(fetches).await;

    let mut warnings = Vec::new();
    let mut returned = BTreeMap::new();
    let mut queues = BTreeMap::new();
    let mut next_cursors = Vec::new();
    let mut attempted = 0;
    let mut failed = 0;
    for result in results {
        match result {
            Fetch::Unresolved(source) => {
                warnings.push(SourceWarning {
                    message: format!(
                        "could not find account {}",
                        source.account().expect("account source")
                    ),
                    source: source.clone(),
                });
                returned.insert(source, 0);
            }
            Fetch::Done(source, Ok((mut posts, next))) => {
                attempted += 1;
                debug!(%source, count = posts.len(), "fetched");
                returned.insert(source.clone(), posts.len());
                sort_chronological(&mut posts);
                queues.insert(source.clone(), posts);
                next_cursors.push((source, next));
            }
            Fetch::Done(source, Err(e)) => {
                attempted += 1;
                failed += 1;
                warn!(%source, error = %e, "source failed");
                warnings.push(SourceWarning {
                    source,
                    message: e.to_string(),
                });
            }
        }
    }
    if attempted > 0 && failed == attempted {
        return Err(FeedError::AllSourcesFailed(warnings));
    }

    let ran_out = detect_ran_out(&requested, &returned);

    let mut follows = session.follow_cache.clone();
    follows.expire(now);
    if let Some(home) = queues.get(&SourceCategory::FollowingAndHashtags) {
        let unknown: Vec<String> = home
            .iter()
            .map(|p| p.author_id.clone())
            .filter(|id| !follows.checked_ids.contains(id))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if !unknown.is_empty() {
            match client.check_follows(&unknown).await {
                Ok(followed) => {
                    for p in home {
                        if followed.contains(&p.author_id) {
                            follows.followed.insert(p.author_handle.clone());
                        }
                    }
                    follows.checked_ids.extend(unknown);
                    follows.fetched_at.get_or_insert(now);
                }
                Err(e) => warnings.push(SourceWarning {
                    source: SourceCategory::FollowingAndHashtags,
                    message: format!("could not check follows: {e}"),
                }),
            }
        }
    }

    let merge = combine_posts(queues, &config, &follows.followed, &mut seen, seed);
    for (source, next) in next_cursors {
        cursors.insert(source, next);
    }
    session.cursors = cursors;
    session.seen_ids = seen;
    session.follow_cache = follows;

    Ok(AssembledPage {
        page: FeedPage {
            posts: merge.posts.clone(),
            ran_out,
            page_size_requested: PAGE_SIZE,
        },
        seed,
        warnings,
        requested,
        returned,
        merge,
    })
}

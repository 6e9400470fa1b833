//! Merging per-source queues into one semi-chronological feed.
//!
//! Each source contributes a queue that is newest-first. In
//! [`OrderingMode::WeightedInterleave`] the merge repeatedly picks one of the
//! non-empty queues at random, with probability proportional to its weight,
//! and pops its head. In [`OrderingMode::StrictPriority`] whole queues are
//! emitted in descending weight order. Either way every queue keeps its
//! internal order, posts already in `seen` or matching a filter phrase are
//! dropped, and each accepted post is badged after the first source it was
//! drawn from.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CurationConfig, OrderingMode};
use crate::filter::matches_filter;
use crate::post::{assign_badge, AnnotatedPost, Post};
use crate::source::SourceCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawOutcome {
    Accepted,
    Duplicate,
    Filtered,
}

/// One pop from one queue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Draw {
    pub source: SourceCategory,
    pub post_id: String,
    pub outcome: DrawOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub posts: Vec<AnnotatedPost>,
    /// Every pop in order, including the dropped ones.
    pub draws: Vec<Draw>,
    pub filtered: usize,
    pub duplicates: usize,
    /// Posts in queues whose source has zero weight (or no entry in the
    /// config); they can never be drawn.
    pub unscheduled: usize,
}

struct Lane {
    source: SourceCategory,
    weight: u32,
    queue: VecDeque<Post>,
}

/// Merges `queues` under `config`, updating `seen` with the dedup key of
/// every accepted post. Identical inputs and `seed` give identical output.
pub fn combine_posts(
    mut queues: BTreeMap<SourceCategory, Vec<Post>>,
    config: &CurationConfig,
    follow_set: &BTreeSet<String>,
    seen: &mut BTreeSet<String>,
    seed: u64,
) -> Merge {
    let mut merge = Merge::default();
    let mut lanes: Vec<Lane> = Vec::new();
    for (source, weight) in config.weights() {
        let Some(posts) = queues.remove(&source) else {
            continue;
        };
        if weight == 0 {
            merge.unscheduled += posts.len();
        } else if !posts.is_empty() {
            lanes.push(Lane {
                source,
                weight,
                queue: posts.into(),
            });
        }
    }
    merge.unscheduled += queues.values().map(Vec::len).sum::<usize>();

    let mut emit = |source: &SourceCategory, post: Post, merge: &mut Merge| {
        let key = post.dedup_key().to_owned();
        let outcome = if seen.contains(&key) {
            merge.duplicates += 1;
            DrawOutcome::Duplicate
        } else if matches_filter(&post, &config.filters) {
            merge.filtered += 1;
            DrawOutcome::Filtered
        } else {
            seen.insert(key.clone());
            let badge = assign_badge(&post, source, follow_set);
            merge.posts.push(AnnotatedPost {
                post,
                badge,
                source: source.clone(),
            });
            DrawOutcome::Accepted
        };
        merge.draws.push(Draw {
            source: source.clone(),
            post_id: key,
            outcome,
        });
    };

    match config.ordering_mode {
        OrderingMode::WeightedInterleave => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while !lanes.is_empty() {
                let i = pick_weighted(&lanes, &mut rng);
                let post = lanes[i].queue.pop_front().expect("lanes are non-empty");
                emit(&lanes[i].source, post, &mut merge);
                if lanes[i].queue.is_empty() {
                    lanes.remove(i);
                }
            }
        }
        OrderingMode::StrictPriority => {
            // stable: equal weights keep config order
            lanes.sort_by_key(|l| std::cmp::Reverse(l.weight));
            for lane in lanes {
                for post in lane.queue {
                    emit(&lane.source, post, &mut merge);
                }
            }
        }
    }
    merge
}

fn pick_weighted(lanes: &[Lane], rng: &mut impl Rng) -> usize {
    let total: u32 = lanes.iter().map(|l| l.weight).sum();
    let mut ticket = rng.random_range(0..total);
    for (i, lane) in lanes.iter().enumerate() {
        if ticket < lane.weight {
            return i;
        }
        ticket -= lane.weight;
    }
    unreachable!("ticket below total weight")
}

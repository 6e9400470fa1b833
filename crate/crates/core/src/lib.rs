//! Rules-based curation of a unified Mastodon feed.
//!
//! Four kinds of source (followed content, the local server, trending posts
//! and individually prioritized accounts) are weighted by the user's slider
//! levels. [`allocate_fetch_counts`] decides how many posts to request from
//! each, and [`combine_posts`] interleaves the fetched queues into a single
//! feed with one badge per post.
//!
//! Everything here is pure apart from the caller-owned `seen` set.

pub mod allocate;
pub mod config;
pub mod filter;
pub mod merge;
pub mod page;
pub mod post;
pub mod priority;
pub mod runout;
pub mod source;

pub use allocate::{allocate_fetch_counts, PAGE_SIZE};
pub use config::{ConfigError, CurationConfig, FeedPriorities, OrderingMode, PrioritizedAccount};
pub use filter::matches_filter;
pub use merge::{combine_posts, Draw, DrawOutcome, Merge};
pub use page::FeedPage;
pub use post::{
    assign_badge, chronological, is_chronological, sort_chronological, AnnotatedPost, Badge,
    Counts, Post,
};
pub use priority::{priority_weight, PriorityLevel};
pub use runout::detect_ran_out;
pub use source::{AccountHandle, HandleError, SourceCategory};

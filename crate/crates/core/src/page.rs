use serde::{Deserialize, Serialize};

use crate::allocate::PAGE_SIZE;
use crate::post::AnnotatedPost;

/// One merged page of the unified feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedPage {
    pub posts: Vec<AnnotatedPost>,
    pub ran_out: bool,
    pub page_size_requested: usize,
}

impl FeedPage {
    pub fn empty() -> Self {
        Self {
            posts: Vec::new(),
            ran_out: false,
            page_size_requested: PAGE_SIZE,
        }
    }
}

use braids_core::SourceCategory;
use serde::{Deserialize, Serialize};

/// Where the next page of a source starts.
///
/// Chronological sources page by `max_id` (absent means "from the newest");
/// trending pages by `offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageCursor {
    pub source: SourceCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

impl PageCursor {
    pub fn start(source: SourceCategory) -> Self {
        let offset = (!source.is_chronological()).then_some(0);
        Self {
            source,
            max_id: None,
            offset,
        }
    }

    pub fn at(source: SourceCategory, max_id: impl Into<String>) -> Self {
        Self {
            source,
            max_id: Some(max_id.into()),
            offset: None,
        }
    }

    pub fn at_offset(offset: usize) -> Self {
        Self {
            source: SourceCategory::Trending,
            max_id: None,
            offset: Some(offset),
        }
    }

    pub(crate) fn advance(&self, last_id: Option<&str>, returned: usize) -> Self {
        let mut next = self.clone();
        if self.source.is_chronological() {
            if let Some(id) = last_id {
                next.max_id = Some(id.to_owned());
            }
        } else {
            next.offset = Some(self.offset.unwrap_or(0) + returned);
        }
        next
    }
}

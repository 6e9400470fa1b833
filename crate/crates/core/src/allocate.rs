use std::collections::BTreeMap;

use crate::config::CurationConfig;
use crate::source::SourceCategory;

/// Posts requested per page load or `Show more`.
pub const PAGE_SIZE: usize = 40;

/// Splits `page_size` across sources in proportion to their weights,
/// rounding each share down. Zero-weight sources are omitted; the shares
/// may sum to less than `page_size` and the remainder is not redistributed.
pub fn allocate_fetch_counts(
    config: &CurationConfig,
    page_size: usize,
) -> BTreeMap<SourceCategory, usize> {
    assert!(page_size > 0, "page_size must be positive");
    let weights = config.weights();
    let total: usize = weights.iter().map(|(_, w)| *w as usize).sum();
    if total == 0 {
        return BTreeMap::new();
    }
    weights
        .into_iter()
        .filter(|(_, w)| *w > 0)
        .map(|(source, w)| (source, w as usize * page_size / total))
        .collect()
}

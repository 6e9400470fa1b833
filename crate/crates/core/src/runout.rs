use std::collections::BTreeMap;

use crate::source::SourceCategory;

/// A finite source that was asked for posts and returned none means the
/// user has reached the end of it. Sources with no recorded response are
/// not counted.
pub fn detect_ran_out(
    requests: &BTreeMap<SourceCategory, usize>,
    responses: &BTreeMap<SourceCategory, usize>,
) -> bool {
    requests.iter().any(|(source, &requested)| {
        source.is_finite() && requested > 0 && responses.get(source) == Some(&0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::AccountHandle;

    fn map(entries: &[(SourceCategory, usize)]) -> BTreeMap<SourceCategory, usize> {
        entries.iter().cloned().collect()
    }

    #[test]
    fn following_exhausted() {
        let f = SourceCategory::FollowingAndHashtags;
        assert!(detect_ran_out(&map(&[(f.clone(), 13)]), &map(&[(f, 0)])));
    }

    #[test]
    fn account_exhausted() {
        let a = SourceCategory::PrioritizedAccount(AccountHandle::parse("a@b.c").unwrap());
        assert!(detect_ran_out(&map(&[(a.clone(), 5)]), &map(&[(a, 0)])));
    }

    #[test]
    fn infinite_sources_never_run_out() {
        let t = SourceCategory::Trending;
        let l = SourceCategory::Local;
        assert!(!detect_ran_out(
            &map(&[(t.clone(), 10), (l.clone(), 10)]),
            &map(&[(t, 0), (l, 0)])
        ));
    }

    #[test]
    fn vacuous_and_partial() {
        assert!(!detect_ran_out(&BTreeMap::new(), &BTreeMap::new()));
        let f = SourceCategory::FollowingAndHashtags;
        assert!(!detect_ran_out(
            &map(&[(f.clone(), 13)]),
            &map(&[(f.clone(), 2)])
        ));
        assert!(!detect_ran_out(
            &map(&[(f.clone(), 0)]),
            &map(&[(f.clone(), 0)])
        ));
        // A failed fetch has no response and is not exhaustion.
        assert!(!detect_ran_out(&map(&[(f, 13)]), &BTreeMap::new()));
    }
}

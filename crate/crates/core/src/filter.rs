use crate::post::Post;

/// True when any non-blank phrase occurs in the post's plain text,
/// compared case-insensitively.
pub fn matches_filter<S: AsRef<str>>(post: &Post, filters: &[S]) -> bool {
    if filters.is_empty() {
        return false;
    }
    let text = post.content_text.to_lowercase();
    filters.iter().any(|phrase| {
        let phrase = phrase.as_ref().trim();
        !phrase.is_empty() && text.contains(&phrase.to_lowercase())
    })
}

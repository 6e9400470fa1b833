//! The checked-in demo corpus (`fixtures/corpus.json`).
//!
//! Regenerate with `cargo test -p braids-mock -- --ignored regenerate_fixture`.

use chrono::{TimeZone, Utc};

use crate::corpus::Corpus;

pub const FIXTURE_JSON: &str = include_str!("../fixtures/corpus.json");

pub fn fixture() -> Corpus {
    serde_json::from_str(FIXTURE_JSON).expect("fixture parses")
}

/// Small deterministic generator so the fixture has no rand dependency.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

const TOPICS: [&str; 8] = [
    "shipped a new release",
    "reading about federation",
    "my cat knocked over the plant again",
    "thoughts on crypto hype",
    "weekend hike photos",
    "borrow checker finally clicked",
    "local meetup tonight",
    "small web appreciation post",
];

pub fn generate_fixture() -> Corpus {
    let mut c = Corpus::new(
        "example.social",
        Utc.with_ymd_and_hms(2024, 5, 1, 12, 0, 0).unwrap(),
    );
    c.add_account("a1", "alice@example.social", true);
    c.add_account("b1", "bob@fosstodon.org", true);
    c.add_account("c1", "carol@example.social", false);
    c.add_account("d1", "dave@hachyderm.io", false);
    c.add_account("m1", "mastodon@mastodon.social", false);
    c.follow_hashtag("rust");
    c.follow_hashtag("fediverse");

    let authors = ["a1", "b1", "c1", "d1", "m1", "c1", "d1", "a1", "me"];
    let tags = ["rust", "fediverse", "cats"];
    let mut rng = Lcg(0x6272_6169_6473);
    let mut originals: Vec<String> = Vec::new();
    for i in 0..200i64 {
        let minutes_ago = (200 - i) * 11;
        if i % 10 == 7 && !originals.is_empty() {
            let booster = if rng.below(2) == 0 { "a1" } else { "b1" };
            let target = originals[rng.below(originals.len() as u64) as usize].clone();
            c.add_boost(booster, minutes_ago, &target);
            continue;
        }
        let author = authors[rng.below(authors.len() as u64) as usize];
        let topic = TOPICS[rng.below(TOPICS.len() as u64) as usize];
        let tag = match rng.below(5) {
            t @ 0..=2 => Some(tags[t as usize]),
            _ => None,
        };
        let text = match tag {
            Some(t) => format!("Post {i}: {topic} #{t}"),
            None => format!("Post {i}: {topic}"),
        };
        let reblogs = if rng.below(3) == 0 { 0 } else { rng.below(12) };
        let favourites = if rng.below(3) == 0 { 0 } else { rng.below(25) };
        let post = c.add_post(author, minutes_ago, &text);
        post.with_counts(reblogs, favourites);
        if let Some(t) = tag {
            post.with_tags(&[t]);
        }
        if author != "a1" && author != "b1" && author != "me" {
            originals.push(post.id.clone());
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_current_and_valid() {
        let generated = generate_fixture();
        generated.validate().unwrap();
        assert_eq!(
            fixture(),
            generated,
            "fixtures/corpus.json is stale; regenerate it"
        );
        assert_eq!(generated.posts.len(), 200);
        assert_eq!(generated.accounts.len(), 6);
    }

    #[test]
    #[ignore]
    fn regenerate_fixture() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.json");
        std::fs::write(path, generate_fixture().to_json() + "\n").unwrap();
    }
}

//! A fake Mastodon instance for offline tests.
//!
//! [`serve`] exposes a [`Corpus`] over the same REST endpoints the client
//! uses, with scripted OAuth codes and injectable faults. Every request is
//! logged so tests can assert on what was sent. [`oracle_expected_counts`]
//! predicts first-page composition directly from a corpus.

pub mod corpus;
pub mod fixture;
pub mod oracle;
pub mod server;
pub mod streams;

pub use corpus::{
    Corpus, CorpusError, Endpoint, FaultRule, MockAccount, MockPost, OAuthScript, Origin,
};
pub use fixture::{fixture, generate_fixture};
pub use oracle::oracle_expected_counts;
pub use server::{serve, serve_on, LoggedRequest, MockServer};
pub use streams::trending_score;

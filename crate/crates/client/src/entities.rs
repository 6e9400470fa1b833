//! Upstream JSON shapes and their mapping onto [`Post`].

use braids_core::{Counts, Post};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use url::Url;

#[derive(Debug, Clone, Deserialize)]
pub struct Account {
    pub id: String,
    pub username: String,
    pub acct: String,
    #[serde(default)]
    pub url: Option<String>,
}

impl Account {
    /// `acct` is bare for accounts on the queried instance; qualify it with
    /// the host of the profile URL, falling back to `instance_host`.
    pub fn qualified_handle(&self, instance_host: &str) -> String {
        if self.acct.contains('@') {
            return self.acct.to_ascii_lowercase();
        }
        let host = self
            .url
            .as_deref()
            .and_then(|u| Url::parse(u).ok())
            .and_then(|u| u.host_str().map(str::to_owned))
            .unwrap_or_else(|| instance_host.to_owned());
        format!("{}@{}", self.acct, host).to_ascii_lowercase()
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Tag {
    pub name: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Status {
    pub id: String,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub content: String,
    pub account: Account,
    #[serde(default)]
    pub reblog: Option<Box<Status>>,
    #[serde(default)]
    pub reblogs_count: u64,
    #[serde(default)]
    pub favourites_count: u64,
    #[serde(default)]
    pub tags: Vec<Tag>,
}

impl Status {
    /// Boost wrappers keep their own id, author and timestamp; body, tags
    /// and counts come from the boosted status.
    pub fn into_post(self, instance_host: &str) -> Post {
        let author_handle = self.account.qualified_handle(instance_host);
        let (is_boost, boosted_id, body) = match self.reblog {
            Some(original) => (true, Some(original.id.clone()), *original),
            None => (false, None, self.clone_body()),
        };
        Post {
            id: self.id,
            author_id: self.account.id,
            author_handle,
            created_at: self.created_at,
            content_text: html_to_text(&body.content),
            content_html: body.content,
            is_boost,
            boosted_id,
            hashtags: body.tags.iter().map(|t| t.name.to_lowercase()).collect(),
            counts: Counts {
                boosts: body.reblogs_count,
                favorites: body.favourites_count,
            },
        }
    }

    fn clone_body(&self) -> Status {
        Status {
            reblog: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Relationship {
    pub id: String,
    #[serde(default)]
    pub following: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SearchResults {
    #[serde(default)]
    pub accounts: Vec<Account>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RegisteredApp {
    pub client_id: String,
    pub client_secret: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TokenResponse {
    pub access_token: String,
    #[serde(default)]
    pub scope: Option<String>,
}

/// Plain-text rendering of a status body: tags removed, line breaks and
/// paragraph ends kept as newlines, entities decoded.
pub fn html_to_text(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut rest = html;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        let Some(close) = rest[open..].find('>') else {
            out.push_str(&rest[open..]);
            rest = "";
            break;
        };
        let tag = rest[open + 1..open + close].trim().to_ascii_lowercase();
        let name = tag
            .trim_start_matches('/')
            .split([' ', '/'])
            .next()
            .unwrap_or("");
        match name {
            "br" => out.push('\n'),
            "p" if tag.starts_with('/') => out.push_str("\n\n"),
            _ => {}
        }
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    html_escape::decode_html_entities(out.trim_end()).into_owned()
}

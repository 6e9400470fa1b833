use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A fully qualified account handle, `user@domain`, stored lowercase
/// without the leading `@`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AccountHandle(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HandleError {
    #[error("handle is empty")]
    Empty,
    #[error("malformed handle `{0}`")]
    Malformed(String),
    #[error("handle `{0}` has no domain")]
    MissingDomain(String),
}

fn valid_user(user: &str) -> bool {
    !user.is_empty()
        && user
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
}

fn valid_domain(domain: &str) -> bool {
    !domain.is_empty()
        && !domain.starts_with('.')
        && !domain.ends_with('.')
        && domain
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == ':')
}

impl AccountHandle {
    /// Parses `user@domain` or `@user@domain`.
    pub fn parse(raw: &str) -> Result<Self, HandleError> {
        match Self::parse_loose(raw)? {
            (user, Some(domain)) => Ok(Self(format!("{user}@{domain}"))),
            (_, None) => Err(HandleError::MissingDomain(raw.trim().to_owned())),
        }
    }

    /// Parses a handle that may omit the domain, qualifying bare local
    /// usernames with `default_domain`.
    pub fn parse_with_default_domain(raw: &str, default_domain: &str) -> Result<Self, HandleError> {
        let (user, domain) = Self::parse_loose(raw)?;
        let domain = match domain {
            Some(d) => d,
            None => {
                let d = default_domain.to_ascii_lowercase();
                if !valid_domain(&d) {
                    return Err(HandleError::Malformed(default_domain.to_owned()));
                }
                d
            }
        };
        Ok(Self(format!("{user}@{domain}")))
    }

    fn parse_loose(raw: &str) -> Result<(String, Option<String>), HandleError> {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(HandleError::Empty);
        }
        let body = trimmed.strip_prefix('@').unwrap_or(trimmed);
        let malformed = || HandleError::Malformed(trimmed.to_owned());
        let mut parts = body.split('@');
        let user = parts.next().ok_or_else(malformed)?.to_ascii_lowercase();
        let domain = parts.next().map(str::to_ascii_lowercase);
        if parts.next().is_some() || !valid_user(&user) {
            return Err(malformed());
        }
        if let Some(d) = &domain {
            if !valid_domain(d) {
                return Err(malformed());
            }
        }
        Ok((user, domain))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn user(&self) -> &str {
        self.0.split_once('@').map_or(&self.0, |(u, _)| u)
    }

    pub fn domain(&self) -> &str {
        self.0.split_once('@').map_or("", |(_, d)| d)
    }
}

impl fmt::Display for AccountHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for AccountHandle {
    type Err = HandleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for AccountHandle {
    type Error = HandleError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<AccountHandle> for String {
    fn from(h: AccountHandle) -> String {
        h.0
    }
}

/// The data source a post was drawn from.
///
/// Variant order is the fixed tie-break order used whenever sources of equal
/// weight must be ranked.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SourceCategory {
    FollowingAndHashtags,
    Local,
    Trending,
    PrioritizedAccount(AccountHandle),
}

impl SourceCategory {
    /// Finite sources can be exhausted; Local and Trending never run out.
    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            Self::FollowingAndHashtags | Self::PrioritizedAccount(_)
        )
    }

    pub fn is_chronological(&self) -> bool {
        !matches!(self, Self::Trending)
    }

    pub fn account(&self) -> Option<&AccountHandle> {
        match self {
            Self::PrioritizedAccount(h) => Some(h),
            _ => None,
        }
    }
}

const ACCOUNT_PREFIX: &str = "account:";

impl fmt::Display for SourceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FollowingAndHashtags => f.write_str("following"),
            Self::Local => f.write_str("local"),
            Self::Trending => f.write_str("trending"),
            Self::PrioritizedAccount(h) => write!(f, "{ACCOUNT_PREFIX}{h}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SourceParseError {
    #[error("unknown source `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Handle(#[from] HandleError),
}

impl FromStr for SourceCategory {
    type Err = SourceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "following" => Ok(Self::FollowingAndHashtags),
            "local" => Ok(Self::Local),
            "trending" => Ok(Self::Trending),
            _ => match s.strip_prefix(ACCOUNT_PREFIX) {
                Some(h) => Ok(Self::PrioritizedAccount(AccountHandle::parse(h)?)),
                None => Err(SourceParseError::Unknown(s.to_owned())),
            },
        }
    }
}

impl TryFrom<String> for SourceCategory {
    type Error = SourceParseError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<SourceCategory> for String {
    fn from(s: SourceCategory) -> String {
        s.to_string()
    }
}

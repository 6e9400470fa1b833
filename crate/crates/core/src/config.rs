use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::priority::PriorityLevel;
use crate::source::{AccountHandle, SourceCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedPriorities {
    pub following: PriorityLevel,
    pub local: PriorityLevel,
    pub trending: PriorityLevel,
}

impl Default for FeedPriorities {
    fn default() -> Self {
        Self {
            following: PriorityLevel::High,
            local: PriorityLevel::Low,
            trending: PriorityLevel::Low,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrioritizedAccount {
    pub handle: AccountHandle,
    pub level: PriorityLevel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMode {
    /// Random draws weighted by priority; the default.
    #[default]
    WeightedInterleave,
    /// Whole sources in descending weight order.
    StrictPriority,
}

/// A user's curation rules.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurationConfig {
    #[serde(default)]
    pub priorities: FeedPriorities,
    #[serde(default)]
    pub accounts: Vec<PrioritizedAccount>,
    #[serde(default)]
    pub filters: Vec<String>,
    #[serde(default)]
    pub ordering_mode: OrderingMode,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("account `{0}` is listed more than once")]
    DuplicateAccount(AccountHandle),
    #[error("account `{0}` has priority none")]
    AccountWithoutPriority(AccountHandle),
    #[error("filter phrase #{0} is blank")]
    BlankFilter(usize),
}

impl CurationConfig {
    pub fn new(following: PriorityLevel, local: PriorityLevel, trending: PriorityLevel) -> Self {
        Self {
            priorities: FeedPriorities {
                following,
                local,
                trending,
            },
            ..Self::default()
        }
    }

    pub fn with_account(mut self, handle: AccountHandle, level: PriorityLevel) -> Self {
        self.accounts.push(PrioritizedAccount { handle, level });
        self
    }

    pub fn with_filter(mut self, phrase: impl Into<String>) -> Self {
        self.filters.push(phrase.into());
        self
    }

    pub fn with_mode(mut self, mode: OrderingMode) -> Self {
        self.ordering_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut handles = BTreeSet::new();
        for account in &self.accounts {
            if account.level == PriorityLevel::None {
                return Err(ConfigError::AccountWithoutPriority(account.handle.clone()));
            }
            if !handles.insert(&account.handle) {
                return Err(ConfigError::DuplicateAccount(account.handle.clone()));
            }
        }
        if let Some(i) = self.filters.iter().position(|f| f.trim().is_empty()) {
            return Err(ConfigError::BlankFilter(i));
        }
        Ok(())
    }

    /// Every source with its level, in tie-break order: the three feeds,
    /// then accounts as configured.
    pub fn levels(&self) -> Vec<(SourceCategory, PriorityLevel)> {
        let p = &self.priorities;
        let mut out = vec![
            (SourceCategory::FollowingAndHashtags, p.following),
            (SourceCategory::Local, p.local),
            (SourceCategory::Trending, p.trending),
        ];
        out.extend(self.accounts.iter().map(|a| {
            (
                SourceCategory::PrioritizedAccount(a.handle.clone()),
                a.level,
            )
        }));
        out
    }

    pub fn weights(&self) -> Vec<(SourceCategory, u32)> {
        self.levels()
            .into_iter()
            .map(|(s, l)| (s, l.weight()))
            .collect()
    }

    pub fn total_weight(&self) -> u32 {
        self.weights().iter().map(|(_, w)| w).sum()
    }

    pub fn weight_of(&self, source: &SourceCategory) -> u32 {
        self.weights()
            .into_iter()
            .find(|(s, _)| s == source)
            .map_or(0, |(_, w)| w)
    }
}

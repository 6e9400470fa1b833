use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the four slider stops a user can assign to a source.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum PriorityLevel {
    #[default]
    None,
    Low,
    Medium,
    High,
}

impl PriorityLevel {
    pub const ALL: [PriorityLevel; 4] = [Self::None, Self::Low, Self::Medium, Self::High];

    /// Ordinal weight used for allocation and for the interleave draw.
    pub const fn weight(self) -> u32 {
        match self {
            Self::None => 0,
            Self::Low => 1,
            Self::Medium => 2,
            Self::High => 3,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Low => "low",
            Self::Medium => "medium",
            Self::High => "high",
        }
    }

    /// Human-facing slider label.
    pub const fn label(self) -> &'static str {
        match self {
            Self::None => "None",
            Self::Low => "Low Priority",
            Self::Medium => "Medium Priority",
            Self::High => "High Priority",
        }
    }
}

pub fn priority_weight(level: PriorityLevel) -> u32 {
    level.weight()
}

impl fmt::Display for PriorityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown priority level `{0}` (expected none, low, medium or high)")]
pub struct UnknownLevel(pub String);

impl FromStr for PriorityLevel {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLevel(s.to_owned()))
    }
}

//! The 35-dimension catalog: identifiers, categories, and normalization strategies.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Identifier of one of the 35 shared dimensions, `D1` through `D35`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DimensionId(u8);

/// Measurement category grouping a contiguous block of dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Detection,
    Coverage,
    Reasoning,
    Efficiency,
    ToolUse,
    Risk,
    Robustness,
}

/// How a raw dimension value is mapped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Ratio,
    Mcc,
    LowerIsBetter,
    HigherIsBetter,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Detection,
        Category::Coverage,
        Category::Reasoning,
        Category::Efficiency,
        Category::ToolUse,
        Category::Risk,
        Category::Robustness,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Detection => "Detection",
            Category::Coverage => "Coverage & Consistency",
            Category::Reasoning => "Reasoning & Evidence",
            Category::Efficiency => "Operational Efficiency",
            Category::ToolUse => "Tool-Use & Navigation",
            Category::Risk => "Risk & Severity",
            Category::Robustness => "Robustness",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

const NAMES: [&str; 35] = [
    "MCC",
    "Recall",
    "Precision",
    "F1",
    "True Negative Rate",
    "CWE Accuracy",
    "Mean Location IoU",
    "Actionable Finding Rate",
    "CWE Coverage Breadth",
    "Worst Category Floor",
    "Cross-Language Consistency",
    "Worst Language Floor",
    "SAST FP Filtering",
    "Evidence Completeness",
    "Reasoning Presence",
    "Reasoning + Correct Verdict",
    "FP Reasoning Quality",
    "Cost per Task",
    "Cost per True Positive",
    "MCC per Dollar",
    "Wall Time per Task",
    "Throughput",
    "Tokens per Task",
    "Tool Calls per Task",
    "Turns per Task",
    "Navigation Efficiency",
    "Tool Effectiveness",
    "Severity-Weighted Recall",
    "Critical Miss Rate",
    "Severity Coverage",
    "Parse Success Rate",
    "Format Compliance",
    "Error Rate",
    "Autonomous Completion",
    "Graceful Degradation",
];

macro_rules! dimension_consts {
    ($($name:ident = $n:literal),* $(,)?) => {
        impl DimensionId {
            $(pub const $name: DimensionId = DimensionId($n);)*
        }
    };
}

dimension_consts! {
    D1 = 1, D2 = 2, D3 = 3, D4 = 4, D5 = 5, D6 = 6, D7 = 7, D8 = 8, D9 = 9, D10 = 10,
    D11 = 11, D12 = 12, D13 = 13, D14 = 14, D15 = 15, D16 = 16, D17 = 17, D18 = 18,
    D19 = 19, D20 = 20, D21 = 21, D22 = 22, D23 = 23, D24 = 24, D25 = 25, D26 = 26,
    D27 = 27, D28 = 28, D29 = 29, D30 = 30, D31 = 31, D32 = 32, D33 = 33, D34 = 34,
    D35 = 35,
}

impl DimensionId {
    pub const COUNT: usize = 35;

    /// Returns the dimension with the given 1-based number, if it exists.
    pub const fn new(number: u8) -> Option<Self> {
        if number >= 1 && number <= 35 {
            Some(DimensionId(number))
        } else {
            None
        }
    }

    pub const fn number(self) -> u8 {
        self.0
    }

    /// Zero-based position in catalog order.
    pub const fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl DoubleEndedIterator<Item = DimensionId> + ExactSizeIterator + Clone {
        (1..=35u8).map(DimensionId)
    }

    pub fn name(self) -> &'static str {
        NAMES[self.index()]
    }

    pub fn category(self) -> Category {
        match self.0 {
            1..=8 => Category::Detection,
            9..=13 => Category::Coverage,
            14..=17 => Category::Reasoning,
            18..=23 => Category::Efficiency,
            24..=27 => Category::ToolUse,
            28..=30 => Category::Risk,
            _ => Category::Robustness,
        }
    }

    pub fn strategy(self) -> Strategy {
        match self.0 {
            1 => Strategy::Mcc,
            18 | 19 | 21 | 23 | 24 | 25 => Strategy::LowerIsBetter,
            20 | 22 => Strategy::HigherIsBetter,
            _ => Strategy::Ratio,
        }
    }

    /// Whether normalization needs a reference cap for this dimension.
    pub fn is_capped(self) -> bool {
        matches!(
            self.strategy(),
            Strategy::LowerIsBetter | Strategy::HigherIsBetter
        )
    }
}

impl fmt::Display for DimensionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dimension `{0}` (expected D1..D35)")]
pub struct UnknownDimension(pub String);

impl FromStr for DimensionId {
    type Err = UnknownDimension;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix('D')
            .or_else(|| s.strip_prefix('d'))
            .ok_or_else(|| UnknownDimension(s.into()))?;
        // Reject signs, leading zeros, and whitespace that `parse` would accept.
        if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(UnknownDimension(s.into()));
        }
        digits
            .parse::<u8>()
            .ok()
            .and_then(DimensionId::new)
            .ok_or_else(|| UnknownDimension(s.into()))
    }
}

impl Serialize for DimensionId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DimensionId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = DimensionId;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a dimension id like \"D7\"")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<DimensionId, E> {
                v.parse().map_err(|e: UnknownDimension| E::custom(format!("{e}")))
            }
        }
        deserializer.deserialize_str(Visitor)
    }
}

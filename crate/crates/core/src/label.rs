//! Three-way gold labels and the four-way predicted labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldLabel {
    True,
    False,
    Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictedLabel {
    True,
    False,
    Uncertain,
    CompileError,
}

impl GoldLabel {
    pub const ALL: [GoldLabel; 3] = [GoldLabel::True, GoldLabel::False, GoldLabel::Uncertain];

    pub fn as_str(self) -> &'static str {
        match self {
            GoldLabel::True => "true",
            GoldLabel::False => "false",
            GoldLabel::Uncertain => "uncertain",
        }
    }
}

impl PredictedLabel {
    pub const ALL: [PredictedLabel; 4] = [
        PredictedLabel::True,
        PredictedLabel::False,
        PredictedLabel::Uncertain,
        PredictedLabel::CompileError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PredictedLabel::True => "true",
            PredictedLabel::False => "false",
            PredictedLabel::Uncertain => "uncertain",
            PredictedLabel::CompileError => "compile_error",
        }
    }

    pub fn matches(self, gold: GoldLabel) -> bool {
        PredictedLabel::from(gold) == self
    }
}

impl From<GoldLabel> for PredictedLabel {
    fn from(g: GoldLabel) -> Self {
        match g {
            GoldLabel::True => PredictedLabel::True,
            GoldLabel::False => PredictedLabel::False,
            GoldLabel::Uncertain => PredictedLabel::Uncertain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label '{0}'")]
pub struct LabelError(pub String);

impl FromStr for GoldLabel {
    type Err = LabelError;

    /// Case-insensitive; `unknown` is read as uncertain.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" => Ok(GoldLabel::True),
            "false" => Ok(GoldLabel::False),
            "uncertain" | "unknown" => Ok(GoldLabel::Uncertain),
            _ => Err(LabelError(s.to_string())),
        }
    }
}

impl FromStr for PredictedLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "compile_error" | "error" => Ok(PredictedLabel::CompileError),
            other => other.parse::<GoldLabel>().map(PredictedLabel::from),
        }
    }
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for PredictedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spellings() {
        assert_eq!("Unknown".parse::<GoldLabel>().unwrap(), GoldLabel::Uncertain);
        assert_eq!("TRUE".parse::<GoldLabel>().unwrap(), GoldLabel::True);
        assert!("maybe".parse::<GoldLabel>().is_err());
        assert_eq!(
            "compile_error".parse::<PredictedLabel>().unwrap(),
            PredictedLabel::CompileError
        );
        assert!("compile_error".parse::<GoldLabel>().is_err());
    }
}

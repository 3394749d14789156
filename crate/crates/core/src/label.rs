use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Rebound class. The declaration order (DREB, OREB, BACKGROUND) is the
/// column order of score matrices and class-weight vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "DREB")]
    Dreb,
    #[serde(rename = "OREB")]
    Oreb,
    #[serde(rename = "BACKGROUND")]
    Background,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Dreb, ClassLabel::Oreb, ClassLabel::Background];
    pub const ACTIONS: [ClassLabel; 2] = [ClassLabel::Dreb, ClassLabel::Oreb];

    /// Column index in a (DREB, OREB, BACKGROUND) row.
    pub fn index(self) -> usize {
        match self {
            ClassLabel::Dreb => 0,
            ClassLabel::Oreb => 1,
            ClassLabel::Background => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<ClassLabel> {
        ClassLabel::ALL.get(i).copied()
    }

    pub fn is_action(self) -> bool {
        self != ClassLabel::Background
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Dreb => "DREB",
            ClassLabel::Oreb => "OREB",
            ClassLabel::Background => "BACKGROUND",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown class label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for ClassLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DREB" => Ok(ClassLabel::Dreb),
            "OREB" => Ok(ClassLabel::Oreb),
            "BACKGROUND" | "BG" => Ok(ClassLabel::Background),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const NUM_CLASSES: usize = 7;

/// The seven basic expressions, in the one canonical order used by every
/// 7-vector and every file the engine touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Anger,
    Disgust,
    Fear,
    Happiness,
    Neutral,
    Sadness,
    Surprise,
}

/// Per-class tally indexed by [`ClassLabel::index`].
pub type ClassCounts = [u64; NUM_CLASSES];

impl ClassLabel {
    pub const ALL: [ClassLabel; NUM_CLASSES] = [
        ClassLabel::Anger,
        ClassLabel::Disgust,
        ClassLabel::Fear,
        ClassLabel::Happiness,
        ClassLabel::Neutral,
        ClassLabel::Sadness,
        ClassLabel::Surprise,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Anger => "anger",
            ClassLabel::Disgust => "disgust",
            ClassLabel::Fear => "fear",
            ClassLabel::Happiness => "happiness",
            ClassLabel::Neutral => "neutral",
            ClassLabel::Sadness => "sadness",
            ClassLabel::Surprise => "surprise",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown class label {s:?}"))
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

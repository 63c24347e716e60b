use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};

pub const DEFAULT_FACTOR_SPACE: &str = include_str!("../../data/factor_space.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueFormat {
    Descriptive,
    Facs,
    Combined,
}

impl CueFormat {
    pub fn name(self) -> &'static str {
        match self {
            CueFormat::Descriptive => "descriptive",
            CueFormat::Facs => "facs",
            CueFormat::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "descriptive" => Some(CueFormat::Descriptive),
            "facs" => Some(CueFormat::Facs),
            "combined" => Some(CueFormat::Combined),
            _ => None,
        }
    }
}

/// A factor value: `key` goes into the prompt CSV, `surface` into the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorValue {
    pub key: String,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionValue {
    pub label: ClassLabel,
    /// Adjective form, e.g. "disgusted".
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpace {
    pub expressions: Vec<ExpressionValue>,
    pub ages: Vec<FactorValue>,
    pub genders: Vec<FactorValue>,
    pub races: Vec<FactorValue>,
    pub head_poses: Vec<FactorValue>,
    pub cue_formats: Vec<CueFormat>,
}

impl Default for FactorSpace {
    fn default() -> Self {
        Self::from_toml(DEFAULT_FACTOR_SPACE).expect("bundled factor space is valid")
    }
}

impl FactorSpace {
    pub fn from_toml(text: &str) -> Result<Self> {
        let space: FactorSpace =
            toml::from_str(text).map_err(|e| Error::invalid(format!("factor space: {e}")))?;
        space.validate()?;
        Ok(space)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        fn unique<'a>(axis: &str, keys: impl Iterator<Item = &'a str>) -> Result<()> {
            let mut seen = HashSet::new();
            let mut n = 0;
            for k in keys {
                n += 1;
                if !seen.insert(k) {
                    return Err(Error::invalid(format!("duplicate {axis} value {k:?}")));
                }
            }
            if n == 0 {
                return Err(Error::invalid(format!("factor axis {axis} is empty")));
            }
            Ok(())
        }
        unique(
            "expression",
            self.expressions.iter().map(|e| e.label.name()),
        )?;
        unique("age", self.ages.iter().map(|v| v.key.as_str()))?;
        unique("gender", self.genders.iter().map(|v| v.key.as_str()))?;
        unique("race", self.races.iter().map(|v| v.key.as_str()))?;
        unique("head_pose", self.head_poses.iter().map(|v| v.key.as_str()))?;
        unique("cue_format", self.cue_formats.iter().map(|c| c.name()))?;
        Ok(())
    }

    /// Number of grid cells, i.e. the product of all axis cardinalities.
    pub fn cardinality(&self) -> usize {
        self.expressions.len()
            * self.ages.len()
            * self.genders.len()
            * self.races.len()
            * self.head_poses.len()
            * self.cue_formats.len()
    }

    pub fn expression(&self, label: ClassLabel) -> Option<&ExpressionValue> {
        self.expressions.iter().find(|e| e.label == label)
    }

    /// Keeps only the listed keys on each axis; `None` leaves an axis whole.
    pub fn restrict(&self, filter: &SpaceFilter) -> Result<FactorSpace> {
        fn keep<T: Clone>(
            all: &[T],
            wanted: &Option<Vec<String>>,
            key: impl Fn(&T) -> &str,
        ) -> Vec<T> {
            match wanted {
                None => all.to_vec(),
                Some(w) => all
                    .iter()
                    .filter(|v| w.iter().any(|k| k == key(v)))
                    .cloned()
                    .collect(),
            }
        }
        let space = FactorSpace {
            expressions: keep(&self.expressions, &filter.expressions, |e| e.label.name()),
            ages: keep(&self.ages, &filter.ages, |v| &v.key),
            genders: keep(&self.genders, &filter.genders, |v| &v.key),
            races: keep(&self.races, &filter.races, |v| &v.key),
            head_poses: keep(&self.head_poses, &filter.head_poses, |v| &v.key),
            cue_formats: keep(&self.cue_formats, &filter.cue_formats, |c| c.name()),
        };
        space.validate()?;
        Ok(space)
    }
}

/// Axis restriction for [`FactorSpace::restrict`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceFilter {
    pub expressions: Option<Vec<String>>,
    pub ages: Option<Vec<String>>,
    pub genders: Option<Vec<String>>,
    pub races: Option<Vec<String>>,
    pub head_poses: Option<Vec<String>>,
    pub cue_formats: Option<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cardinalities() {
        let s = FactorSpace::default();
        assert_eq!(
            [
                s.expressions.len(),
                s.ages.len(),
                s.genders.len(),
                s.races.len(),
                s.head_poses.len(),
                s.cue_formats.len()
            ],
            [7, 5, 2, 5, 5, 3]
        );
        assert_eq!(s.cardinality(), 5250);
        let labels: Vec<_> = s.expressions.iter().map(|e| e.label).collect();
        assert_eq!(labels, ClassLabel::ALL);
    }

    #[test]
    fn restrict_to_single_cell() {
        let s = FactorSpace::default();
        let one = |k: &str| Some(vec![k.to_string()]);
        let r = s
            .restrict(&SpaceFilter {
                expressions: one("disgust"),
                ages: one("child"),
                genders: one("female"),
                races: one("Latino"),
                head_poses: one("slight right yaw"),
                cue_formats: one("descriptive"),
            })
            .unwrap();
        assert_eq!(r.cardinality(), 1);
        assert!(s
            .restrict(&SpaceFilter {
                ages: one("toddler"),
                ..Default::default()
            })
            .is_err());
    }

    #[test]
    fn duplicate_values_rejected() {
        let mut s = FactorSpace::default();
        s.races.push(s.races[0].clone());
        assert!(s.validate().is_err());
    }
}

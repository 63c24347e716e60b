use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{load_manifest, Manifest};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// One synthetic source, capped per class.
    FullSynthetic,
    /// Real plus an entire synthetic source, no cap.
    Concat,
    /// Real topped up with synthetic records to the cap.
    Fix,
    /// Real plus augmented copies lifting every class to the majority count.
    Addon,
    /// Real plus augmented copies lifting every class to the cap.
    Allaug,
    /// A fixed number of records per class from each of several sources,
    /// plus a held-out validation split.
    Mixed,
}

impl Regime {
    pub const ALL: [Regime; 6] = [
        Regime::FullSynthetic,
        Regime::Concat,
        Regime::Fix,
        Regime::Addon,
        Regime::Allaug,
        Regime::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::FullSynthetic => "full_synthetic",
            Regime::Concat => "concat",
            Regime::Fix => "fix",
            Regime::Addon => "addon",
            Regime::Allaug => "allaug",
            Regime::Mixed => "mixed",
        }
    }

    pub fn is_augmenting(self) -> bool {
        matches!(self, Regime::Addon | Regime::Allaug)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown regime `{s}`")))
    }
}

/// What to assemble. Manifest paths in a plan file are relative to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblyPlan {
    pub regime: Regime,
    #[serde(default)]
    pub real: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Vec<PathBuf>,
    #[serde(default = "default_cap")]
    pub per_class_cap: u64,
    #[serde(default = "default_per_source")]
    pub mixed_per_source: u64,
    #[serde(default = "default_validation_ratio")]
    pub validation_ratio: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_cap() -> u64 {
    10_000
}

fn default_per_source() -> u64 {
    1_250
}

fn default_validation_ratio() -> f64 {
    0.1
}

/// Manifests a plan refers to, already loaded.
#[derive(Debug, Clone, Default)]
pub struct AssemblyInputs {
    pub real: Option<Manifest>,
    pub synthetic: Vec<Manifest>,
}

impl AssemblyPlan {
    pub fn new(regime: Regime) -> Self {
        AssemblyPlan {
            regime,
            real: None,
            synthetic: Vec::new(),
            per_class_cap: default_cap(),
            mixed_per_source: default_per_source(),
            validation_ratio: default_validation_ratio(),
            seed: 0,
        }
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let mut plan: AssemblyPlan =
            toml::from_str(text).map_err(|e| Error::format(origin, e.to_string()))?;
        let base = origin.parent().unwrap_or(Path::new(""));
        if let Some(real) = &mut plan.real {
            *real = base.join(&*real);
        }
        for p in &mut plan.synthetic {
            *p = base.join(&*p);
        }
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn load_inputs(&self) -> Result<AssemblyInputs> {
        Ok(AssemblyInputs {
            real: self.real.as_ref().map(load_manifest).transpose()?,
            synthetic: self
                .synthetic
                .iter()
                .map(load_manifest)
                .collect::<Result<_>>()?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_class_cap == 0 {
            return Err(Error::invalid("per_class_cap must be positive"));
        }
        if !(self.validation_ratio >= 0.0 && self.validation_ratio <= 1.0) {
            return Err(Error::invalid(format!(
                "validation_ratio {} outside [0, 1]",
                self.validation_ratio
            )));
        }
        Ok(())
    }
}

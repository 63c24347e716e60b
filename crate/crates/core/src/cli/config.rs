use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::editpipe::{AngleTable, CompositeParams, DegradeRecipe};
use crate::error::{Error, Result};
use crate::imageops::AugmentPolicy;
use crate::metrics::KidParams;
use crate::promptforge::Variant;
use crate::pseudolabel::FilterPolicy;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptsConfig {
    pub variant: Option<Variant>,
    pub factor_space: Option<PathBuf>,
    pub tables: Option<PathBuf>,
    pub images_per_prompt: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoConfig {
    pub threshold: Option<f64>,
    pub per_class_cap: Option<usize>,
    pub source: Option<String>,
    pub path_template: Option<String>,
}

/// Contents of `--config`. Every field is optional; relative paths resolve
/// against the file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub prompts: PromptsConfig,
    #[serde(default)]
    pub pseudo: PseudoConfig,
    pub angles: Option<AngleTable>,
    pub composite: Option<CompositeParams>,
    pub degrade: Option<DegradeRecipe>,
    pub augment: Option<AugmentPolicy>,
    pub kid: Option<KidParams>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.prompts.factor_space, &mut cfg.prompts.tables]
            .into_iter()
            .flatten()
        {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    pub fn filter_policy(&self, threshold: Option<f64>, cap: Option<usize>) -> FilterPolicy {
        let d = FilterPolicy::default();
        FilterPolicy {
            threshold: threshold.or(self.pseudo.threshold).unwrap_or(d.threshold),
            per_class_cap: cap.or(self.pseudo.per_class_cap).unwrap_or(d.per_class_cap),
        }
    }
}

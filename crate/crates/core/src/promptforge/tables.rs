use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::factors::{CueFormat, FactorSpace};
use crate::dataset::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};

pub const DEFAULT_PROMPT_TABLES: &str = include_str!("../../data/prompt_tables.toml");

/// Main FACS action-unit codes.
const FACS_UNITS: &[u8] = &[
    1, 2, 4, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27,
    28, 38, 39, 41, 42, 43, 44, 45, 46,
];

pub const MAX_AU_INTENSITY: f32 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionUnit {
    pub au: u8,
    pub intensity: f32,
}

impl fmt::Display for ActionUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AU{}:{:?}", self.au, self.intensity)
    }
}

/// Expression to AU-intensity vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AuMap {
    table: [Vec<ActionUnit>; NUM_CLASSES],
}

impl AuMap {
    pub fn new(raw: BTreeMap<String, Vec<ActionUnit>>) -> Result<Self> {
        let mut table: [Vec<ActionUnit>; NUM_CLASSES] = Default::default();
        let mut seen = [false; NUM_CLASSES];
        for (name, mut units) in raw {
            let label: ClassLabel = name.parse().map_err(Error::invalid)?;
            for u in &mut units {
                if !FACS_UNITS.contains(&u.au) {
                    return Err(Error::invalid(format!(
                        "AU{} is not a FACS action unit",
                        u.au
                    )));
                }
                if !u.intensity.is_finite() {
                    return Err(Error::invalid(format!(
                        "AU{} intensity is not finite",
                        u.au
                    )));
                }
                let clamped = u.intensity.clamp(0.0, MAX_AU_INTENSITY);
                if clamped != u.intensity {
                    log::warn!(
                        "{label}: AU{} intensity {} clamped to {clamped}",
                        u.au,
                        u.intensity
                    );
                    u.intensity = clamped;
                }
            }
            table[label.index()] = units;
            seen[label.index()] = true;
        }
        if let Some(missing) = ClassLabel::ALL.iter().find(|c| !seen[c.index()]) {
            return Err(Error::invalid(format!("AU map has no entry for {missing}")));
        }
        Ok(AuMap { table })
    }

    pub fn get(&self, label: ClassLabel) -> &[ActionUnit] {
        &self.table[label.index()]
    }
}

/// Formats an AU vector as `AU6:1.0;AU12:1.0`.
pub fn format_au_vector(units: &[ActionUnit]) -> String {
    units
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_au_vector(s: &str) -> std::result::Result<Vec<ActionUnit>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|item| {
            let (au, val) = item
                .strip_prefix("AU")
                .and_then(|rest| rest.split_once(':'))
                .ok_or_else(|| format!("bad AU item {item:?}"))?;
            Ok(ActionUnit {
                au: au.parse().map_err(|_| format!("bad AU id in {item:?}"))?,
                intensity: val
                    .parse()
                    .map_err(|_| format!("bad intensity in {item:?}"))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CueEntry {
    pub expression: ClassLabel,
    pub format: CueFormat,
    #[serde(default)]
    pub ages: Vec<String>,
    #[serde(default)]
    pub genders: Vec<String>,
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitEntry {
    #[serde(default)]
    pub expressions: Vec<ClassLabel>,
    #[serde(default)]
    pub ages: Vec<String>,
    #[serde(default)]
    pub genders: Vec<String>,
    pub texts: Vec<String>,
}

fn matches<T: PartialEq + ?Sized>(filter: &[impl AsRef<T>], value: &T) -> bool {
    filter.is_empty() || filter.iter().any(|f| f.as_ref() == value)
}

/// Texts of the most specific entries matching a key. `entries` yields
/// (specificity, matched, texts).
fn most_specific<'a>(entries: impl Iterator<Item = (usize, bool, &'a [String])>) -> Vec<&'a str> {
    let mut best = None;
    let mut out = Vec::new();
    for (spec, hit, texts) in entries {
        if !hit {
            continue;
        }
        match best {
            Some(b) if spec < b => continue,
            Some(b) if spec == b => {}
            _ => {
                best = Some(spec);
                out.clear();
            }
        }
        out.extend(texts.iter().map(String::as_str));
    }
    out
}

/// Case-insensitive word-boundary matcher for affect vocabulary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    entries: Vec<Vec<String>>,
}

fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl Lexicon {
    pub fn new<'a>(phrases: impl IntoIterator<Item = &'a str>) -> Self {
        let mut entries: Vec<Vec<String>> = phrases
            .into_iter()
            .map(tokenize)
            .filter(|t| !t.is_empty())
            .collect();
        entries.sort();
        entries.dedup();
        Lexicon { entries }
    }

    /// Lexicon entries that occur in `text` as whole-word sequences.
    pub fn scan(&self, text: &str) -> Vec<String> {
        let tokens = tokenize(text);
        self.entries
            .iter()
            .filter(|e| tokens.windows(e.len()).any(|w| w == e.as_slice()))
            .map(|e| e.join(" "))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTables {
    cues: Vec<CueEntry>,
    traits: Vec<TraitEntry>,
    au_map: BTreeMap<String, Vec<ActionUnit>>,
    lexicon: RawLexicon,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLexicon {
    words: Vec<String>,
}

/// Cue, trait, AU and lexicon tables backing prompt rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTables {
    pub cues: Vec<CueEntry>,
    pub traits: Vec<TraitEntry>,
    pub au_map: AuMap,
    /// Configured affect words plus every cue phrase.
    pub lexicon: Lexicon,
}

impl Default for PromptTables {
    fn default() -> Self {
        Self::from_toml(DEFAULT_PROMPT_TABLES).expect("bundled prompt tables are valid")
    }
}

impl PromptTables {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawTables =
            toml::from_str(text).map_err(|e| Error::invalid(format!("prompt tables: {e}")))?;
        for c in &raw.cues {
            if c.texts.is_empty() {
                return Err(Error::invalid(format!(
                    "cue entry for {} has no texts",
                    c.expression
                )));
            }
            if let Some(t) = c.texts.iter().find(|t| t.contains(['(', ')'])) {
                return Err(Error::invalid(format!(
                    "cue text {t:?} contains parentheses"
                )));
            }
        }
        let lexicon = Lexicon::new(
            raw.lexicon.words.iter().map(String::as_str).chain(
                raw.cues
                    .iter()
                    .flat_map(|c| c.texts.iter().map(String::as_str)),
            ),
        );
        let tables = PromptTables {
            cues: raw.cues,
            traits: raw.traits,
            au_map: AuMap::new(raw.au_map)?,
            lexicon,
        };
        for t in tables.traits.iter().flat_map(|t| &t.texts) {
            let hits = tables.lexicon.scan(t);
            if !hits.is_empty() {
                return Err(Error::invalid(format!(
                    "identity trait {t:?} is not affect-neutral (matches {hits:?})"
                )));
            }
        }
        Ok(tables)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn cues(
        &self,
        expression: ClassLabel,
        age: &str,
        gender: &str,
        format: CueFormat,
    ) -> Vec<&str> {
        most_specific(self.cues.iter().map(|c| {
            let spec = usize::from(!c.ages.is_empty()) + usize::from(!c.genders.is_empty());
            let hit = c.expression == expression
                && c.format == format
                && matches::<str>(&c.ages, age)
                && matches::<str>(&c.genders, gender);
            (spec, hit, c.texts.as_slice())
        }))
    }

    pub fn traits(&self, expression: ClassLabel, age: &str, gender: &str) -> Vec<&str> {
        most_specific(self.traits.iter().map(|t| {
            let spec = usize::from(!t.expressions.is_empty())
                + usize::from(!t.ages.is_empty())
                + usize::from(!t.genders.is_empty());
            let hit = (t.expressions.is_empty() || t.expressions.contains(&expression))
                && matches::<str>(&t.ages, age)
                && matches::<str>(&t.genders, gender);
            (spec, hit, t.texts.as_slice())
        }))
    }

    /// Every (expression, age, gender) key of `space` needs a trait and a cue
    /// for each cue format.
    pub fn check_coverage(&self, space: &FactorSpace) -> Result<()> {
        for e in &space.expressions {
            for a in &space.ages {
                for g in &space.genders {
                    if self.traits(e.label, &a.key, &g.key).is_empty() {
                        return Err(Error::invalid(format!(
                            "no identity trait for ({}, {}, {})",
                            e.label, a.key, g.key
                        )));
                    }
                    for &f in &space.cue_formats {
                        if self.cues(e.label, &a.key, &g.key, f).is_empty() {
                            return Err(Error::invalid(format!(
                                "no {} cue for ({}, {}, {})",
                                f.name(),
                                e.label,
                                a.key,
                                g.key
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

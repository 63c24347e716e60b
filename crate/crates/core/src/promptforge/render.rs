//! Prompt templates.

use super::factors::{ExpressionValue, FactorValue};
use super::tables::{ActionUnit, AuMap, Lexicon};
use super::{CueFormat, PromptSpec};
use crate::error::{Error, Result};

pub const SD_PREFIX: &str = "A close-up portrait clearly showing";

/// The expression lead-in that fineface v2 removes from a full prompt.
const EXPRESSION_LEAD: &str = " clearly showing an intense and highly expressive ";

/// One cell of the factor grid, with surfaces resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTuple {
    pub expression: ExpressionValue,
    pub age: FactorValue,
    pub gender: FactorValue,
    pub race: FactorValue,
    pub head_pose: FactorValue,
    pub cue_format: CueFormat,
}

fn lower_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Full text-to-image prompt with the expression, its cue, demographics,
/// pose and identity trait.
pub fn render_sd(spec: &PromptSpec) -> String {
    let f = &spec.factors;
    let cue = if spec.cue.is_empty() {
        String::new()
    } else {
        format!(" ({})", spec.cue)
    };
    format!(
        "{SD_PREFIX} an intense and highly expressive {} facial expression{cue}. \
         The subject is a {} {} of {} ethnicity. {}, {}, captured in a real-world environment.",
        f.expression.surface,
        f.gender.surface,
        f.age.surface,
        f.race.surface,
        f.head_pose.surface,
        spec.identity_trait,
    )
}

/// Subject-only prompt; the expression travels in the AU vector alone.
pub fn render_fineface_v1(
    spec: &PromptSpec,
    au_map: &AuMap,
    lexicon: &Lexicon,
) -> Result<(String, Vec<ActionUnit>)> {
    let trait_hits = lexicon.scan(&spec.identity_trait);
    if !trait_hits.is_empty() {
        return Err(Error::invalid(format!(
            "identity trait {:?} matches expression lexicon {trait_hits:?}",
            spec.identity_trait
        )));
    }
    let f = &spec.factors;
    let prompt = format!(
        "A close-up portrait of a {} {} with {} ethnicity, {}, {}, photorealistic, natural lighting.",
        f.gender.surface,
        f.age.surface,
        f.race.surface,
        spec.identity_trait,
        lower_first(&f.head_pose.surface),
    );
    let hits = lexicon.scan(&prompt);
    if !hits.is_empty() {
        return Err(Error::invalid(format!(
            "subject-only prompt matches expression lexicon {hits:?}: {prompt}"
        )));
    }
    Ok((prompt, au_map.get(f.expression.label).to_vec()))
}

/// Human-readable AU clause, e.g. `Facial action units: AU6 (1.0), AU12 (1.0).`
/// Empty for an empty vector.
pub fn au_clause(units: &[ActionUnit]) -> String {
    if units.is_empty() {
        return String::new();
    }
    let items: Vec<String> = units
        .iter()
        .map(|u| format!("AU{} ({:?})", u.au, u.intensity))
        .collect();
    format!("Facial action units: {}.", items.join(", "))
}

/// Strips the expression fragment and cue parenthetical from a full prompt
/// and appends the AU clause.
pub fn render_fineface_v2(
    sd_prompt: &str,
    spec: &PromptSpec,
    au_map: &AuMap,
) -> Result<(String, Vec<ActionUnit>)> {
    let label = spec.factors.expression.label;
    let fragment = format!(
        "{EXPRESSION_LEAD}{} facial expression",
        spec.factors.expression.surface
    );
    let start = sd_prompt.find(&fragment).ok_or_else(|| {
        Error::invalid(format!(
            "prompt lacks the {label} expression fragment: {sd_prompt}"
        ))
    })?;
    let mut end = start + fragment.len();
    let rest = &sd_prompt[end..];
    if rest.starts_with(" (") {
        let close = rest
            .find(')')
            .ok_or_else(|| Error::invalid(format!("unterminated cue clause: {sd_prompt}")))?;
        end += close + 1;
    }
    let mut cleaned = String::with_capacity(sd_prompt.len());
    cleaned.push_str(&sd_prompt[..start]);
    cleaned.push_str(&sd_prompt[end..]);

    let units = au_map.get(label).to_vec();
    let clause = au_clause(&units);
    if !clause.is_empty() {
        cleaned.push(' ');
        cleaned.push_str(&clause);
    }
    Ok((cleaned, units))
}

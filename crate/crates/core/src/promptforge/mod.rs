//! Factor-grid prompt synthesis for text-to-image and AU-conditioned
//! generators.
//!
//! The grid is the Cartesian product of expression, age, gender, race, head
//! pose and cue format. Each cell picks an identity trait and a cue from the
//! [`PromptTables`] using a per-cell seed, then renders one of three variants:
//!
//! * `sd`: the full prompt, expression named and cued in text;
//! * `fineface_v1`: a subject-only prompt plus the class AU vector;
//! * `fineface_v2`: the full prompt with its expression fragment removed and
//!   a readable AU clause appended.

mod export;
mod factors;
mod render;
mod tables;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use export::{load_prompt_csv, prompt_csv, write_prompt_csv, PromptRow, PROMPT_CSV_HEADER};
pub use factors::{
    CueFormat, ExpressionValue, FactorSpace, FactorValue, SpaceFilter, DEFAULT_FACTOR_SPACE,
};
pub use render::{
    au_clause, render_fineface_v1, render_fineface_v2, render_sd, FactorTuple, SD_PREFIX,
};
pub use tables::{
    format_au_vector, parse_au_vector, ActionUnit, AuMap, CueEntry, Lexicon, PromptTables,
    TraitEntry, DEFAULT_PROMPT_TABLES,
};

use crate::dataset::{ClassCounts, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Sd,
    FinefaceV1,
    FinefaceV2,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Sd => "sd",
            Variant::FinefaceV1 => "fineface_v1",
            Variant::FinefaceV2 => "fineface_v2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sd" => Ok(Variant::Sd),
            "fineface_v1" => Ok(Variant::FinefaceV1),
            "fineface_v2" => Ok(Variant::FinefaceV2),
            _ => Err(format!("unknown prompt variant {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSpec {
    pub factors: FactorTuple,
    /// Expression cue in the tuple's cue format.
    pub cue: String,
    pub identity_trait: String,
    pub variant: Variant,
    pub seed: u64,
    pub prompt: String,
    /// Present for the fineface variants only.
    pub au_vector: Option<Vec<ActionUnit>>,
}

/// Enumerates the grid in lexicographic factor order
/// (expression, age, gender, race, head pose, cue format).
pub fn enumerate_grid(
    space: &FactorSpace,
    tables: &PromptTables,
    variant: Variant,
    seed: u64,
) -> Result<Vec<PromptSpec>> {
    space.validate()?;
    tables.check_coverage(space)?;

    let dims = [
        space.expressions.len(),
        space.ages.len(),
        space.genders.len(),
        space.races.len(),
        space.head_poses.len(),
        space.cue_formats.len(),
    ];
    (0..space.cardinality())
        .into_par_iter()
        .map(|index| {
            let mut rem = index;
            let mut at = [0usize; 6];
            for axis in (0..6).rev() {
                at[axis] = rem % dims[axis];
                rem /= dims[axis];
            }
            let factors = FactorTuple {
                expression: space.expressions[at[0]].clone(),
                age: space.ages[at[1]].clone(),
                gender: space.genders[at[2]].clone(),
                race: space.races[at[3]].clone(),
                head_pose: space.head_poses[at[4]].clone(),
                cue_format: space.cue_formats[at[5]],
            };
            let cell_seed = seed::derive_index(seed, "prompt-grid", index as u64);
            let label = factors.expression.label;
            let traits = tables.traits(label, &factors.age.key, &factors.gender.key);
            let cues = tables.cues(
                label,
                &factors.age.key,
                &factors.gender.key,
                factors.cue_format,
            );
            let identity_trait = traits[(cell_seed % traits.len() as u64) as usize].to_string();
            let cue = cues[((cell_seed >> 32) % cues.len() as u64) as usize].to_string();

            let mut spec = PromptSpec {
                factors,
                cue,
                identity_trait,
                variant,
                seed: cell_seed,
                prompt: String::new(),
                au_vector: None,
            };
            render_variant(&mut spec, tables)?;
            Ok(spec)
        })
        .collect()
}

/// Fills `prompt` and `au_vector` according to `spec.variant`.
pub fn render_variant(spec: &mut PromptSpec, tables: &PromptTables) -> Result<()> {
    match spec.variant {
        Variant::Sd => {
            spec.prompt = render_sd(spec);
            spec.au_vector = None;
        }
        Variant::FinefaceV1 => {
            let (prompt, units) = render_fineface_v1(spec, &tables.au_map, &tables.lexicon)?;
            spec.prompt = prompt;
            spec.au_vector = Some(units);
        }
        Variant::FinefaceV2 => {
            let sd = render_sd(spec);
            let (prompt, units) = render_fineface_v2(&sd, spec, &tables.au_map)?;
            spec.prompt = prompt;
            spec.au_vector = Some(units);
        }
    }
    Ok(())
}

/// Planned prompt count per class.
pub fn planned_counts(specs: &[PromptSpec]) -> ClassCounts {
    let mut counts = [0u64; NUM_CLASSES];
    for s in specs {
        counts[s.factors.expression.label.index()] += 1;
    }
    counts
}

/// Fails if any subject-only prompt hits the lexicon.
pub fn check_lexicon(specs: &[PromptSpec], lexicon: &Lexicon) -> Result<()> {
    for s in specs.iter().filter(|s| s.variant == Variant::FinefaceV1) {
        let hits = lexicon.scan(&s.prompt);
        if !hits.is_empty() {
            return Err(Error::invalid(format!("{:?} matches {hits:?}", s.prompt)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ClassLabel;

    fn worked_example() -> PromptSpec {
        let v = |k: &str, s: &str| FactorValue {
            key: k.into(),
            surface: s.into(),
        };
        PromptSpec {
            factors: FactorTuple {
                expression: ExpressionValue {
                    label: ClassLabel::Disgust,
                    surface: "disgusted".into(),
                },
                age: v("child", "child"),
                gender: v("female", "female"),
                race: v("Latino", "Latino"),
                head_pose: v("slight right yaw", "Slightly turned to the right"),
                cue_format: CueFormat::Descriptive,
            },
            cue: "upper lip lifted with nose wrinkling and narrowed eyes".into(),
            identity_trait: "short bob cut".into(),
            variant: Variant::Sd,
            seed: 0,
            prompt: String::new(),
            au_vector: None,
        }
    }

    const WORKED: &str = "A close-up portrait clearly showing an intense and highly expressive disgusted \
        facial expression (upper lip lifted with nose wrinkling and narrowed eyes). The subject is a \
        female child of Latino ethnicity. Slightly turned to the right, short bob cut, captured in a \
        real-world environment.";

    #[test]
    fn sd_renders_worked_example_verbatim() {
        assert_eq!(render_sd(&worked_example()), WORKED);
    }

    #[test]
    fn v2_strips_expression_and_appends_clause() {
        let tables = PromptTables::default();
        let (p, units) = render_fineface_v2(WORKED, &worked_example(), &tables.au_map).unwrap();
        assert_eq!(
            p,
            "A close-up portrait. The subject is a female child of Latino ethnicity. Slightly turned \
             to the right, short bob cut, captured in a real-world environment. Facial action units: \
             AU9 (1.0), AU15 (1.0)."
        );
        assert!(!p.contains("disgusted"));
        assert!(!p.contains("nose wrinkling"));
        assert_eq!(units.len(), 2);
    }

    #[test]
    fn v2_requires_expression_fragment() {
        let tables = PromptTables::default();
        let spec = worked_example();
        assert!(
            render_fineface_v2("A close-up portrait of a person.", &spec, &tables.au_map).is_err()
        );
    }

    #[test]
    fn v2_neutral_with_empty_cue_appends_nothing() {
        let tables = PromptTables::default();
        let mut spec = worked_example();
        spec.factors.expression = ExpressionValue {
            label: ClassLabel::Neutral,
            surface: "neutral".into(),
        };
        spec.cue.clear();
        let sd = render_sd(&spec);
        assert!(!sd.contains('('));
        let (p, units) = render_fineface_v2(&sd, &spec, &tables.au_map).unwrap();
        assert!(units.is_empty());
        assert_eq!(
            p,
            sd.replace(
                " clearly showing an intense and highly expressive neutral facial expression",
                ""
            )
        );
    }

    #[test]
    fn v1_worked_example() {
        let tables = PromptTables::default();
        let mut spec = worked_example();
        spec.variant = Variant::FinefaceV1;
        let (p, units) = render_fineface_v1(&spec, &tables.au_map, &tables.lexicon).unwrap();
        assert_eq!(
            p,
            "A close-up portrait of a female child with Latino ethnicity, short bob cut, slightly \
             turned to the right, photorealistic, natural lighting."
        );
        assert_eq!(units.iter().map(|u| u.au).collect::<Vec<_>>(), [9, 15]);
    }

    #[test]
    fn v1_rejects_affect_trait() {
        let tables = PromptTables::default();
        let mut spec = worked_example();
        spec.identity_trait = "wide grin".into();
        assert!(render_fineface_v1(&spec, &tables.au_map, &tables.lexicon).is_err());
    }

    #[test]
    fn happiness_au_vector() {
        let tables = PromptTables::default();
        let mut spec = worked_example();
        spec.factors.expression = ExpressionValue {
            label: ClassLabel::Happiness,
            surface: "happy".into(),
        };
        let (_, units) = render_fineface_v1(&spec, &tables.au_map, &tables.lexicon).unwrap();
        let ids: Vec<_> = units.iter().map(|u| u.au).collect();
        assert!(ids.contains(&6) && ids.contains(&12));
    }

    #[test]
    fn grid_size_and_single_cell() {
        let space = FactorSpace::default();
        let tables = PromptTables::default();
        let specs = enumerate_grid(&space, &tables, Variant::Sd, 1).unwrap();
        assert_eq!(specs.len(), 7 * 5 * 2 * 5 * 5 * 3);
        assert_eq!(planned_counts(&specs), [750; 7]);
        assert!(specs.iter().all(|s| s.au_vector.is_none()));

        let one = |k: &str| Some(vec![k.to_string()]);
        let cell = space
            .restrict(&SpaceFilter {
                expressions: one("disgust"),
                ages: one("child"),
                genders: one("female"),
                races: one("Latino"),
                head_poses: one("slight right yaw"),
                cue_formats: one("descriptive"),
            })
            .unwrap();
        let specs = enumerate_grid(&cell, &tables, Variant::Sd, 1).unwrap();
        assert_eq!(specs.len(), 1);
        assert!(specs[0].prompt.starts_with(SD_PREFIX));
        assert!(specs[0]
            .prompt
            .contains("(upper lip lifted with nose wrinkling and narrowed eyes)"));
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let specs = enumerate_grid(
            &FactorSpace::default(),
            &PromptTables::default(),
            Variant::Sd,
            3,
        )
        .unwrap();
        assert_eq!(specs[0].factors.expression.label, ClassLabel::Anger);
        assert_eq!(specs[1].factors.cue_format, CueFormat::Facs);
        assert_eq!(specs[3].factors.head_pose.key, "slight left yaw");
        assert_eq!(
            specs.last().unwrap().factors.expression.label,
            ClassLabel::Surprise
        );
        assert_eq!(specs.last().unwrap().factors.age.key, "older");
    }

    #[test]
    fn missing_table_entry_is_an_error() {
        let mut tables = PromptTables::default();
        tables
            .cues
            .retain(|c| !(c.expression == ClassLabel::Fear && c.format == CueFormat::Facs));
        assert!(enumerate_grid(&FactorSpace::default(), &tables, Variant::Sd, 0).is_err());
    }
}

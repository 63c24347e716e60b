//! Polar expression codes for the GAN editor: the angle picks the expression,
//! the radius its intensity.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingPolicy {
    /// Every code sits at the class's canonical direction and fixed radius.
    Fixed,
    /// Radius and angle jittered around the canonical direction.
    Variate,
}

impl SamplingPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SamplingPolicy::Fixed => "fixed",
            SamplingPolicy::Variate => "variate",
        }
    }

    /// Manifest source tag for images edited under this policy.
    pub fn source_tag(self) -> &'static str {
        match self {
            SamplingPolicy::Fixed => "ganmut_f",
            SamplingPolicy::Variate => "ganmut_v",
        }
    }
}

impl fmt::Display for SamplingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SamplingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(SamplingPolicy::Fixed),
            "variate" => Ok(SamplingPolicy::Variate),
            _ => Err(Error::invalid(format!(
                "unknown sampling policy `{s}` (expected fixed or variate)"
            ))),
        }
    }
}

/// Per-class canonical directions and radii. Arrays follow canonical class
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleTable {
    pub angles: [f64; NUM_CLASSES],
    pub fixed_radius: [f64; NUM_CLASSES],
    pub variate_radius: [f64; 2],
    /// Half-width of the variate angular window, radians.
    pub jitter: f64,
}

impl Default for AngleTable {
    fn default() -> Self {
        AngleTable {
            angles: std::array::from_fn(|c| TAU * c as f64 / NUM_CLASSES as f64),
            fixed_radius: [0.85; NUM_CLASSES],
            variate_radius: [0.5, 1.0],
            jitter: PI / 14.0,
        }
    }
}

/// Absolute angular difference folded into `[0, pi]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl AngleTable {
    pub fn validate(&self) -> Result<()> {
        for (c, &a) in self.angles.iter().enumerate() {
            if !(0.0..TAU).contains(&a) {
                return Err(Error::invalid(format!(
                    "angle {a} for class {c} outside [0, 2pi)"
                )));
            }
            if self.angles[..c].contains(&a) {
                return Err(Error::invalid(format!("angle {a} is used by two classes")));
            }
        }
        if self.fixed_radius.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::invalid("fixed radii must lie in [0, 1]"));
        }
        let [lo, hi] = self.variate_radius;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::invalid(format!(
                "variate radius range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
            )));
        }
        if !(0.0..PI).contains(&self.jitter) {
            return Err(Error::invalid(format!(
                "angular jitter {} must lie in [0, pi)",
                self.jitter
            )));
        }
        Ok(())
    }

    pub fn angle(&self, label: ClassLabel) -> f64 {
        self.angles[label.index()]
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let table: AngleTable =
            toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        table.validate()?;
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCode {
    pub rho: f64,
    pub theta: f64,
    pub target: ClassLabel,
    pub policy: SamplingPolicy,
}

impl PolarCode {
    /// Range and window checks against `table`.
    pub fn check(&self, table: &AngleTable) -> Result<()> {
        let (window, radius) = match self.policy {
            SamplingPolicy::Fixed => {
                let r = table.fixed_radius[self.target.index()];
                (0.0, [r, r])
            }
            SamplingPolicy::Variate => (table.jitter, table.variate_radius),
        };
        let ok = (radius[0] - 1e-12..=radius[1] + 1e-12).contains(&self.rho)
            && (0.0..TAU).contains(&self.theta)
            && angular_distance(self.theta, table.angle(self.target)) <= window + 1e-12;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "code {self:?} lies outside the window for {}",
                self.target
            )))
        }
    }
}

/// `n` codes for `target`. Variate draws radius then angle, uniformly, from
/// one stream keyed by `(seed, target)`.
pub fn sample_codes(
    target: ClassLabel,
    policy: SamplingPolicy,
    n: usize,
    table: &AngleTable,
    seed: u64,
) -> Result<Vec<PolarCode>> {
    table.validate()?;
    let theta_c = table.angle(target);
    let code = |rho: f64, theta: f64| PolarCode {
        rho,
        theta,
        target,
        policy,
    };
    match policy {
        SamplingPolicy::Fixed => Ok(vec![code(table.fixed_radius[target.index()], theta_c); n]),
        SamplingPolicy::Variate => {
            let mut rng = seed::rng(seed::derive(seed, &format!("polar-codes/{target}")));
            let [lo, hi] = table.variate_radius;
            let dt = table.jitter;
            Ok((0..n)
                .map(|_| {
                    let rho = lo + (hi - lo) * rng.random::<f64>();
                    let offset = -dt + 2.0 * dt * rng.random::<f64>();
                    let theta = (theta_c + offset).rem_euclid(TAU);
                    // rem_euclid can round up to exactly TAU for tiny negatives.
                    code(rho, if theta >= TAU { 0.0 } else { theta })
                })
                .collect())
        }
    }
}

/// One row of the codes file: which original to edit, and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeRecord {
    pub image_id: String,
    pub target: ClassLabel,
    pub policy: SamplingPolicy,
    pub rho: f64,
    pub theta: f64,
    /// Per-image seed for everything downstream of the editor.
    pub seed: u64,
}

impl CodeRecord {
    pub fn code(&self) -> PolarCode {
        PolarCode {
            rho: self.rho,
            theta: self.theta,
            target: self.target,
            policy: self.policy,
        }
    }

    /// Identifier of the edited output.
    pub fn output_id(&self) -> String {
        format!("{}__{}", self.image_id, self.target)
    }
}

pub const CODES_HEADER: [&str; 6] = ["image_id", "target", "policy", "rho", "theta", "seed"];

/// Codes for every `(image, target)` pair, grouped by target in the order given.
pub fn assign_codes(
    image_ids: &[String],
    targets: &[ClassLabel],
    policy: SamplingPolicy,
    table: &AngleTable,
    seed: u64,
) -> Result<Vec<CodeRecord>> {
    let mut out = Vec::with_capacity(image_ids.len() * targets.len());
    for &target in targets {
        let codes = sample_codes(target, policy, image_ids.len(), table, seed)?;
        for (id, code) in image_ids.iter().zip(codes) {
            out.push(CodeRecord {
                image_id: id.clone(),
                target,
                policy,
                rho: code.rho,
                theta: code.theta,
                seed: seed::derive(seed, &format!("edit/{id}__{target}")),
            });
        }
    }
    Ok(out)
}

pub fn codes_csv(codes: &[CodeRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in codes {
        w.serialize(c)
            .map_err(|e| Error::invalid(format!("serializing code: {e}")))?;
    }
    if codes.is_empty() {
        w.write_record(CODES_HEADER)
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::invalid(e.to_string()))
}

pub fn write_codes(codes: &[CodeRecord], path: impl AsRef<Path>) -> Result<()> {
    crate::dataset::write_file(path.as_ref(), &codes_csv(codes)?)
}

pub fn load_codes(path: impl AsRef<Path>, table: &AngleTable) -> Result<Vec<CodeRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if header.iter().ne(CODES_HEADER) {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {}", CODES_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<CodeRecord>().enumerate() {
        let line = i + 2;
        let rec = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
        rec.code()
            .check(table)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

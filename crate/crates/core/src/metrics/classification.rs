use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::table::{csv_field, render_grid};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub image_id: String,
    #[serde(rename = "true")]
    pub truth: ClassLabel,
    pub pred: ClassLabel,
}

pub const PREDICTION_HEADER: [&str; 3] = ["image_id", "true", "pred"];

/// Id-unique predictions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionSet {
    preds: Vec<Prediction>,
}

impl PredictionSet {
    pub fn new(preds: Vec<Prediction>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for p in &preds {
            if !seen.insert(p.image_id.as_str()) {
                return Err(Error::invalid(format!(
                    "duplicate prediction for `{}`",
                    p.image_id
                )));
            }
        }
        Ok(PredictionSet { preds })
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Prediction> {
        self.preds.iter()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if header.iter().ne(PREDICTION_HEADER) {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {}", PREDICTION_HEADER.join(",")),
        ));
    }
    let mut preds = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in r.deserialize::<Prediction>().enumerate() {
        let p = row.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        if !seen.insert(p.image_id.clone()) {
            return Err(Error::parse(
                path,
                i + 2,
                format!("duplicate image_id `{}`", p.image_id),
            ));
        }
        preds.push(p);
    }
    Ok(PredictionSet { preds })
}

pub fn write_predictions(preds: &PredictionSet, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PREDICTION_HEADER)
        .map_err(|e| Error::invalid(e.to_string()))?;
    for p in preds.iter() {
        w.write_record([p.image_id.as_str(), p.truth.name(), p.pred.name()])
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    crate::dataset::write_file(path.as_ref(), &bytes)
}

/// `counts[t][p]` = number of samples with true class `t` predicted as `p`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

pub fn confusion(preds: &PredictionSet) -> Confusion {
    let mut m = Confusion::default();
    for p in preds.iter() {
        m.counts[p.truth.index()][p.pred.index()] += 1;
    }
    m
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    fn nonempty(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(Error::invalid("confusion matrix is empty"));
        }
        Ok(())
    }

    pub fn accuracy(&self) -> Result<f64> {
        self.nonempty()?;
        let trace: u64 = (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum();
        Ok(ratio(trace, self.total()))
    }

    /// Diagonal over column sum; 0 for a class never predicted.
    pub fn precision(&self, class: ClassLabel) -> f64 {
        let c = class.index();
        ratio(self.counts[c][c], self.col_sum(c))
    }

    /// Diagonal over row sum; 0 for a class with no samples.
    pub fn recall(&self, class: ClassLabel) -> f64 {
        let c = class.index();
        ratio(self.counts[c][c], self.row_sum(c))
    }

    /// `2PR / (P + R)`, 0 when `P + R = 0`.
    pub fn f1(&self, class: ClassLabel) -> f64 {
        let (p, r) = (self.precision(class), self.recall(class));
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Unweighted mean of the seven per-class F1 scores.
    pub fn macro_f1(&self) -> Result<f64> {
        self.nonempty()?;
        Ok(ClassLabel::ALL.iter().map(|&c| self.f1(c)).sum::<f64>() / NUM_CLASSES as f64)
    }

    /// Recall per class, in canonical order.
    pub fn classwise_accuracy(&self) -> Result<[f64; NUM_CLASSES]> {
        self.nonempty()?;
        Ok(ClassLabel::ALL.map(|c| self.recall(c)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub count: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub classwise_accuracy: [f64; NUM_CLASSES],
    pub f1: [f64; NUM_CLASSES],
    pub confusion: Confusion,
}

pub fn evaluate(preds: &PredictionSet) -> Result<ClassificationReport> {
    let m = confusion(preds);
    Ok(ClassificationReport {
        count: m.total(),
        accuracy: m.accuracy()?,
        macro_f1: m.macro_f1()?,
        classwise_accuracy: m.classwise_accuracy()?,
        f1: ClassLabel::ALL.map(|c| m.f1(c)),
        confusion: m,
    })
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

impl ClassificationReport {
    /// Headline numbers, the class-wise row, and the confusion matrix, in
    /// percent where applicable.
    pub fn to_text(&self, name: &str) -> String {
        let mut out = format!(
            "{name}: {} samples, accuracy {} %, macro-F1 {} %\n\n",
            self.count,
            pct(self.accuracy),
            pct(self.macro_f1)
        );
        let titles = ClassLabel::ALL.map(ClassLabel::name);
        let row = vec![self.classwise_accuracy.iter().map(|&v| pct(v)).collect()];
        out.push_str(&render_grid("Source", &titles, &[name.to_string()], &row));
        out.push('\n');
        let labels: Vec<String> = ClassLabel::ALL
            .iter()
            .map(|c| format!("true {c}"))
            .collect();
        let cells: Vec<Vec<String>> = self
            .confusion
            .counts
            .iter()
            .map(|r| r.iter().map(u64::to_string).collect())
            .collect();
        out.push_str(&render_grid("", &titles, &labels, &cells));
        out
    }

    pub fn to_csv(&self, name: &str) -> String {
        let mut out = String::from("source,accuracy,macro_f1");
        for c in ClassLabel::ALL {
            write!(out, ",{c}").unwrap();
        }
        write!(
            out,
            "\n{},{},{}",
            csv_field(name),
            pct(self.accuracy),
            pct(self.macro_f1)
        )
        .unwrap();
        for v in self.classwise_accuracy {
            write!(out, ",{}", pct(v)).unwrap();
        }
        out.push('\n');
        out
    }
}

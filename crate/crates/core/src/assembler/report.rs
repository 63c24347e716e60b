use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::{ClassCounts, ClassLabel, Manifest, Split, NUM_CLASSES};
use crate::table::{csv_field, render_grid};

/// Column order of the published per-expression count table.
pub const TABLE_COLUMNS: [ClassLabel; NUM_CLASSES] = [
    ClassLabel::Anger,
    ClassLabel::Disgust,
    ClassLabel::Fear,
    ClassLabel::Happiness,
    ClassLabel::Sadness,
    ClassLabel::Surprise,
    ClassLabel::Neutral,
];

const COLUMN_TITLES: [&str; NUM_CLASSES] = [
    "Angry", "Disgust", "Fear", "Happy", "Sad", "Surprise", "Neutral",
];

/// Counts in table column order.
pub fn table_row(counts: &ClassCounts) -> [u64; NUM_CLASSES] {
    TABLE_COLUMNS.map(|c| counts[c.index()])
}

/// Per-source class counts of one manifest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CountTable {
    pub rows: BTreeMap<String, ClassCounts>,
}

impl CountTable {
    pub fn total(&self) -> ClassCounts {
        let mut t = [0; NUM_CLASSES];
        for row in self.rows.values() {
            for (a, b) in t.iter_mut().zip(row) {
                *a += b;
            }
        }
        t
    }

    pub fn get(&self, source: &str) -> ClassCounts {
        self.rows.get(source).copied().unwrap_or_default()
    }

    /// Aligned text in the published layout: one row per source.
    pub fn to_text(&self) -> String {
        let rows: Vec<(String, [u64; NUM_CLASSES])> = if self.rows.is_empty() {
            vec![("(empty)".to_string(), [0; NUM_CLASSES])]
        } else {
            self.rows
                .iter()
                .map(|(s, c)| (s.clone(), table_row(c)))
                .collect()
        };
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|(_, r)| r.iter().map(u64::to_string).collect())
            .collect();
        render_grid(
            "Dataset",
            &COLUMN_TITLES,
            &rows.iter().map(|(s, _)| s.clone()).collect::<Vec<_>>(),
            &cells,
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source");
        for c in TABLE_COLUMNS {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for (source, counts) in &self.rows {
            out.push_str(&csv_field(source));
            for v in table_row(counts) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Per-source class counts of `manifest`, all splits together.
pub fn report_counts(manifest: &Manifest) -> CountTable {
    let mut rows: BTreeMap<String, ClassCounts> = BTreeMap::new();
    for r in manifest.iter() {
        rows.entry(r.source.clone()).or_default()[r.label.index()] += 1;
    }
    CountTable { rows }
}

/// Planned and achieved counts for one `(source, split)` contribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub source: String,
    pub split: Split,
    pub planned: ClassCounts,
    pub achieved: ClassCounts,
}

impl CountRow {
    pub fn shortfall(&self, class: ClassLabel) -> bool {
        self.achieved[class.index()] < self.planned[class.index()]
    }

    pub fn has_shortfall(&self) -> bool {
        ClassLabel::ALL.into_iter().any(|c| self.shortfall(c))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub rows: Vec<CountRow>,
    pub notes: Vec<String>,
}

impl CountReport {
    pub fn row(&self, source: &str, split: Split) -> Option<&CountRow> {
        self.rows
            .iter()
            .find(|r| r.source == source && r.split == split)
    }

    /// Achieved totals over every row of `split`.
    pub fn achieved_total(&self, split: Split) -> ClassCounts {
        let mut t = [0; NUM_CLASSES];
        for row in self.rows.iter().filter(|r| r.split == split) {
            for (a, b) in t.iter_mut().zip(&row.achieved) {
                *a += b;
            }
        }
        t
    }

    /// One line per row; cells read `achieved/planned`, with `*` marking a
    /// shortfall.
    pub fn to_text(&self) -> String {
        let labels: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("{} ({})", r.source, r.split))
            .collect();
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                TABLE_COLUMNS
                    .iter()
                    .map(|&c| {
                        let mark = if r.shortfall(c) { "*" } else { "" };
                        format!("{}/{}{mark}", r.achieved[c.index()], r.planned[c.index()])
                    })
                    .collect()
            })
            .collect();
        let mut out = render_grid("Source", &COLUMN_TITLES, &labels, &cells);
        for n in &self.notes {
            writeln!(out, "note: {n}").unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,split,class,planned,achieved,shortfall\n");
        for r in &self.rows {
            for c in TABLE_COLUMNS {
                writeln!(
                    out,
                    "{},{},{c},{},{},{}",
                    csv_field(&r.source),
                    r.split,
                    r.planned[c.index()],
                    r.achieved[c.index()],
                    r.shortfall(c)
                )
                .unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ImageRecord;

    #[test]
    fn table_layout() {
        let mut records = Vec::new();
        for (i, c) in ClassLabel::ALL.into_iter().enumerate() {
            for k in 0..=i {
                records.push(ImageRecord::new(
                    format!("{c}-{k}"),
                    "p",
                    "real",
                    c,
                    Split::Train,
                ));
            }
        }
        records.push(ImageRecord::new(
            "x",
            "p",
            "syn",
            ClassLabel::Fear,
            Split::Train,
        ));
        let t = report_counts(&Manifest::new(records).unwrap());
        // neutral (index 4) moves to the last column
        assert_eq!(table_row(&t.get("real")), [1, 2, 3, 4, 6, 7, 5]);
        assert_eq!(
            t.to_text(),
            "Dataset  Angry  Disgust  Fear  Happy  Sad  Surprise  Neutral\n\
             real         1        2     3      4    6         7        5\n\
             syn          0        0     1      0    0         0        0\n"
        );
        assert!(t.to_csv().starts_with(
            "source,anger,disgust,fear,happiness,sadness,surprise,neutral\nreal,1,2,3,4,6,7,5\n"
        ));
    }

    #[test]
    fn empty_manifest_is_all_zero() {
        let t = report_counts(&Manifest::default());
        assert_eq!(t.total(), [0; NUM_CLASSES]);
        assert!(t.to_text().contains("(empty)"));
    }
}

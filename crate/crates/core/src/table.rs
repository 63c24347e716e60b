//! Plain-text grid and CSV helpers shared by the report renderers.

use std::fmt::Write as _;

/// Quotes a CSV field when needed.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Right-aligned grid with a left label column.
pub(crate) fn render_grid(
    corner: &str,
    titles: &[&str],
    labels: &[String],
    cells: &[Vec<String>],
) -> String {
    let label_w = labels
        .iter()
        .map(String::len)
        .chain([corner.len()])
        .max()
        .unwrap_or(0);
    let widths: Vec<usize> = titles
        .iter()
        .enumerate()
        .map(|(j, t)| {
            cells
                .iter()
                .map(|r| r[j].len())
                .chain([t.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = format!("{corner:<label_w$}");
    for (t, w) in titles.iter().zip(&widths) {
        write!(out, "  {t:>w$}").unwrap();
    }
    out.push('\n');
    for (label, row) in labels.iter().zip(cells) {
        write!(out, "{label:<label_w$}").unwrap();
        for (v, w) in row.iter().zip(&widths) {
            write!(out, "  {v:>w$}").unwrap();
        }
        out.push('\n');
    }
    out
}

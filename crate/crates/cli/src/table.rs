use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use anyhow::{bail, Result};
use sliced_saa::io::SummaryRow;

/// Three significant digits, `1.83E-2` style.
pub fn sci3(x: f64) -> String {
    format!("{x:.2e}").replace('e', "E")
}

pub fn cell(mean: f64, se: f64) -> String {
    format!("{mean:.4} ({})", sci3(se))
}

/// One line per `(n, scheme)`, one column per `t`.
pub fn render(rows: &[SummaryRow]) -> Result<String> {
    let ts: BTreeSet<usize> = rows.iter().map(|r| r.t).collect();
    let mut grid: BTreeMap<(usize, String), BTreeMap<usize, String>> = BTreeMap::new();
    for r in rows {
        let key = (r.n, r.scheme.clone());
        if grid.entry(key).or_default().insert(r.t, cell(r.mean, r.se)).is_some() {
            bail!("more than one summary for n={} t={} scheme {}", r.n, r.t, r.scheme);
        }
    }

    let mut header = vec!["n".to_string(), "scheme".to_string()];
    header.extend(ts.iter().map(|t| format!("t={t}")));
    let body: Vec<Vec<String>> = grid
        .iter()
        .map(|((n, scheme), cells)| {
            let mut line = vec![n.to_string(), scheme.clone()];
            line.extend(ts.iter().map(|t| cells.get(t).cloned().unwrap_or_else(|| "-".into())));
            line
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|j| std::iter::once(&header).chain(&body).map(|l| l[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in std::iter::once(&header).chain(&body) {
        let padded: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    }
    Ok(out)
}

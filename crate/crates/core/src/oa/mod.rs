//! Strength-two orthogonal arrays and their quality diagnostics.
//!
//! Levels are stored 1-based (`1..=s`). Field elements used by the
//! constructions are 0-based and shifted by one on output.

mod construct;
pub mod gf;

pub use construct::{bose_bush, bush, OaSource};
pub use gf::GaloisField;

use std::collections::HashMap;
use std::fmt;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// An `N x m` array over levels `1..=s` with strength `tau` and index
/// `lambda = N / s^tau`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    entries: Array2<usize>,
    levels: usize,
    strength: usize,
    index: usize,
}

impl OrthogonalArray {
    /// Wraps `entries` after verifying the declared strength.
    pub fn new(entries: Array2<usize>, levels: usize, strength: usize) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("orthogonal array must be non-empty"));
        }
        if levels == 0 {
            return Err(Error::invalid("level count must be positive"));
        }
        if let Some(&bad) = entries.iter().find(|&&v| v == 0 || v > levels) {
            return Err(Error::Domain(format!("level {bad} outside 1..={levels}")));
        }
        match verify_strength(&entries, levels, strength) {
            StrengthCheck::Pass { lambda } => Ok(Self {
                entries,
                levels,
                strength,
                index: lambda,
            }),
            failure => Err(Error::Domain(format!(
                "array is not an orthogonal array of strength {strength}: {failure}"
            ))),
        }
    }

    pub(crate) fn from_verified(entries: Array2<usize>, levels: usize, strength: usize) -> Self {
        let index = entries.nrows() / levels.pow(strength as u32);
        debug_assert!(verify_strength(&entries, levels, strength).passed());
        Self {
            entries,
            levels,
            strength,
            index,
        }
    }

    pub fn entries(&self) -> &Array2<usize> {
        &self.entries
    }

    /// Number of rows `N`.
    pub fn runs(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of columns `m`.
    pub fn columns(&self) -> usize {
        self.entries.ncols()
    }

    /// Level count `s`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    /// Index `lambda`.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Row-concatenation of arrays sharing `s`, `m` and strength. The index
    /// of the result is the sum of the indices.
    pub fn concat_rows(parts: &[&OrthogonalArray]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("nothing to concatenate"))?;
        if parts.iter().any(|p| {
            p.levels != first.levels || p.columns() != first.columns() || p.strength != first.strength
        }) {
            return Err(Error::invalid(
                "concatenated arrays must share levels, columns and strength",
            ));
        }
        let views: Vec<_> = parts.iter().map(|p| p.entries.view()).collect();
        let entries = ndarray::concatenate(Axis(0), &views).expect("shared column count");
        Ok(Self::from_verified(entries, first.levels, first.strength))
    }

    /// First `cols` columns as a new array of the same strength.
    pub fn leading_columns(&self, cols: usize) -> Result<Self> {
        if cols < self.strength.max(1) || cols > self.columns() {
            return Err(Error::invalid(format!(
                "cannot keep {cols} of {} columns at strength {}",
                self.columns(),
                self.strength
            )));
        }
        let entries = self.entries.slice(ndarray::s![.., ..cols]).to_owned();
        Ok(Self::from_verified(entries, self.levels, self.strength))
    }
}

/// Result of a strength check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrengthCheck {
    Pass {
        lambda: usize,
    },
    /// `N` is not a multiple of `s^tau`.
    Indivisible {
        runs: usize,
        cells: usize,
    },
    /// 0-based `columns`, 1-based level `tuple` seen `count` times.
    Violation {
        columns: Vec<usize>,
        tuple: Vec<usize>,
        count: usize,
        expected: usize,
    },
    TooStrong {
        strength: usize,
        columns: usize,
    },
}

impl StrengthCheck {
    pub fn passed(&self) -> bool {
        matches!(self, StrengthCheck::Pass { .. })
    }

    pub fn lambda(&self) -> Option<usize> {
        match self {
            StrengthCheck::Pass { lambda } => Some(*lambda),
            _ => None,
        }
    }
}

impl fmt::Display for StrengthCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrengthCheck::Pass { lambda } => write!(f, "pass (lambda = {lambda})"),
            StrengthCheck::Indivisible { runs, cells } => {
                write!(f, "fail: {runs} rows is not a multiple of {cells}")
            }
            StrengthCheck::Violation {
                columns,
                tuple,
                count,
                expected,
            } => {
                let cols: Vec<_> = columns.iter().map(|c| c + 1).collect();
                write!(
                    f,
                    "fail: columns {cols:?} contain tuple {tuple:?} {count} times, expected {expected}"
                )
            }
            StrengthCheck::TooStrong { strength, columns } => {
                write!(f, "fail: strength {strength} exceeds {columns} columns")
            }
        }
    }
}

/// Lexicographic `tau`-subsets of `0..m`.
pub fn combinations(m: usize, tau: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (tau <= m).then(|| (0..tau).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let next = {
            let mut c = out.clone();
            let mut i = tau;
            loop {
                if i == 0 {
                    break None;
                }
                i -= 1;
                if c[i] < m - tau + i {
                    c[i] += 1;
                    for j in i + 1..tau {
                        c[j] = c[j - 1] + 1;
                    }
                    break Some(c);
                }
            }
        };
        current = next;
        Some(out)
    })
}

/// Checks that every `tau`-column subarray contains each level tuple
/// exactly `N / s^tau` times.
pub fn verify_strength(entries: &Array2<usize>, levels: usize, tau: usize) -> StrengthCheck {
    let (runs, m) = entries.dim();
    if tau > m {
        return StrengthCheck::TooStrong {
            strength: tau,
            columns: m,
        };
    }
    let cells = match levels.checked_pow(tau as u32) {
        Some(c) if c <= runs => c,
        _ => {
            return StrengthCheck::Indivisible {
                runs,
                cells: levels.saturating_pow(tau as u32),
            }
        }
    };
    if runs % cells != 0 {
        return StrengthCheck::Indivisible { runs, cells };
    }
    let expected = runs / cells;
    let mut counts = vec![0usize; cells];
    for cols in combinations(m, tau) {
        counts.iter_mut().for_each(|c| *c = 0);
        for row in entries.rows() {
            let cell = cols
                .iter()
                .fold(0, |acc, &k| acc * levels + (row[k].clamp(1, levels) - 1));
            counts[cell] += 1;
        }
        if let Some(cell) = counts.iter().position(|&c| c != expected) {
            let mut tuple = vec![0; tau];
            let mut rest = cell;
            for slot in tuple.iter_mut().rev() {
                *slot = rest % levels + 1;
                rest /= levels;
            }
            return StrengthCheck::Violation {
                columns: cols,
                tuple,
                count: counts[cell],
                expected,
            };
        }
    }
    StrengthCheck::Pass { lambda: expected }
}

/// Two distinct rows (0-based, `rows.0 < rows.1`) agreeing in `columns`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coincidence {
    pub rows: (usize, usize),
    pub columns: Vec<usize>,
}

impl fmt::Display for Coincidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<_> = self.columns.iter().map(|c| c + 1).collect();
        write!(
            f,
            "rows {} and {} agree in columns {cols:?}",
            self.rows.0 + 1,
            self.rows.1 + 1
        )
    }
}

fn agreement(entries: &Array2<usize>, i: usize, j: usize, columns: &[usize]) -> Vec<usize> {
    columns
        .iter()
        .copied()
        .filter(|&k| entries[[i, k]] == entries[[j, k]])
        .collect()
}

/// All row pairs agreeing in at least `tau + 1` columns.
pub fn coincidence_defects(entries: &Array2<usize>, tau: usize) -> Vec<Coincidence> {
    let all: Vec<usize> = (0..entries.ncols()).collect();
    let n = entries.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let columns = agreement(entries, i, j, &all);
            if columns.len() > tau {
                out.push(Coincidence { rows: (i, j), columns });
            }
        }
    }
    out
}

/// First coincidence-defect witness in row-pair order, if any.
pub fn coincidence_defect(entries: &Array2<usize>, tau: usize) -> Option<Coincidence> {
    let all: Vec<usize> = (0..entries.ncols()).collect();
    let n = entries.nrows();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find_map(|(i, j)| {
            let columns = agreement(entries, i, j, &all);
            (columns.len() > tau).then_some(Coincidence { rows: (i, j), columns })
        })
}

/// `M(u, r)`: ordered row pairs `(i, j)`, including `i == j`, that agree on
/// exactly `r` of the 0-based columns in `u`.
pub fn m_count(entries: &Array2<usize>, u: &[usize], r: usize) -> Result<usize> {
    if r > u.len() {
        return Err(Error::invalid(format!(
            "r = {r} exceeds |u| = {}",
            u.len()
        )));
    }
    if let Some(&bad) = u.iter().find(|&&k| k >= entries.ncols()) {
        return Err(Error::invalid(format!("column {} out of range", bad + 1)));
    }
    let n = entries.nrows();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if u.iter().filter(|&&k| entries[[i, k]] == entries[[j, k]]).count() == r {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Split by the level of column `col`: slice `l` holds the rows with level
/// `l + 1`, with that column removed. Each slice has strength `tau - 1`.
pub fn slice_by_column(oa: &OrthogonalArray, col: usize) -> Result<Vec<OrthogonalArray>> {
    if oa.strength < 1 {
        return Err(Error::invalid("slicing needs strength at least 1"));
    }
    if col >= oa.columns() {
        return Err(Error::invalid(format!("column {} out of range", col + 1)));
    }
    if oa.columns() < 2 {
        return Err(Error::invalid("slicing a single-column array leaves nothing"));
    }
    let keep: Vec<usize> = (0..oa.columns()).filter(|&k| k != col).collect();
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, row) in oa.entries.rows().into_iter().enumerate() {
        groups.entry(row[col]).or_default().push(i);
    }
    (1..=oa.levels)
        .map(|level| {
            let rows = groups.remove(&level).unwrap_or_default();
            let entries = oa.entries.select(Axis(0), &rows).select(Axis(1), &keep);
            OrthogonalArray::new(entries, oa.levels, oa.strength - 1)
        })
        .collect()
}

/// Parse a plain-text integer array: one row per line, values separated by
/// commas or whitespace. Blank lines and `#` comments are ignored.
pub fn parse_integer_array(text: &str) -> Result<Array2<usize>> {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: `{s}` is not an integer", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} values, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let m = rows.first().map_or(0, Vec::len);
    if m == 0 {
        return Err(Error::Parse("empty array".into()));
    }
    let flat: Vec<usize> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), m), flat).map_err(|e| Error::Parse(e.to_string()))
}

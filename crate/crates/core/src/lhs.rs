//! Monte Carlo, Latin hypercube, independent-LH and sliced-LH designs.
//!
//! Every design value is produced as `(a - gamma) / g` with an integer level
//! `a` in `1..=g` and jitter `gamma` in `[0, 1)`, so values live in `(0, 1]`
//! and the stratum of a value at resolution `g` is `ceil(g * value)`.

use std::fmt;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::rng::{SeedSpec, Stream};

/// Values closer than this (in units of `g * value`) to a stratum boundary
/// are assigned to the lower stratum.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// Stratum index in `1..=g` of `value` at resolution `g`, with strata
/// `((l-1)/g, l/g]`.
pub fn level_of(value: f64, g: usize) -> usize {
    let x = value * g as f64;
    let mut level = x.ceil();
    if level >= 1.0 && x - (level - 1.0) < BOUNDARY_GUARD {
        level -= 1.0;
    }
    level.max(1.0) as usize
}

/// An `n x m` integer array whose every column is a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinHypercube {
    levels: Array2<usize>,
}

impl LatinHypercube {
    /// Wraps `levels` after checking the permutation property column by column.
    pub fn new(levels: Array2<usize>) -> Result<Self> {
        let n = levels.nrows();
        if n == 0 || levels.ncols() == 0 {
            return Err(Error::invalid("latin hypercube needs at least one row and column"));
        }
        if let Some((column, level)) = first_duplicate(&levels, n) {
            return Err(Error::Domain(format!(
                "column {} is not a permutation of 1..={n} (level {level})",
                column + 1
            )));
        }
        Ok(Self { levels })
    }

    /// Random ordinary Latin hypercube with independent uniform columns.
    pub fn random(n: usize, m: usize, stream: &mut Stream) -> Result<Self> {
        check_dims(&[("n", n), ("m", m)])?;
        let mut levels = Array2::zeros((n, m));
        for k in 0..m {
            let perm = stream.uniform_permutation(n)?;
            for (i, level) in perm.into_iter().enumerate() {
                levels[[i, k]] = level;
            }
        }
        Ok(Self { levels })
    }

    pub fn n(&self) -> usize {
        self.levels.nrows()
    }

    pub fn m(&self) -> usize {
        self.levels.ncols()
    }

    pub fn levels(&self) -> &Array2<usize> {
        &self.levels
    }

    pub fn into_levels(self) -> Array2<usize> {
        self.levels
    }
}

/// First `(column, level)` where a column of `levels` fails to be a
/// permutation of `1..=g`. Out-of-range levels are reported as-is.
fn first_duplicate(levels: &Array2<usize>, g: usize) -> Option<(usize, usize)> {
    let mut seen = vec![false; g + 1];
    for (k, column) in levels.axis_iter(Axis(1)).enumerate() {
        seen.iter_mut().for_each(|s| *s = false);
        for &level in column {
            if level == 0 || level > g || seen[level] {
                return Some((k, level));
            }
            seen[level] = true;
        }
    }
    None
}

/// A real `n x m` scenario matrix with entries in `(0, 1]`.
///
/// `resolution` is the finest stratification the generator guarantees:
/// `n` for a standalone LH design and `n * t` for a slice of an SLH/SOLH
/// family.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: Array2<f64>,
    resolution: usize,
}

impl DesignMatrix {
    pub fn new(values: Array2<f64>, resolution: usize) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::invalid("design needs at least one row and column"));
        }
        if resolution == 0 {
            return Err(Error::invalid("resolution must be positive"));
        }
        if let Some(&bad) = values.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::Domain(format!("design value {bad} outside (0, 1]")));
        }
        Ok(Self { values, resolution })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[[row, col]]
    }

    /// Copy with entry `(row, col)` replaced. The new value must stay in `(0, 1]`.
    pub fn with_entry(&self, row: usize, col: usize, value: f64) -> Result<Self> {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::Domain(format!("design value {value} outside (0, 1]")));
        }
        let mut values = self.values.clone();
        values[[row, col]] = value;
        Ok(Self {
            values,
            resolution: self.resolution,
        })
    }
}

/// Sampling scheme that produced a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Mc,
    Ilh,
    Slh,
    Solh,
    Spolh,
    Indbb,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Mc,
        Scheme::Ilh,
        Scheme::Slh,
        Scheme::Solh,
        Scheme::Spolh,
        Scheme::Indbb,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Mc => "MC",
            Scheme::Ilh => "ILH",
            Scheme::Slh => "SLH",
            Scheme::Solh => "SOLH",
            Scheme::Spolh => "SPOLH",
            Scheme::Indbb => "INDBB",
        }
    }

    /// Whether the stacked family is a Latin hypercube at resolution `n * t`.
    pub fn is_sliced(self) -> bool {
        matches!(self, Scheme::Slh | Scheme::Solh)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown scheme `{s}`")))
    }
}

/// `t` designs of identical shape generated under one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignFamily {
    slices: Vec<DesignMatrix>,
    scheme: Scheme,
    provenance: SeedSpec,
    parent_batches: Option<usize>,
}

impl DesignFamily {
    pub fn new(slices: Vec<DesignMatrix>, scheme: Scheme, provenance: SeedSpec) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::invalid("design family must contain at least one slice"))?;
        let (n, m) = (first.n(), first.m());
        if let Some((r, bad)) = slices
            .iter()
            .enumerate()
            .find(|(_, s)| s.n() != n || s.m() != m)
        {
            return Err(Error::invalid(format!(
                "ragged family: slice {} is {}x{}, slice 1 is {n}x{m}",
                r + 1,
                bad.n(),
                bad.m()
            )));
        }
        Ok(Self {
            slices,
            scheme,
            provenance,
            parent_batches: None,
        })
    }

    /// Mark this family as the first `t` slices of a `parent_batches`-slice design.
    pub fn with_parent_batches(mut self, parent_batches: usize) -> Self {
        self.parent_batches = Some(parent_batches);
        self
    }

    pub fn parent_batches(&self) -> Option<usize> {
        self.parent_batches
    }

    /// Fraction of the parent design's batches present (1 unless truncated).
    pub fn coverage(&self) -> f64 {
        match self.parent_batches {
            Some(p) => self.t() as f64 / p as f64,
            None => 1.0,
        }
    }

    pub fn slices(&self) -> &[DesignMatrix] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<DesignMatrix> {
        self.slices
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn provenance(&self) -> &SeedSpec {
        &self.provenance
    }

    pub fn n(&self) -> usize {
        self.slices[0].n()
    }

    pub fn m(&self) -> usize {
        self.slices[0].m()
    }

    pub fn t(&self) -> usize {
        self.slices.len()
    }

    /// Row-stacked `nt x m` design at resolution `nt`.
    pub fn stacked(&self) -> DesignMatrix {
        let views: Vec<_> = self.slices.iter().map(|s| s.values.view()).collect();
        let values = ndarray::concatenate(Axis(0), &views).expect("slices share column count");
        let resolution = values.nrows();
        DesignMatrix { values, resolution }
    }
}

fn check_dims(dims: &[(&str, usize)]) -> Result<()> {
    match dims.iter().find(|(_, v)| *v == 0) {
        Some((name, _)) => Err(Error::invalid(format!("{name} must be at least 1"))),
        None => Ok(()),
    }
}

// Sub-stream tags for the construction steps.
const STEP_ARRAYS: u64 = 0;
const STEP_EXPAND: u64 = 1;
const STEP_JITTER: u64 = 2;

/// Apply uniform jitter: `value = (level - gamma) / g`.
pub(crate) fn jitter(levels: &Array2<usize>, g: usize, stream: &mut Stream) -> DesignMatrix {
    let gf = g as f64;
    let values = levels.mapv(|a| (a as f64 - stream.uniform_unit()) / gf);
    DesignMatrix {
        values,
        resolution: g,
    }
}

/// `t` independent Monte Carlo batches; values are `1 - u` so they lie in `(0, 1]`.
pub fn gen_monte_carlo(n: usize, m: usize, t: usize, seed: &SeedSpec) -> Result<DesignFamily> {
    check_dims(&[("n", n), ("m", m), ("t", t)])?;
    let slices = (0..t)
        .map(|r| {
            let mut stream = seed.child(r as u64).stream();
            let values = Array2::from_shape_simple_fn((n, m), || 1.0 - stream.uniform_unit());
            DesignMatrix {
                values,
                resolution: n,
            }
        })
        .collect();
    DesignFamily::new(slices, Scheme::Mc, seed.clone())
}

/// Ordinary Latin hypercube design `(a_ik - gamma_ik) / n`.
pub fn gen_ordinary_lh(n: usize, m: usize, seed: &SeedSpec) -> Result<DesignMatrix> {
    check_dims(&[("n", n), ("m", m)])?;
    let arrays = LatinHypercube::random(n, m, &mut seed.child(STEP_ARRAYS).stream())?;
    Ok(jitter(arrays.levels(), n, &mut seed.child(STEP_JITTER).stream()))
}

/// `t` independently generated ordinary LH designs.
pub fn gen_ilh(n: usize, m: usize, t: usize, seed: &SeedSpec) -> Result<DesignFamily> {
    check_dims(&[("n", n), ("m", m), ("t", t)])?;
    let slices = (0..t)
        .map(|r| gen_ordinary_lh(n, m, &seed.child(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    DesignFamily::new(slices, Scheme::Ilh, seed.clone())
}

/// Sliced LH level expansion. Each `arrays[r]` is an LH on `1..=n`; for
/// every column independently, the `t` occurrences of level `l` across the
/// slices are replaced by a random permutation of `t(l-1)+1 ..= t*l`.
pub(crate) fn expand_across_slices(arrays: &mut [Array2<usize>], n: usize, seed: &SeedSpec) {
    let t = arrays.len();
    let m = arrays[0].ncols();
    let mut position = vec![0usize; n + 1];
    for k in 0..m {
        let mut stream = seed.child(k as u64).stream();
        // one permutation of 1..=t per level, drawn in level order
        let perms: Vec<Vec<usize>> = (0..n)
            .map(|_| stream.uniform_permutation(t).expect("t >= 1"))
            .collect();
        for (r, array) in arrays.iter_mut().enumerate() {
            for i in 0..n {
                position[array[[i, k]]] = i;
            }
            for level in 1..=n {
                let i = position[level];
                array[[i, k]] = t * (level - 1) + perms[level - 1][r];
            }
        }
    }
}

/// Sliced Latin hypercube family: `t` LH designs whose stack is an LH at
/// resolution `n * t`.
pub fn gen_slh(n: usize, m: usize, t: usize, seed: &SeedSpec) -> Result<DesignFamily> {
    check_dims(&[("n", n), ("m", m), ("t", t)])?;
    let step1 = seed.child(STEP_ARRAYS);
    let mut arrays = (0..t)
        .map(|r| LatinHypercube::random(n, m, &mut step1.child(r as u64).stream()).map(LatinHypercube::into_levels))
        .collect::<Result<Vec<_>>>()?;
    expand_across_slices(&mut arrays, n, &seed.child(STEP_EXPAND));
    let step3 = seed.child(STEP_JITTER);
    let slices = arrays
        .iter()
        .enumerate()
        .map(|(r, a)| jitter(a, n * t, &mut step3.child(r as u64).stream()))
        .collect();
    DesignFamily::new(slices, Scheme::Slh, seed.clone())
}

/// Underlying level array and jitter of a design at resolution `n`:
/// `D = (B - Theta) / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub levels: Array2<usize>,
    pub jitter: Array2<f64>,
    pub n: usize,
}

impl Decomposition {
    pub fn reconstruct(&self) -> Array2<f64> {
        let nf = self.n as f64;
        let mut out = self.jitter.clone();
        ndarray::Zip::from(&mut out)
            .and(&self.levels)
            .for_each(|theta, &b| *theta = (b as f64 - *theta) / nf);
        out
    }

    /// The level array as a Latin hypercube, when it is one.
    pub fn latin_hypercube(&self) -> Option<LatinHypercube> {
        LatinHypercube::new(self.levels.clone()).ok()
    }
}

/// Split `design` into levels `b = ceil(n * xi)` and jitter `theta = b - n * xi`.
pub fn decompose(design: &Array2<f64>, n: usize) -> Result<Decomposition> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if let Some(&bad) = design.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::Domain(format!("design value {bad} outside (0, 1]")));
    }
    let nf = n as f64;
    let levels = design.mapv(|v| level_of(v, n));
    let mut jitter = Array2::zeros(design.dim());
    ndarray::Zip::from(&mut jitter)
        .and(&levels)
        .and(design)
        .for_each(|theta, &b, &v| {
            *theta = (b as f64 - nf * v).clamp(0.0, 1.0 - f64::EPSILON);
        });
    Ok(Decomposition { levels, jitter, n })
}

/// Outcome of a Latin hypercube check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatinCheck {
    Pass,
    /// 0-based `column` contains `level` twice (or an out-of-range level).
    Duplicate { column: usize, level: usize },
    /// The design cannot be a permutation at this resolution.
    RowCount { rows: usize, resolution: usize },
}

impl LatinCheck {
    pub fn passed(&self) -> bool {
        matches!(self, LatinCheck::Pass)
    }
}

impl fmt::Display for LatinCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatinCheck::Pass => f.write_str("pass"),
            LatinCheck::Duplicate { column, level } => {
                write!(f, "fail: column {} repeats level {level}", column + 1)
            }
            LatinCheck::RowCount { rows, resolution } => {
                write!(f, "fail: {rows} rows cannot stratify at resolution {resolution}")
            }
        }
    }
}

/// Does every column of `ceil(g * D)` form a permutation of `1..=g`?
pub fn validate_latin(design: &Array2<f64>, g: usize) -> LatinCheck {
    if design.nrows() != g {
        return LatinCheck::RowCount {
            rows: design.nrows(),
            resolution: g,
        };
    }
    let levels = design.mapv(|v| level_of(v, g));
    match first_duplicate(&levels, g) {
        Some((column, level)) => LatinCheck::Duplicate { column, level },
        None => LatinCheck::Pass,
    }
}

/// Per-slice and stacked Latin hypercube checks for a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicedReport {
    /// First failing slice (0-based) with its witness, if any.
    pub slice_failure: Option<(usize, LatinCheck)>,
    pub stacked: LatinCheck,
}

impl SlicedReport {
    pub fn slices_pass(&self) -> bool {
        self.slice_failure.is_none()
    }

    pub fn stack_passes(&self) -> bool {
        self.stacked.passed()
    }
}

/// (a) every slice is an LH at `g = n`; (b) the stack is an LH at `g = nt`.
pub fn validate_sliced(family: &DesignFamily) -> SlicedReport {
    let n = family.n();
    let slice_failure = family
        .slices()
        .iter()
        .enumerate()
        .map(|(r, s)| (r, validate_latin(s.values(), n)))
        .find(|(_, check)| !check.passed());
    let stacked = family.stacked();
    SlicedReport {
        slice_failure,
        stacked: validate_latin(stacked.values(), stacked.resolution()),
    }
}

//! Sliced orthogonal-array-based Latin hypercube families and their
//! partial (SPOLH) and independent-batch (INDBB) variants.
//!
//! The construction starts from a strength-two `OA(N, m+1, t, 2)` with
//! `N = n t` and `n = lambda t`. The last column of the randomized array
//! assigns rows to slices; within each slice every symbol `l` of a design
//! column occurs `lambda` times and is expanded to a random permutation of
//! `(l-1) lambda + 1 ..= l lambda`, which makes each slice a Latin hypercube
//! on `1..=n`. The slices are then level-expanded across batches exactly as
//! for sliced Latin hypercubes and jittered at resolution `n t`.

use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lhs::{expand_across_slices, jitter, level_of, DesignFamily, Scheme};
use crate::oa::{bose_bush, OrthogonalArray};
use crate::rng::SeedSpec;

/// A base array plus the batch geometry it induces.
#[derive(Debug, Clone)]
pub struct SolhSpec {
    base: OrthogonalArray,
    m: usize,
}

impl SolhSpec {
    /// `base` must be a strength-two array with at least `m + 1` columns and
    /// at least two levels; the level count becomes the number of batches.
    pub fn new(base: OrthogonalArray, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if base.strength() < 2 {
            return Err(Error::invalid(format!(
                "base array has strength {}, sliced OA designs need strength 2",
                base.strength()
            )));
        }
        if base.levels() < 2 {
            return Err(Error::invalid(
                "base array needs at least 2 levels (t = s = 1 is degenerate)",
            ));
        }
        if base.columns() < m + 1 {
            return Err(Error::invalid(format!(
                "base array has {} columns, need m + 1 = {}",
                base.columns(),
                m + 1
            )));
        }
        let spec = Self { base, m };
        let (n, t, lam) = (spec.n(), spec.t(), spec.lambda());
        if spec.base.runs() != n * t || n != lam * t {
            return Err(Error::invalid(format!(
                "need N = n t and n = lambda t; got N = {}, n = {n}, t = {t}, lambda = {lam}",
                spec.base.runs()
            )));
        }
        Ok(spec)
    }

    pub fn base(&self) -> &OrthogonalArray {
        &self.base
    }

    /// Number of batches `t` (the level count of the base).
    pub fn t(&self) -> usize {
        self.base.levels()
    }

    /// Scenarios per batch `n = N / t`.
    pub fn n(&self) -> usize {
        self.base.runs() / self.t()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> usize {
        self.base.index()
    }
}

const STEP_SYMBOLS: u64 = 0;
const STEP_COLUMNS: u64 = 1;
const STEP_ROWS: u64 = 2;
const STEP_WITHIN: u64 = 3;
const STEP_ACROSS: u64 = 4;
const STEP_JITTER: u64 = 5;

/// Randomized `N x (m+1)` array: independent symbol permutations per column,
/// a random ordered choice of `m` design columns among all but the last,
/// the last column kept as the slicing column, and a random row order.
pub fn randomize_base(spec: &SolhSpec, seed: &SeedSpec) -> OrthogonalArray {
    let base = spec.base.entries();
    let (runs, cols) = base.dim();
    let s = spec.t();
    let mut chosen = seed.child(STEP_COLUMNS).stream().shuffled_indices(cols - 1);
    chosen.truncate(spec.m);
    chosen.push(cols - 1);
    let rows = seed.child(STEP_ROWS).stream().shuffled_indices(runs);
    let symbols = seed.child(STEP_SYMBOLS);
    let mut out = Array2::zeros((runs, spec.m + 1));
    for (k, &src) in chosen.iter().enumerate() {
        let perm = symbols
            .child(k as u64)
            .stream()
            .uniform_permutation(s)
            .expect("s >= 2");
        for (i, &r) in rows.iter().enumerate() {
            out[[i, k]] = perm[base[[r, src]] - 1];
        }
    }
    OrthogonalArray::from_verified(out, s, 2)
}

/// Split a randomized array into slices by its last column and expand
/// each slice to a Latin hypercube on `1..=n`.
fn slice_and_expand(randomized: &OrthogonalArray, spec: &SolhSpec, seed: &SeedSpec) -> Vec<Array2<usize>> {
    let (t, n, m, lam) = (spec.t(), spec.n(), spec.m, spec.lambda());
    let entries = randomized.entries();
    let mut slices = vec![Array2::<usize>::zeros((n, m)); t];
    let mut fill = vec![0usize; t];
    for row in entries.rows() {
        let r = row[m] - 1;
        for k in 0..m {
            slices[r][[fill[r], k]] = row[k];
        }
        fill[r] += 1;
    }
    debug_assert!(fill.iter().all(|&f| f == n));
    let within = seed.child(STEP_WITHIN);
    let mut slots: Vec<Vec<usize>> = vec![Vec::with_capacity(lam); t + 1];
    for (r, slice) in slices.iter_mut().enumerate() {
        for k in 0..m {
            let mut stream = within.descend(&[r as u64, k as u64]).stream();
            slots.iter_mut().for_each(Vec::clear);
            for i in 0..n {
                slots[slice[[i, k]]].push(i);
            }
            for level in 1..=t {
                let perm = stream.uniform_permutation(lam).expect("lambda >= 1");
                for (&i, &p) in slots[level].iter().zip(&perm) {
                    slice[[i, k]] = (level - 1) * lam + p;
                }
            }
        }
    }
    slices
}

/// Sliced orthogonal-array-based Latin hypercube family with `t` slices of
/// `n` scenarios each.
pub fn gen_solh(spec: &SolhSpec, seed: &SeedSpec) -> Result<DesignFamily> {
    let randomized = randomize_base(spec, seed);
    let mut arrays = slice_and_expand(&randomized, spec, seed);
    let n = spec.n();
    let g = n * spec.t();
    expand_across_slices(&mut arrays, n, &seed.child(STEP_ACROSS));
    let step = seed.child(STEP_JITTER);
    let slices = arrays
        .iter()
        .enumerate()
        .map(|(r, a)| jitter(a, g, &mut step.child(r as u64).stream()))
        .collect();
    DesignFamily::new(slices, Scheme::Solh, seed.clone())
}

/// First `t_used` slices of the SOLH family generated from the same stream.
pub fn gen_spolh(spec: &SolhSpec, t_used: usize, seed: &SeedSpec) -> Result<DesignFamily> {
    if t_used == 0 || t_used > spec.t() {
        return Err(Error::invalid(format!(
            "t_used = {t_used} outside 1..={}",
            spec.t()
        )));
    }
    let mut slices = gen_solh(spec, seed)?.into_slices();
    slices.truncate(t_used);
    Ok(DesignFamily::new(slices, Scheme::Spolh, seed.clone())?.with_parent_batches(spec.t()))
}

/// `t` independent batches, each the first slice of its own randomization of
/// the Bose-Bush array `OA(lam s^2, m+1, s, 2)`.
pub fn gen_indbb(lam: usize, s: usize, m: usize, t: usize, seed: &SeedSpec) -> Result<DesignFamily> {
    if t == 0 {
        return Err(Error::invalid("t must be at least 1"));
    }
    let spec = SolhSpec::new(bose_bush(lam, s, m + 1)?, m)?;
    indbb_from_spec(&spec, t, seed)
}

/// INDBB over an arbitrary base array.
pub fn indbb_from_spec(spec: &SolhSpec, t: usize, seed: &SeedSpec) -> Result<DesignFamily> {
    if t == 0 {
        return Err(Error::invalid("t must be at least 1"));
    }
    let slices = (0..t)
        .map(|r| {
            gen_solh(spec, &seed.child(r as u64)).map(|f| f.into_slices().swap_remove(0))
        })
        .collect::<Result<Vec<_>>>()?;
    DesignFamily::new(slices, Scheme::Indbb, seed.clone())
}

/// Outcome of the two-dimensional stratification check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridCheck {
    Pass,
    /// 0-based columns `(k, l)`, 1-based cell, observed count.
    Fail {
        columns: (usize, usize),
        cell: (usize, usize),
        count: usize,
        expected: usize,
    },
    RowCount {
        rows: usize,
        expected: usize,
    },
}

impl GridCheck {
    pub fn passed(&self) -> bool {
        matches!(self, GridCheck::Pass)
    }
}

impl fmt::Display for GridCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridCheck::Pass => f.write_str("pass"),
            GridCheck::Fail {
                columns,
                cell,
                count,
                expected,
            } => write!(
                f,
                "fail: columns ({}, {}) cell {cell:?} holds {count} points, expected {expected}",
                columns.0 + 1,
                columns.1 + 1
            ),
            GridCheck::RowCount { rows, expected } => {
                write!(f, "fail: {rows} stacked rows, expected {expected}")
            }
        }
    }
}

/// For every column pair, bucket the stacked points into the `t x t` grid
/// over `(0,1]^2` and require exactly `lam` points per cell.
pub fn validate_2d(family: &DesignFamily, t: usize, lam: usize) -> GridCheck {
    let stacked = family.stacked();
    let values = stacked.values();
    let expected_rows = lam * t * t;
    if values.nrows() != expected_rows {
        return GridCheck::RowCount {
            rows: values.nrows(),
            expected: expected_rows,
        };
    }
    let levels = values.mapv(|v| level_of(v, t));
    let m = levels.ncols();
    let mut counts = vec![0usize; t * t];
    for k in 0..m {
        for l in k + 1..m {
            counts.iter_mut().for_each(|c| *c = 0);
            for row in levels.rows() {
                counts[(row[k] - 1) * t + row[l] - 1] += 1;
            }
            if let Some(cell) = counts.iter().position(|&c| c != lam) {
                return GridCheck::Fail {
                    columns: (k, l),
                    cell: (cell / t + 1, cell % t + 1),
                    count: counts[cell],
                    expected: lam,
                };
            }
        }
    }
    GridCheck::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhs::{gen_ilh, validate_latin, validate_sliced};
    use crate::oa::{bush, verify_strength};

    fn seed(s: u64) -> SeedSpec {
        SeedSpec::new(s)
    }

    fn oa18() -> OrthogonalArray {
        let b = bush(3, 4).unwrap();
        OrthogonalArray::concat_rows(&[&b, &b]).unwrap()
    }

    #[test]
    fn spec_geometry() {
        let spec = SolhSpec::new(bush(4, 4).unwrap(), 3).unwrap();
        assert_eq!((spec.t(), spec.n(), spec.lambda()), (4, 4, 1));
        let spec = SolhSpec::new(oa18(), 3).unwrap();
        assert_eq!((spec.t(), spec.n(), spec.lambda()), (3, 6, 2));
    }

    #[test]
    fn spec_rejects_bad_bases() {
        assert!(SolhSpec::new(bush(4, 4).unwrap(), 4).is_err());
        assert!(SolhSpec::new(bush(2, 3).unwrap(), 0).is_err());
        let one_level = OrthogonalArray::new(ndarray::array![[1, 1], [1, 1]], 1, 2).unwrap();
        assert!(matches!(
            SolhSpec::new(one_level, 1),
            Err(Error::InvalidArgument(_))
        ));
        let strength_one = OrthogonalArray::new(ndarray::array![[1, 2], [2, 1]], 2, 1).unwrap();
        assert!(SolhSpec::new(strength_one, 1).is_err());
    }

    #[test]
    fn bush_based_family() {
        let spec = SolhSpec::new(bush(4, 4).unwrap(), 3).unwrap();
        for s in 0..50 {
            let f = gen_solh(&spec, &seed(s)).unwrap();
            assert_eq!((f.t(), f.n(), f.m()), (4, 4, 3));
            let report = validate_sliced(&f);
            assert!(report.slices_pass() && report.stack_passes(), "seed {s}");
        }
    }

    #[test]
    fn lambda_two_grid_has_two_points_per_cell() {
        let spec = SolhSpec::new(oa18(), 3).unwrap();
        for s in 0..100 {
            let f = gen_solh(&spec, &seed(s)).unwrap();
            assert_eq!(validate_2d(&f, 3, 2), GridCheck::Pass);
            let report = validate_sliced(&f);
            assert!(report.slices_pass() && report.stack_passes());
        }
    }

    #[test]
    fn ilh_fails_grid() {
        let fails = (0..100)
            .filter(|&s| !validate_2d(&gen_ilh(6, 3, 3, &seed(s)).unwrap(), 3, 2).passed())
            .count();
        assert!(fails >= 95, "{fails}");
    }

    #[test]
    fn bush_four_five_cells() {
        let spec = SolhSpec::new(bush(4, 5).unwrap(), 4).unwrap();
        let f = gen_solh(&spec, &seed(3)).unwrap();
        assert_eq!(validate_2d(&f, 4, 1), GridCheck::Pass);
    }

    #[test]
    fn randomization_preserves_strength() {
        let spec = SolhSpec::new(bose_bush(2, 4, 9).unwrap(), 5).unwrap();
        for s in 0..30 {
            let c = randomize_base(&spec, &seed(s));
            assert_eq!(c.columns(), 6);
            assert!(verify_strength(c.entries(), 4, 2).passed());
        }
    }

    #[test]
    fn spolh_is_a_prefix() {
        let spec = SolhSpec::new(bush(8, 4).unwrap(), 3).unwrap();
        let full = gen_solh(&spec, &seed(9)).unwrap();
        let part = gen_spolh(&spec, 2, &seed(9)).unwrap();
        assert_eq!(part.scheme(), Scheme::Spolh);
        assert_eq!(part.t(), 2);
        assert_eq!(part.n(), 8);
        assert_eq!(part.slices(), &full.slices()[..2]);
        assert!((part.coverage() - 0.25).abs() < 1e-15);
        for s in part.slices() {
            assert!(validate_latin(s.values(), 8).passed());
        }
        let whole = gen_spolh(&spec, 8, &seed(9)).unwrap();
        assert_eq!(whole.slices(), full.slices());
        assert!(gen_spolh(&spec, 0, &seed(9)).is_err());
        assert!(gen_spolh(&spec, 9, &seed(9)).is_err());
    }

    #[test]
    fn spolh_single_slice_is_latin() {
        let spec = SolhSpec::new(bose_bush(2, 4, 5).unwrap(), 4).unwrap();
        let f = gen_spolh(&spec, 1, &seed(1)).unwrap();
        assert!(validate_latin(f.slices()[0].values(), spec.n()).passed());
    }

    #[test]
    fn indbb_slices_are_latin() {
        let f = gen_indbb(2, 4, 3, 5, &seed(4)).unwrap();
        assert_eq!((f.t(), f.n(), f.scheme()), (5, 8, Scheme::Indbb));
        for s in f.slices() {
            assert!(validate_latin(s.values(), 8).passed());
        }
        let single = gen_indbb(2, 4, 3, 1, &seed(4)).unwrap();
        assert_eq!(single.t(), 1);
        assert!(gen_indbb(3, 4, 3, 1, &seed(4)).is_err());
    }
}

//! Stochastic problems evaluated on scenario designs.

mod marginal;
mod newsvendor;
mod parse;
mod two_stage;

use std::fmt;

use crate::error::{Error, Result};
use crate::lhs::{decompose, jitter, level_of, DesignMatrix};
use crate::rng::SeedSpec;

pub use marginal::{transform, DiscreteMarginal};
pub use newsvendor::{critical_index, newsvendor_true, newsvendor_value, newsvendor_vn, Newsvendor, NewsvendorSpec};
pub use parse::{load_problem, parse_affine, parse_two_stage};
pub use two_stage::{capacity_problem, newsvendor_as_two_stage, Affine, Entry, TwoStageLP};

/// A problem whose SAA optimal value `v_n(D)` can be computed for a design.
pub trait StochasticProblem: Send + Sync {
    /// Number of random coordinates, i.e. design columns.
    fn dimension(&self) -> usize;

    fn evaluate(&self, design: &DesignMatrix) -> Result<f64>;

    fn describe(&self) -> String;
}

/// `v_n(D) = value` for every design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub m: usize,
    pub value: f64,
}

impl StochasticProblem for Constant {
    fn dimension(&self) -> usize {
        self.m
    }

    fn evaluate(&self, design: &DesignMatrix) -> Result<f64> {
        if design.m() != self.m {
            return Err(Error::Dimension(format!("expected {} columns, got {}", self.m, design.m())));
        }
        Ok(self.value)
    }

    fn describe(&self) -> String {
        format!("constant({})", self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    Flat,
}

/// Two probes at the same (level, coordinate) that moved `v_n` in opposite
/// directions. Positions are (design index, row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub coordinate: usize,
    pub level: usize,
    pub increasing_at: (usize, usize),
    pub decreasing_at: (usize, usize),
}

/// Observed behaviour of `v_n` in one coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoordinateMonotonicity {
    Increasing,
    Decreasing,
    Flat,
    /// Direction depends on the level but is consistent at each level;
    /// `None` marks levels that were never probed.
    ByLevel(Vec<Option<Direction>>),
    Violated(Violation),
}

impl CoordinateMonotonicity {
    pub fn is_monotone(&self) -> bool {
        !matches!(self, CoordinateMonotonicity::Violated(_))
    }
}

impl fmt::Display for CoordinateMonotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordinateMonotonicity::Increasing => write!(f, "increasing"),
            CoordinateMonotonicity::Decreasing => write!(f, "decreasing"),
            CoordinateMonotonicity::Flat => write!(f, "flat"),
            CoordinateMonotonicity::ByLevel(levels) => {
                let count = |d| levels.iter().filter(|l| **l == Some(d)).count();
                write!(
                    f,
                    "by level ({} increasing, {} decreasing, {} flat)",
                    count(Direction::Increasing),
                    count(Direction::Decreasing),
                    count(Direction::Flat)
                )
            }
            CoordinateMonotonicity::Violated(v) => write!(
                f,
                "violated at level {}: increasing at design {} row {}, decreasing at design {} row {}",
                v.level,
                v.increasing_at.0,
                v.increasing_at.1 + 1,
                v.decreasing_at.0,
                v.decreasing_at.1 + 1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub coordinates: Vec<CoordinateMonotonicity>,
    pub probes: usize,
    pub skipped: usize,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.coordinates.iter().all(CoordinateMonotonicity::is_monotone)
    }

    pub fn violations(&self) -> usize {
        self.coordinates.iter().filter(|c| !c.is_monotone()).count()
    }
}

pub const DEFAULT_PROBES: usize = 200;

/// Default perturbation for a design at resolution `g`.
pub fn default_step(resolution: usize) -> f64 {
    1.0 / (4.0 * resolution as f64)
}

#[derive(Default, Clone, Copy)]
struct Seen {
    increasing: Option<(usize, usize)>,
    decreasing: Option<(usize, usize)>,
    flat: bool,
}

/// Falsification probe for monotonicity in the jitter arguments.
///
/// Each probe picks one of `designs`, keeps its underlying level array at
/// resolution `n` fixed, redraws the jitter, and moves one entry by `step`
/// in both directions without leaving its stratum. Directions are keyed by
/// (level, coordinate); a key seen both increasing and decreasing is a
/// violation. Probes whose perturbation cannot stay inside the stratum are
/// skipped and counted.
pub fn check_monotonicity(
    problem: &dyn StochasticProblem,
    designs: &[DesignMatrix],
    probes: usize,
    step: f64,
    seed: &SeedSpec,
) -> Result<MonotonicityReport> {
    let first = designs.first().ok_or_else(|| Error::invalid("need at least one design"))?;
    let (n, m) = (first.n(), first.m());
    if designs.iter().any(|d| d.n() != n || d.m() != m) {
        return Err(Error::Dimension("probe designs must share their shape".into()));
    }
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::invalid(format!("step must lie in (0, 1), got {step}")));
    }
    let levels: Vec<_> = designs
        .iter()
        .map(|d| decompose(d.values(), n).map(|dec| dec.levels))
        .collect::<Result<_>>()?;

    let mut stream = seed.stream();
    let mut seen = vec![vec![Seen::default(); n]; m];
    let mut skipped = 0;
    for _ in 0..probes {
        let which = pick(&mut stream, designs.len());
        let (i, k) = (pick(&mut stream, n), pick(&mut stream, m));
        let base = jitter(&levels[which], n, &mut stream);
        let level = levels[which][[i, k]];
        let xi = base.get(i, k);
        let inside = |v: f64| v > 0.0 && v <= 1.0 && level_of(v, n) == level;
        let (up, down) = (xi + step, xi - step);
        let (hi, lo) = match (inside(up), inside(down)) {
            (true, true) => (base.with_entry(i, k, up)?, base.with_entry(i, k, down)?),
            (true, false) => (base.with_entry(i, k, up)?, base.clone()),
            (false, true) => (base.clone(), base.with_entry(i, k, down)?),
            (false, false) => {
                skipped += 1;
                continue;
            }
        };
        let (v_hi, v_lo) = (problem.evaluate(&hi)?, problem.evaluate(&lo)?);
        let tol = 1e-10 * (1.0 + v_hi.abs().max(v_lo.abs()));
        let slot = &mut seen[k][level - 1];
        if v_hi - v_lo > tol {
            slot.increasing.get_or_insert((which, i));
        } else if v_lo - v_hi > tol {
            slot.decreasing.get_or_insert((which, i));
        } else {
            slot.flat = true;
        }
    }

    let coordinates = seen
        .iter()
        .enumerate()
        .map(|(k, per_level)| classify(k, per_level))
        .collect();
    Ok(MonotonicityReport {
        coordinates,
        probes,
        skipped,
    })
}

fn pick(stream: &mut crate::rng::Stream, k: usize) -> usize {
    ((stream.uniform_unit() * k as f64) as usize).min(k - 1)
}

fn classify(coordinate: usize, per_level: &[Seen]) -> CoordinateMonotonicity {
    let mut directions = Vec::with_capacity(per_level.len());
    for (l, s) in per_level.iter().enumerate() {
        let direction = match (s.increasing, s.decreasing) {
            (Some(inc), Some(dec)) => {
                return CoordinateMonotonicity::Violated(Violation {
                    coordinate,
                    level: l + 1,
                    increasing_at: inc,
                    decreasing_at: dec,
                })
            }
            (Some(_), None) => Some(Direction::Increasing),
            (None, Some(_)) => Some(Direction::Decreasing),
            (None, None) if s.flat => Some(Direction::Flat),
            (None, None) => None,
        };
        directions.push(direction);
    }
    let has = |d| directions.contains(&Some(d));
    match (has(Direction::Increasing), has(Direction::Decreasing)) {
        (true, true) => CoordinateMonotonicity::ByLevel(directions),
        (true, false) => CoordinateMonotonicity::Increasing,
        (false, true) => CoordinateMonotonicity::Decreasing,
        (false, false) => CoordinateMonotonicity::Flat,
    }
}

//! Dense two-phase primal simplex with Bland's rule.
//!
//! Intended for desk-scale extensive forms (a few hundred rows and columns).
//! Variables with general bounds are shifted, reflected or split into
//! nonnegative standard-form columns; finite upper bounds become explicit
//! rows. Duals are read off the final tableau through the columns that
//! formed the initial identity basis.

use log::{debug, trace};

use crate::error::{Error, Result};

/// Numerical tolerances used by the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Pivot candidates at or below this magnitude are treated as zero.
    pub pivot: f64,
    /// Ratio-test candidates must exceed this; smaller nonzero entries
    /// signal a numerically unsafe pivot.
    pub ratio: f64,
    /// Reduced costs below `-optimality` make a column eligible to enter.
    pub optimality: f64,
    /// Phase-one objective above `feasibility * (1 + |b|_inf)` means infeasible.
    pub feasibility: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    pivot: 1e-11,
    ratio: 1e-9,
    optimality: 1e-9,
    feasibility: 1e-9,
};

const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min c^T x  s.t.  rows (<=, =, >=) b,  lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLP {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DenseLP {
    /// New problem with default bounds `0 <= x < inf`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Result<&mut Self> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "constraint has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.constraints.push(Constraint { coeffs, sense, rhs });
        Ok(self)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<&mut Self> {
        if var >= self.num_vars() {
            return Err(Error::Dimension(format!("variable {var} out of range")));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::invalid(format!("bad bounds [{lower}, {upper}] for variable {var}")));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(self)
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self
                .constraints
                .iter()
                .all(|c| c.rhs.is_finite() && c.coeffs.iter().all(|v| v.is_finite()));
        if finite {
            Ok(())
        } else {
            Err(Error::invalid("objective and constraint entries must be finite"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub value: f64,
    pub primal: Vec<f64>,
    /// One multiplier per constraint row: `<=` rows get `y <= 0`, `>=` rows
    /// `y >= 0`.
    pub dual: Vec<f64>,
    /// `c_j - A_j^T y` for each variable.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn into_optimal(self) -> Result<Solution> {
        match self {
            LpOutcome::Optimal(s) => Ok(s),
            LpOutcome::Infeasible => Err(Error::Infeasible { scenario: None }),
            LpOutcome::Unbounded => Err(Error::Unbounded { scenario: None }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverOptions {
    /// Log the full tableau (at `trace` level) after every pivot.
    pub trace_tableau: bool,
}

/// How an original variable maps onto standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + col`
    Shift { col: usize, offset: f64 },
    /// `x = offset - col`
    Reflect { col: usize, offset: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    // (rows + 1) x (cols + 1); last row is the reduced-cost row, last column the rhs
    data: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
    iterations: usize,
    trace: bool,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn cost(&self, c: usize) -> f64 {
        self.at(self.rows, c)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let p = self.data[pr * width + pc];
        for c in 0..width {
            self.data[pr * width + c] /= p;
        }
        self.data[pr * width + pc] = 1.0;
        let pivot_row: Vec<f64> = self.data[pr * width..(pr + 1) * width].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let factor = self.data[r * width + pc];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.data[r * width..(r + 1) * width];
            for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                *x -= factor * pv;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.iterations += 1;
        if self.trace {
            trace!("pivot {} at ({pr}, {pc})\n{}", self.iterations, self.dump());
        }
    }

    fn dump(&self) -> String {
        let width = self.cols + 1;
        self.data
            .chunks(width)
            .map(|row| {
                row.iter()
                    .map(|v| format!("{v:>10.4}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Run simplex iterations with Bland's rule over columns `< allowed`.
    fn optimize(&mut self, allowed: usize, tol: &Tolerances) -> Result<bool> {
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::DegeneratePivot { pivot: 0.0 });
            }
            let entering = (0..allowed).find(|&c| self.cost(c) < -tol.optimality);
            let Some(pc) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            let mut tiny: Option<f64> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > tol.ratio {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let scale = 1.0 + bratio.abs();
                            if ratio < bratio - 1e-12 * scale
                                || (ratio <= bratio + 1e-12 * scale && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                } else if a > tol.pivot {
                    tiny = Some(tiny.map_or(a, |t: f64| t.max(a)));
                }
            }
            match (best, tiny) {
                (Some((pr, _)), _) => self.pivot(pr, pc),
                (None, Some(pivot)) => return Err(Error::DegeneratePivot { pivot }),
                (None, None) => return Ok(false),
            }
        }
    }
}

pub fn solve(lp: &DenseLP) -> Result<LpOutcome> {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &DenseLP, options: &SolverOptions) -> Result<LpOutcome> {
    lp.check_finite()?;
    let tol = TOLERANCES;
    debug!(
        "simplex: {} vars, {} rows, tolerances {:?}",
        lp.num_vars(),
        lp.num_constraints(),
        tol
    );

    // standard-form columns
    let mut maps = Vec::with_capacity(lp.num_vars());
    let mut std_cols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new(); // (std col, upper) meaning col <= upper
    for j in 0..lp.num_vars() {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let map = if l.is_finite() {
            if u.is_finite() {
                bound_rows.push((std_cols, u - l));
            }
            VarMap::Shift { col: std_cols, offset: l }
        } else if u.is_finite() {
            VarMap::Reflect { col: std_cols, offset: u }
        } else {
            std_cols += 1;
            VarMap::Split { pos: std_cols - 1, neg: std_cols }
        };
        std_cols += 1;
        maps.push(map);
    }

    // rows in standard columns, rhs adjusted for offsets
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; std_cols];
        let mut rhs = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Reflect { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.sense, rhs));
    }
    for &(col, ub) in &bound_rows {
        let mut coeffs = vec![0.0; std_cols];
        coeffs[col] = 1.0;
        rows.push((coeffs, Sense::Le, ub));
    }

    // normalize to rhs >= 0
    let mut signs = Vec::with_capacity(rows.len());
    for (coeffs, sense, rhs) in rows.iter_mut() {
        let flip = *rhs < 0.0 || (*rhs == 0.0 && *sense == Sense::Ge);
        if flip {
            coeffs.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        signs.push(if flip { -1.0 } else { 1.0 });
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let art_count = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let first_slack = std_cols;
    let first_art = std_cols + slack_count;
    let cols = first_art + art_count;
    let width = cols + 1;
    let mut t = Tableau {
        rows: m,
        cols,
        data: vec![0.0; (m + 1) * width],
        basis: vec![0; m],
        first_artificial: first_art,
        iterations: 0,
        trace: options.trace_tableau,
    };
    // column holding B^{-1} e_i for each row
    let mut identity_col = vec![0usize; m];
    let (mut next_slack, mut next_art) = (first_slack, first_art);
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        let base = i * width;
        t.data[base..base + std_cols].copy_from_slice(coeffs);
        t.data[base + cols] = *rhs;
        match sense {
            Sense::Le => {
                t.data[base + next_slack] = 1.0;
                t.basis[i] = next_slack;
                identity_col[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                t.data[base + next_slack] = -1.0;
                next_slack += 1;
                t.data[base + next_art] = 1.0;
                t.basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                t.data[base + next_art] = 1.0;
                t.basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
        }
    }

    let b_norm = rows.iter().fold(0.0f64, |acc, r| acc.max(r.2.abs()));

    // phase one: minimize the sum of artificials
    if art_count > 0 {
        let zrow = m * width;
        for i in 0..m {
            if t.basis[i] >= first_art {
                for c in 0..width {
                    if c < first_art || c == cols {
                        t.data[zrow + c] -= t.data[i * width + c];
                    }
                }
            }
        }
        t.optimize(cols, &tol)?;
        let infeasibility = -t.rhs(m);
        if infeasibility > tol.feasibility * (1.0 + b_norm) {
            debug!("simplex: infeasible (phase one objective {infeasibility:e})");
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-level artificials out where possible
        for r in 0..m {
            if t.basis[r] >= first_art {
                if let Some(c) = (0..first_art).find(|&c| t.at(r, c).abs() > tol.ratio) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // phase two
    let mut std_cost = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *map {
            VarMap::Shift { col, .. } => std_cost[col] = c,
            VarMap::Reflect { col, .. } => std_cost[col] = -c,
            VarMap::Split { pos, neg } => {
                std_cost[pos] = c;
                std_cost[neg] = -c;
            }
        }
    }
    {
        let zrow = m * width;
        for c in 0..width {
            let base_cost = if c < cols { std_cost[c] } else { 0.0 };
            let mut z = base_cost;
            for r in 0..m {
                z -= std_cost[t.basis[r]] * t.data[r * width + c];
            }
            t.data[zrow + c] = z;
        }
    }
    if !t.optimize(t.first_artificial, &tol)? {
        debug!("simplex: unbounded after {} pivots", t.iterations);
        return Ok(LpOutcome::Unbounded);
    }

    let mut std_x = vec![0.0; cols];
    for r in 0..m {
        std_x[t.basis[r]] = t.rhs(r);
    }
    let primal: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset } => offset + std_x[col],
            VarMap::Reflect { col, offset } => offset - std_x[col],
            VarMap::Split { pos, neg } => std_x[pos] - std_x[neg],
        })
        .collect();
    let dual: Vec<f64> = (0..lp.num_constraints())
        .map(|i| -t.cost(identity_col[i]) * signs[i])
        .collect();
    let reduced_costs: Vec<f64> = (0..lp.num_vars())
        .map(|j| {
            lp.objective[j]
                - lp
                    .constraints
                    .iter()
                    .zip(&dual)
                    .map(|(c, y)| c.coeffs[j] * y)
                    .sum::<f64>()
        })
        .collect();
    let value = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
    debug!("simplex: optimal value {value} after {} pivots", t.iterations);
    Ok(LpOutcome::Optimal(Solution {
        value,
        primal,
        dual,
        reduced_costs,
        iterations: t.iterations,
    }))
}

/// Dual objective `b^T y + sum_j bound_j * r_j` of a solution, choosing the
/// lower bound where the reduced cost is positive and the upper where it is
/// negative. Equal to the primal value at an optimum.
pub fn dual_objective(lp: &DenseLP, sol: &Solution) -> f64 {
    let rows: f64 = lp.constraints.iter().zip(&sol.dual).map(|(c, y)| c.rhs * y).sum();
    let bounds: f64 = sol
        .reduced_costs
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            if r > 0.0 && lp.lower[j].is_finite() {
                r * lp.lower[j]
            } else if r < 0.0 && lp.upper[j].is_finite() {
                r * lp.upper[j]
            } else {
                0.0
            }
        })
        .sum();
    rows + bounds
}

use std::fmt;

use crate::error::{Error, Result};
use crate::lhs::DesignMatrix;
use crate::lp::{solve, DenseLP, LpOutcome, Sense};

use super::marginal::DiscreteMarginal;
use super::StochasticProblem;

/// `a + b * xi[coord]` with a 0-based coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub constant: f64,
    pub slope: f64,
    pub coord: usize,
}

/// A right-hand-side or technology entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Const(f64),
    Bound(Affine),
}

impl Entry {
    pub fn at(&self, xi: &[f64]) -> f64 {
        match *self {
            Entry::Const(v) => v,
            Entry::Bound(a) => a.constant + a.slope * xi[a.coord],
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Entry::Bound(a) if a.slope != 0.0)
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Const(v) => write!(f, "{v}"),
            Entry::Bound(a) => write!(f, "{} + {}*xi[{}]", a.constant, a.slope, a.coord + 1),
        }
    }
}

/// Two-stage fixed-recourse LP
///
/// ```text
/// min c^T x + E[Q(x, xi)],  A_X x <= b_X,  lower <= x <= upper
/// Q(x, xi) = min q^T y,  W y <= h(xi) - T(xi) x,  y >= 0
/// ```
///
/// Coordinate `k` of `xi` is the design value itself or, when a marginal is
/// attached, its inverse-CDF transform.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageLP {
    m: usize,
    c: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    first_stage: Vec<(Vec<f64>, f64)>,
    q: Vec<f64>,
    w: Vec<Vec<f64>>,
    h: Vec<Entry>,
    t: Vec<Vec<Entry>>,
    marginals: Vec<Option<DiscreteMarginal>>,
}

impl TwoStageLP {
    /// Problem with `m` random coordinates, zero `h` and `T`, and `x >= 0`.
    pub fn new(m: usize, c: Vec<f64>, q: Vec<f64>, w: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 || c.is_empty() || q.is_empty() || w.is_empty() {
            return Err(Error::invalid("two-stage LP needs m, c, q and W to be nonempty"));
        }
        if let Some(row) = w.iter().position(|r| r.len() != q.len()) {
            return Err(Error::Dimension(format!(
                "W row {} has {} entries, q has {}",
                row + 1,
                w[row].len(),
                q.len()
            )));
        }
        let (p, rows) = (c.len(), w.len());
        Ok(Self {
            m,
            lower: vec![0.0; p],
            upper: vec![f64::INFINITY; p],
            first_stage: Vec::new(),
            h: vec![Entry::Const(0.0); rows],
            t: vec![vec![Entry::Const(0.0); p]; rows],
            marginals: vec![None; m],
            c,
            q,
            w,
        })
    }

    pub fn first_stage_vars(&self) -> usize {
        self.c.len()
    }

    pub fn recourse_vars(&self) -> usize {
        self.q.len()
    }

    pub fn recourse_rows(&self) -> usize {
        self.w.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn h(&self) -> &[Entry] {
        &self.h
    }

    pub fn t(&self) -> &[Vec<Entry>] {
        &self.t
    }

    pub fn first_stage(&self) -> &[(Vec<f64>, f64)] {
        &self.first_stage
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub fn marginals(&self) -> &[Option<DiscreteMarginal>] {
        &self.marginals
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<&mut Self> {
        if var >= self.c.len() {
            return Err(Error::Dimension(format!("first-stage variable {} out of range", var + 1)));
        }
        if !(lower <= upper) {
            return Err(Error::invalid(format!("bad bounds [{lower}, {upper}]")));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(self)
    }

    /// Add `coeffs^T x <= rhs` to the first-stage feasible set.
    pub fn add_first_stage(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<&mut Self> {
        if coeffs.len() != self.c.len() {
            return Err(Error::Dimension(format!(
                "first-stage row has {} entries, x has {}",
                coeffs.len(),
                self.c.len()
            )));
        }
        self.first_stage.push((coeffs, rhs));
        Ok(self)
    }

    fn check_entry(&self, entry: &Entry) -> Result<()> {
        match entry {
            Entry::Bound(a) if a.coord >= self.m => Err(Error::Dimension(format!(
                "binding refers to xi[{}] but m = {}",
                a.coord + 1,
                self.m
            ))),
            _ => Ok(()),
        }
    }

    pub fn set_h(&mut self, row: usize, entry: Entry) -> Result<&mut Self> {
        self.check_entry(&entry)?;
        let slot = self
            .h
            .get_mut(row)
            .ok_or_else(|| Error::Dimension(format!("h row {} out of range", row + 1)))?;
        *slot = entry;
        Ok(self)
    }

    pub fn set_t(&mut self, row: usize, col: usize, entry: Entry) -> Result<&mut Self> {
        self.check_entry(&entry)?;
        let slot = self
            .t
            .get_mut(row)
            .and_then(|r| r.get_mut(col))
            .ok_or_else(|| Error::Dimension(format!("T({}, {}) out of range", row + 1, col + 1)))?;
        *slot = entry;
        Ok(self)
    }

    pub fn set_marginal(&mut self, coord: usize, marginal: DiscreteMarginal) -> Result<&mut Self> {
        let slot = self
            .marginals
            .get_mut(coord)
            .ok_or_else(|| Error::Dimension(format!("marginal for xi[{}] but m = {}", coord + 1, self.m)))?;
        *slot = Some(marginal);
        Ok(self)
    }

    /// Whether every `T` entry is deterministic.
    pub fn has_fixed_technology(&self) -> bool {
        self.t.iter().flatten().all(|e| !e.is_random())
    }

    fn scenario(&self, design: &DesignMatrix, i: usize) -> Vec<f64> {
        (0..self.m)
            .map(|k| {
                let z = design.get(i, k);
                match &self.marginals[k] {
                    Some(marginal) => marginal.quantile(z),
                    None => z,
                }
            })
            .collect()
    }

    /// Extensive form over the given scenarios. Variables are `x` followed
    /// by one block of `y` per scenario.
    pub fn extensive_form(&self, scenarios: &[Vec<f64>]) -> DenseLP {
        let (p, r) = (self.c.len(), self.q.len());
        let n = scenarios.len();
        let total = p + n * r;
        let mut objective = vec![0.0; total];
        objective[..p].copy_from_slice(&self.c);
        let weight = 1.0 / n as f64;
        for i in 0..n {
            for (j, &qj) in self.q.iter().enumerate() {
                objective[p + i * r + j] = qj * weight;
            }
        }
        let mut lp = DenseLP::new(objective);
        for j in 0..p {
            lp.set_bounds(j, self.lower[j], self.upper[j]).expect("validated bounds");
        }
        for (coeffs, rhs) in &self.first_stage {
            let mut row = vec![0.0; total];
            row[..p].copy_from_slice(coeffs);
            lp.add_constraint(row, Sense::Le, *rhs).expect("row length");
        }
        for (i, xi) in scenarios.iter().enumerate() {
            for (k, w_row) in self.w.iter().enumerate() {
                let mut row = vec![0.0; total];
                for j in 0..p {
                    row[j] = self.t[k][j].at(xi);
                }
                row[p + i * r..p + (i + 1) * r].copy_from_slice(w_row);
                lp.add_constraint(row, Sense::Le, self.h[k].at(xi)).expect("row length");
            }
        }
        lp
    }

    /// SAA optimal value `v_n(D)` from the extensive form.
    pub fn two_stage_vn(&self, design: &DesignMatrix) -> Result<f64> {
        if design.m() != self.m {
            return Err(Error::Dimension(format!(
                "problem has {} random coordinates, design has {} columns",
                self.m,
                design.m()
            )));
        }
        let scenarios: Vec<Vec<f64>> = (0..design.n()).map(|i| self.scenario(design, i)).collect();
        match solve(&self.extensive_form(&scenarios))? {
            LpOutcome::Optimal(sol) => Ok(sol.value),
            LpOutcome::Unbounded => Err(Error::Unbounded {
                scenario: self.localize(&scenarios, LpOutcome::Unbounded),
            }),
            LpOutcome::Infeasible => Err(Error::Infeasible {
                scenario: self.localize(&scenarios, LpOutcome::Infeasible),
            }),
        }
    }

    /// First scenario whose single-scenario problem reproduces `status`.
    fn localize(&self, scenarios: &[Vec<f64>], status: LpOutcome) -> Option<usize> {
        scenarios.iter().position(|xi| {
            matches!(
                (solve(&self.extensive_form(std::slice::from_ref(xi))), &status),
                (Ok(LpOutcome::Infeasible), LpOutcome::Infeasible) | (Ok(LpOutcome::Unbounded), LpOutcome::Unbounded)
            )
        })
    }
}

impl StochasticProblem for TwoStageLP {
    fn dimension(&self) -> usize {
        self.m
    }

    fn evaluate(&self, design: &DesignMatrix) -> Result<f64> {
        self.two_stage_vn(design)
    }

    fn describe(&self) -> String {
        format!(
            "two-stage LP (m={}, x={}, y={}, rows={})",
            self.m,
            self.c.len(),
            self.q.len(),
            self.w.len()
        )
    }
}

/// The newsvendor as a one-coordinate two-stage LP: order `x` in `[0, 1]`,
/// recourse `(overage, shortage)` priced at `(1 - alpha, alpha)`.
pub fn newsvendor_as_two_stage(alpha: f64) -> Result<TwoStageLP> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut lp = TwoStageLP::new(
        1,
        vec![0.0],
        vec![1.0 - alpha, alpha],
        vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
    )?;
    let xi = |slope| Entry::Bound(Affine {
        constant: 0.0,
        slope,
        coord: 0,
    });
    lp.set_bounds(0, 0.0, 1.0)?
        .set_h(0, xi(1.0))?
        .set_t(0, 0, Entry::Const(1.0))?
        .set_h(1, xi(-1.0))?
        .set_t(1, 0, Entry::Const(-1.0))?;
    Ok(lp)
}

/// Capacity planning with `revenues.len()` products: buy capacity `x` at
/// `unit_cost`, then sell `y_k <= scale * xi[k]` of product `k` at revenue
/// `revenues[k]` subject to `sum y <= x`.
pub fn capacity_problem(unit_cost: f64, revenues: &[f64], scale: f64) -> Result<TwoStageLP> {
    let m = revenues.len();
    let mut w: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut row = vec![0.0; m];
            row[k] = 1.0;
            row
        })
        .collect();
    w.push(vec![1.0; m]);
    let q = revenues.iter().map(|r| -r).collect();
    let mut lp = TwoStageLP::new(m, vec![unit_cost], q, w)?;
    for k in 0..m {
        lp.set_h(
            k,
            Entry::Bound(Affine {
                constant: 0.0,
                slope: scale,
                coord: k,
            }),
        )?;
    }
    lp.set_t(m, 0, Entry::Const(-1.0))?;
    Ok(lp)
}

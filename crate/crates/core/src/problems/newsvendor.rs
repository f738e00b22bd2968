use crate::error::{Error, Result};
use crate::lhs::{DesignMatrix, BOUNDARY_GUARD};

use super::marginal::DiscreteMarginal;
use super::StochasticProblem;

/// Newsvendor with shortage cost `alpha` and overage cost `1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewsvendorSpec {
    alpha: f64,
}

impl NewsvendorSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// 1-based index of the order statistic that solves the SAA problem.
pub fn critical_index(alpha: f64, n: usize) -> usize {
    let x = alpha * n as f64;
    let nearest = x.round();
    let r = if (x - nearest).abs() < BOUNDARY_GUARD {
        nearest
    } else {
        x.ceil()
    };
    (r as usize).clamp(1, n)
}

/// SAA optimal value for demands `xi`.
pub fn newsvendor_value(xi: &[f64], alpha: f64) -> f64 {
    let n = xi.len();
    if n == 0 {
        return 0.0;
    }
    let mut sorted = xi.to_vec();
    sorted.sort_by(f64::total_cmp);
    let x = sorted[critical_index(alpha, n) - 1];
    let cost: f64 = sorted
        .iter()
        .map(|&d| (1.0 - alpha) * (x - d).max(0.0) + alpha * (d - x).max(0.0))
        .sum();
    cost / n as f64
}

/// `v_n(D)` for a one-column design with uniform demand.
pub fn newsvendor_vn(design: &DesignMatrix, spec: &NewsvendorSpec) -> Result<f64> {
    if design.m() != 1 {
        return Err(Error::Dimension(format!(
            "newsvendor expects one column, design has {}",
            design.m()
        )));
    }
    let xi: Vec<f64> = design.values().column(0).to_vec();
    Ok(newsvendor_value(&xi, spec.alpha))
}

/// True optimal value `alpha (1 - alpha) / 2` under uniform demand.
pub fn newsvendor_true(spec: &NewsvendorSpec) -> f64 {
    spec.alpha * (1.0 - spec.alpha) / 2.0
}

/// Newsvendor as a [`StochasticProblem`]. Demand is the design value itself
/// or, with marginals, the sum of the inverse-CDF transforms of every column.
#[derive(Debug, Clone, PartialEq)]
pub struct Newsvendor {
    spec: NewsvendorSpec,
    marginals: Vec<DiscreteMarginal>,
}

impl Newsvendor {
    pub fn new(spec: NewsvendorSpec) -> Self {
        Self {
            spec,
            marginals: Vec::new(),
        }
    }

    pub fn with_marginals(spec: NewsvendorSpec, marginals: Vec<DiscreteMarginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::invalid("at least one marginal is required"));
        }
        Ok(Self { spec, marginals })
    }

    pub fn spec(&self) -> &NewsvendorSpec {
        &self.spec
    }

    pub fn marginals(&self) -> &[DiscreteMarginal] {
        &self.marginals
    }
}

impl StochasticProblem for Newsvendor {
    fn dimension(&self) -> usize {
        self.marginals.len().max(1)
    }

    fn evaluate(&self, design: &DesignMatrix) -> Result<f64> {
        if self.marginals.is_empty() {
            return newsvendor_vn(design, &self.spec);
        }
        let xi = super::marginal::transform(design, &self.marginals)?;
        let demand: Vec<f64> = xi.rows().into_iter().map(|row| row.sum()).collect();
        Ok(newsvendor_value(&demand, self.spec.alpha))
    }

    fn describe(&self) -> String {
        if self.marginals.is_empty() {
            format!("newsvendor(alpha={})", self.spec.alpha)
        } else {
            format!("newsvendor(alpha={}, discrete m={})", self.spec.alpha, self.marginals.len())
        }
    }
}

//! Lower-bound estimation, replicated experiments and variance diagnostics.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lhs::DesignFamily;
use crate::problems::StochasticProblem;
use crate::rng::SeedSpec;
use crate::scheme::SchemeConfig;

/// `L = mean_r v_n(D_r)` with the batch values it was averaged from.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub per_batch: Vec<f64>,
}

pub fn lower_bound(family: &DesignFamily, problem: &dyn StochasticProblem) -> Result<LowerBound> {
    if family.m() != problem.dimension() {
        return Err(Error::Dimension(format!(
            "family has {} columns, {} expects {}",
            family.m(),
            problem.describe(),
            problem.dimension()
        )));
    }
    let per_batch = family
        .slices()
        .iter()
        .enumerate()
        .map(|(r, slice)| {
            problem.evaluate(slice).map_err(|e| Error::Slice {
                slice: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let value = per_batch.iter().sum::<f64>() / per_batch.len() as f64;
    Ok(LowerBound { value, per_batch })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: SchemeConfig,
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::invalid("at least 2 replicates are needed for a standard error"));
        }
        if self.n == 0 || self.t == 0 || self.m == 0 {
            return Err(Error::invalid("n, t and m must be positive"));
        }
        if self.jobs == Some(0) {
            return Err(Error::invalid("jobs must be positive"));
        }
        Ok(())
    }
}

/// Mean and spread of the replicate lower bounds.
///
/// `se` is the sample standard deviation of `L` across replicates (divisor
/// `R - 1`), which is the spread reported for a single lower-bound estimate.
/// `se_of_mean` divides it by `sqrt(R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub replicates: usize,
    pub mean: f64,
    pub se: f64,
    pub se_of_mean: f64,
}

impl Summary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let r = values.len();
        if r < 2 {
            return Err(Error::invalid("at least 2 values are needed"));
        }
        let mean = values.iter().sum::<f64>() / r as f64;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let se = (ss / (r - 1) as f64).sqrt();
        Ok(Self {
            replicates: r,
            mean,
            se,
            se_of_mean: se / (r as f64).sqrt(),
        })
    }

    pub fn variance(&self) -> f64 {
        self.se * self.se
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateReport {
    pub config: ExperimentConfig,
    pub replicates: Vec<LowerBound>,
    pub summary: Summary,
    pub wall_seconds: f64,
}

impl ReplicateReport {
    pub fn lower_bounds(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.value).collect()
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(work()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// Run `config.replicates` independent replicates; replicate `r` draws its
/// family from `SeedSpec::new(seed).child(r)`. Results are ordered by
/// replicate index.
pub fn run_experiment(config: &ExperimentConfig, problem: &dyn StochasticProblem) -> Result<ReplicateReport> {
    config.validate()?;
    let start = Instant::now();
    let root = SeedSpec::new(config.seed);
    let outcomes: Vec<Result<LowerBound>> = with_pool(config.jobs, || {
        (0..config.replicates)
            .into_par_iter()
            .map(|r| {
                let family = config
                    .scheme
                    .generate(config.n, config.m, config.t, &root.child(r as u64))?;
                lower_bound(&family, problem)
            })
            .collect()
    })?;
    let mut replicates = Vec::with_capacity(outcomes.len());
    for (r, outcome) in outcomes.into_iter().enumerate() {
        replicates.push(outcome.map_err(|e| Error::Replicate {
            replicate: r,
            source: Box::new(e),
        })?);
    }
    let values: Vec<f64> = replicates.iter().map(|r| r.value).collect();
    let summary = Summary::from_values(&values)?;
    log::info!(
        "{} n={} t={} R={}: mean {:.6e}, se {:.3e}",
        config.scheme,
        config.n,
        config.t,
        config.replicates,
        summary.mean,
        summary.se
    );
    Ok(ReplicateReport {
        config: config.clone(),
        replicates,
        summary,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceEstimate {
    pub covariance: f64,
    /// Jackknife standard error of `covariance`.
    pub se: f64,
    pub replicates: usize,
}

/// Sample covariance of `(x_i, y_i)` with its jackknife standard error.
pub fn covariance_with_jackknife(x: &[f64], y: &[f64]) -> Result<CovarianceEstimate> {
    let r = x.len();
    if r != y.len() || r < 3 {
        return Err(Error::invalid("need at least 3 paired observations"));
    }
    // shift by the first pair for stability; constant inputs give exact zeros
    let a: Vec<f64> = x.iter().map(|v| v - x[0]).collect();
    let b: Vec<f64> = y.iter().map(|v| v - y[0]).collect();
    let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
    let sab: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
    let rf = r as f64;
    let covariance = (sab - sa * sb / rf) / (rf - 1.0);
    let loo: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(&ai, &bi)| (sab - ai * bi - (sa - ai) * (sb - bi) / (rf - 1.0)) / (rf - 2.0))
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / rf;
    let se = ((rf - 1.0) / rf * loo.iter().map(|c| (c - loo_mean).powi(2)).sum::<f64>()).sqrt();
    Ok(CovarianceEstimate {
        covariance,
        se,
        replicates: r,
    })
}

/// Covariance between the first two batch values across replicates.
pub fn covariance_probe(config: &ExperimentConfig, problem: &dyn StochasticProblem) -> Result<CovarianceEstimate> {
    if config.t < 2 {
        return Err(Error::invalid("covariance probe needs t >= 2"));
    }
    if config.replicates < 100 {
        return Err(Error::invalid("covariance probe needs at least 100 replicates"));
    }
    let report = run_experiment(config, problem)?;
    let x: Vec<f64> = report.replicates.iter().map(|r| r.per_batch[0]).collect();
    let y: Vec<f64> = report.replicates.iter().map(|r| r.per_batch[1]).collect();
    covariance_with_jackknife(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

impl LineFit {
    /// `slope -/+ 2 stderr`.
    pub fn band(&self) -> (f64, f64) {
        (self.slope - 2.0 * self.slope_stderr, self.slope + 2.0 * self.slope_stderr)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    /// `(t, var(L))` per batch count.
    pub points: Vec<(usize, f64)>,
    /// `None` when some variance is zero and the log is undefined.
    pub line: Option<LineFit>,
}

/// Ordinary least squares of `y` on `x` with the slope's standard error.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let k = x.len();
    if k != y.len() || k < 3 {
        return Err(Error::invalid("need at least 3 points"));
    }
    let kf = k as f64;
    let (mx, my) = (x.iter().sum::<f64>() / kf, y.iter().sum::<f64>() / kf);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("x values must not all coincide"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr: (ssr / (kf - 2.0) / sxx).sqrt(),
    })
}

/// Fit `log var(L)` against `log t` over `t_list`, one experiment per `t`.
/// The base config's `t` is replaced by each entry (and SPOLH's `t_used`
/// with it).
pub fn scaling_regression(
    base: &ExperimentConfig,
    t_list: &[usize],
    problem: &dyn StochasticProblem,
) -> Result<ScalingFit> {
    if t_list.len() < 3 {
        return Err(Error::invalid("scaling regression needs at least 3 batch counts"));
    }
    let mut points = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let config = ExperimentConfig {
            t,
            scheme: base.scheme.with_batches(t),
            ..base.clone()
        };
        points.push((t, run_experiment(&config, problem)?.summary.variance()));
    }
    let line = if points.iter().all(|&(_, v)| v > 0.0) {
        let x: Vec<f64> = points.iter().map(|&(t, _)| (t as f64).ln()).collect();
        let y: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
        Some(fit_line(&x, &y)?)
    } else {
        None
    };
    Ok(ScalingFit { points, line })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhs::gen_ilh;
    use crate::problems::{Constant, Newsvendor, NewsvendorSpec};

    fn newsvendor() -> Newsvendor {
        Newsvendor::new(NewsvendorSpec::new(0.4).unwrap())
    }

    fn config(scheme: SchemeConfig, n: usize, t: usize, replicates: usize) -> ExperimentConfig {
        ExperimentConfig {
            scheme,
            n,
            t,
            m: 1,
            replicates,
            seed: 2024,
            jobs: None,
        }
    }

    #[test]
    fn single_batch_bound_is_the_batch_value() {
        let family = gen_ilh(10, 1, 1, &SeedSpec::new(1)).unwrap();
        let lb = lower_bound(&family, &newsvendor()).unwrap();
        assert_eq!(lb.per_batch.len(), 1);
        assert_eq!(lb.value, lb.per_batch[0]);
    }

    #[test]
    fn constant_problem_bound_is_exact() {
        let family = gen_ilh(4, 2, 7, &SeedSpec::new(1)).unwrap();
        let lb = lower_bound(&family, &Constant { m: 2, value: 0.3 }).unwrap();
        assert_eq!(lb.per_batch, vec![0.3; 7]);
        assert!((lb.value - 0.3).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let family = gen_ilh(4, 2, 2, &SeedSpec::new(1)).unwrap();
        assert!(matches!(lower_bound(&family, &newsvendor()), Err(Error::Dimension(_))));
    }

    #[test]
    fn two_replicate_summary() {
        let s = Summary::from_values(&[0.1, 0.4]).unwrap();
        assert!((s.mean - 0.25).abs() < 1e-15);
        assert!((s.se - 0.3 / 2f64.sqrt()).abs() < 1e-15);
        assert!((s.se_of_mean - 0.15).abs() < 1e-15);
        assert!(Summary::from_values(&[1.0]).is_err());
    }

    #[test]
    fn experiment_is_deterministic_and_ordered() {
        let c = config(SchemeConfig::Slh, 5, 3, 40);
        let a = run_experiment(&c, &newsvendor()).unwrap();
        let b = run_experiment(&ExperimentConfig { jobs: Some(1), ..c.clone() }, &newsvendor()).unwrap();
        assert_eq!(a.replicates, b.replicates);
        assert_eq!(a.summary, b.summary);
        // replicate 7 matches a direct evaluation of its own sub-stream
        let family = c.scheme.generate(5, 1, 3, &SeedSpec::new(c.seed).child(7)).unwrap();
        assert_eq!(lower_bound(&family, &newsvendor()).unwrap(), a.replicates[7]);
    }

    #[test]
    fn failures_name_the_replicate() {
        let c = config(SchemeConfig::Ilh, 4, 2, 3);
        let err = run_experiment(&c, &Constant { m: 2, value: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::Replicate { replicate: 0, .. }), "{err}");
        assert!(run_experiment(&config(SchemeConfig::Ilh, 4, 2, 1), &newsvendor()).is_err());
    }

    #[test]
    fn jackknife_against_direct_leave_one_out() {
        let x = [0.3, 1.2, -0.4, 2.2, 0.9, 1.1];
        let y = [1.0, 0.1, 0.7, -1.3, 0.2, 0.4];
        let est = covariance_with_jackknife(&x, &y).unwrap();
        let cov = |xs: &[f64], ys: &[f64]| {
            let k = xs.len() as f64;
            let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
            xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (k - 1.0)
        };
        assert!((est.covariance - cov(&x, &y)).abs() < 1e-14);
        let loo: Vec<f64> = (0..6)
            .map(|i| {
                let xs: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                let ys: Vec<f64> = y.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                cov(&xs, &ys)
            })
            .collect();
        let m = loo.iter().sum::<f64>() / 6.0;
        let se = (5.0 / 6.0 * loo.iter().map(|c| (c - m).powi(2)).sum::<f64>()).sqrt();
        assert!((est.se - se).abs() < 1e-13);
    }

    #[test]
    fn constant_problem_has_zero_covariance() {
        let c = ExperimentConfig { m: 2, ..config(SchemeConfig::Slh, 4, 2, 100) };
        let est = covariance_probe(&c, &Constant { m: 2, value: 0.1 }).unwrap();
        assert_eq!((est.covariance, est.se), (0.0, 0.0));
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 2.0 * v).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12 && fit.slope_stderr < 1e-12);
        assert!(fit_line(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn zero_variance_slope_is_undefined() {
        let c = config(SchemeConfig::Ilh, 4, 2, 5);
        let fit = scaling_regression(&c, &[2, 4, 8], &Constant { m: 1, value: 1.0 }).unwrap();
        assert!(fit.line.is_none());
        assert_eq!(fit.points.len(), 3);
    }
}

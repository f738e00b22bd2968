use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lhs::DesignMatrix;

const SUM_TOLERANCE: f64 = 1e-12;
// Slack for accumulated rounding in the cumulative sums; far below any
// breakpoint separation that matters.
const CDF_GUARD: f64 = 1e-15;

/// A finite distribution on strictly increasing support points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMarginal {
    values: Vec<f64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiscreteMarginal {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::invalid(format!(
                "marginal needs matching nonempty values and probs, got {} and {}",
                values.len(),
                probs.len()
            )));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("marginal values must be finite and strictly increasing"));
        }
        if probs.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::invalid("marginal probabilities must be positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("marginal probabilities sum to {total}, not 1")));
        }
        let mut cdf: Vec<f64> = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        *cdf.last_mut().expect("nonempty") = 1.0;
        Ok(Self { values, probs, cdf })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Generalized inverse `inf { y : F(y) >= z }`.
    pub fn quantile(&self, z: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c + CDF_GUARD < z);
        self.values[i.min(self.values.len() - 1)]
    }
}

/// Map each column of a design through the matching marginal's inverse CDF.
pub fn transform(design: &DesignMatrix, marginals: &[DiscreteMarginal]) -> Result<Array2<f64>> {
    if marginals.len() != design.m() {
        return Err(Error::Dimension(format!(
            "{} marginals for a design with {} columns",
            marginals.len(),
            design.m()
        )));
    }
    let mut out = design.values().clone();
    for (mut col, marginal) in out.columns_mut().into_iter().zip(marginals) {
        col.mapv_inplace(|z| marginal.quantile(z));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use proptest::prelude::*;

    #[test]
    fn point_mass() {
        let m = DiscreteMarginal::new(vec![5.0], vec![1.0]).unwrap();
        for z in [1e-9, 0.3, 1.0] {
            assert_eq!(m.quantile(z), 5.0);
        }
    }

    #[test]
    fn breakpoint_goes_to_smaller_value() {
        let m = DiscreteMarginal::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.quantile(0.5), 1.0);
        assert_eq!(m.quantile(0.5 + 1e-12), 2.0);
        assert_eq!(m.quantile(1.0), 2.0);
    }

    #[test]
    fn rounding_in_cumulative_sums() {
        let m = DiscreteMarginal::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.1, 0.2, 0.4, 0.3]).unwrap();
        assert_eq!(m.quantile(0.3), 2.0);
        assert_eq!(m.quantile(0.7), 3.0);
    }

    #[test]
    fn frequencies_match_probabilities() {
        let m = DiscreteMarginal::new(vec![1.0, 2.0, 3.0], vec![0.2, 0.3, 0.5]).unwrap();
        let mut stream = SeedSpec::new(17).stream();
        let mut counts = [0usize; 3];
        let draws = 100_000;
        for _ in 0..draws {
            let v = m.quantile(1.0 - stream.uniform_unit());
            counts[v as usize - 1] += 1;
        }
        for (c, p) in counts.iter().zip(m.probs()) {
            assert!((*c as f64 / draws as f64 - p).abs() < 0.01);
        }
    }

    #[test]
    fn rejects_bad_marginals() {
        assert!(DiscreteMarginal::new(vec![], vec![]).is_err());
        assert!(DiscreteMarginal::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMarginal::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMarginal::new(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn transform_checks_columns() {
        let d = DesignMatrix::new(Array2::from_elem((2, 2), 0.5), 2).unwrap();
        let m = DiscreteMarginal::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(transform(&d, &[m.clone()]), Err(Error::Dimension(_))));
        let out = transform(&d, &[m.clone(), m]).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn quantile_is_monotone(
            weights in prop::collection::vec(1u32..20, 1..6),
            a in 0.0f64..=1.0,
            b in 0.0f64..=1.0,
        ) {
            let total: u32 = weights.iter().sum();
            let mut probs: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
            let head: f64 = probs[..probs.len() - 1].iter().sum();
            *probs.last_mut().unwrap() = 1.0 - head;
            let values: Vec<f64> = (0..probs.len()).map(|i| i as f64 * 1.5).collect();
            let m = DiscreteMarginal::new(values.clone(), probs).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.quantile(lo) <= m.quantile(hi));
            prop_assert!(values.contains(&m.quantile(hi)));
        }
    }
}

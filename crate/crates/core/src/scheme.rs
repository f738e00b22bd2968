//! Scheme selection with its construction parameters.

use std::fmt;

use crate::error::{Error, Result};
use crate::lhs::{gen_ilh, gen_monte_carlo, gen_slh, DesignFamily, Scheme};
use crate::oa::OaSource;
use crate::rng::SeedSpec;
use crate::solh::{gen_indbb, gen_solh, gen_spolh, SolhSpec};

/// A sampling scheme together with whatever base array it needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeConfig {
    Mc,
    Ilh,
    Slh,
    Solh { oa: OaSource },
    Spolh { oa: OaSource, t_used: usize },
    Indbb { lam: usize, s: usize },
}

impl SchemeConfig {
    /// Combine a scheme tag with its optional parameters. SOLH and SPOLH
    /// need `oa`; SPOLH also needs `t_used`; INDBB needs a Bose-Bush `oa`.
    pub fn from_parts(scheme: Scheme, oa: Option<OaSource>, t_used: Option<usize>) -> Result<Self> {
        let need_oa = || oa.ok_or_else(|| Error::invalid(format!("scheme {scheme} requires a base array")));
        match scheme {
            Scheme::Mc => Ok(SchemeConfig::Mc),
            Scheme::Ilh => Ok(SchemeConfig::Ilh),
            Scheme::Slh => Ok(SchemeConfig::Slh),
            Scheme::Solh => Ok(SchemeConfig::Solh { oa: need_oa()? }),
            Scheme::Spolh => Ok(SchemeConfig::Spolh {
                oa: need_oa()?,
                t_used: t_used.ok_or_else(|| Error::invalid("SPOLH requires t_used"))?,
            }),
            Scheme::Indbb => match need_oa()? {
                OaSource::BoseBush { lam, s } => Ok(SchemeConfig::Indbb { lam, s }),
                OaSource::Bush { s } => Ok(SchemeConfig::Indbb { lam: 1, s }),
            },
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeConfig::Mc => Scheme::Mc,
            SchemeConfig::Ilh => Scheme::Ilh,
            SchemeConfig::Slh => Scheme::Slh,
            SchemeConfig::Solh { .. } => Scheme::Solh,
            SchemeConfig::Spolh { .. } => Scheme::Spolh,
            SchemeConfig::Indbb { .. } => Scheme::Indbb,
        }
    }

    /// Batch size fixed by the base array, if any.
    pub fn implied_n(&self) -> Option<usize> {
        match *self {
            SchemeConfig::Solh { oa } | SchemeConfig::Spolh { oa, .. } => Some(oa.index() * oa.levels()),
            SchemeConfig::Indbb { lam, s } => Some(lam * s),
            _ => None,
        }
    }

    /// Batch count fixed by the base array, if any.
    pub fn implied_t(&self) -> Option<usize> {
        match *self {
            SchemeConfig::Solh { oa } => Some(oa.levels()),
            SchemeConfig::Spolh { t_used, .. } => Some(t_used),
            _ => None,
        }
    }

    /// Same scheme sized for `t` batches (only SPOLH carries a batch count).
    pub fn with_batches(&self, t: usize) -> Self {
        match *self {
            SchemeConfig::Spolh { oa, .. } => SchemeConfig::Spolh { oa, t_used: t },
            other => other,
        }
    }

    /// Generate a family of `t` batches of `n` scenarios in dimension `m`.
    pub fn generate(&self, n: usize, m: usize, t: usize, seed: &SeedSpec) -> Result<DesignFamily> {
        let check = |name: &str, got: usize, want: Option<usize>| match want {
            Some(w) if w != got => Err(Error::invalid(format!(
                "{} with this base array needs {name} = {w}, got {got}",
                self.scheme()
            ))),
            _ => Ok(()),
        };
        check("n", n, self.implied_n())?;
        check("t", t, self.implied_t())?;
        match *self {
            SchemeConfig::Mc => gen_monte_carlo(n, m, t, seed),
            SchemeConfig::Ilh => gen_ilh(n, m, t, seed),
            SchemeConfig::Slh => gen_slh(n, m, t, seed),
            SchemeConfig::Solh { oa } => gen_solh(&SolhSpec::new(oa.build(m + 1)?, m)?, seed),
            SchemeConfig::Spolh { oa, t_used } => gen_spolh(&SolhSpec::new(oa.build(m + 1)?, m)?, t_used, seed),
            SchemeConfig::Indbb { lam, s } => gen_indbb(lam, s, m, t, seed),
        }
    }
}

impl fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeConfig::Solh { oa } => write!(f, "SOLH[{oa}]"),
            SchemeConfig::Spolh { oa, t_used } => write!(f, "SPOLH[{oa},t_used={t_used}]"),
            SchemeConfig::Indbb { lam, s } => write!(f, "INDBB[lam={lam},s={s}]"),
            other => write!(f, "{}", other.scheme()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_shapes() {
        let seed = SeedSpec::new(9);
        for config in [SchemeConfig::Mc, SchemeConfig::Ilh, SchemeConfig::Slh] {
            let f = config.generate(3, 2, 4, &seed).unwrap();
            assert_eq!((f.n(), f.m(), f.t(), f.scheme()), (3, 2, 4, config.scheme()));
        }
        let solh = SchemeConfig::Solh { oa: OaSource::Bush { s: 4 } };
        let f = solh.generate(4, 3, 4, &seed).unwrap();
        assert_eq!((f.n(), f.t()), (4, 4));
        assert!(solh.generate(5, 3, 4, &seed).is_err());
        assert!(solh.generate(4, 3, 3, &seed).is_err());

        let spolh = SchemeConfig::Spolh { oa: OaSource::Bush { s: 8 }, t_used: 2 };
        let f = spolh.generate(8, 3, 2, &seed).unwrap();
        assert_eq!((f.n(), f.t(), f.coverage()), (8, 2, 0.25));

        let indbb = SchemeConfig::Indbb { lam: 2, s: 8 };
        let f = indbb.generate(16, 3, 5, &seed).unwrap();
        assert_eq!((f.n(), f.t()), (16, 5));
    }

    #[test]
    fn from_parts_requirements() {
        assert!(SchemeConfig::from_parts(Scheme::Solh, None, None).is_err());
        assert!(SchemeConfig::from_parts(Scheme::Spolh, Some(OaSource::Bush { s: 4 }), None).is_err());
        assert_eq!(
            SchemeConfig::from_parts(Scheme::Indbb, Some(OaSource::BoseBush { lam: 2, s: 8 }), None).unwrap(),
            SchemeConfig::Indbb { lam: 2, s: 8 }
        );
        assert_eq!(SchemeConfig::from_parts(Scheme::Slh, None, None).unwrap(), SchemeConfig::Slh);
    }
}

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use super::gf::{prime_power, GaloisField, MAX_ORDER};
use super::OrthogonalArray;
use crate::error::{Error, Result};

/// Bush construction, `OA(s^2, m, s, 2)` with `m <= s + 1`.
///
/// Rows are indexed by `(alpha, beta)` in `GF(s)^2`. Column `j < s` holds
/// `alpha * e_j + beta` where `e_j` is the `j`-th field element; column `s`
/// holds `alpha`.
pub fn bush(s: usize, m: usize) -> Result<OrthogonalArray> {
    let field = GaloisField::new(s)?;
    if m > s + 1 {
        return Err(Error::ColumnLimit {
            construction: "Bush",
            requested: m,
            max: s + 1,
        });
    }
    if m < 2 {
        return Err(Error::invalid("strength-two arrays need at least 2 columns"));
    }
    let mut entries = Array2::zeros((s * s, m));
    for alpha in 0..s {
        for beta in 0..s {
            let row = alpha * s + beta;
            for j in 0..m {
                let value = if j < s {
                    field.add(field.mul(alpha, j), beta)
                } else {
                    alpha
                };
                entries[[row, j]] = value + 1;
            }
        }
    }
    Ok(OrthogonalArray::from_verified(entries, s, 2))
}

/// Bose-Bush construction, `OA(lam * s^2, m, s, 2)` with `m <= lam * s + 1`,
/// for `s` and `lam` powers of two.
///
/// With `q = lam * s`, rows are indexed by `(i, beta)` in `GF(q) x GF(s)`.
/// The additive map `phi: GF(q) -> GF(s)` keeps the low `log2 s` bits of the
/// polynomial encoding, so every element of `GF(s)` has exactly `lam`
/// preimages. Column `j < q` holds `phi(a_i * a_j) + beta` and column `q`
/// holds `phi(a_i)`.
pub fn bose_bush(lam: usize, s: usize, m: usize) -> Result<OrthogonalArray> {
    if !s.is_power_of_two() || s < 2 {
        return Err(Error::UnsupportedOrder {
            order: s,
            limit: "Bose-Bush level count must be a power of two, at least 2".into(),
        });
    }
    if !lam.is_power_of_two() {
        return Err(Error::UnsupportedOrder {
            order: lam,
            limit: "Bose-Bush index must be a power of two".into(),
        });
    }
    let q = lam * s;
    if q > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: q,
            limit: format!("lam * s must not exceed {MAX_ORDER}"),
        });
    }
    debug_assert_eq!(prime_power(q).map(|(p, _)| p), Some(2));
    let field = GaloisField::new(q)?;
    if m > q + 1 {
        return Err(Error::ColumnLimit {
            construction: "Bose-Bush",
            requested: m,
            max: q + 1,
        });
    }
    if m < 2 {
        return Err(Error::invalid("strength-two arrays need at least 2 columns"));
    }
    let mask = s - 1;
    let mut entries = Array2::zeros((q * s, m));
    for i in 0..q {
        for beta in 0..s {
            let row = i * s + beta;
            for j in 0..m {
                let value = if j < q {
                    (field.mul(i, j) & mask) ^ beta
                } else {
                    i & mask
                };
                entries[[row, j]] = value + 1;
            }
        }
    }
    Ok(OrthogonalArray::from_verified(entries, s, 2))
}

/// Textual name of a constructed base array: `bush:s=<s>` or
/// `bosebush:lam=<lam>,s=<s>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OaSource {
    Bush { s: usize },
    BoseBush { lam: usize, s: usize },
}

impl OaSource {
    pub fn levels(&self) -> usize {
        match *self {
            OaSource::Bush { s } | OaSource::BoseBush { s, .. } => s,
        }
    }

    pub fn index(&self) -> usize {
        match *self {
            OaSource::Bush { .. } => 1,
            OaSource::BoseBush { lam, .. } => lam,
        }
    }

    pub fn max_columns(&self) -> usize {
        match *self {
            OaSource::Bush { s } => s + 1,
            OaSource::BoseBush { lam, s } => lam * s + 1,
        }
    }

    pub fn build(&self, columns: usize) -> Result<OrthogonalArray> {
        match *self {
            OaSource::Bush { s } => bush(s, columns),
            OaSource::BoseBush { lam, s } => bose_bush(lam, s, columns),
        }
    }
}

impl fmt::Display for OaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OaSource::Bush { s } => write!(f, "bush:s={s}"),
            OaSource::BoseBush { lam, s } => write!(f, "bosebush:lam={lam},s={s}"),
        }
    }
}

impl FromStr for OaSource {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (kind, params) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `bush:s=..` or `bosebush:lam=..,s=..`, got `{text}`")))?;
        let mut s = None;
        let mut lam = None;
        for pair in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad parameter `{pair}`")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("`{value}` is not a positive integer")))?;
            match key.trim() {
                "s" => s = Some(value),
                "lam" | "lambda" => lam = Some(value),
                other => return Err(Error::Parse(format!("unknown OA parameter `{other}`"))),
            }
        }
        let s = s.ok_or_else(|| Error::Parse("missing `s=`".into()))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "bush" if lam.is_none() || lam == Some(1) => Ok(OaSource::Bush { s }),
            "bush" => Err(Error::Parse("Bush arrays have lam = 1".into())),
            "bosebush" | "bose-bush" | "bb" => Ok(OaSource::BoseBush {
                lam: lam.unwrap_or(1),
                s,
            }),
            other => Err(Error::Parse(format!("unknown OA construction `{other}`"))),
        }
    }
}

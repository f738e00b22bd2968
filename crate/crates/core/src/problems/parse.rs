use std::path::Path;

use crate::error::{Error, Result};
use crate::io::parse_key_values;

use super::marginal::DiscreteMarginal;
use super::newsvendor::{Newsvendor, NewsvendorSpec};
use super::two_stage::{Affine, Entry, TwoStageLP};
use super::StochasticProblem;

/// Build a problem from `problem=newsvendor alpha=0.4` or
/// `problem=twostage file=<path>`. Relative paths resolve against `base_dir`.
pub fn load_problem(text: &str, base_dir: &Path) -> Result<Box<dyn StochasticProblem>> {
    let kv = parse_key_values(text)?;
    let kind = kv
        .get("problem")
        .ok_or_else(|| Error::Parse("missing `problem=` key".into()))?;
    match kind.to_ascii_lowercase().as_str() {
        "newsvendor" => {
            let alpha: f64 = kv
                .get("alpha")
                .ok_or_else(|| Error::Parse("newsvendor needs `alpha=`".into()))?
                .parse()
                .map_err(|_| Error::Parse("alpha is not a number".into()))?;
            Ok(Box::new(Newsvendor::new(NewsvendorSpec::new(alpha)?)))
        }
        "twostage" | "two-stage" => {
            let file = kv
                .get("file")
                .ok_or_else(|| Error::Parse("twostage needs `file=`".into()))?;
            let path = base_dir.join(file);
            let body = std::fs::read_to_string(&path)?;
            Ok(Box::new(parse_two_stage(&body)?))
        }
        other => Err(Error::Parse(format!("unknown problem `{other}`"))),
    }
}

fn numbers(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| match tok {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => tok.parse().map_err(|_| Error::Parse(format!("`{tok}` is not a number"))),
        })
        .collect()
}

fn matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';').map(numbers).collect()
}

/// Parse `a + b*xi[k]`, `b*xi[k]`, `-xi[k]` or a plain constant. `k` is
/// 1-based in the text and 0-based in the result.
pub fn parse_affine(text: &str) -> Result<Entry> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for i in 1..bytes.len() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'*') {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms.push(&compact[start..]);

    let mut constant = 0.0;
    let mut random: Option<(f64, usize)> = None;
    for term in terms {
        let term = term.strip_prefix('+').unwrap_or(term);
        if let Some(pos) = term.find("xi[") {
            let close = term[pos..]
                .find(']')
                .ok_or_else(|| Error::Parse(format!("unclosed `xi[` in `{text}`")))?;
            let k: usize = term[pos + 3..pos + close]
                .parse()
                .map_err(|_| Error::Parse(format!("bad coordinate in `{text}`")))?;
            if k == 0 {
                return Err(Error::Parse("coordinates are 1-based".into()));
            }
            let coef = term[..pos].trim_end_matches('*');
            let slope = match coef {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse().map_err(|_| Error::Parse(format!("bad coefficient `{c}`")))?,
            };
            if random.is_some() {
                return Err(Error::Parse(format!("`{text}` binds more than one coordinate")));
            }
            random = Some((slope, k - 1));
        } else {
            constant += term
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad term `{term}` in `{text}`")))?;
        }
    }
    Ok(match random {
        Some((slope, coord)) => Entry::Bound(Affine { constant, slope, coord }),
        None => Entry::Const(constant),
    })
}

fn index_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(Error::Parse(format!("bad 1-based index `{t}`"))),
        })
        .collect()
}

/// Parse the two-stage text format.
///
/// ```text
/// m = 3
/// c = 1
/// q = -2 -3 -4
/// W = 1 0 0; 0 1 0; 0 0 1; 1 1 1
/// h = 0 0 0 0
/// T = 0; 0; 0; -1
/// lower = 0
/// upper = inf
/// first = 1 <= 100
/// h(1) -> 10*xi[1]
/// T(4,1) -> -1
/// marginal(2) = 1:0.25 2:0.25 3:0.5
/// ```
pub fn parse_two_stage(text: &str) -> Result<TwoStageLP> {
    let mut m = None;
    let mut c = None;
    let mut q = None;
    let mut w = None;
    let mut h = None;
    let mut t = None;
    let mut lower = None;
    let mut upper = None;
    let mut first = Vec::new();
    let mut bindings = Vec::new();
    let mut marginals = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
        if let Some((target, expr)) = line.split_once("->") {
            bindings.push((target.trim().to_string(), parse_affine(expr).map_err(at)?, lineno + 1));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "m" => m = Some(value.parse::<usize>().map_err(|_| at(Error::Parse("m must be a positive integer".into())))?),
            "c" => c = Some(numbers(value).map_err(at)?),
            "q" => q = Some(numbers(value).map_err(at)?),
            "W" => w = Some(matrix(value).map_err(at)?),
            "h" => h = Some(numbers(value).map_err(at)?),
            "T" => t = Some(matrix(value).map_err(at)?),
            "lower" => lower = Some(numbers(value).map_err(at)?),
            "upper" => upper = Some(numbers(value).map_err(at)?),
            "first" => {
                let (lhs, rhs) = value
                    .split_once("<=")
                    .ok_or_else(|| at(Error::Parse("first-stage rows use `coeffs <= rhs`".into())))?;
                let rhs = numbers(rhs).map_err(at)?;
                if rhs.len() != 1 {
                    return Err(at(Error::Parse("one right-hand side expected".into())));
                }
                first.push((numbers(lhs).map_err(at)?, rhs[0]));
            }
            k if k.starts_with("marginal(") && k.ends_with(')') => {
                let coord = index_list(&k[9..k.len() - 1]).map_err(at)?;
                let (mut values, mut probs) = (Vec::new(), Vec::new());
                for pair in value.split_whitespace() {
                    let (v, p) = pair
                        .split_once(':')
                        .ok_or_else(|| at(Error::Parse(format!("expected value:prob, got `{pair}`"))))?;
                    values.push(numbers(v).map_err(at)?[0]);
                    probs.push(numbers(p).map_err(at)?[0]);
                }
                let marginal = DiscreteMarginal::new(values, probs).map_err(at)?;
                for k in coord {
                    marginals.push((k, marginal.clone()));
                }
            }
            other => return Err(at(Error::Parse(format!("unknown key `{other}`")))),
        }
    }

    let need = |name: &str| Error::Parse(format!("missing `{name}`"));
    let m = m.ok_or_else(|| need("m"))?;
    let c = c.ok_or_else(|| need("c"))?;
    let q = q.ok_or_else(|| need("q"))?;
    let w = w.ok_or_else(|| need("W"))?;
    let mut lp = TwoStageLP::new(m, c, q, w)?;
    let (p, rows) = (lp.first_stage_vars(), lp.recourse_rows());

    if let Some(h) = h {
        if h.len() != rows {
            return Err(Error::Dimension(format!("h has {} entries, W has {rows} rows", h.len())));
        }
        for (r, v) in h.into_iter().enumerate() {
            lp.set_h(r, Entry::Const(v))?;
        }
    }
    if let Some(t) = t {
        if t.len() != rows || t.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension(format!("T must be {rows} x {p}")));
        }
        for (r, row) in t.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                lp.set_t(r, j, Entry::Const(v))?;
            }
        }
    }
    let lower = lower.unwrap_or_else(|| vec![0.0; p]);
    let upper = upper.unwrap_or_else(|| vec![f64::INFINITY; p]);
    if lower.len() != p || upper.len() != p {
        return Err(Error::Dimension(format!("bounds need {p} entries")));
    }
    for j in 0..p {
        lp.set_bounds(j, lower[j], upper[j])?;
    }
    for (coeffs, rhs) in first {
        lp.add_first_stage(coeffs, rhs)?;
    }
    for (target, entry, lineno) in bindings {
        let at = |e: Error| Error::Parse(format!("line {lineno}: {e}"));
        let open = target.find('(').ok_or_else(|| at(Error::Parse(format!("bad target `{target}`"))))?;
        let idx = index_list(target[open + 1..].trim_end_matches(')')).map_err(at)?;
        match (&target[..open], idx.as_slice()) {
            ("h", [r]) => lp.set_h(*r, entry).map_err(at)?,
            ("T", [r, j]) => lp.set_t(*r, *j, entry).map_err(at)?,
            _ => return Err(at(Error::Parse(format!("bad target `{target}`")))),
        };
    }
    for (k, marginal) in marginals {
        lp.set_marginal(k, marginal)?;
    }
    Ok(lp)
}

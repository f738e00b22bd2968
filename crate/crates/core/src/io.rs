//! Plain-text formats: design families, run summaries, per-replicate values
//! and `key=value` configuration.
//!
//! Every CSV starts with `#`-prefixed provenance lines carrying the scheme
//! parameters, the seed address and the generator identity.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{ReplicateReport, Summary};
use crate::lhs::{DesignFamily, DesignMatrix, Scheme};
use crate::rng::{SeedSpec, GENERATOR_NAME, GENERATOR_VERSION};

/// Round-trip tolerance for reloaded values and recomputed summaries.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;

/// Parse whitespace-separated `key=value` tokens; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{token}`")))?;
            if key.is_empty() {
                return Err(Error::Parse(format!("empty key in `{token}`")));
            }
            if out.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Parse(format!("duplicate key `{key}`")));
            }
        }
    }
    Ok(out)
}

fn generator_line() -> String {
    format!("# generator={GENERATOR_NAME} version={GENERATOR_VERSION}")
}

fn format_path(path: &[u64]) -> String {
    path.iter().map(u64::to_string).collect::<Vec<_>>().join(".")
}

fn parse_path(text: &str) -> Result<Vec<u64>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split('.')
        .map(|p| p.parse().map_err(|_| Error::Parse(format!("bad stream path `{text}`"))))
        .collect()
}

/// Split leading `#` lines (without the marker) from the CSV body.
fn split_header(text: &str) -> (Vec<&str>, String) {
    let mut header = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            header.push(rest.trim());
        } else if !line.trim().is_empty() {
            body.push_str(line);
            body.push('\n');
        }
    }
    (header, body)
}

fn header_values(header: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in header {
        for token in line.split_whitespace() {
            if let Some((k, v)) = token.split_once('=') {
                out.insert(k.to_string(), v.to_string());
            }
        }
    }
    Ok(out)
}

fn require<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<T> {
    kv.get(key)
        .ok_or_else(|| Error::Parse(format!("header lacks `{key}=`")))?
        .parse()
        .map_err(|_| Error::Parse(format!("header value for `{key}` is malformed")))
}

fn check_generator(kv: &BTreeMap<String, String>) -> Result<()> {
    match (kv.get("generator"), kv.get("version")) {
        (Some(name), Some(version)) if name == GENERATOR_NAME && *version == GENERATOR_VERSION.to_string() => Ok(()),
        (Some(name), Some(version)) => Err(Error::Parse(format!(
            "file was written by generator {name} v{version}, this build is {GENERATOR_NAME} v{GENERATOR_VERSION}"
        ))),
        _ => Ok(()),
    }
}

/// Render a family as CSV: `slice,xi1,..,xim` with values in `{:.16e}`.
pub fn family_to_csv(family: &DesignFamily) -> String {
    let seed = family.provenance();
    let mut out = String::new();
    let _ = write!(
        out,
        "# scheme={} n={} m={} t={} seed={} path={} resolution={}",
        family.scheme().tag(),
        family.n(),
        family.m(),
        family.t(),
        seed.master_seed,
        format_path(&seed.stream_path),
        family.slices()[0].resolution()
    );
    if let Some(p) = family.parent_batches() {
        let _ = write!(out, " parent_t={p}");
    }
    out.push('\n');
    out.push_str(&generator_line());
    out.push('\n');
    out.push_str("slice");
    for k in 1..=family.m() {
        let _ = write!(out, ",xi{k}");
    }
    out.push('\n');
    for (r, slice) in family.slices().iter().enumerate() {
        for row in slice.values().rows() {
            let _ = write!(out, "{}", r + 1);
            for v in row {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_family(family: &DesignFamily, mut out: impl Write) -> Result<()> {
    out.write_all(family_to_csv(family).as_bytes())?;
    Ok(())
}

/// Load a family written by [`family_to_csv`].
pub fn read_family(text: &str) -> Result<DesignFamily> {
    let (header, body) = split_header(text);
    let kv = header_values(&header)?;
    check_generator(&kv)?;
    let scheme: Scheme = kv
        .get("scheme")
        .ok_or_else(|| Error::Parse("header lacks `scheme=`".into()))?
        .parse()?;
    let (n, m, t): (usize, usize, usize) = (require(&kv, "n")?, require(&kv, "m")?, require(&kv, "t")?);
    let resolution: usize = require(&kv, "resolution")?;
    let seed = SeedSpec {
        master_seed: require(&kv, "seed")?,
        stream_path: parse_path(kv.get("path").map(String::as_str).unwrap_or(""))?,
    };
    let mut values = vec![Vec::with_capacity(n * m); t];
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    for record in reader.records() {
        let record = record?;
        if record.len() != m + 1 {
            return Err(Error::Parse(format!("row has {} fields, expected {}", record.len(), m + 1)));
        }
        let slice: usize = record[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad slice index `{}`", &record[0])))?;
        if slice == 0 || slice > t {
            return Err(Error::Parse(format!("slice index {slice} outside 1..={t}")));
        }
        for field in record.iter().skip(1) {
            values[slice - 1].push(
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value `{field}`")))?,
            );
        }
    }
    let slices = values
        .into_iter()
        .enumerate()
        .map(|(r, v)| {
            if v.len() != n * m {
                return Err(Error::Parse(format!("slice {} has {} values, expected {}", r + 1, v.len(), n * m)));
            }
            DesignMatrix::new(Array2::from_shape_vec((n, m), v).expect("length checked"), resolution)
        })
        .collect::<Result<Vec<_>>>()?;
    let family = DesignFamily::new(slices, scheme, seed)?;
    Ok(match kv.get("parent_t") {
        Some(p) => family.with_parent_batches(
            p.parse().map_err(|_| Error::Parse("bad parent_t".into()))?,
        ),
        None => family,
    })
}

/// Largest absolute difference between two families of equal shape.
pub fn max_abs_difference(a: &DesignFamily, b: &DesignFamily) -> Option<f64> {
    if (a.n(), a.m(), a.t()) != (b.n(), b.m(), b.t()) {
        return None;
    }
    a.slices()
        .iter()
        .zip(b.slices())
        .flat_map(|(x, y)| x.values().iter().zip(y.values().iter()).map(|(p, q)| (p - q).abs()))
        .reduce(f64::max)
}

/// One line of a summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub replicates: usize,
    pub seed: u64,
    pub mean: f64,
    pub se: f64,
    pub wall_seconds: f64,
}

impl SummaryRow {
    pub fn from_report(report: &ReplicateReport) -> Self {
        let c = &report.config;
        Self {
            scheme: c.scheme.scheme().tag().to_string(),
            n: c.n,
            t: c.t,
            m: c.m,
            replicates: c.replicates,
            seed: c.seed,
            mean: report.summary.mean,
            se: report.summary.se,
            wall_seconds: report.wall_seconds,
        }
    }
}

/// Provenance line for run outputs.
pub fn run_provenance(report: &ReplicateReport, problem: &str) -> String {
    let c = &report.config;
    format!(
        "# problem={} scheme={} n={} t={} m={} replicates={} seed={}\n{}\n",
        problem.replace(' ', ""),
        c.scheme.to_string().replace(' ', ""),
        c.n,
        c.t,
        c.m,
        c.replicates,
        c.seed,
        generator_line()
    )
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn summary_to_csv(rows: &[SummaryRow], provenance: &str) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["scheme", "n", "t", "m", "replicates", "seed", "mean", "se", "wall_seconds"])?;
    for r in rows {
        writer.write_record([
            r.scheme.clone(),
            r.n.to_string(),
            r.t.to_string(),
            r.m.to_string(),
            r.replicates.to_string(),
            r.seed.to_string(),
            float(r.mean),
            float(r.se),
            format!("{:.3}", r.wall_seconds),
        ])?;
    }
    let body = String::from_utf8(writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
        .expect("csv output is utf-8");
    Ok(format!("{provenance}{body}"))
}

pub fn read_summary(text: &str) -> Result<Vec<SummaryRow>> {
    let (header, body) = split_header(text);
    check_generator(&header_values(&header)?)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let rows = reader.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
    Ok(rows)
}

pub fn replicates_to_csv(report: &ReplicateReport, provenance: &str) -> String {
    let mut out = String::from(provenance);
    out.push_str("replicate,batch,v_n\n");
    for (r, rep) in report.replicates.iter().enumerate() {
        for (b, v) in rep.per_batch.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", r + 1, b + 1, float(*v));
        }
    }
    out
}

/// Batch values per replicate, in file order.
pub fn read_replicates(text: &str) -> Result<Vec<Vec<f64>>> {
    let (header, body) = split_header(text);
    check_generator(&header_values(&header)?)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let mut out: Vec<Vec<f64>> = Vec::new();
    for record in reader.deserialize() {
        let (replicate, batch, value): (usize, usize, f64) = record?;
        if replicate == 0 || replicate > out.len() + 1 {
            return Err(Error::Parse(format!("replicate {replicate} out of order")));
        }
        if replicate == out.len() + 1 {
            out.push(Vec::new());
        }
        let batches = &mut out[replicate - 1];
        if batch != batches.len() + 1 {
            return Err(Error::Parse(format!("replicate {replicate}: batch {batch} out of order")));
        }
        batches.push(value);
    }
    Ok(out)
}

/// Recompute mean and SE from per-replicate batch values and compare with a
/// stored summary row.
pub fn check_summary(row: &SummaryRow, per_replicate: &[Vec<f64>]) -> Result<Summary> {
    if per_replicate.len() != row.replicates {
        return Err(Error::Parse(format!(
            "summary says {} replicates, per-replicate file has {}",
            row.replicates,
            per_replicate.len()
        )));
    }
    let bounds: Vec<f64> = per_replicate
        .iter()
        .map(|b| b.iter().sum::<f64>() / b.len() as f64)
        .collect();
    let summary = Summary::from_values(&bounds)?;
    let close = |a: f64, b: f64| (a - b).abs() <= ROUND_TRIP_TOLERANCE * (1.0 + a.abs().max(b.abs()));
    if !close(summary.mean, row.mean) || !close(summary.se, row.se) {
        return Err(Error::Parse(format!(
            "summary mismatch: stored mean {:e} se {:e}, recomputed mean {:e} se {:e}",
            row.mean, row.se, summary.mean, summary.se
        )));
    }
    Ok(summary)
}

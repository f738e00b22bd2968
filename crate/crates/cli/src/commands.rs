use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use sliced_saa::estimator::{run_experiment, ExperimentConfig};
use sliced_saa::io::{
    family_to_csv, parse_key_values, read_family, read_summary, replicates_to_csv, run_provenance, summary_to_csv,
    SummaryRow,
};
use sliced_saa::lhs::{validate_latin, validate_sliced, Scheme};
use sliced_saa::oa::{coincidence_defects, combinations, m_count, parse_integer_array, verify_strength, OaSource};
use sliced_saa::problems::{parse_two_stage, Newsvendor, NewsvendorSpec, StochasticProblem};
use sliced_saa::scheme::SchemeConfig;
use sliced_saa::solh::validate_2d;
use sliced_saa::SeedSpec;

use crate::cli::{GenArgs, RunArgs, TableArgs, VerifyArgs, OUT_ENV};
use crate::table;

pub enum Outcome {
    Success,
    VerificationFailed,
}

fn default_dir(fallback: &str) -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(fallback), PathBuf::from)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn resolve_sizes(config: &SchemeConfig, n: Option<usize>, t: Option<usize>) -> Result<(usize, usize)> {
    let n = n
        .or(config.implied_n())
        .ok_or_else(|| anyhow!("--n is required for scheme {}", config.scheme()))?;
    let t = t
        .or(config.implied_t())
        .ok_or_else(|| anyhow!("--t is required for scheme {}", config.scheme()))?;
    Ok((n, t))
}

pub fn gen(args: GenArgs) -> Result<Outcome> {
    let config = SchemeConfig::from_parts(args.scheme, args.oa, args.t_used)?;
    let (n, t) = resolve_sizes(&config, args.n, args.t)?;
    let family = config.generate(n, args.m, t, &SeedSpec::new(args.seed))?;
    let path = args.out.unwrap_or_else(|| {
        let name = format!("{}_n{n}_m{}_t{t}_seed{}.csv", args.scheme.tag().to_lowercase(), args.m, args.seed);
        default_dir(".").join(name)
    });
    write_file(&path, &family_to_csv(&family))?;
    println!("wrote {} ({} rows in {t} slices)", path.display(), n * t);
    Ok(Outcome::Success)
}

pub fn verify(args: VerifyArgs) -> Result<Outcome> {
    let mut ok = true;
    if let Some(oa) = &args.oa {
        ok &= verify_oa(oa, args.strength, &args.subset)?;
    }
    if let Some(path) = &args.design {
        ok &= verify_design(path)?;
    }
    Ok(if ok { Outcome::Success } else { Outcome::VerificationFailed })
}

fn verify_oa(source: &str, strength: usize, subset: &[usize]) -> Result<bool> {
    let entries = if Path::new(source).exists() {
        let text = fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
        parse_integer_array(&text)?
    } else {
        let name = OaSource::from_str(source).map_err(|e| anyhow!("{source}: no such file, and {e}"))?;
        name.build(name.max_columns())?.entries().clone()
    };
    let (runs, cols) = entries.dim();
    let levels = entries.iter().copied().max().unwrap_or(0);
    println!("array: {runs} rows, {cols} columns, {levels} levels");

    let check = verify_strength(&entries, levels, strength);
    println!("strength {strength}: {check}");
    let defects = coincidence_defects(&entries, strength);
    if defects.is_empty() {
        println!("coincidence defect: none");
    } else {
        println!("coincidence defect: {} row pairs", defects.len());
        for d in &defects {
            println!("  {d}");
        }
    }
    let r = strength + 1;
    if cols >= r {
        let counts = combinations(cols, r)
            .map(|u| m_count(&entries, &u, r))
            .collect::<sliced_saa::Result<Vec<_>>>()?;
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        println!("M(u, {r}) over {} column sets of size {r}: min {lo}, max {hi}", counts.len());
    }
    if !subset.is_empty() {
        ensure!(
            subset.iter().all(|&c| (1..=cols).contains(&c)),
            "--subset columns must lie in 1..={cols}"
        );
        let u: Vec<usize> = subset.iter().map(|c| c - 1).collect();
        for k in 0..=u.len() {
            println!("M({subset:?}, {k}) = {}", m_count(&entries, &u, k)?);
        }
    }
    Ok(check.passed())
}

fn verify_design(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let family = read_family(&text).with_context(|| format!("parsing {}", path.display()))?;
    let scheme = family.scheme();
    println!(
        "design: {scheme}, {} slices of {} rows in dimension {}",
        family.t(),
        family.n(),
        family.m()
    );
    let mut ok = true;
    if scheme == Scheme::Mc {
        println!("Monte Carlo design: no stratification to check");
    } else {
        let report = validate_sliced(&family);
        match &report.slice_failure {
            None => println!("slices are Latin at resolution {}: pass", family.n()),
            Some((r, check)) => {
                ok = false;
                println!("slice {} at resolution {}: {check}", r + 1, family.n());
            }
        }
        if scheme.is_sliced() {
            let g = family.n() * family.t();
            println!("stack is Latin at resolution {g}: {}", report.stacked);
            ok &= report.stack_passes();
        }
    }
    if scheme == Scheme::Solh {
        let t = family.t();
        let grid = validate_2d(&family, t, family.n() / t);
        println!("two-dimensional {t} x {t} grid: {grid}");
        ok &= grid.passed();
    }
    for (r, slice) in family.slices().iter().enumerate().filter(|_| scheme == Scheme::Spolh) {
        let check = validate_latin(slice.values(), family.n());
        ok &= check.passed();
        if !check.passed() {
            println!("slice {}: {check}", r + 1);
        }
    }
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

/// Flag values fall back to keys of the optional config file.
struct Settings {
    file: BTreeMap<String, String>,
    base: PathBuf,
}

const RUN_KEYS: [&str; 13] = [
    "problem",
    "alpha",
    "problem-file",
    "scheme",
    "oa",
    "t-used",
    "n",
    "t",
    "m",
    "replicates",
    "seed",
    "jobs",
    "out",
];

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self {
                file: BTreeMap::new(),
                base: PathBuf::new(),
            });
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file = parse_key_values(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(bad) = file.keys().find(|k| !RUN_KEYS.contains(&k.as_str())) {
            bail!("{}: unknown key `{bad}`", path.display());
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { file, base })
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key `{key}`: {e}")))
            .transpose()
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.file.get(key).map(|v| self.base.join(v)))
    }
}

fn build_problem(kind: Option<String>, alpha: Option<f64>, file: Option<PathBuf>) -> Result<Box<dyn StochasticProblem>> {
    let kind = match (kind, &file) {
        (Some(k), _) => k.to_ascii_lowercase(),
        (None, Some(_)) => "twostage".into(),
        (None, None) => bail!("--problem is required"),
    };
    match kind.as_str() {
        "newsvendor" => {
            let alpha = alpha.ok_or_else(|| anyhow!("the newsvendor needs --alpha"))?;
            Ok(Box::new(Newsvendor::new(NewsvendorSpec::new(alpha)?)))
        }
        "twostage" | "two-stage" => {
            let file = file.ok_or_else(|| anyhow!("a two-stage problem needs --problem-file"))?;
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            Ok(Box::new(parse_two_stage(&text).with_context(|| format!("parsing {}", file.display()))?))
        }
        other => bail!("unknown problem `{other}` (expected newsvendor or twostage)"),
    }
}

pub fn run(args: RunArgs) -> Result<Outcome> {
    let s = Settings::load(args.config.as_deref())?;
    let problem = build_problem(
        s.pick(args.problem, "problem")?,
        s.pick(args.alpha, "alpha")?,
        s.path(args.problem_file, "problem-file"),
    )?;
    let scheme: Scheme = s
        .pick(args.scheme, "scheme")?
        .ok_or_else(|| anyhow!("--scheme is required"))?;
    let config = SchemeConfig::from_parts(scheme, s.pick(args.oa, "oa")?, s.pick(args.t_used, "t-used")?)?;
    let (n, t) = resolve_sizes(&config, s.pick(args.n, "n")?, s.pick(args.t, "t")?)?;
    let m = s.pick(args.m, "m")?.unwrap_or(problem.dimension());
    ensure!(
        m == problem.dimension(),
        "problem has dimension {}, got --m {m}",
        problem.dimension()
    );
    let experiment = ExperimentConfig {
        scheme: config,
        n,
        t,
        m,
        replicates: s.pick(args.replicates, "replicates")?.unwrap_or(1000),
        seed: s.pick(args.seed, "seed")?.unwrap_or(0),
        jobs: s.pick(args.jobs, "jobs")?,
    };
    experiment.validate()?;
    let report = run_experiment(&experiment, problem.as_ref())?;

    let provenance = run_provenance(&report, &problem.describe());
    let row = SummaryRow::from_report(&report);
    let dir = s.path(args.out, "out").unwrap_or_else(|| default_dir("runs"));
    let stem = format!("{}_n{n}_t{t}_seed{}", scheme.tag().to_lowercase(), experiment.seed);
    let summary_path = dir.join(format!("summary_{stem}.csv"));
    write_file(&summary_path, &summary_to_csv(std::slice::from_ref(&row), &provenance)?)?;
    write_file(&dir.join(format!("replicates_{stem}.csv")), &replicates_to_csv(&report, &provenance))?;
    println!(
        "{} n={n} t={t} R={}: mean {:.6} se {} ({:.2}s) -> {}",
        row.scheme,
        row.replicates,
        row.mean,
        table::sci3(row.se),
        row.wall_seconds,
        summary_path.display()
    );
    Ok(Outcome::Success)
}

fn summary_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    name.starts_with("summary") && name.ends_with(".csv")
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

pub fn table(args: TableArgs) -> Result<Outcome> {
    let files = summary_files(&args.inputs)?;
    ensure!(!files.is_empty(), "no summary files given (use --in <file|dir>...)");
    let mut rows = Vec::new();
    for file in &files {
        let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
        rows.extend(read_summary(&text).with_context(|| format!("parsing {}", file.display()))?);
    }
    print!("{}", table::render(&rows)?);
    Ok(Outcome::Success)
}

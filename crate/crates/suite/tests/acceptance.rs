//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use sliced_saa::estimator::{covariance_probe, run_experiment, scaling_regression, ExperimentConfig, ReplicateReport};
use sliced_saa::lhs::{gen_ordinary_lh, gen_slh, validate_sliced};
use sliced_saa::lp::{solve, LpOutcome};
use sliced_saa::oa::{
    bose_bush, bush, coincidence_defect, coincidence_defects, combinations, m_count, parse_integer_array,
    verify_strength, OaSource, OrthogonalArray, StrengthCheck,
};
use sliced_saa::problems::{
    capacity_problem, newsvendor_as_two_stage, newsvendor_vn, DiscreteMarginal, Newsvendor, NewsvendorSpec,
    StochasticProblem,
};
use sliced_saa::scheme::SchemeConfig;
use sliced_saa::solh::{gen_solh, validate_2d, SolhSpec};
use sliced_saa::SeedSpec;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn newsvendor() -> Newsvendor {
    Newsvendor::new(NewsvendorSpec::new(0.4).unwrap())
}

fn experiment(
    scheme: SchemeConfig,
    n: usize,
    t: usize,
    m: usize,
    replicates: usize,
    seed: u64,
    jobs: Option<usize>,
    problem: &dyn StochasticProblem,
) -> ReplicateReport {
    let config = ExperimentConfig {
        scheme,
        n,
        t,
        m,
        replicates,
        seed,
        jobs,
    };
    run_experiment(&config, problem).expect("experiment runs")
}

// (n, scheme, t) -> (mean, se) as published
const TABLE_1: [(usize, &str, [(f64, f64); 3]); 6] = [
    (2, "ILH", [(0.1003, 1.83e-2), (0.1002, 1.31e-2), (0.1000, 9.23e-3)]),
    (2, "SLH", [(0.0999, 3.71e-3), (0.1000, 1.31e-3), (0.1000, 4.49e-4)]),
    (20, "ILH", [(0.1201, 6.99e-4), (0.1200, 5.01e-4), (0.1200, 3.70e-4)]),
    (20, "SLH", [(0.1200, 1.43e-4), (0.1200, 4.87e-5), (0.1200, 1.72e-5)]),
    (200, "ILH", [(0.1200, 2.18e-5), (0.1200, 1.60e-5), (0.1200, 1.14e-5)]),
    (200, "SLH", [(0.1200, 4.40e-6), (0.1200, 1.59e-6), (0.1200, 5.60e-7)]),
];
const TABLE_1_T: [usize; 3] = [5, 10, 20];

fn scheme_of(tag: &str) -> SchemeConfig {
    match tag {
        "ILH" => SchemeConfig::Ilh,
        "SLH" => SchemeConfig::Slh,
        _ => unreachable!(),
    }
}

fn criterion_1() -> Outcome {
    let problem = newsvendor();
    let mut failures = Vec::new();
    let mut worst_ratio: (f64, f64) = (f64::INFINITY, 0.0);
    for (n, tag, cells) in TABLE_1 {
        for (&t, &(mean, se)) in TABLE_1_T.iter().zip(&cells) {
            let report = experiment(scheme_of(tag), n, t, 1, 1000, 1000 + n as u64 * 100 + t as u64, Some(1), &problem);
            let s = report.summary;
            let ratio = s.se / se;
            worst_ratio = (worst_ratio.0.min(ratio), worst_ratio.1.max(ratio));
            let mean_ok = (s.mean - mean).abs() <= 4.0 * se;
            let se_ok = (0.70..=1.30).contains(&ratio);
            if !(mean_ok && se_ok) {
                failures.push(format!(
                    "{tag} n={n} t={t}: mean {:.5} (paper {mean}), se {:.3e} (paper {se:.3e}, ratio {ratio:.2})",
                    s.mean, s.se
                ));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("18 cells, se/paper ratio in [{:.2}, {:.2}]", worst_ratio.0, worst_ratio.1)
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_2() -> Outcome {
    let problem = newsvendor();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for n in [2, 20, 200] {
        for t in TABLE_1_T {
            let seed = 2000 + n as u64 * 100 + t as u64;
            let ilh = experiment(SchemeConfig::Ilh, n, t, 1, 1000, seed, None, &problem).summary.se;
            let slh = experiment(SchemeConfig::Slh, n, t, 1, 1000, seed, None, &problem).summary.se;
            let ratio = slh / ilh;
            worst = worst.max(ratio);
            if ratio > 0.35 {
                failures.push(format!("n={n} t={t}: ratio {ratio:.3}"));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("max SE(SLH)/SE(ILH) = {worst:.3}")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_3() -> Outcome {
    let problem = newsvendor();
    let base = ExperimentConfig {
        scheme: SchemeConfig::Ilh,
        n: 20,
        t: 5,
        m: 1,
        replicates: 1000,
        seed: 3000,
        jobs: None,
    };
    let ilh = scaling_regression(&base, &TABLE_1_T, &problem).unwrap();
    let slh = scaling_regression(
        &ExperimentConfig {
            scheme: SchemeConfig::Slh,
            ..base
        },
        &TABLE_1_T,
        &problem,
    )
    .unwrap();
    let (ilh, slh) = (ilh.line.expect("positive variances"), slh.line.expect("positive variances"));
    let pass = (-1.3..=-0.7).contains(&ilh.slope) && slh.slope <= -2.0;
    outcome(
        pass,
        format!(
            "ILH slope {:.3} (+/- {:.3}), SLH slope {:.3} (+/- {:.3})",
            ilh.slope,
            2.0 * ilh.slope_stderr,
            slh.slope,
            2.0 * slh.slope_stderr
        ),
    )
}

fn criterion_4() -> Outcome {
    let problem = newsvendor();
    let config = ExperimentConfig {
        scheme: SchemeConfig::Slh,
        n: 20,
        t: 2,
        m: 1,
        replicates: 2000,
        seed: 4000,
        jobs: None,
    };
    let slh = covariance_probe(&config, &problem).unwrap();
    let ilh = covariance_probe(
        &ExperimentConfig {
            scheme: SchemeConfig::Ilh,
            ..config
        },
        &problem,
    )
    .unwrap();
    let pass = slh.covariance < 0.0 && slh.covariance.abs() > 3.0 * slh.se && ilh.covariance.abs() <= 3.0 * ilh.se;
    outcome(
        pass,
        format!(
            "SLH cov {:.3e} (se {:.2e}), ILH cov {:.3e} (se {:.2e})",
            slh.covariance, slh.se, ilh.covariance, ilh.se
        ),
    )
}

fn repeat_oa(base: &OrthogonalArray, copies: usize) -> OrthogonalArray {
    let parts: Vec<&OrthogonalArray> = std::iter::repeat(base).take(copies).collect();
    OrthogonalArray::concat_rows(&parts).unwrap()
}

/// Base arrays over lambda in {1, 2, 4} and t in {2, 3, 4, 8}.
fn solh_grid() -> Vec<(usize, usize, OrthogonalArray)> {
    let mut grid = Vec::new();
    for t in [2usize, 4, 8] {
        grid.push((1, t, bush(t, t + 1).unwrap()));
        for lam in [2usize, 4] {
            let cols = (lam * t + 1).min(6);
            grid.push((lam, t, bose_bush(lam, t, cols).unwrap()));
        }
    }
    let b3 = bush(3, 4).unwrap();
    grid.push((1, 3, b3.clone()));
    grid.push((2, 3, repeat_oa(&b3, 2)));
    grid.push((4, 3, repeat_oa(&b3, 4)));
    grid
}

fn criterion_5() -> Outcome {
    const SEEDS: u64 = 1000;
    let cases: Vec<(usize, usize, usize)> = (1..=8)
        .flat_map(|n| (1..=8).flat_map(move |t| (1..=5).map(move |m| (n, t, m))))
        .collect();
    let slh_failures: Vec<String> = cases
        .par_iter()
        .filter_map(|&(n, t, m)| {
            (0..SEEDS).find_map(|seed| {
                let family = gen_slh(n, m, t, &SeedSpec::new(seed)).unwrap();
                let report = validate_sliced(&family);
                (!(report.slices_pass() && report.stack_passes()))
                    .then(|| format!("SLH n={n} t={t} m={m} seed={seed}"))
            })
        })
        .collect();

    let mut solh_cases = Vec::new();
    for (lam, t, base) in solh_grid() {
        for m in 1..=(base.columns() - 1).min(5) {
            solh_cases.push((lam, t, m, base.leading_columns(m + 1).unwrap()));
        }
    }
    let solh_failures: Vec<String> = solh_cases
        .par_iter()
        .filter_map(|(lam, t, m, base)| {
            let spec = SolhSpec::new(base.clone(), *m).unwrap();
            (0..SEEDS).find_map(|seed| {
                let family = gen_solh(&spec, &SeedSpec::new(seed)).unwrap();
                let sliced = validate_sliced(&family);
                let grid = validate_2d(&family, *t, *lam);
                (!(sliced.slices_pass() && sliced.stack_passes() && grid.passed()))
                    .then(|| format!("SOLH lam={lam} t={t} m={m} seed={seed}: {grid}"))
            })
        })
        .collect();
    let pass = slh_failures.is_empty() && solh_failures.is_empty();
    let detail = if pass {
        format!(
            "{} SLH and {} SOLH configurations x {SEEDS} seeds",
            cases.len(),
            solh_cases.len()
        )
    } else {
        slh_failures.into_iter().chain(solh_failures).take(5).collect::<Vec<_>>().join("; ")
    };
    outcome(pass, detail)
}

fn fixture(name: &str) -> OrthogonalArray {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let entries = parse_integer_array(&text).unwrap();
    let levels = *entries.iter().max().unwrap();
    OrthogonalArray::new(entries, levels, 2).unwrap()
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    for s in [2usize, 3, 4, 5, 7, 8, 9, 16] {
        for m in 2..=s + 1 {
            let oa = bush(s, m).unwrap();
            if verify_strength(oa.entries(), s, 2) != (StrengthCheck::Pass { lambda: 1 }) {
                failures.push(format!("bush s={s} m={m}"));
            }
        }
    }
    for (lam, s) in [(2usize, 2usize), (1, 4), (2, 4), (4, 4), (2, 8), (1, 16)] {
        for m in 2..=lam * s + 1 {
            let oa = bose_bush(lam, s, m).unwrap();
            if verify_strength(oa.entries(), s, 2) != (StrengthCheck::Pass { lambda: lam }) {
                failures.push(format!("bose-bush lam={lam} s={s} m={m}"));
            }
        }
    }

    let left = fixture("table2_left.csv");
    let e = left.entries();
    if verify_strength(e, 4, 2) != (StrengthCheck::Pass { lambda: 1 }) {
        failures.push("left fixture strength".into());
    }
    if coincidence_defect(e, 2).is_some() {
        failures.push("left fixture has a coincidence defect".into());
    }
    for u in combinations(5, 3) {
        if m_count(e, &u, 3).unwrap() != 16 {
            failures.push(format!("left fixture M({u:?}, 3)"));
        }
    }

    let right = fixture("table2_right.csv");
    let e = right.entries();
    if verify_strength(e, 2, 2) != (StrengthCheck::Pass { lambda: 4 }) {
        failures.push("right fixture strength".into());
    }
    let witness = coincidence_defects(e, 2)
        .into_iter()
        .any(|c| c.rows == (1, 2) && [1, 2, 3].iter().all(|k| c.columns.contains(k)));
    if !witness {
        failures.push("right fixture lacks the rows 2-3 witness".into());
    }
    let m123 = m_count(e, &[0, 1, 2], 3).unwrap();
    if m123 != 48 {
        failures.push(format!("right fixture M({{1,2,3}}, 3) = {m123}, required 48"));
    }
    let pass = failures.is_empty();
    let detail = if pass {
        "Bush, Bose-Bush and both Table 2 fixtures verified".to_string()
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

fn criterion_7() -> Outcome {
    let marginal = DiscreteMarginal::new(vec![1.0, 2.0, 3.0], vec![0.25, 0.25, 0.5]).unwrap();
    let problem =
        Newsvendor::with_marginals(NewsvendorSpec::new(0.4).unwrap(), vec![marginal.clone(), marginal]).unwrap();
    let ilh = experiment(SchemeConfig::Ilh, 20, 10, 2, 1000, 7000, None, &problem).summary;
    let slh = experiment(SchemeConfig::Slh, 20, 10, 2, 1000, 7001, None, &problem).summary;
    let ratio = slh.variance() / ilh.variance();
    outcome(
        (0.7..=1.4).contains(&ratio),
        format!(
            "var(SLH)/var(ILH) = {ratio:.3} (var {:.3e} vs {:.3e})",
            slh.variance(),
            ilh.variance()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut worst_lp: f64 = 0.0;
    let mut mismatches = Vec::new();
    for seed in 0..500 {
        let case = common::random_case(10_000 + seed);
        let oracle = common::vertex_oracle(case.lp.objective(), &case.g, &case.h);
        match (solve(&case.lp).unwrap(), oracle) {
            (LpOutcome::Optimal(sol), Some(v)) => {
                let err = (sol.value - v).abs();
                worst_lp = worst_lp.max(err);
                if err > 1e-7 {
                    mismatches.push(format!("LP seed {seed}: {} vs {v}", sol.value));
                }
            }
            (LpOutcome::Infeasible, None) => {}
            (got, want) => mismatches.push(format!("LP seed {seed}: {got:?} vs {want:?}")),
        }
    }
    let lp = newsvendor_as_two_stage(0.4).unwrap();
    let spec = NewsvendorSpec::new(0.4).unwrap();
    let mut worst_nv: f64 = 0.0;
    for seed in 0..100u64 {
        let n = 1 + (seed as usize % 20);
        let design = gen_ordinary_lh(n, 1, &SeedSpec::new(8000 + seed)).unwrap();
        let err = (lp.two_stage_vn(&design).unwrap() - newsvendor_vn(&design, &spec).unwrap()).abs();
        worst_nv = worst_nv.max(err);
        if err > 1e-8 {
            mismatches.push(format!("newsvendor seed {seed}: diff {err:e}"));
        }
    }
    let pass = mismatches.is_empty();
    let detail = if pass {
        format!("max LP error {worst_lp:.1e}, max newsvendor error {worst_nv:.1e}")
    } else {
        mismatches.into_iter().take(5).collect::<Vec<_>>().join("; ")
    };
    outcome(pass, detail)
}

fn criterion_9() -> Outcome {
    let problem = capacity_problem(1.0, &[2.0, 3.0, 4.0], 10.0).unwrap();
    let solh = SchemeConfig::Solh {
        oa: OaSource::BoseBush { lam: 2, s: 8 },
    };
    let ilh = experiment(SchemeConfig::Ilh, 16, 8, 3, 500, 9000, None, &problem).summary;
    let slh = experiment(SchemeConfig::Slh, 16, 8, 3, 500, 9001, None, &problem).summary;
    let oa = experiment(solh, 16, 8, 3, 500, 9002, None, &problem).summary;
    let pass = slh.se <= 1.1 * ilh.se && oa.se <= 1.1 * slh.se;
    outcome(
        pass,
        format!(
            "SE ILH {:.3e}, SLH {:.3e}, SOLH {:.3e}; means {:.4} / {:.4} / {:.4}",
            ilh.se, slh.se, oa.se, ilh.mean, slh.mean, oa.mean
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, f64, fn() -> Outcome); 9] = [
        (1, "Table 1 reproduction", 60.0, criterion_1),
        (2, "variance-reduction ordering", 60.0, criterion_2),
        (3, "variance scaling law", 90.0, criterion_3),
        (4, "negative batch covariance", 30.0, criterion_4),
        (5, "design invariants", 120.0, criterion_5),
        (6, "orthogonal array correctness", 30.0, criterion_6),
        (7, "integer-probability equality case", 60.0, criterion_7),
        (8, "LP oracle equivalence", 60.0, criterion_8),
        (9, "synthetic two-stage LP ordering", 60.0, criterion_9),
    ];
    let mut failed = 0;
    for (id, title, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = result.pass && secs < limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} ({title}): {} in {secs:.1}s (limit {limit:.0}s): {}",
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sliced_saa::io::{check_summary, read_family, read_replicates, read_summary};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sliced-saa"));
    cmd.env_remove("SLICED_SAA_OUT");
    cmd
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).count() - 1
}

#[test]
fn gen_shapes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["gen", "--scheme", "slh", "--n", "3", "--m", "3", "--t", "3", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let first = dir.path().join("slh_n3_m3_t3_seed7.csv");
    assert_eq!(data_rows(&first), 9);
    let bytes = fs::read(&first).unwrap();
    let again = run_in(dir.path(), &["gen", "--scheme", "slh", "--n", "3", "--m", "3", "--t", "3", "--seed", "7"]);
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read(&first).unwrap(), bytes);

    let out = run_in(dir.path(), &["gen", "--scheme", "solh", "--oa", "bush:s=4", "--m", "3", "--seed", "1", "--out", "s.csv"]);
    assert_eq!(code(&out), 0);
    let family = read_family(&fs::read_to_string(dir.path().join("s.csv")).unwrap()).unwrap();
    assert_eq!((family.n(), family.t(), family.m()), (4, 4, 3));

    let out = run_in(dir.path(), &["gen", "--scheme", "slh", "--n", "3", "--m", "3", "--t", "3", "--seed", "8", "--out", "other.csv"]);
    assert_eq!(code(&out), 0);
    assert_ne!(fs::read(dir.path().join("other.csv")).unwrap(), bytes);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("designs");
    let out = bin()
        .current_dir(dir.path())
        .env("SLICED_SAA_OUT", &target)
        .args(["gen", "--scheme", "ilh", "--n", "2", "--m", "1", "--t", "2"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(target.join("ilh_n2_m1_t2_seed0.csv").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &[],
        &["frobnicate"],
        &["gen", "--scheme", "slh", "--n", "3", "--m", "3", "--t", "3", "--bogus", "1"],
        &["gen", "--scheme", "nope", "--n", "3", "--m", "3", "--t", "3"],
        &["gen", "--scheme", "slh", "--m", "3", "--t", "3"],
        &["gen", "--scheme", "solh", "--m", "3"],
        &["gen", "--scheme", "solh", "--oa", "bush:s=4", "--m", "3", "--n", "5"],
        &["gen", "--scheme", "solh", "--oa", "bush:s=6", "--m", "3"],
        &["verify"],
        &["verify", "--design", "missing.csv"],
        &["table", "--in"],
        &["table"],
        &["table", "--in", "missing.csv"],
        &["run", "--scheme", "ilh", "--n", "2", "--t", "2"],
        &["run", "--problem", "newsvendor", "--scheme", "ilh", "--n", "2", "--t", "2"],
        &["run", "--problem", "newsvendor", "--alpha", "1.5", "--scheme", "ilh", "--n", "2", "--t", "2"],
        &["run", "--problem", "newsvendor", "--alpha", "0.4", "--scheme", "ilh", "--n", "2", "--t", "2", "--m", "3"],
        &["run", "--problem", "newsvendor", "--alpha", "0.4", "--scheme", "ilh", "--n", "2", "--t", "2", "--replicates", "1"],
    ];
    for args in cases {
        let out = run_in(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn verify_table_two_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let left = run_in(dir.path(), &["verify", "--oa", &fixture("table2_left.csv"), "--strength", "2"]);
    assert_eq!(code(&left), 0);
    let text = stdout(&left);
    assert!(text.contains("pass (lambda = 1)"));
    assert!(text.contains("coincidence defect: none"));
    assert!(text.contains("min 16, max 16"));

    let right = run_in(
        dir.path(),
        &["verify", "--oa", &fixture("table2_right.csv"), "--strength", "2", "--subset", "1,2,3"],
    );
    assert_eq!(code(&right), 0);
    let text = stdout(&right);
    assert!(text.contains("pass (lambda = 4)"));
    assert!(text.contains("rows 2 and 3 agree in columns [2, 3, 4]"));
    assert!(text.contains("M([1, 2, 3], 3) = 32"));
}

#[test]
fn verify_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "1,1\n1,2\n2,1\n1,1\n").unwrap();
    let out = run_in(dir.path(), &["verify", "--oa", "bad.csv"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("fail"));

    // an independent family relabelled as sliced fails the stacked check
    let out = run_in(dir.path(), &["gen", "--scheme", "ilh", "--n", "5", "--m", "3", "--t", "4", "--seed", "3", "--out", "ilh.csv"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("ilh.csv")).unwrap();
    let relabelled = text.replacen("scheme=ILH", "scheme=SLH", 1).replacen("resolution=5", "resolution=20", 1);
    fs::write(dir.path().join("fake.csv"), relabelled).unwrap();
    let out = run_in(dir.path(), &["verify", "--design", "fake.csv"]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
    let out = run_in(dir.path(), &["verify", "--design", "ilh.csv"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn verify_generated_designs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["--scheme", "slh", "--n", "4", "--m", "3", "--t", "5"],
        &["--scheme", "solh", "--oa", "bosebush:lam=2,s=4", "--m", "4"],
        &["--scheme", "spolh", "--oa", "bush:s=8", "--t-used", "2", "--m", "3"],
        &["--scheme", "indbb", "--oa", "bosebush:lam=2,s=2", "--m", "2", "--t", "3"],
        &["--scheme", "mc", "--n", "4", "--m", "2", "--t", "2"],
    ];
    for (i, flags) in cases.iter().enumerate() {
        let name = format!("d{i}.csv");
        let mut args = vec!["gen", "--out", &name];
        args.extend_from_slice(flags);
        assert_eq!(code(&run_in(dir.path(), &args)), 0, "{flags:?}");
        let out = run_in(dir.path(), &["verify", "--design", &name]);
        assert_eq!(code(&out), 0, "{flags:?}: {}", stdout(&out));
    }
    let out = run_in(dir.path(), &["verify", "--oa", "bush:s=5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("6 columns"));
}

#[test]
fn run_newsvendor_and_tabulate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run", "--problem", "newsvendor", "--alpha", "0.4", "--scheme", "ilh", "--n", "20", "--t", "10",
            "--replicates", "1000",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let runs = dir.path().join("runs");
    let summary = read_summary(&fs::read_to_string(runs.join("summary_ilh_n20_t10_seed0.csv")).unwrap()).unwrap();
    assert_eq!(summary.len(), 1);
    assert!((summary[0].mean - 0.12).abs() < 1e-4, "{}", summary[0].mean);
    let per_rep = read_replicates(&fs::read_to_string(runs.join("replicates_ilh_n20_t10_seed0.csv")).unwrap()).unwrap();
    assert_eq!(per_rep.len(), 1000);
    check_summary(&summary[0], &per_rep).unwrap();

    let out = run_in(
        dir.path(),
        &["run", "--config", &fixture("newsvendor.conf"), "--scheme", "slh", "--replicates", "200", "--out", "runs"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let slh = read_summary(&fs::read_to_string(runs.join("summary_slh_n20_t10_seed1.csv")).unwrap()).unwrap();
    assert_eq!((slh[0].scheme.as_str(), slh[0].replicates, slh[0].seed), ("SLH", 200, 1));
    assert!(slh[0].se < summary[0].se);

    let out = run_in(dir.path(), &["table", "--in", "runs"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[0].contains("t=10"));
    assert!(lines[1].starts_with("20") && lines[1].contains("ILH") && lines[1].contains("0.1200 ("));
    assert!(lines[2].contains("SLH") && lines[2].contains("E-5)"));
}

#[test]
fn run_is_reproducible_and_reads_problem_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run", "--problem-file", &fixture("capacity.txt"), "--scheme", "slh", "--n", "4", "--t", "3",
        "--replicates", "20", "--seed", "5", "--jobs", "2", "--out", "a",
    ];
    assert_eq!(code(&run_in(dir.path(), &args)), 0);
    let mut again = args;
    again[args.len() - 1] = "b";
    again[args.len() - 3] = "1";
    assert_eq!(code(&run_in(dir.path(), &again)), 0);
    let name = "replicates_slh_n4_t3_seed5.csv";
    let a = fs::read(dir.path().join("a").join(name)).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b").join(name)).unwrap());
    let header = String::from_utf8(a).unwrap();
    assert!(header.starts_with("# problem="));
}

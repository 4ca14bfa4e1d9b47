//! End-to-end tests of the `laf` binary: exit codes, file layout,
//! determinism across segmentation and caching, and config precedence.

use std::path::Path;
use std::process::{Command, Output};

const ENV_KEYS: [&str; 8] = [
    "LAF_EXPERIMENTS",
    "LAF_X_MAX",
    "LAF_X_SAMPLES",
    "LAF_SEGMENT_SIZE",
    "LAF_CACHE_DIR",
    "LAF_THREADS",
    "LAF_OUT",
    "LAF_CONFIG",
];

fn laf(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_laf"));
    for k in ENV_KEYS {
        cmd.env_remove(k);
    }
    cmd.args(args);
    cmd
}

fn run_ok(args: &[&str]) -> Output {
    let out = laf(args).output().expect("binary runs");
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_csv(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn list_prints_the_full_catalog_and_exits_zero() {
    let out = run_ok(&["--list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for id in [
        "sum_beta_21",
        "density_table_31",
        "reciprocal_P_41",
        "residue_S_51",
        "smooth_grid_56",
        "consecutive_p3",
    ] {
        assert!(text.contains(id), "catalog is missing {id}:\n{text}");
    }
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn invalid_experiment_id_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let out = laf(&[
        "--experiments",
        "sum_beta_21,no_such_experiment",
        "--x-max",
        "1e3",
        "--out",
        out_dir.to_str().unwrap(),
    ])
    .output()
    .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_experiment"), "{stderr}");
    // Validation failed before any side effects: not even the directory.
    assert!(!out_dir.exists(), "output dir was created on a config error");
}

#[test]
fn sample_above_x_max_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = laf(&[
        "--x-max",
        "1e4",
        "--x-samples",
        "1e4,1e5",
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ])
    .output()
    .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds x-max"));
}

#[test]
fn density_table_reports_the_squarefree_density() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("r");
    // Short names resolve as unique prefixes of catalog ids.
    run_ok(&[
        "--experiments",
        "density_table",
        "--x-max",
        "1e6",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let csv = read_csv(&out_dir, "density_table_31_1000000.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,d_exact,tail_bound,count_at_x,empirical_density,deviation_over_envelope"
    );
    let k0: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(k0[0], "0");
    let d_exact: f64 = k0[1].parse().unwrap();
    let empirical: f64 = k0[4].parse().unwrap();
    assert!((d_exact - 0.6079271018540267).abs() < 1e-12, "{d_exact}");
    assert!((empirical - 0.6079).abs() < 1e-3, "{empirical}");
    // k = 1 is impossible for B - beta.
    let k1: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(k1[0], "1");
    assert_eq!(k1[3], "0");
}

#[test]
fn csv_bodies_are_identical_across_reruns_and_segment_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let base = [
        "--experiments",
        "sum_beta_21,consecutive_p3,reciprocal_P_41",
        "--x-max",
        "1e5",
        "--x-samples",
        "1e4,1e5",
    ];

    let mut args_a: Vec<&str> = base.to_vec();
    args_a.extend(["--out", a.to_str().unwrap()]);
    run_ok(&args_a);

    // Same run again.
    let mut args_b: Vec<&str> = base.to_vec();
    args_b.extend(["--out", b.to_str().unwrap()]);
    run_ok(&args_b);

    // Same run with a very different segmentation and two threads.
    let mut args_c: Vec<&str> = base.to_vec();
    args_c.extend([
        "--out",
        c.to_str().unwrap(),
        "--segment-size",
        "4096",
        "--threads",
        "2",
    ]);
    run_ok(&args_c);

    for name in [
        "sum_beta_21_100000.csv",
        "consecutive_p3_100000.csv",
        "reciprocal_P_41_100000.csv",
    ] {
        let body_a = read_csv(&a, name);
        let body_b = read_csv(&b, name);
        let body_c = read_csv(&c, name);
        assert_eq!(body_a, body_b, "{name} differs between identical runs");
        assert_eq!(body_a, body_c, "{name} differs across segmentation/threads");
        assert!(body_a.starts_with("x,exact,predicted,ratio\n"));
        assert_eq!(body_a.lines().count(), 3, "header + one row per sample");
    }
}

#[test]
fn cache_roundtrip_recovers_from_corruption_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let base = [
        "--experiments",
        "sum_beta_21",
        "--x-max",
        "2e5",
        "--x-samples",
        "2e5",
        "--segment-size",
        "65536",
    ];

    // Cold cache.
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--cache-dir", cache.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run_ok(&args);
    let seg_files: Vec<_> = std::fs::read_dir(&cache)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "seg"))
        .collect();
    assert!(!seg_files.is_empty(), "cache directory was not populated");

    // Warm cache must not change a byte.
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--cache-dir", cache.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    let warm = run_ok(&args);
    assert_eq!(
        read_csv(&a, "sum_beta_21_200000.csv"),
        read_csv(&b, "sum_beta_21_200000.csv")
    );
    assert!(
        !String::from_utf8_lossy(&warm.stderr).contains("warning"),
        "clean cache reuse should not warn"
    );

    // Corrupt one segment file: the run still succeeds, warns, and the
    // numbers do not move.
    std::fs::write(&seg_files[0], b"garbage, not a segment").unwrap();
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--cache-dir", cache.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    let recovered = run_ok(&args);
    let stderr = String::from_utf8_lossy(&recovered.stderr);
    assert!(stderr.contains("warning"), "expected a recovery warning, got:\n{stderr}");
    assert_eq!(
        read_csv(&a, "sum_beta_21_200000.csv"),
        read_csv(&c, "sum_beta_21_200000.csv")
    );
}

#[test]
fn cache_on_and_off_agree_to_the_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let base = ["--experiments", "reciprocal_P_41", "--x-max", "5e4", "--x-samples", "5e4"];

    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--out", a.to_str().unwrap()]);
    run_ok(&args);

    let cache = dir.path().join("cache");
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--out", b.to_str().unwrap(), "--cache-dir", cache.to_str().unwrap()]);
    run_ok(&args);

    assert_eq!(
        read_csv(&a, "reciprocal_P_41_50000.csv"),
        read_csv(&b, "reciprocal_P_41_50000.csv")
    );
}

#[test]
fn all_experiments_at_1e4_finish_quickly_with_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("r");
    let started = std::time::Instant::now();
    run_ok(&[
        "--experiments",
        "all",
        "--x-max",
        "1e4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget is one minute");

    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 12, "2 files per experiment: {names:?}");
    for id in [
        "sum_beta_21",
        "density_table_31",
        "reciprocal_P_41",
        "residue_S_51",
        "smooth_grid_56",
        "consecutive_p3",
    ] {
        assert!(names.contains(&format!("{id}_10000.csv")), "{names:?}");
        assert!(names.contains(&format!("{id}_10000.json")), "{names:?}");
    }
}

#[test]
fn config_file_env_and_flags_layer_in_that_order() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("laf.conf");
    std::fs::write(&conf, "x_max = 1e3\nexperiments = consecutive_p3\n").unwrap();

    // File alone decides.
    let out_dir = dir.path().join("file-only");
    let mut cmd = laf(&["--config", conf.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("consecutive_p3_1000.csv").exists());

    // Env overrides the file.
    let out_dir = dir.path().join("env-over-file");
    let mut cmd = laf(&["--config", conf.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    cmd.env("LAF_X_MAX", "2e3");
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("consecutive_p3_2000.csv").exists());

    // Flags override both.
    let out_dir = dir.path().join("flags-over-env");
    let mut cmd = laf(&[
        "--config",
        conf.to_str().unwrap(),
        "--x-max",
        "5e3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    cmd.env("LAF_X_MAX", "2e3");
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("consecutive_p3_5000.csv").exists());
}

//! End-to-end tests of the command-line surface: exit codes, file formats
//! and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use amploop::stats::SampleSet;

fn amploop(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amploop"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn run_statevector_weak_emits_parseable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = amploop(
        &[
            "run",
            "--algo",
            "weak",
            "--rho",
            "0.25",
            "--kappa",
            "0.5",
            "--backend",
            "statevector",
            "--n",
            "4",
            "--marked",
            "3",
            "--trials",
            "100",
            "--seed",
            "11",
            "--out",
            "samples.csv",
        ],
        dir.path(),
    );
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read(dir.path().join("samples.csv")).unwrap();
    let set = SampleSet::read_csv(&text[..]).unwrap();
    assert_eq!(set.len(), 100);
    assert_eq!(set.meta().n, Some(4));
    assert_eq!(set.meta().seed, 11);
}

#[test]
fn run_json_output_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let out = amploop(
        &[
            "run",
            "--algo",
            "test-restart",
            "--rho",
            "0.01",
            "--trials",
            "50",
            "--seed",
            "2",
            "--format",
            "json",
            "--out",
            "samples.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("samples.json")).unwrap();
    let set = SampleSet::from_json(&text).unwrap();
    assert_eq!(set.len(), 50);
    assert_eq!(set.meta().rho, 0.01);
}

#[test]
fn identical_spec_gives_byte_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run", "--algo", "weak", "--rho", "1e-4", "--trials", "200", "--seed", "9", "--out",
    ];
    let with_out = |name: &str| {
        let mut a: Vec<&str> = args.to_vec();
        a.push(name);
        assert_eq!(code(&amploop(&a, dir.path())), 0);
        fs::read(dir.path().join(name)).unwrap()
    };
    assert_eq!(with_out("a.csv"), with_out("b.csv"));
    // thread cap must not change the bytes either
    let out = amploop(
        &[
            "run",
            "--algo",
            "weak",
            "--rho",
            "1e-4",
            "--trials",
            "200",
            "--seed",
            "9",
            "--threads",
            "2",
            "--out",
            "c.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("c.csv")).unwrap()
    );
}

#[test]
fn strict_rejects_zero_kappa_otherwise_caps() {
    let dir = tempfile::tempdir().unwrap();
    let strict = amploop(
        &[
            "run", "--algo", "weak", "--rho", "1e-6", "--kappa", "0", "--trials", "5", "--strict",
        ],
        dir.path(),
    );
    assert_eq!(code(&strict), 2);

    let capped = amploop(
        &[
            "run",
            "--algo",
            "weak",
            "--rho",
            "1e-6",
            "--kappa",
            "0",
            "--trials",
            "5",
            "--max-iterations",
            "500",
            "--out",
            "capped.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&capped), 3);
    let text = fs::read_to_string(dir.path().join("capped.csv")).unwrap();
    assert!(text.contains("# capped_trial: 0"));
    assert!(text.contains("# cap: 500"));
}

#[test]
fn invalid_rho_is_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = amploop(
        &["run", "--algo", "weak", "--rho", "1.5", "--trials", "5"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
    let out = amploop(
        &["run", "--algo", "weak", "--rho", "0", "--trials", "5"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn figure3_emits_window_with_run_lengths() {
    let dir = tempfile::tempdir().unwrap();
    let out = amploop(
        &["figure", "3", "--rho", "0.01", "--out", "fig3.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert!(text.contains("# L: 8"));
    assert!(text.contains("# ell: 8"));
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('n'))
        .collect();
    assert_eq!(rows.len(), 21);
    // the active flag matches re-classification of the emitted angle
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let angle: f64 = cols[1].parse().unwrap();
        let active: u8 = cols[2].parse().unwrap();
        assert_eq!(u8::from(amploop::geometry::is_active(angle)), active);
    }
}

#[test]
fn figure2_small_histogram_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["h1.csv", "h2.csv"] {
        let out = amploop(
            &[
                "figure", "2", "--rho", "1e-6", "--trials", "10", "--seed", "4", "--out", name,
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
    }
    let a = fs::read(dir.path().join("h1.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("h2.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# bin_width:"));
    let total: u64 = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("bin"))
        .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 10);
}

#[test]
fn figure4_emits_ecdfs_and_test_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = amploop(
        &[
            "figure", "4", "--rho", "1e-4", "--trials", "300", "--seed", "7", "--out", "fig4",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    for name in ["fig4_wm_ecdf.csv", "fig4_tr_ecdf.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        let last = text.lines().last().unwrap();
        // cumulative probability closes at 1
        assert!(last.ends_with(",1"), "{last}");
    }
    let tests: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig4_tests.json")).unwrap())
            .unwrap();
    assert!(tests["ks"]["p_value"].is_number());
    assert!(tests["ad"]["statistic"].is_number());
    assert_eq!(tests["spec"]["trials"], 300);
}

#[test]
fn verify_passes_on_defaults_and_fails_past_bound() {
    let dir = tempfile::tempdir().unwrap();
    let ok = amploop(&["verify", "--rho", "1e-4", "--rho", "1e-2"], dir.path());
    assert_eq!(
        code(&ok),
        0,
        "stdout: {}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));

    // 1.01x the regime bound for rho = 1e-4
    let bound = amploop::geometry::kappa_upper_bound(1e-4).unwrap();
    let kappa = format!("{}", bound * 1.01);
    let fail = amploop(&["verify", "--rho", "1e-4", "--kappa", &kappa], dir.path());
    assert_eq!(code(&fail), 1);
    let stdout = String::from_utf8_lossy(&fail.stdout);
    assert!(stdout.contains("FAIL offset-bounds"));
    assert!(stdout.contains("violation at a ="));
}

#[test]
fn verify_handles_rho_one_edge() {
    let dir = tempfile::tempdir().unwrap();
    let out = amploop(&["verify", "--rho", "1"], dir.path());
    assert_eq!(
        code(&out),
        0,
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
}

use std::fs;
use std::path::Path;

use assert_cmd::Command;

fn cli(dir: &Path) -> Command {
    let mut cmd = Command::cargo_bin("dirac-amalgam").unwrap();
    cmd.current_dir(dir).env_remove("DIRAC_AMALGAM_OUT");
    cmd
}

fn stdout_of(cmd: &mut Command) -> String {
    String::from_utf8(cmd.output().unwrap().stdout).unwrap()
}

#[test]
fn check_range_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout_of(cli(dir.path()).args(["check-range", "--qt", "2", "--q", "4", "--rt", "16", "--r", "12", "--sigma", "1.1"]));
    assert_eq!(out.trim(), "admissible (Theorem 1)");

    let assert = cli(dir.path())
        .args(["check-range", "--qt", "2", "--q", "4", "--rt", "16", "--r", "6", "--sigma", "1.1"])
        .assert()
        .success();
    let out = String::from_utf8(assert.get_output().stdout.clone()).unwrap();
    assert!(out.starts_with("rejected: 6<r violated"), "{out}");

    let out = stdout_of(cli(dir.path()).args(["check-range", "--classical", "--q", "2", "--r", "6", "--sigma", "0.9"]));
    assert_eq!(out.trim(), "admissible (classical)");

    let out = stdout_of(cli(dir.path()).args(["check-range", "--qt", "inf", "--q", "6", "--rt", "9", "--r", "9", "--sigma", "1.5"]));
    assert_eq!(out.trim(), "admissible (Theorem 1)");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    cli(dir.path()).args(["check-range", "--q", "x", "--r", "6", "--sigma", "1"]).assert().code(1);
    cli(dir.path()).args(["check-range", "--q", "4", "--r", "12", "--sigma", "1.1"]).assert().code(1);
    cli(dir.path()).args(["no-such-command"]).assert().code(1);
    cli(dir.path()).args(["kernel", "--gamma", "4", "--set", "grid.n=7"]).assert().code(1);
    cli(dir.path()).args(["kernel", "--gamma", "4", "--set", "bogus=1"]).assert().code(1);
    cli(dir.path()).args(["--help"]).assert().code(0);
}

#[test]
fn kernel_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout_of(cli(dir.path()).args(["kernel", "--gamma", "4", "--x", "0", "--t", "0"]));
    assert!(out.starts_with("0.0397887357729"), "{out}");
    let csv = fs::read_to_string(dir.path().join("out/kernel.csv")).unwrap();
    assert!(csv.starts_with("gamma,t,x_norm,re,im,abs,quad_err_est\n"));
}

#[test]
fn propagate_dump_and_fubini_norm() {
    let dir = tempfile::tempdir().unwrap();
    cli(dir.path())
        .args(["propagate", "--t", "1.5", "--set", "grid.n=32", "--set", "grid.box_length=16", "--dump", "f.bin"])
        .assert()
        .success();
    let out = stdout_of(cli(dir.path()).args(["norm", "--p", "3", "--q", "3", "--input", "f.bin", "--radius", "4"]));
    let value = |prefix: &str| -> f64 {
        let line = out.lines().find(|l| l.starts_with(prefix)).unwrap();
        let after = line.split_once(if prefix.starts_with('W') { "norm " } else { "= " }).unwrap().1;
        after.split_whitespace().next().unwrap().parse().unwrap()
    };
    let norm = value("W(3,3)");
    let fubini = value("‖φ‖_p");
    assert!((norm - fubini).abs() / fubini < 1e-3, "{out}");
}

#[test]
fn output_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "output_dir = from_config\n").unwrap();
    let kernel = ["kernel", "--gamma", "3", "--x", "1", "--t", "0.5", "--config", "run.cfg"];
    cli(dir.path()).args(kernel).assert().success();
    assert!(dir.path().join("from_config/kernel.csv").exists());
    cli(dir.path()).args(kernel).env("DIRAC_AMALGAM_OUT", "from_env").assert().success();
    assert!(dir.path().join("from_env/kernel.csv").exists());
    cli(dir.path())
        .args(kernel)
        .args(["--out", "from_flag"])
        .env("DIRAC_AMALGAM_OUT", "from_env")
        .assert()
        .success();
    assert!(dir.path().join("from_flag/kernel.csv").exists());
}

#[test]
fn decay_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["decay", "--gamma", "2.5", "--rt", "16", "--r", "12", "--tmin", "2", "--tmax", "50", "--points", "8"];
    cli(dir.path()).args(args).args(["--out", "a"]).assert().code(0);
    let a = fs::read(dir.path().join("a/decay.csv")).unwrap();
    let text = String::from_utf8(a.clone()).unwrap();
    assert!(text.starts_with("gamma,rtilde,r,t,norm,predicted_exp,slope,verdict\n"));
    assert_eq!(text.lines().count(), 9);

    // The manifest is itself a valid configuration.
    let manifest = dir.path().join("a/decay.manifest");
    cli(dir.path())
        .args(args)
        .args(["--config", manifest.to_str().unwrap(), "--out", "b"])
        .assert()
        .code(0);
    let b = fs::read(dir.path().join("b/decay.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn decay_rejects_excluded_exponent_and_straddling_range() {
    let dir = tempfile::tempdir().unwrap();
    cli(dir.path())
        .args(["decay", "--gamma", "2.5", "--rt", "12", "--r", "8", "--tmin", "2", "--tmax", "50"])
        .assert()
        .code(1);
    cli(dir.path())
        .args(["decay", "--gamma", "2.5", "--rt", "16", "--r", "12", "--tmin", "0.1", "--tmax", "5"])
        .assert()
        .code(1);
}

#[test]
fn failed_verdict_exits_two() {
    // A residual threshold of zero cannot be met.
    let dir = tempfile::tempdir().unwrap();
    cli(dir.path())
        .args(["propagate", "--t", "1", "--set", "grid.n=16", "--set", "grid.box_length=16", "--set", "tol.residual_max=0"])
        .assert()
        .code(2);
}

#[test]
fn small_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = cli(dir.path())
        .args([
            "sweep", "--jmax", "1", "--tuple", "2,4,16,12,1.1",
            "--set", "grid.n=16", "--set", "grid.box_length=16", "--set", "horizon=1",
            "--set", "window.space_radius=4",
        ])
        .output()
        .unwrap();
    // On a coarse grid the verdict can go either way; only errors are excluded.
    assert!(matches!(status.status.code(), Some(0) | Some(2)), "{status:?}");
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(csv.starts_with("scale,qt,q,rt,r,sigma,mixed_norm,hsigma,ratio\n"));
    // 3 Gaussians, 2 modulated bumps, 2 random polarizations, 2 projections.
    assert_eq!(csv.lines().count(), 1 + 9);
}

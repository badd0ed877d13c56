use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sampled-sde"))
}

#[test]
fn check_jacobians_exit_codes() {
    for model in ["pendulum", "scalar-linear"] {
        let out = bin().args(["check-jacobians", model]).output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    }
    let out = bin().args(["check-jacobians", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[simulation]\nepsilon = -1\n").unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("simulation.epsilon") && err.contains("model.name"),
        "{err}"
    );

    let out = bin()
        .arg("run")
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));
}

#[test]
fn all_diverged_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    // the state overflows on the second step
    fs::write(
        &cfg,
        "n_paths = 4\n[model]\nname = \"scalar-linear\"\nparams = { a = 1e200, k = 0.0 }\n\
         [simulation]\nepsilon = 0.1\ndelta = 0.5\nhorizon = 2.0\ndt = 0.5\nx0 = [1.0]\n",
    )
    .unwrap();
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverge"));
}

#[test]
fn run_with_flags_then_refuse_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[model]\nname = \"pendulum\"\n[simulation]\nepsilon = 0.1\ndelta = 0.0625\nhorizon = 1.0\n\
         dt = 0.05\nx0 = [1.0, 0.0]\n[sweep]\nepsilons = [0.1, 0.05]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let run = |extra: &[&str]| {
        bin()
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args([
                "--paths",
                "8",
                "--seed",
                "4",
                "--threads",
                "2",
                "--grid-mode",
                "grid-snap",
            ])
            .args(extra)
            .output()
            .unwrap()
    };
    let first = run(&[]);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let summaries = fs::read_to_string(out_dir.join("summaries.csv")).unwrap();
    assert_eq!(summaries.lines().count(), 3);
    assert!(summaries.lines().nth(1).unwrap().contains(",8,"));

    let second = run(&[]);
    assert!(!second.status.success());
    assert!(String::from_utf8_lossy(&second.stderr).contains("--overwrite"));

    let third = run(&["--overwrite"]);
    assert!(third.status.success());
    assert_eq!(
        fs::read_to_string(out_dir.join("summaries.csv")).unwrap(),
        summaries
    );
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
}

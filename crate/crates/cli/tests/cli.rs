use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cscatter(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cscatter"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sharpness_config_passes_with_enough_rungs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sharp");
    let o = cscatter(
        &[
            "run",
            "--config",
            &config("sharpness.toml"),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("rung,bandwidth,tau_sup,jacobian_sup,input_error,feature_error,"));
    assert!(csv.lines().skip(1).count() >= 6);
    let svg = std::fs::read_to_string(out.join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"sharpness\"\n[grid\ndim = 1\n").unwrap();
    let o = cscatter(&["run", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&bad, "experiment = \"sharpness\"\nunknown_key = 3\n").unwrap();
    assert_eq!(
        cscatter(&["run", "--config", bad.to_str().unwrap()], dir.path())
            .status
            .code(),
        Some(2)
    );
    let o = cscatter(&["run", "--config", "does-not-exist.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(cscatter(&["run"], dir.path()).status.code(), Some(2));
}

#[test]
fn unnormalized_bank_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = cscatter(
        &["run", "--config", &config("inadmissible.toml")],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("admissible"), "{}", stderr(&o));
    let o = cscatter(
        &["bessel", "--config", &config("inadmissible.toml")],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let o = cscatter(
        &["bessel", "--config", &config("disc_stability.toml")],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 4);
}

#[test]
fn failing_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    let text = std::fs::read_to_string(config("sharpness.toml")).unwrap();
    std::fs::write(&cfg, format!("{text}\n[assertions]\nalpha_min = 0.6\n")).unwrap();
    let o = cscatter(
        &["run", "--config", cfg.to_str().unwrap(), "--out", "o"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL alpha"));
}

#[test]
fn smooth_subcommand_rejects_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ind.toml");
    let text = std::fs::read_to_string(config("sharpness.toml")).unwrap();
    std::fs::write(&cfg, text.replace("\"sharpness\"", "\"smooth\"")).unwrap();
    let o = cscatter(
        &["smooth", "--config", cfg.to_str().unwrap(), "--out", "o"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("smooth class"));
}

#[test]
fn builtin_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["sharpness", "--out", "a"],
        vec!["sharpness", "--counterexample", "--out", "b"],
        vec!["smooth", "--out", "c"],
        vec!["bandlimited", "--out", "d", "--sequential"],
        vec!["deform", "--config", &config("smooth.toml"), "--out", "e"],
    ] {
        let o = cscatter(&args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    for d in ["a", "b", "c", "d", "e"] {
        assert!(dir.path().join(d).join("results.csv").exists());
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("star_stability.toml");
    let mut csvs = Vec::new();
    for (out, extra) in [("r1", None), ("r2", None), ("r3", Some("--sequential"))] {
        let mut args = vec!["run", "--config", &cfg, "--out", out, "--seed", "5"];
        args.extend(extra);
        let o = cscatter(&args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        csvs.push(std::fs::read(dir.path().join(out).join("results.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);
}

#[test]
fn grid_refinement_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = cscatter(
        &["sharpness", "--grid-refine", "1", "--out", "fine"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn extract_lists_every_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = cscatter(
        &[
            "extract",
            "--config",
            &config("star_stability.toml"),
            "--out",
            "x",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("x/features.csv")).unwrap();
    // three random atoms, one of which becomes the output atom: 1 + 2 + 4
    assert_eq!(csv.lines().count(), 1 + 7);
    assert!(csv.lines().any(|l| l.starts_with("2,1/0,")));
}

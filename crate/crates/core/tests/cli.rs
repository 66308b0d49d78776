//! The compiled binary: exit codes, output formats, config files, and
//! golden values taken from library calls.

use std::process::{Command, Output};

use dyadic_bellman::cli::format_sig15;
use dyadic_bellman::extremizer::sharpness_report;
use dyadic_bellman::scalars::{bellman_three_on_surface, omega, RootConfig};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadic-bellman"))
        .args(args)
        .env_remove("DYADIC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn eval_matches_library() {
    let o = bin(&["eval", "omega", "--p", "3", "--tau", "0.4"]);
    assert_eq!(o.status.code(), Some(0));
    let expected = format!(
        "quantity,value\nomega,{}\n",
        format_sig15(omega(3.0, 0.4).unwrap())
    );
    assert_eq!(stdout(&o), expected);

    let o = bin(&[
        "eval", "bellman3", "--p", "2", "--q", "1.5", "--f", "1", "--A", "1.2", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lib = bellman_three_on_surface(2.0, 1.5, 1.0, 1.2).unwrap();
    assert!((v["value"].as_f64().unwrap() - lib).abs() <= 1e-14 * lib);
    assert_eq!(v["inputs"]["A"], 1.2);
}

#[test]
fn documented_examples() {
    assert_eq!(
        stdout(&bin(&["eval", "omega", "--p", "2", "--tau", "0.75"])),
        "quantity,value\nomega,1.5\n"
    );
    assert_eq!(
        stdout(&bin(&[
            "eval", "bellman2", "--p", "2", "--f", "1", "--F", "1"
        ])),
        "quantity,value\nbellman2,1\n"
    );
    let o = bin(&["eval", "bellman2", "--p", "2", "--f", "1", "--F", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&[
        "extremize",
        "--p",
        "2",
        "--q",
        "1.5",
        "--f",
        "1",
        "--A",
        "0.9",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("requires f^q < A"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify", "--samples", "0"][..],
        &["eval", "omega", "--p", "2"],
        &["eval", "omega", "--p", "0.5", "--tau", "0.5"],
        &["eval", "omega", "--p", "2", "--tau", "1.5"],
        &[
            "extremize",
            "--p",
            "2",
            "--q",
            "1.5",
            "--f",
            "1",
            "--A",
            "1.2",
            "--rank",
            "lots",
        ],
        &["verify", "--tree", "octagonal"],
        &["verify", "--betas", "0"],
        &["nonsense"],
    ] {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("nested.csv");
    let o = bin(&[
        "eval",
        "omega",
        "--p",
        "2",
        "--tau",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = bin(&[
        "eval",
        "omega",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_reports_totals() {
    let o = bin(&["verify", "--samples", "3", "--depth", "4", "--pq", "2:1.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("0 failures"));
    assert!(stdout(&o).starts_with("inequality,checks,failures"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "p = 2.0\ntau = 0.75\nformat = \"json\"\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = bin(&["eval", "omega", "--config", c]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"value\":1.5"));
    let o = bin(&[
        "eval", "omega", "--config", c, "--p", "3", "--format", "csv",
    ]);
    let expected = format_sig15(omega(3.0, 0.75).unwrap());
    assert_eq!(stdout(&o), format!("quantity,value\nomega,{expected}\n"));

    std::fs::write(&cfg, "p = 2.0\nunknown_key = 1\n").unwrap();
    assert_eq!(
        bin(&["eval", "omega", "--config", c]).status.code(),
        Some(2)
    );
}

#[test]
fn extremize_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sharp.csv");
    let svg_path = dir.path().join("plot/sharp.svg");
    let o = bin(&[
        "extremize",
        "--p",
        "2",
        "--q",
        "1.5",
        "--f",
        "1",
        "--A",
        "1.2",
        "--ks",
        "4,16,64",
        "--out",
        csv_path.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lib = sharpness_report(2.0, 1.5, 1.0, 1.2, &[4, 16, 64], &RootConfig::default()).unwrap();
    assert_eq!(csv, lib.to_csv_string().unwrap());
    assert!(csv.starts_with(
        "k,alpha,z,beta,gamma,F_alpha,MTp_integral,target_omega_q_pow_p_times_F,abs_err_z,abs_err_F,rank_M,tail_mass\n"
    ));
    assert!(std::fs::read_to_string(&svg_path)
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn out_dir_env_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dyadic-bellman"))
        .args(["sweep", "--q", "2", "--tau", "0.5", "--out", "sweep.csv"])
        .env("DYADIC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(text.starts_with("alpha,z,omega_q,gap,residual\n"));
    assert_eq!(text.lines().count(), 5);
}

use std::process::{Command, Output};

fn laplace_ci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laplace-ci"))
        .args(args)
        .env_remove("LAPLACE_CI_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn interval_exact() {
    let o = laplace_ci(&[
        "interval", "--n", "5", "--x", "2", "--alpha", "0.05", "--method", "exact",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("0.11811733"), "{out}");
    assert!(out.contains("0.77722167"), "{out}");
}

#[test]
fn interval_normal_at_zero_successes() {
    let o = laplace_ci(&[
        "interval", "--n", "5", "--x", "0", "--method", "normal", "--format", "csv",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert_eq!(
        row,
        "5,0,0.05,normal,0.00000000,0.00000000,,lower-degenerate-zero"
    );
}

#[test]
fn interval_json_has_applicability() {
    let o = laplace_ci(&[
        "interval",
        "--n",
        "1000",
        "--x",
        "500",
        "--method",
        "normal",
        "--format",
        "json",
        "--threshold",
        "10",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["applicability"]["conditions"].as_array().unwrap().len(),
        6
    );
    assert_eq!(v["applicability"]["rules"]["threshold"], "Ten");
}

#[test]
fn invalid_input_exits_2() {
    let o = laplace_ci(&["interval", "--n", "5", "--x", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("x must not exceed n"));
    for args in [
        &["interval", "--n", "5", "--x", "2", "--k", "1001"][..],
        &["interval", "--n", "5", "--x", "2", "--alpha", "0"],
        &["table", "--paper-table", "IX"],
        &[
            "interval", "--n", "5", "--x", "2", "--method", "normal", "--side", "upper",
        ],
        &["compare", "--method", "exact-numeric"],
    ] {
        assert_eq!(laplace_ci(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn resource_limit_exits_3() {
    let o = laplace_ci(&["interval", "--n", "5", "--x", "2", "--k", "4294967296"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn table_one_has_nine_rows() {
    let o = laplace_ci(&["table", "--paper-table", "I", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(
        lines[2],
        "5,1,0.04327,0.64123,-0.15061,0.55061,0.00505,0.71641"
    );
}

#[test]
fn table_seven_has_eight_decimal_pairs() {
    let o = laplace_ci(&["table", "--paper-table", "VII", "--format", "csv"]);
    let out = stdout(&o);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(
        lines[3].starts_with("5,2,0.11811733,0.11811733,"),
        "{}",
        lines[3]
    );
}

#[test]
fn compare_and_accuracy_run() {
    let o = laplace_ci(&[
        "compare",
        "--case",
        "5:3,1000:500",
        "--method",
        "normal",
        "--k",
        "65536",
        "--format",
        "markdown",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("| lower | 5 | 3 |"));
    let o = laplace_ci(&["accuracy", "--n", "3", "--k", "4096", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn output_is_deterministic() {
    let args = ["table", "--paper-table", "II", "--k", "65536"];
    assert_eq!(laplace_ci(&args).stdout, laplace_ci(&args).stdout);
}

#[test]
fn export_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n5.csv");
    let o = laplace_ci(&[
        "export",
        "--n",
        "5",
        "--alpha",
        "0.05",
        "--method",
        "exact",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<_> = text.lines().collect();
    assert_eq!(rows.len(), 7);
    assert!(
        rows[1].starts_with("5,0,0.05,exact-numeric,0.0042"),
        "{}",
        rows[1]
    );
    assert!(rows[1].ends_with(",1048576,"));
    assert!(dir.path().join("n5.csv.manifest.json").exists());

    let missing = dir.path().join("no/such/dir/out.csv");
    let o = laplace_ci(&["export", "--n", "2", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/dir"));

    let empty = dir.path().join("empty.csv");
    let o = laplace_ci(&["export", "--out", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!empty.exists());
}

#[test]
fn precision_environment_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_laplace-ci"))
        .args(["interval", "--n", "5", "--x", "2"])
        .env("LAPLACE_CI_PRECISION", "quad")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_laplace-ci"))
        .args([
            "interval", "--n", "5", "--x", "2", "--k", "1024", "--format", "json",
        ])
        .env("LAPLACE_CI_PRECISION", "extended:128")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["precision"], "extended:128");
}

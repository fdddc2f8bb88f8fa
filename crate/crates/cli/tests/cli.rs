use std::process::{Command, Output};

fn qindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qindex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn index_fig8_origin() {
    let o = qindex(&["index", "4_1", "0", "0", "--trunc", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("1 - 8*q - 9*q^2 + 18*q^3"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn index_negative_arguments() {
    let a = qindex(&[
        "--format", "machine", "index", "4_1", "-2", "1", "--trunc", "8",
    ]);
    let b = qindex(&[
        "--format", "machine", "index", "4_1", "2", "1", "--trunc", "8",
    ]);
    assert_eq!(a.status.code(), Some(0));
    let body = |s: String| s.split("body").nth(1).unwrap().to_string();
    assert_eq!(body(stdout(&a)), body(stdout(&b)));
}

#[test]
fn qmatrix_fig8_o1() {
    let o = qindex(&[
        "qmatrix",
        "4_1",
        "--builtin",
        "O1",
        "--window",
        "2",
        "--trunc",
        "121",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("prefactor: (1)/(-1 + q)"), "{s}");
    assert!(s.contains("[ 2 - q | -q^(1/2) ]"), "{s}");
    assert!(s.contains("[ q^(1/2) | q^-1 - 1 - q ]"), "{s}");
    assert!(s.contains("value: 2*q^-1 + 1"), "{s}");
}

#[test]
fn qmatrix_without_rational_solution_exits_two() {
    let o = qindex(&[
        "qmatrix",
        "m237",
        "--builtin",
        "z2",
        "--window",
        "3",
        "--trunc",
        "30",
        "--max-deg",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("status: no-reconstruction"));
}

#[test]
fn verify_lagrangian_five_two() {
    let o = qindex(&["verify", "--suite", "lagrangian", "--knot", "5_2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("status: pass"));
}

#[test]
fn verify_skips_inapplicable_knots() {
    let o = qindex(&[
        "--format", "machine", "verify", "--suite", "aj", "--trunc", "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("section aj 4_1"));
    assert!(!s.contains("5_2"));
    let o = qindex(&["verify", "--suite", "aj", "--knot", "m237"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["index"],
        vec!["frobnicate"],
        vec!["verify", "--suite", "nope"],
        vec!["index", "no_such_file.txt"],
        vec!["index", "4_1", "--trunc", "-3"],
        vec!["insert", "4_1", "z9"],
        vec!["insert", "4_1"],
        vec!["blocks", "--knot", "m237"],
        vec!["--threads", "0", "index", "4_1"],
    ] {
        let o = qindex(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(qindex(&["--help"]).status.code(), Some(0));
}

#[test]
fn machine_output_is_deterministic_across_threads() {
    let run = |t: &str| {
        stdout(&qindex(&[
            "--threads",
            t,
            "--format",
            "machine",
            "index",
            "5_2",
            "--window",
            "2",
            "--trunc",
            "10",
        ]))
    };
    let one = run("1");
    assert!(one.starts_with("qindex-machine 1\ncommand index\n"));
    assert!(one.ends_with("eof\n"));
    assert_eq!(one.matches("section I(").count(), 4);
    assert_eq!(one, run("4"));
    assert_eq!(one, run("4"));
}

#[test]
fn insert_builtin_and_expression_agree() {
    let a = qindex(&[
        "--format",
        "machine",
        "insert",
        "4_1",
        "--builtin",
        "O2",
        "--trunc",
        "8",
    ]);
    let b = qindex(&[
        "--format", "machine", "insert", "4_1", "z1^-1", "--trunc", "8",
    ]);
    let c = qindex(&["insert", "4_1", "--builtin", "O1", "--trunc", "8"]);
    assert_eq!(a.status.code(), Some(0));
    let tail = |s: String| s.split("section I_O").nth(1).unwrap().to_string();
    assert_eq!(tail(stdout(&a)), tail(stdout(&b)));
    assert!(stdout(&c)
        .contains("-3 + 15*q + 24*q^2 - 15*q^3 - 69*q^4 - 174*q^5 - 183*q^6 - 165*q^7 + O(q^8)"));
}

#[test]
fn lagrangian_expression_vanishes() {
    let o = qindex(&[
        "insert",
        "4_1",
        "z1^-1 + z1'' - 1",
        "--n",
        "1",
        "--np",
        "-1",
        "--trunc",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("I_O(1,-1):\n  O(q^10)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn guess_block_family() {
    let o = qindex(&[
        "guess", "--knot", "4_1", "--family", "block", "--alpha", "0", "--order", "2", "--xdeg",
        "6", "--udeg", "14", "--trunc", "60",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("matches-transcribed: true"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn guess_with_small_bounds_fails_verification() {
    let o = qindex(&[
        "guess", "--knot", "4_1", "--family", "row", "--order", "1", "--xdeg", "2", "--udeg", "4",
        "--trunc", "40",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("status: no-operator"));
}

#[test]
fn blocks_values_and_reflection() {
    let o = qindex(&[
        "blocks", "--knot", "4_1", "--alpha", "0", "--n", "0", "--trunc", "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("1 - q - 2*q^2 - 2*q^3 - 2*q^4 + q^6 + O(q^7)"),
        "{}",
        stdout(&o)
    );
    let inv = qindex(&[
        "blocks",
        "--knot",
        "4_1",
        "--alpha",
        "1",
        "--n",
        "2",
        "--inverse",
        "--trunc",
        "7",
    ]);
    let neg = qindex(&[
        "blocks",
        "--knot",
        "4_1",
        "--alpha",
        "1",
        "--n",
        "-2",
        "--inverse",
        "--trunc",
        "7",
    ]);
    assert_eq!(inv.status.code(), Some(0));
    assert_eq!(
        stdout(&inv)
            .split("h1")
            .nth(1)
            .map(|s| s.split_once('\n').unwrap().1.to_string()),
        stdout(&neg)
            .split("h1")
            .nth(1)
            .map(|s| s.split_once('\n').unwrap().1.to_string())
    );
}

#[test]
fn gluing_data_file() {
    let path = std::env::temp_dir().join(format!("qindex-cli-{}.txt", std::process::id()));
    std::fs::write(&path, qindex::nzdata::builtin("4_1").unwrap().to_text()).unwrap();
    let o = qindex(&["index", path.to_str().unwrap(), "0", "0", "--trunc", "4"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("1 - 8*q - 9*q^2 + 18*q^3 + O(q^4)"));
}

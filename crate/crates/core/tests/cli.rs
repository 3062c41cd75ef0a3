use std::process::{Command, Output};

use idnc::cli::{CsvRow, CSV_HEADER};

fn idnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idnc"))
        .args(args)
        .output()
        .expect("run idnc")
}

fn rows(out: &[u8]) -> Vec<CsvRow> {
    let text = std::str::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    lines.map(|l| CsvRow::parse(l).unwrap()).collect()
}

const SMALL: &[&str] = &["--receivers", "10", "--packets", "6", "--frames", "30"];

#[test]
fn sweep_emits_one_row_per_policy_and_point() {
    let mut args = SMALL.to_vec();
    args.extend(["--sweep", "erasure=0.1:0.1:0.4"]);
    let out = idnc(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 4 * 2 + 1);
    assert!(!text.contains('\r'));
    let r = rows(&out.stdout);
    let policies: Vec<_> = r.iter().map(|r| r.policy.to_string()).collect();
    assert_eq!(policies, ["mdd", "mdd", "mdd", "mdd", "sdd", "sdd", "sdd", "sdd"]);
    let ps: Vec<_> = r[..4].iter().map(|r| r.avg_erasure).collect();
    assert_eq!(ps, [0.1, 0.2, 0.3, 0.4]);
    // Summary goes to stderr when the CSV is on stdout.
    assert!(String::from_utf8_lossy(&out.stderr).contains("served"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let mut args = SMALL.to_vec();
    args.extend(["--seed", "42", "--sweep", "receivers=2:3:8"]);
    let (a, b) = (idnc(&args), idnc(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    args[7] = "43";
    assert_ne!(idnc(&args).stdout, a.stdout);
}

#[test]
fn served_fraction_grows_with_deadline() {
    let out = idnc(&[
        "--receivers",
        "20",
        "--packets",
        "10",
        "--frames",
        "60",
        "--sweep",
        "deadline=0:2:20",
    ]);
    assert!(out.status.success());
    let r = rows(&out.stdout);
    assert_eq!(r.len(), 11 * 2);
    for policy in r.chunks(11) {
        for pair in policy.windows(2) {
            assert!(pair[0].mean_served_fraction <= pair[1].mean_served_fraction);
            assert_eq!(pair[0].mean_sum_delay, pair[1].mean_sum_delay);
        }
    }
}

#[test]
fn output_file_receives_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut args = SMALL.to_vec();
    let p = path.to_str().unwrap();
    args.extend(["--policy", "sdd", "--output", p]);
    let out = idnc(&args);
    assert!(out.status.success());
    let r = rows(&std::fs::read(&path).unwrap());
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].frames, 30);
    assert!(String::from_utf8_lossy(&out.stdout).contains("sdd"));
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing/dir/out.csv");
    let mut args = SMALL.to_vec();
    args.extend(["--output", path.to_str().unwrap()]);
    let out = idnc(&args);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("out.csv"));
}

#[test]
fn usage_errors() {
    for bad in [
        &["--erasure", "1.5"][..],
        &["--frames", "0"],
        &["--bogus"],
        &["--policy", "fastest"],
        &["--sweep", "erasure=0.5:0.1:0.1"],
        &["--receivers", "10", "--packets", "10", "--policy", "mdd-exact"],
    ] {
        let out = idnc(bad);
        assert!(!out.status.success(), "{bad:?} accepted");
        assert!(!out.stderr.is_empty());
    }
    let out = idnc(&["--receivers", "10", "--packets", "10", "--policy", "sdd-exact"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("25 vertices"));
}

#[test]
fn exact_policy_runs_on_small_frames() {
    let out = idnc(&[
        "--receivers",
        "4",
        "--packets",
        "4",
        "--frames",
        "20",
        "--policy",
        "mdd,mdd-exact,sdd-exact",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&out.stdout).len(), 3);
}

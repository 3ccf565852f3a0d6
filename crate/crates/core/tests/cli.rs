mod common;

use std::io::Cursor;
use std::path::Path;

use common::*;
use sl::cli::{dispatch_with, Io, EXIT_DISTINGUISHED, EXIT_OK, EXIT_REJECT, EXIT_USAGE};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn sl(args: &[&str], stdin: &str) -> Run {
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut io = Io { input: &mut input, out: &mut out, err: &mut err };
    let code = dispatch_with(std::iter::once("sl").chain(args.iter().copied()), &mut io);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn corpus(rel: &str) -> String {
    corpus_dir().join(rel).to_string_lossy().into_owned()
}

#[test]
fn run_prints_one_line_per_instant() {
    let r = sl(&["run", &corpus("source/abro.sl"), "--inputs", &corpus("traces/abro.trace"), "--instants", "3"], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out.lines().count(), 3);
    assert_eq!(r.out.lines().nth(2), Some("I={b} O={o}"));
}

#[test]
fn non_reactive_program_is_rejected_with_its_cycle() {
    let r = sl(&["check-reactivity", &corpus("reject/await_loop.sl")], "");
    assert_eq!(r.code, EXIT_REJECT);
    assert!(r.out.contains("A > A"), "{}", r.out);
}

#[test]
fn remark_pair_is_distinguished_by_traces() {
    let r = sl(&["equiv", &corpus("tail/remark_left.slt"), &corpus("tail/remark_right.slt"), "--mode", "trace"], "");
    assert_eq!(r.code, EXIT_DISTINGUISHED);
    assert!(r.out.contains("I={s2}"), "{}", r.out);
    assert!(r.out.contains("left O={s3} right O={}"), "{}", r.out);
}

#[test]
fn identical_output_for_identical_input() {
    let args = ["run", &corpus("source/reactivity_ab.sl"), "--inputs", &corpus("traces/reactivity_ab.trace")];
    let a = sl(&args, "");
    assert_eq!(a.code, EXIT_OK, "{}", a.err);
    assert_eq!(a.out, sl(&args, "").out);
}

#[test]
fn random_scheduler_prints_its_seed() {
    let r = sl(&["--scheduler", "random", "run", &corpus("source/abro.sl"), "--instants", "2"], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let seed: u64 = r.err.trim().strip_prefix("seed: ").expect("seed line").parse().unwrap();
    let again = sl(&["--scheduler", "random", "--seed", &seed.to_string(), "run", &corpus("source/abro.sl"), "--instants", "2"], "");
    assert_eq!(again.out, r.out);
}

#[test]
fn step_reads_one_line_per_instant() {
    let r = sl(&["step", &corpus("source/abro.sl")], "a\nb\n");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let outputs: Vec<&str> = r.out.lines().filter(|l| l.starts_with("O=")).collect();
    assert_eq!(outputs, ["O={}", "O={o}"]);
    assert_eq!(r.out.lines().filter(|l| l.starts_with("residual: ")).count(), 2);
}

#[test]
fn json_reports_parse() {
    let r = sl(&["--format", "json", "check-bounded", &corpus("source/tick.sl")], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert!(v.is_object(), "{v}");
}

#[test]
fn cps_then_mealy_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let src = corpus("source/toggle.sl");
    assert_eq!(sl(&["cps", &src, "-o", &path("t.slt")], "").code, EXIT_OK);
    assert_eq!(sl(&["to-mealy", &path("t.slt"), "-o", &path("m.mealy")], "").code, EXIT_OK);
    assert_eq!(sl(&["from-mealy", &path("m.mealy"), "-o", &path("back.slt")], "").code, EXIT_OK);
    assert_eq!(sl(&["to-mealy", &path("back.slt"), "-o", &path("m2.mealy")], "").code, EXIT_OK);
    let r = sl(&["mealy-equiv", &path("m.mealy"), &path("m2.mealy")], "");
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    let r = sl(&["equiv", &src, &path("back.slt"), "--mode", "trace"], "");
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
}

#[test]
fn encoded_machine_runs_until_halt() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.sl");
    let r = sl(&["encode-cm", &corpus("machines/halting5.cm"), "-o", &out.to_string_lossy()], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(Path::new(&out).exists());
    let r = sl(&["--instants", "20", "run", &out.to_string_lossy()], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.lines().any(|l| l.contains("halt")), "{}", r.out);
}

#[test]
fn confluence_test_reports_no_violation() {
    let r = sl(&["confluence-test", &corpus("source/broadcast.sl")], "");
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(sl(&["run"], "").code, EXIT_USAGE);
    assert_eq!(sl(&["equiv", "a.sl", "b.sl", "--mode", "sideways"], "").code, EXIT_USAGE);
    assert_eq!(sl(&["--scheduler", "deterministic", "--seed", "3", "run", &corpus("source/abro.sl")], "").code, EXIT_USAGE);
}

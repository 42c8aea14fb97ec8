mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use countbmc::pnml::read_net_file;
use countbmc::report::RunReport;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn countbmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_countbmc"))
        .current_dir(root())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const UPS: &str = "models/ups/ups.pnml";

#[test]
fn row_one_is_sat_with_trace() {
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F(#x)p1(x)>p0(x)",
        "--kmax",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(10), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("SAT at k=3 (λ=2, κ=1)"), "{out}");
    assert!(out.contains("  s0 (0,0,0,0,0)  fires t0\n"));
    assert!(out.contains("  s2 (0,1,0,0,0)\n"));
}

#[test]
fn initially_violated_invariant_at_kmax_zero() {
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "G (#x>0)p0(x)",
        "--kmax",
        "0",
        "--mode",
        "refute",
    ]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).contains("SAT at k=0 (λ=0, κ=0)"));
}

#[test]
fn unsat_up_to_bound_exits_20() {
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F (t0 & t1 & t7)",
        "--kmax",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(20));
    assert!(stdout(&o).contains("UNSAT up to k=3"));
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F (t0 & t1 & t7)",
        "--kmax",
        "3",
        "--oracle",
    ]);
    assert_eq!(o.status.code(), Some(20));
}

#[test]
fn unknown_answer_is_inconclusive() {
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F t2",
        "--kmax",
        "4",
        "--solver",
        "sh -c 'cat >/dev/null; echo unknown'",
    ]);
    assert_eq!(o.status.code(), Some(30), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("INCONCLUSIVE at k=0 (λ=0, κ=0): solver unknown"),
        "{out}"
    );
    // remaining micro-steps are skipped
    assert_eq!(out.matches("λ=").count(), 2, "{out}");
}

#[test]
fn missing_solver_is_inconclusive_with_transcript() {
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F t2",
        "--kmax",
        "2",
        "--solver",
        "/nonexistent/solver",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(30));
    let r = RunReport::from_json(&stdout(&o)).unwrap();
    let v = serde_json::to_value(&r.verdict).unwrap();
    assert_eq!(v["status"], "crashed");
    assert!(v["transcript"]
        .as_str()
        .unwrap()
        .contains("/nonexistent/solver"));
}

#[test]
fn input_errors_exit_1_and_name_the_culprit() {
    let o = countbmc(&[
        "check",
        "--net",
        "nope.pnml",
        "--formula",
        "F t0",
        "--kmax",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.pnml"));

    let o = countbmc(&["check", "--net", UPS, "--formula", "F (t0 &", "--kmax", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--formula: column"), "{}", stderr(&o));

    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F (#x>0)p9(x)",
        "--kmax",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("unknown place `p9`") && err.contains("p0, p1"),
        "{err}"
    );

    let o = countbmc(&["check", "--net", UPS, "--formula", "F t0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--kmax"));

    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F t0",
        "--kmax",
        "1",
        "--jobs",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--jobs"));
}

#[test]
fn help_exits_zero() {
    let o = countbmc(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bench"));
}

#[test]
fn bench_matches_expectations() {
    for dir in ["models/ups", "models/aps"] {
        let expected = std::fs::read_to_string(root().join(dir).join("expected.txt")).unwrap();
        for extra in [&[][..], &["--oracle"][..], &["--jobs", "3"][..]] {
            let mut args = vec!["bench", "--dir", dir, "--kmax", "5"];
            args.extend_from_slice(extra);
            let o = countbmc(&args);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            assert_eq!(stdout(&o), expected, "{dir} {extra:?}");
        }
    }
    let ups = std::fs::read_to_string(root().join("models/ups/expected.txt")).unwrap();
    assert_eq!(
        ups.lines()
            .filter(|l| l.starts_with(char::is_numeric))
            .count(),
        5
    );
}

#[test]
fn bench_prefers_pnml_and_reports_bad_props() {
    let dir = tempfile::tempdir().unwrap();
    let ups = root().join(UPS);
    std::fs::copy(&ups, dir.path().join("n.pnml")).unwrap();
    std::fs::write(dir.path().join("n.net"), "garbage here\n").unwrap();
    std::fs::write(dir.path().join("n.props"), "F t0\n").unwrap();
    let d = dir.path().to_str().unwrap();
    let o = countbmc(&["bench", "--dir", d, "--kmax", "2", "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("(n.pnml)"));

    std::fs::write(dir.path().join("n.props"), "F t0\n@mode=maybe F t1\n").unwrap();
    let o = countbmc(&["bench", "--dir", d, "--kmax", "2", "--oracle"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n.props:2"), "{}", stderr(&o));
}

#[test]
fn json_report_matches_golden_and_round_trips() {
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F(#x)p1(x)>p0(x)",
        "--kmax",
        "5",
        "--oracle",
        "--omit-timings",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(10));
    let golden = std::fs::read_to_string(root().join("models/golden/ups_row1.json")).unwrap();
    assert_eq!(stdout(&o), golden);
    let r = RunReport::from_json(&golden).unwrap();
    assert_eq!(r.to_json(), golden);
}

#[test]
fn timed_json_round_trips() {
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "G F (#x>0)p1(x)",
        "--kmax",
        "4",
        "--json",
    ]);
    let r = RunReport::from_json(&stdout(&o)).unwrap();
    assert!(r.total_millis.is_some());
    assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    assert_eq!(o.status.code(), Some(r.exit_code()));
}

#[test]
fn formula_file_and_parallel_jobs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("row1.lc");
    std::fs::write(&f, "# row 1\nF(#x)p1(x)>p0(x)\n").unwrap();
    let fp = f.to_str().unwrap();
    let seq = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula-file",
        fp,
        "--kmax",
        "5",
        "--omit-timings",
        "--json",
    ]);
    let par = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula-file",
        fp,
        "--kmax",
        "5",
        "--omit-timings",
        "--json",
        "--jobs",
        "4",
    ]);
    assert_eq!(seq.status.code(), Some(10));
    let a = RunReport::from_json(&stdout(&seq)).unwrap();
    let b = RunReport::from_json(&stdout(&par)).unwrap();
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(
        a.trace.as_ref().unwrap().markings,
        b.trace.as_ref().unwrap().markings
    );
}

#[test]
fn convert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("aps.net");
    let back = dir.path().join("aps.pnml");
    let src = root().join("models/aps/aps.pnml");
    let o = countbmc(&[
        "convert",
        "--in",
        src.to_str().unwrap(),
        "--out",
        text.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = countbmc(&[
        "convert",
        "--in",
        text.to_str().unwrap(),
        "--out",
        back.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let original = read_net_file(&src).unwrap();
    assert!(read_net_file(&text).unwrap().structurally_eq(&original));
    assert!(read_net_file(&back).unwrap().structurally_eq(&original));
}

#[test]
fn emit_smt_writes_every_micro_step() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = countbmc(&[
        "check",
        "--net",
        UPS,
        "--formula",
        "F (t0 & t1 & t7)",
        "--kmax",
        "2",
        "--emit-smt",
        d,
    ]);
    assert_eq!(o.status.code(), Some(20));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "k0_lambda0_kappa0.smt2",
            "k1_lambda0_kappa1.smt2",
            "k1_lambda1_kappa0.smt2",
            "k2_lambda0_kappa2.smt2",
            "k2_lambda1_kappa1.smt2",
            "k2_lambda2_kappa0.smt2"
        ]
    );
}

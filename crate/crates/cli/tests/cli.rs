// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dift_core::simulator::ReportFile;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn dift<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_dift")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_fir_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = dift([
        "run".as_ref(),
        fixture("fir4.json").as_os_str(),
        fixture("fir4_inputs.json").as_os_str(),
        "--report".as_ref(),
        report.as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(10));
    assert_eq!(stdout(&o), "run: outputs=1 exceptions=1 irq=true steps=7 halted=false\n");
    let text = std::fs::read_to_string(&report).unwrap();
    let r = ReportFile::from_json(&text).unwrap();
    assert_eq!((r.outputs["y"].value, r.outputs["y"].tag), (45, 3));
    let keys = ["\"outputs\"", "\"exceptions\"", "\"irq\"", "\"steps\"", "\"mode\"", "\"rule\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn overflow_attack_exit_codes() {
    let k = fixture("overflow_demo.json");
    let attack = fixture("overflow_attack.json");
    let o = dift(["run".as_ref(), k.as_os_str(), attack.as_os_str()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("out-of-bounds"));
    let o = dift(["run".as_ref(), k.as_os_str(), attack.as_os_str(), "--on-exception".as_ref(), "halt".as_ref()]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).contains("halted=true"));
}

#[test]
fn optimize_flag_keeps_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (i, extra) in [None, Some("--optimize")].into_iter().enumerate() {
        let report = dir.path().join(format!("{i}.json"));
        let mut args = vec![
            "run".into(),
            fixture("dot8.json").into_os_string(),
            fixture("dot8_inputs.json").into_os_string(),
            "--rule".into(),
            "precise".into(),
            "--report".into(),
            report.clone().into_os_string(),
        ];
        args.extend(extra.map(Into::into));
        let o = dift(&args);
        assert_eq!(o.status.code(), Some(10));
        let r = ReportFile::from_json(&std::fs::read_to_string(&report).unwrap()).unwrap();
        reports.push((r.outputs, r.exceptions.len(), r.rule));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn malformed_kernel_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"k\",\n  \"tag_width\": 1,\n  \"inputs\": [oops]\n}\n").unwrap();
    let o = dift(["run".as_ref(), bad.as_os_str(), fixture("fir4_inputs.json").as_os_str()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    std::fs::write(&bad, r#"{"name":"k","tag_width":1,"outputs":[{"id":"o","source":"nowhere"}]}"#).unwrap();
    let o = dift(["instrument".as_ref(), bad.as_os_str(), "--emit-dot".as_ref(), dir.path().join("g.dot").as_os_str()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere"));
}

#[test]
fn bad_inputs_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in.json");
    std::fs::write(&inputs, r#"{"values":{"nope":1}}"#).unwrap();
    let o = dift(["run".as_ref(), fixture("fir4.json").as_os_str(), inputs.as_os_str()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(dift(["frobnicate"]).status.code(), Some(1));
    assert_eq!(dift(["run"]).status.code(), Some(1));
    assert_eq!(dift(["run", "a.json", "b.json", "--mode", "medium"]).status.code(), Some(1));
    let o = dift(["run".as_ref(), dir.path().join("missing.json").as_os_str(), inputs.as_os_str()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(dift(["--help"]).status.code(), Some(0));
}

#[test]
fn missing_inputs_warn() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in.json");
    std::fs::write(&inputs, r#"{"values":{"x0":1}}"#).unwrap();
    let o = dift(["run".as_ref(), fixture("fir4.json").as_os_str(), inputs.as_os_str()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stderr(&o).matches("warning").count(), 3);
}

#[test]
fn instrument_fir_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let o = dift(["instrument".as_ref(), fixture("fir4.json").as_os_str(), "--emit-dot".as_ref(), dot.as_os_str()]);
    assert_eq!(o.status.code(), Some(0));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/fir4_instrumented.dot");
    assert_eq!(std::fs::read_to_string(dot).unwrap(), std::fs::read_to_string(golden).unwrap());
}

#[test]
fn instrument_empty_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("empty.json");
    std::fs::write(&k, r#"{"name":"empty","tag_width":1}"#).unwrap();
    let dot = dir.path().join("g.dot");
    let o = dift(["instrument".as_ref(), k.as_os_str(), "--emit-dot".as_ref(), dot.as_os_str()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dot).unwrap();
    assert!(text.contains("\"monitor\""));
    assert!(!text.contains("-> \"monitor\""));
}

#[test]
fn check_fixtures() {
    for k in ["fir4.json", "dot8.json", "overflow_demo.json"] {
        let args: [std::ffi::OsString; 6] = ["check".into(), fixture(k).into_os_string(), "--samples".into(), "1000".into(), "--seed".into(), "3".into()];
        let o = dift(&args);
        assert_eq!(o.status.code(), Some(0), "{k}: {}", stdout(&o));
        let out = stdout(&o);
        assert_eq!(out.lines().count(), 4);
        assert!(out.ends_with("check: mismatches=0\n"));
        assert_eq!(out, stdout(&dift(&args)));
    }
}

#[test]
fn check_expectations() {
    let k = fixture("fir4.json");
    let run = |expect: &str| dift(["check".as_ref(), k.as_os_str(), "--samples".as_ref(), "20".as_ref(), "--expect".as_ref(), data(expect).as_os_str()]);
    let o = run("fir4_expect.json");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("expect: cases=3 mismatches=0"));
    let o = run("fir4_expect_mutant.json");
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("expect: cases=1 mismatches=1"));
    assert!(stdout(&o).ends_with("check: mismatches=1\n"));
}

#[test]
fn fuzz_fir() {
    let args: [std::ffi::OsString; 6] = ["fuzz".into(), fixture("fir4.json").into_os_string(), "--trials".into(), "500".into(), "--seed".into(), "2".into()];
    let o = dift(&args);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.matches("violations=0").count(), 5);
    assert_eq!(out, stdout(&dift(&args)));
}

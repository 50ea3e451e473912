// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use dift_core::kernel::{emit_dot, instrument, optimize, validate, Diagnostic, Kernel};
use dift_core::simulator::{check_consistency, fuzz_properties, run_dift, ReportFile, RunInputs};
use dift_core::{parse_kernel, DiftConfig, DiftMode, Error, OnException, PropagationRule};
use serde::Deserialize;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
/// Evaluation errors, and failed checks or properties.
pub const EXIT_EVAL: u8 = 3;
pub const EXIT_EXCEPTION: u8 = 10;

const MODES: [DiftMode; 3] = [
    DiftMode::Fine(PropagationRule::FineUnion),
    DiftMode::Fine(PropagationRule::FinePrecise),
    DiftMode::CoarseBoundary,
];

fn config_name(mode: DiftMode) -> String {
    match mode.rule() {
        Some(r) => format!("{}/{}", mode.name(), r.name()),
        None => mode.name().to_string(),
    }
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_USAGE
    })
}

fn write(path: &Path, text: &str) -> Result<(), u8> {
    fs::write(path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_USAGE
    })
}

fn report_diags(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", path.display());
    }
}

fn load_kernel(path: &Path) -> Result<Kernel, u8> {
    let k = parse_kernel(&read(path)?).map_err(|diags| {
        report_diags(path, &diags);
        EXIT_INVALID
    })?;
    report_diags(path, &validate(&k));
    Ok(k)
}

fn load_inputs(path: &Path, k: &Kernel) -> Result<RunInputs, u8> {
    let invalid = |e: Error| {
        eprintln!("{}: error: {e}", path.display());
        EXIT_INVALID
    };
    let inputs = RunInputs::from_json(&read(path)?).map_err(invalid)?;
    inputs.check(k).map_err(invalid)?;
    report_diags(path, &inputs.missing(k));
    Ok(inputs)
}

fn config(k: &Kernel, mode: DiftMode) -> DiftConfig {
    DiftConfig::new(k.tag_width, mode).expect("validated tag width")
}

fn status(r: Result<(), u8>) -> u8 {
    r.err().unwrap_or(EXIT_OK)
}

fn eval_failure(e: Error) -> u8 {
    eprintln!("error: {e}");
    if e.is_evaluation() {
        EXIT_EVAL
    } else {
        EXIT_INVALID
    }
}

pub fn cmd_run(
    kernel: &Path,
    inputs: &Path,
    mode: DiftMode,
    on_exception: OnException,
    optimize_first: bool,
    report: Option<&Path>,
) -> u8 {
    let go = || -> Result<u8, u8> {
        let mut k = load_kernel(kernel)?;
        let inputs = load_inputs(inputs, &k)?;
        if optimize_first {
            let (opt, diags) = optimize(&k);
            report_diags(kernel, &diags);
            k = opt;
        }
        let cfg = config(&k, mode).with_on_exception(on_exception);
        let r = run_dift(&k, &inputs, &cfg).map_err(eval_failure)?;
        if let Some(path) = report {
            write(path, &r.to_json())?;
        }
        println!(
            "run: outputs={} exceptions={} irq={} steps={} halted={}",
            r.outputs.len(),
            r.exceptions.len(),
            r.irq,
            r.steps_executed,
            r.halted
        );
        Ok(if r.exceptions.is_empty() { EXIT_OK } else { EXIT_EXCEPTION })
    };
    go().unwrap_or_else(|code| code)
}

pub fn cmd_instrument(kernel: &Path, dot: &Path, mode: DiftMode) -> u8 {
    status((|| {
        let k = load_kernel(kernel)?;
        let g = instrument(&k, &config(&k, mode));
        write(dot, &emit_dot(&g.graph))?;
        println!(
            "instrument: nodes={} edges={} monitor_inputs={}",
            g.graph.nodes.len(),
            g.graph.edges.len(),
            g.monitor_in_degree()
        );
        Ok(())
    })())
}

/// One expected run: the configuration comes from the report's `mode` and
/// `rule` fields.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectCase {
    inputs: RunInputs,
    report: ReportFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectFile {
    cases: Vec<ExpectCase>,
}

fn case_mode(r: &ReportFile) -> Option<DiftMode> {
    match (r.mode.as_str(), r.rule.as_str()) {
        ("fine", "union") => Some(MODES[0]),
        ("fine", "precise") => Some(MODES[1]),
        ("coarse", _) => Some(MODES[2]),
        _ => None,
    }
}

fn check_expectations(k: &Kernel, path: &Path) -> Result<usize, u8> {
    let file: ExpectFile = serde_json::from_str(&read(path)?).map_err(|e| {
        eprintln!("{}: error: {e}", path.display());
        EXIT_INVALID
    })?;
    let mut mismatches = 0;
    for (i, case) in file.cases.iter().enumerate() {
        let Some(mode) = case_mode(&case.report) else {
            eprintln!("{}: error: case {i}: unknown mode `{}`/`{}`", path.display(), case.report.mode, case.report.rule);
            return Err(EXIT_INVALID);
        };
        case.inputs.check(k).map_err(|e| {
            eprintln!("{}: error: case {i}: {e}", path.display());
            EXIT_INVALID
        })?;
        let got = run_dift(k, &case.inputs, &config(k, mode)).map_err(eval_failure)?.to_file();
        if got != case.report {
            mismatches += 1;
            eprintln!("case {i}: expected {}", serde_json::to_string(&case.report).unwrap());
            eprintln!("case {i}: got      {}", serde_json::to_string(&got).unwrap());
        }
    }
    println!("expect: cases={} mismatches={mismatches}", file.cases.len());
    Ok(mismatches)
}

pub fn cmd_check(kernel: &Path, samples: usize, seed: u64, expect: Option<&Path>) -> u8 {
    let go = || -> Result<u8, u8> {
        let k = load_kernel(kernel)?;
        let mut total = 0;
        for mode in MODES {
            let r = check_consistency(&k, &config(&k, mode), samples, seed).map_err(eval_failure)?;
            println!(
                "check {}: samples={} faulted={} mismatches={}",
                config_name(mode),
                r.samples,
                r.faulted,
                r.mismatches.len()
            );
            if let Some(m) = r.mismatches.first() {
                eprintln!("{}: {m}", config_name(mode));
                eprintln!("{}", m.inputs.to_json());
            }
            total += r.mismatches.len();
        }
        if let Some(path) = expect {
            total += check_expectations(&k, path)?;
        }
        println!("check: mismatches={total}");
        Ok(if total == 0 { EXIT_OK } else { EXIT_EVAL })
    };
    go().unwrap_or_else(|code| code)
}

pub fn cmd_fuzz(kernel: &Path, trials: usize, seed: u64, dir: Option<&Path>) -> u8 {
    let go = || -> Result<u8, u8> {
        let k = load_kernel(kernel)?;
        let r = fuzz_properties(&k, trials, seed).map_err(eval_failure)?;
        let mut violations = 0;
        for p in &r.properties {
            println!("property {}: checked={} violations={}", p.name, p.checked, p.violations);
            violations += p.violations;
            if let Some(cx) = &p.counterexample {
                println!("counterexample {} trial={}: {}", p.name, cx.trial, cx.detail);
                let json = cx.inputs.to_json();
                println!("{json}");
                if let Some(dir) = dir {
                    fs::create_dir_all(dir).map_err(|e| {
                        eprintln!("error: cannot create {}: {e}", dir.display());
                        EXIT_USAGE
                    })?;
                    write(&dir.join(format!("{}.json", p.name)), &(json + "\n"))?;
                }
            }
        }
        println!("fuzz: trials={} faulted={} violations={violations}", r.trials, r.faulted);
        Ok(if violations == 0 { EXIT_OK } else { EXIT_EVAL })
    };
    go().unwrap_or_else(|code| code)
}

use std::path::PathBuf;
use std::process::{Command, Output};

use cifc_udc::capacity::HiRegimeReport;
use cifc_udc::{ClassReport, Region2D};
use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn udc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udc")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn classify_reports_flags_and_evidence() {
    let v = json_of(&udc(&["classify", &fixture("degraded_z.json")]));
    let report: ClassReport = serde_json::from_value(v).unwrap();
    assert!(report.structure.is_z && report.structure.is_degraded && report.hi_regime.is_none());
    let v = json_of(&udc(&["classify", &fixture("relay_only.json"), "--hi-check", "--samples", "20"]));
    let hi: HiRegimeReport = serde_json::from_value(v["hi_regime"].clone()).unwrap();
    assert!(hi.is_falsified());
}

#[test]
fn inner_on_clean_channel_reaches_the_corner() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("inner.json");
    let out = udc(&["inner", &fixture("clean.json"), "--samples", "0", "--seed", "1", "--out", base.to_str().unwrap()]);
    let v = json_of(&out);
    let r = Region2D::from_json(&v.to_string()).unwrap();
    assert!(r.contains_point([0.999, 0.999], 1e-9));
    // the written document matches stdout and loads back
    let written = std::fs::read_to_string(&base).unwrap();
    assert_eq!(written.as_bytes(), out.stdout.as_slice());
    assert_eq!(Region2D::from_json(&written).unwrap(), r);
    let csv = std::fs::read_to_string(dir.path().join("inner.json.csv")).unwrap();
    assert_eq!(csv.lines().count(), r.vertices().len() + 1);
    let log = std::fs::read_to_string(dir.path().join("inner.json.log")).unwrap();
    assert_eq!(log.lines().count() as u64, v["distributions"].as_u64().unwrap() + 1);
}

#[test]
fn outer_carries_its_caveat() {
    let v = json_of(&udc(&["outer", &fixture("clean.json"), "--samples", "10", "--fan", "16", "--card-v12", "2"]));
    assert_eq!(v["caveat"]["card_v12"], 2);
    assert_eq!(v["caveat"]["samples"], 10);
    let r = Region2D::from_json(&v.to_string()).unwrap();
    assert!(r.contains_point([1.0, 1.0], 1e-9));
}

#[test]
fn capacity_subcommands() {
    let v = json_of(&udc(&["capacity", &fixture("degraded_z.json"), "--class", "degraded-z", "--samples", "20", "--fan", "16"]));
    assert_eq!(v["class"], "degraded-z");
    assert!(Region2D::from_json(&v.to_string()).unwrap().contains_point([1.0, 1.0], 1e-9));

    let v = json_of(&udc(&["capacity", &fixture("semidet_pair.json"), "--class", "semidet-hi", "--samples", "20", "--fan", "16"]));
    assert_eq!(v["hi_regime"]["status"], "no-violation-found");
    assert_eq!(v["drop_mismatches"], 0);

    let out = udc(&["capacity", &fixture("relay_only.json"), "--class", "semidet-hi", "--samples", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("HiRegimeFalsified"));
    let forced = udc(&["capacity", &fixture("relay_only.json"), "--class", "semidet-hi", "--samples", "20", "--force", "--fan", "8"]);
    assert_eq!(json_of(&forced)["hi_regime"]["status"], "falsified");
}

#[test]
fn domain_refusals_exit_one() {
    let out = udc(&["capacity", &fixture("clean.json"), "--class", "degraded-z"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotDegraded"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(udc(&["frobnicate", "x"]).status.code(), Some(2));
    assert_eq!(udc(&["inner"]).status.code(), Some(2));
    assert_eq!(udc(&["capacity", &fixture("clean.json"), "--class", "other"]).status.code(), Some(2));
    assert_eq!(udc(&["fm", &fixture("system.json"), "--keep", "r1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"x1\": ").unwrap();
    assert_eq!(udc(&["classify", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn fm_and_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let base: PathBuf = dir.path().join("fm.json");
    let v = json_of(&udc(&["fm", &fixture("system.json"), "--keep", "r1,r2", "--out", base.to_str().unwrap()]));
    let r = Region2D::from_json(&v.to_string()).unwrap();
    assert!(r.contains_point([2.0, 0.5], 1e-9) && !r.contains_point([2.0, 1.0], 1e-9));
    let cmp = json_of(&udc(&["compare", base.to_str().unwrap(), base.to_str().unwrap()]));
    assert_eq!(cmp["a_contains_b"], true);
    assert_eq!(cmp["b_contains_a"], true);
    assert_eq!(cmp["hausdorff"], 0.0);
}

#[test]
fn command_line_overrides_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sampler\nsamples = 7\nfan = 8\ncard_v12 = 3\n").unwrap();
    let v = json_of(&udc(&["outer", &fixture("clean.json"), "--config", cfg.to_str().unwrap(), "--samples", "3"]));
    assert_eq!(v["caveat"]["samples"], 3);
    assert_eq!(v["caveat"]["fan"], 8);
    assert_eq!(v["caveat"]["card_v12"], 3);
    std::fs::write(&cfg, "samples 7\n").unwrap();
    assert_eq!(udc(&["outer", &fixture("clean.json"), "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

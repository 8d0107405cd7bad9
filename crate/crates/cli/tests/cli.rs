use std::path::Path;
use std::process::Command;

use ppw_cli::{exit_code, main_with_runner, CliError, RunOutput, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_VIOLATION};
use ppw_core::verify::InequalityReport;
use proptest::prelude::*;

fn ppw(args: &[&str]) -> (i32, String, String) {
    ppw_env(args, &[])
}

fn ppw_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ppw"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn ppw");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn round_sphere_spectrum_json() {
    let (code, stdout, _) = ppw(&["spectrum", "--model", "round-sphere", "--dim", "3", "--count", "30"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 30);
    let pairs: Vec<(f64, u64)> =
        entries.iter().take(4).map(|e| (e["eigenvalue"].as_f64().unwrap(), e["multiplicity"].as_u64().unwrap())).collect();
    assert_eq!(pairs, vec![(0.0, 1), (3.0, 4), (8.0, 9), (15.0, 16)]);
}

#[test]
fn verify_thm1_on_cosine() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("thm1.csv");
    let (code, stdout, _) =
        ppw(&["verify", "--theorem", "thm1", "--family", "cos", "--eps", "0.3", "--dim", "3", "--kmax", "5", "--out", p(&csv)]);
    assert_eq!(code, 0, "{stdout}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,k,lhs,rhs,margin,satisfied");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn sweep_is_complete_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec!["sweep", "--theorem", "thm1", "--family", "cos", "--eps", "0:0.5:0.1", "--kmax", "5", "--quiet", "--out"]
            .into_iter()
            .map(String::from)
            .chain(std::iter::once(out.display().to_string()))
            .collect::<Vec<_>>()
    };
    let aa = args(&a);
    let (code, _, err) = ppw_env(&aa.iter().map(String::as_str).collect::<Vec<_>>(), &[("PPW_THREADS", "1")]);
    assert_eq!(code, 0, "{err}");
    let bb = args(&b);
    let (code, _, _) = ppw_env(&bb.iter().map(String::as_str).collect::<Vec<_>>(), &[("PPW_THREADS", "3")]);
    assert_eq!(code, 0);
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().count(), 31);
    assert!(text.lines().nth(1).unwrap().starts_with("thm1@eps=0,1,"));
    assert!(text.lines().last().unwrap().starts_with("thm1@eps=0.5,5,"));
}

#[test]
fn invalid_configurations_exit_3() {
    for args in [
        vec!["verify", "--dim", "9"],
        vec!["verify", "--kmax", "0"],
        vec!["verify", "--theorem", "dirichlet"],
        vec!["verify", "--eps", "0:1:0.5", "--family", "cos"],
        vec!["verify", "--no-such-flag"],
        vec!["sweep", "--model", "box"],
        vec!["verify", "--family", "tabulated"],
        vec!["degenerate", "--balls", "1"],
    ] {
        let (code, _, err) = ppw(&args);
        assert_eq!(code, EXIT_CONFIG, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
    let (code, _, _) = ppw_env(&["verify"], &[("PPW_THREADS", "zero")]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn help_exits_zero() {
    let (code, stdout, _) = ppw(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sweep"));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let csv = dir.path().join("out.csv");
    std::fs::write(&conf, format!("command = verify\nfamily = cos\neps = 0.2\nkmax = 3\nquiet = true\nout = {}\n", csv.display()))
        .unwrap();
    let (code, stdout, err) = ppw(&["--config", p(&conf)]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);
    std::fs::write(&conf, "kmax\n").unwrap();
    assert_eq!(ppw(&["verify", "--config", p(&conf)]).0, EXIT_CONFIG);
}

#[test]
fn dirichlet_models() {
    let (code, stdout, _) = ppw(&["verify", "--model", "ball", "--dim", "2", "--theorem", "dirichlet", "--kmax", "50", "--quiet"]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let (code, stdout, _) = ppw(&["degenerate", "--balls", "4", "--dim", "2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("degeneration_sharp"));
}

#[test]
fn balance_from_csv_and_random() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("mu.csv");
    std::fs::write(&m, "x0,x1,x2,weight\n0,0,1,1\n0,0,-1,1\n1,0,0,2\n-1,0,0,2\n").unwrap();
    let json = dir.path().join("b.json");
    let (code, _, err) = ppw(&["balance", "--measure", p(&m), "--json", p(&json)]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let xi: Vec<f64> = v["payload"]["xi"]["coords"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(xi.iter().all(|x| x.abs() < 1e-10), "{xi:?}");

    std::fs::write(&m, "x0,x1,x2,weight\n0,0,1,3\n1,0,0,1\n").unwrap();
    assert_eq!(ppw(&["balance", "--measure", p(&m)]).0, EXIT_CONFIG);

    let (code, _, _) = ppw(&["balance", "--points", "200", "--seed", "9", "--json", p(&json)]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["metadata"]["seeds"], serde_json::json!([9]));
}

#[test]
fn sobolev_records_its_seed() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("s.json");
    let (code, _, err) = ppw(&["sobolev", "--family", "cos", "--eps", "0.3", "--tests", "5", "--seed", "11", "--quiet", "--json", p(&json)]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["metadata"]["seeds"], serde_json::json!([11]));
    assert_eq!(v["summary"]["violations"], 0);
    assert!(v["reports"].as_array().unwrap().len() >= 20);
}

fn report(margin: f64) -> InequalityReport {
    InequalityReport::new("stub", Some(1), 0.0, margin)
}

fn stub_code(result: Result<RunOutput, CliError>) -> i32 {
    let cell = std::sync::Mutex::new(Some(result));
    main_with_runner(vec!["ppw".into(), "verify".into(), "--quiet".into()], |_| cell.lock().unwrap().take().unwrap())
}

#[test]
fn injected_failures_map_to_exit_codes() {
    let ok = RunOutput { reports: vec![report(1.0)], ..Default::default() };
    assert_eq!(stub_code(Ok(ok)), EXIT_OK);
    let bad = RunOutput { reports: vec![report(1.0), report(-1.0)], ..Default::default() };
    assert_eq!(stub_code(Ok(bad)), EXIT_VIOLATION);
    let informational = RunOutput { reports: vec![report(-1.0).informational()], ..Default::default() };
    assert_eq!(stub_code(Ok(informational)), EXIT_OK);
    let numerical = ppw_core::Error::Numerical { what: "stub".into(), residual: 1.0 };
    assert_eq!(stub_code(Err(numerical.into())), EXIT_NUMERICAL);
    let stalled = ppw_core::Error::NonConvergence { what: "stub".into(), best: vec![], residual: 1.0, iterations: 200 };
    assert_eq!(stub_code(Err(stalled.into())), EXIT_NUMERICAL);
    assert_eq!(stub_code(Err(ppw_core::Error::domain("stub").into())), EXIT_CONFIG);
    assert_eq!(stub_code(Err(CliError::config("stub"))), EXIT_CONFIG);
}

proptest! {
    #[test]
    fn exit_code_is_one_iff_some_margin_is_below_tolerance(margins in proptest::collection::vec(-10.0f64..10.0, 0..12)) {
        let reports: Vec<InequalityReport> = margins.iter().map(|&m| report(m)).collect();
        let violated = reports.iter().any(|r| r.margin < -r.tol);
        let code = exit_code(&Ok(RunOutput { reports, ..Default::default() }));
        prop_assert_eq!(code, if violated { EXIT_VIOLATION } else { EXIT_OK });
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use supcert::cli::{run, EXIT_DATA, EXIT_HYPOTHESIS, EXIT_NON_POWER_LOG, EXIT_OK};

const MIXED: &str = "domain N 10 upper 1e10 balanced 0
term coeff 1 0 alpha 0 beta -1/1 gamma 1 unit identity
term coeff 1e-10 0 alpha 0 beta 1/1 gamma 0 unit identity
";

const NEG: &str = "# two decaying terms
domain N 10 upper inf balanced 0
term coeff 1 0 alpha 0 beta -1/1 gamma 1 unit identity
term coeff -2 0 alpha 0 beta -2/1 gamma 0 unit tail 1:1e-4
";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["supcert"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn sup_json_has_the_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mixed.sum", MIXED);
    let (code, out, _) = call(&["sup", f.to_str().unwrap(), "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in [
        "range",
        "witnesses",
        "score",
        "dominant",
        "c_lower",
        "c_upper",
        "c_total",
        "confidence",
        "checks",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let score = v["score"].as_f64().unwrap();
    let best = v["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["value"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(score, best);
}

#[test]
fn same_seed_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "neg.sum", NEG);
    let a = call(&["sup", f.to_str().unwrap(), "--json", "--seed", "7"]);
    let b = call(&["sup", f.to_str().unwrap(), "--json", "--seed", "7"]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
}

#[test]
fn verify_passes_on_valid_sums() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("mixed.sum", MIXED), ("neg.sum", NEG)] {
        let f = write(dir.path(), name, text);
        let (code, out, err) = call(&["verify", f.to_str().unwrap(), "--json"]);
        assert_eq!(code, EXIT_OK, "{name}: {err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pass"], true);
        assert!(v["ratio"].as_f64().unwrap() <= v["c_total"].as_f64().unwrap());
    }
}

#[test]
fn plot_file_has_header_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "neg.sum", NEG);
    let plot = dir.path().join("plot.csv");
    let (code, _, _) = call(&["sup", f.to_str().unwrap(), "--emit-plot", plot.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(plot).unwrap();
    assert!(text.lines().count() > supcert::cli::PLOT_POINTS);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unbounded = write(
        dir.path(),
        "up.sum",
        "domain N 10 upper inf balanced 0\nterm coeff 1 0 alpha 0 beta 1/1 gamma 0 unit identity\n",
    );
    assert_eq!(call(&["sup", unbounded.to_str().unwrap()]).0, EXIT_HYPOTHESIS);

    let broken = write(
        dir.path(),
        "broken.sum",
        "domain N 10 upper inf balanced 0\nterm coeff x\n",
    );
    let (code, _, err) = call(&["sup", broken.to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("line 2"), "{err}");

    let osc = write(
        dir.path(),
        "osc.sum",
        "domain N 10 upper 1e200 balanced 0\nterm coeff 1 0 alpha 3 beta 0/1 gamma 0 unit identity\n",
    );
    assert_eq!(call(&["witnesses", osc.to_str().unwrap()]).0, EXIT_HYPOTHESIS);
    assert_eq!(
        call(&["sup", dir.path().join("missing.sum").to_str().unwrap()]).0,
        EXIT_DATA
    );
    assert_eq!(call(&["frobnicate"]).0, EXIT_DATA);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn asymptote_reports_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let mut sq = String::from("x,v\n");
    let mut eps = String::from("eps,v\n");
    for k in 0..40 {
        let x = 10f64.powf(2.0 + k as f64 / 4.0);
        sq.push_str(&format!("{x},{}\n", 3.0 * x * x));
        let e = 1.0 / x;
        eps.push_str(&format!("{e},{}\n", e * e.ln().powi(2)));
    }
    let f = write(dir.path(), "sq.csv", &sq);
    let (code, out, _) = call(&["asymptote", f.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("r=2 l=0"), "{out}");

    let f = write(dir.path(), "eps.csv", &eps);
    let (code, out, _) = call(&["asymptote", f.to_str().unwrap(), "--direction", "eps", "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["r_exact"], "1/1");
    assert_eq!(v["l"], 2);
}

#[test]
fn binary_propagates_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x,v\n");
    for k in 2..=10 {
        let x = 10f64.powi(k);
        text.push_str(&format!("{x},{}\n", x * x.ln().ln()));
    }
    let f = write(dir.path(), "ll.csv", &text);
    let out = Command::new(env!("CARGO_BIN_EXE_supcert"))
        .arg("asymptote")
        .arg(&f)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NON_POWER_LOG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-power-log"));
}

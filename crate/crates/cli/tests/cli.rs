use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use bfree::family::BFamily;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn bfree(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bfree")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let (code, out) = bfree(args);
    assert_eq!(code, 0, "{out}");
    serde_json::from_str(&out).unwrap()
}

fn family_arg(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

fn squarefree(n: i64) -> bool {
    let n = n.unsigned_abs();
    if n == 0 {
        return false;
    }
    (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0)
}

#[test]
fn eta_on_the_even_numbers() {
    let (code, out) = bfree(&["eta", "--family", &family_arg("b2.toml"), "--range", "-2..2"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "0 1 0 1 0");
}

#[test]
fn eta_matches_trial_division_for_squarefree() {
    let (code, out) = bfree(&["eta", "--family", &family_arg("sqfree.toml"), "--range", "47..51"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "1 0 0 0 1");
    let (_, out) = bfree(&["eta", "--family", &family_arg("sqfree.toml"), "--range", "-40..200"]);
    let expected: Vec<&str> = (-40..=200).map(|n| if squarefree(n) { "1" } else { "0" }).collect();
    assert_eq!(out.trim(), expected.join(" "));
}

#[test]
fn json_and_toml_specs_agree() {
    let (_, a) = bfree(&["eta", "--family", &family_arg("twop.toml"), "--range", "-30..30"]);
    let (_, b) = bfree(&["eta", "--family", &family_arg("twop.json"), "--range", "-30..30"]);
    assert_eq!(a, b);
}

#[test]
fn eta_csv_lists_every_position() {
    let (code, out) = bfree(&["eta", "--family", &family_arg("b2.toml"), "--range", "0..3", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 5, "{out}");
}

#[test]
fn malformed_spec_exits_2() {
    for f in ["malformed.toml", "not_primitive.toml", "missing.toml"] {
        let (code, out) = bfree(&["eta", "--family", &family_arg(f), "--range", "0..3"]);
        assert_eq!(code, 2, "{f}");
        let diag: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(diag["error"], "usage");
        assert_eq!(diag["exit_code"], 2);
    }
}

#[test]
fn bad_arguments_exit_2() {
    let (code, _) = bfree(&["eta", "--family", &family_arg("b2.toml"), "--range", "5..1"]);
    assert_eq!(code, 2);
    let (code, _) = bfree(&["structure", "--family", &family_arg("b2.toml"), "--tolerance", "-1/2"]);
    assert_eq!(code, 2);
}

#[test]
fn computational_limits_exit_1() {
    // 2^100 is past the factorization ceiling
    let far = "1267650600228229401496703205376..1267650600228229401496703205380";
    for range in [far, "0..200000000"] {
        let (code, out) = bfree(&["eta", "--family", &family_arg("sqfree.toml"), "--range", range]);
        assert_eq!(code, 1, "{out}");
        let diag: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(diag["error"], "ceiling_exceeded");
    }
}

#[test]
fn structure_of_twice_odd_primes() {
    let v = run_json(&["structure", "--family", &family_arg("twop.toml"), "--truncation", "100"]);
    let r = &v["result"];
    assert_eq!(r["a_inf"], serde_json::json!([2]));
    assert_eq!(r["b_star"], serde_json::json!([2]));
    assert_eq!(r["proximal"], false);
    assert_eq!(r["regularity"], "Regular");
}

#[test]
fn structure_of_squares() {
    let v = run_json(&["structure", "--family", &family_arg("sqfree.toml"), "--truncation", "100"]);
    let r = &v["result"];
    assert_eq!(r["a_inf"], serde_json::json!([1]));
    assert_eq!(r["b_star"], serde_json::json!([1]));
    assert_eq!(r["proximal"], true);
}

#[test]
fn structure_of_a_finite_family() {
    let v = run_json(&["structure", "--family", &family_arg("finite.toml")]);
    let r = &v["result"];
    assert_eq!(r["a_inf"], serde_json::json!([]));
    assert_eq!(r["b_star"], serde_json::json!([6, 10, 15]));
    assert_eq!(r["regularity"], "Regular");
    assert_eq!(r["taut"]["exact"], true);
}

#[test]
fn reports_carry_provenance() {
    let v = run_json(&["structure", "--family", &family_arg("b2.toml"), "--seed", "7"]);
    assert_eq!(v["tool"], "bfree");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["family"]["hash"].as_str().unwrap().len(), 64);
    for key in ["factor", "sieve", "enumeration", "recursion_budget", "witness_scan"] {
        assert!(v["ceilings"].get(key).is_some(), "{key}");
    }
    let w = run_json(&["structure", "--family", &family_arg("b2.json")]);
    assert_eq!(v["family"]["hash"], w["family"]["hash"]);
}

#[test]
fn measure_terms_are_exact_zeros_for_twice_odd_primes() {
    let v = run_json(&["measure", "--family", &family_arg("twop.toml"), "--filtration", "10,30"]);
    let terms = v["result"]["boundary"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    let last = &terms[1]["term"];
    assert_eq!((last["num"].as_str(), last["den"].as_str()), (Some("0"), Some("1")));
    assert_eq!(v["result"]["regularity"], "Regular");
}

#[test]
fn measure_brackets_a_block_of_squarefree() {
    let v = run_json(&[
        "measure",
        "--family",
        &family_arg("sqfree.toml"),
        "--filtration",
        "30",
        "--block",
        "1",
    ]);
    let m = &v["result"]["mirsky"];
    let (lo, hi) = (m["lower"]["approx"].as_f64().unwrap(), m["upper"]["approx"].as_f64().unwrap());
    let density = 6.0 / std::f64::consts::PI.powi(2);
    assert!(lo <= density && density <= hi, "{lo} {density} {hi}");
}

#[test]
fn witness_realizes_three_zeros() {
    let v = run_json(&[
        "witness",
        "--family",
        &family_arg("sqfree.toml"),
        "--anchor",
        "0",
        "--radius",
        "1",
        "--flips",
        "-1,1",
    ]);
    let r = &v["result"];
    assert_eq!(r["pattern"], "000");
    assert_eq!(r["verified"], true);
    assert_eq!(r["witness"]["kind"]["kind"], "integer");
    let m: i64 = r["witness"]["kind"]["m"].as_i64().unwrap();
    assert!((m - 1..=m + 1).all(|k| !squarefree(k)), "{m}");
}

#[test]
fn finite_family_languages_coincide() {
    let v = run_json(&["blocks", "--family", &family_arg("finite.toml"), "--radius", "2", "--mode", "both"]);
    assert_eq!(v["result"]["identical"], true);
    // every residue mod 30 occurs, so the language is the set of windows of one period
    let mut oracle = std::collections::BTreeSet::new();
    for c in 0..30i64 {
        let w: String = (c - 2..=c + 2)
            .map(|n| if [6, 10, 15].iter().any(|b| n % b == 0) { '0' } else { '1' })
            .collect();
        oracle.insert(w);
    }
    let eta: std::collections::BTreeSet<String> =
        serde_json::from_value(v["result"]["eta"].clone()).unwrap();
    assert_eq!(eta, oracle);
}

#[test]
fn toeplitz_csv_for_twice_odd_primes() {
    let (code, out) = bfree(&[
        "toeplitz",
        "--family",
        &family_arg("twop.toml"),
        "--positions",
        "-2..2",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "position,value,period,kind,detail");
    for (row, i) in rows[1..].iter().zip(-2i64..) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], i.to_string());
        assert_eq!(cols[1], if i % 2 == 0 { "0" } else { "1" });
        assert_eq!(cols[2], "2");
    }
}

#[test]
fn diagnose_is_reproducible_under_a_seed() {
    let args = ["diagnose", "--family", &family_arg("mixed.toml"), "--truncation", "100", "--seed", "11"];
    let a = run_json(&args);
    let b = run_json(&args);
    assert_eq!(a, b);
    let checks = a["result"]["a_inf_spot_checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["holds"] == true));
    assert_eq!(a["result"]["coprime_certificates"]["audited"], true);
}

#[test]
fn spec_round_trip_is_identity() {
    for name in ["b2.toml", "finite.toml", "sqfree.toml", "twop.toml", "mixed.toml"] {
        let text = fs::read_to_string(data(name)).unwrap();
        let fam: BFamily = toml::from_str(&text).unwrap();
        let again: BFamily = toml::from_str(&toml::to_string(&fam).unwrap()).unwrap();
        assert_eq!(fam, again, "{name}");
        let json = serde_json::to_string(&fam).unwrap();
        let back: BFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(fam, back, "{name}");
        assert_eq!(serde_json::to_string(&back).unwrap(), json, "{name}");
    }
}

/// Compares a report with its checked-in copy; `BFREE_BLESS=1` rewrites it.
fn golden(name: &str, args: &[&str]) {
    let (code, out) = bfree(args);
    assert_eq!(code, 0, "{out}");
    let mut v: Value = serde_json::from_str(&out).unwrap();
    v["version"] = Value::Null;
    let text = serde_json::to_string_pretty(&v).unwrap() + "\n";
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("BFREE_BLESS").is_some() {
        fs::write(&path, &text).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap();
    assert_eq!(text, expected, "golden {name} drifted; rerun with BFREE_BLESS=1 if intended");
}

#[test]
fn golden_structure_reports() {
    golden("structure_finite.json", &["structure", "--family", &family_arg("finite.toml")]);
    golden(
        "structure_twop.json",
        &["structure", "--family", &family_arg("twop.toml"), "--truncation", "100"],
    );
}

#[test]
fn golden_witness_report() {
    golden(
        "witness_sqfree.json",
        &[
            "witness",
            "--family",
            &family_arg("sqfree.toml"),
            "--anchor",
            "0",
            "--radius",
            "1",
            "--flips",
            "-1,1",
        ],
    );
}

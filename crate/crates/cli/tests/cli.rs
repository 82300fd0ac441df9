use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn mcras(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcras")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn plan_totals() {
    let v = json(&mcras(&["plan", "--kind", "scaled", "--c", "1", "--epsilon", "0.1", "--delta", "0.05", "--output", "json"]));
    assert_eq!(v["plan"]["group_size"], 125);
    assert_eq!(v["plan"]["num_groups"], 27);
    assert_eq!(v["plan"]["total"], 3375);
    let v = json(&mcras(&["plan", "--kind", "mom", "--c", "1", "--epsilon", "0.1", "--delta", "0.05", "--output", "json"]));
    assert_eq!(v["plan"]["total"], 7200);
    let lc = v["result"]["leading_constant"].as_f64().unwrap();
    assert!((lc - 7200.0 * 0.01 / (1.0f64 / 0.05).ln()).abs() < 1e-9);
}

#[test]
fn plan_text_output() {
    let out = mcras(&["plan", "--kind", "scaled", "--c", "1", "--epsilon", "0.1", "--delta", "0.05"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("total=3375"), "{text}");
}

#[test]
fn domain_and_usage_errors_exit_2() {
    let out = mcras(&["plan", "--kind", "scaled", "--c", "1", "--epsilon", "0.4", "--delta", "0.05"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    assert_eq!(mcras(&["plan", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(mcras(&["plan", "--kind", "fancy", "--c", "1", "--epsilon", "0.1", "--delta", "0.1"]).status.code(), Some(2));
    assert_eq!(mcras(&["plan", "--c", "1", "--epsilon", "0.1"]).status.code(), Some(2));
    assert_eq!(
        mcras(&["estimate", "--distribution", "weibull:2", "--epsilon", "0.1", "--delta", "0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(mcras(&["plan", "--config", "/nonexistent/mcras.toml"]).status.code(), Some(2));
}

#[test]
fn estimate_constant_source_is_contained() {
    for seed in ["0", "1", "99"] {
        let v = json(&mcras(&[
            "estimate", "--kind", "scaled", "--distribution", "constant:7", "--c", "1", "--epsilon", "0.1", "--delta", "0.05",
            "--seed", seed, "--output", "json",
        ]));
        let est = v["result"]["estimate"].as_f64().unwrap();
        assert!((6.3..=7.7).contains(&est), "{est}");
    }
}

#[test]
fn estimate_draws_match_plan() {
    for kind in ["mean", "mom", "scaled"] {
        let common = ["--kind", kind, "--c", "1", "--epsilon", "0.1", "--delta", "0.05", "--output", "json"];
        let plan = json(&mcras(&[&["plan"][..], &common[..]].concat()));
        let est = json(&mcras(&[&["estimate", "--distribution", "exponential:1"][..], &common[..]].concat()));
        assert_eq!(est["result"]["draws_consumed"], plan["plan"]["total"], "{kind}");
        assert_eq!(est["plan"], plan["plan"]);
    }
}

#[test]
fn estimate_is_reproducible() {
    let args = ["estimate", "--distribution", "exponential:1", "--epsilon", "0.1", "--delta", "0.05", "--seed", "7", "--output", "json"];
    let a = mcras(&args);
    let b = mcras(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    for key in ["plan", "config", "result", "seed", "version"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["seed"], 7);
}

#[test]
fn simulate_is_byte_identical() {
    for format in ["json", "csv"] {
        let args = [
            "simulate", "--kind", "scaled", "--distribution", "exponential:1", "--epsilon", "0.1", "--delta", "0.25",
            "--trials", "200", "--seed", "2024", "--output", format,
        ];
        let a = mcras(&args);
        let b = mcras(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn simulate_csv_columns() {
    let out = mcras(&[
        "simulate", "--distribution", "exponential:1", "--epsilon", "0.1", "--delta", "0.25", "--trials", "5", "--output", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "trial_index,estimate,rel_error,failed");
    assert_eq!(lines.len(), 6);
    for (i, line) in lines[1..].iter().enumerate() {
        let cols: Vec<_> = line.split(',').collect();
        assert_eq!(cols[0], i.to_string());
        assert!(cols[3] == "0" || cols[3] == "1");
    }
}

#[test]
fn simulate_report_fields() {
    let v = json(&mcras(&[
        "simulate", "--kind", "mom", "--distribution", "exponential:1", "--epsilon", "0.1", "--delta", "0.25", "--trials", "100",
        "--output", "json",
    ]));
    let r = &v["result"];
    assert_eq!(r["trials"], 100);
    assert_eq!(r["total_draws_per_trial"], 4000);
    assert!(r.get("wall_time").is_none());
    assert!(r["cp99_upper"].as_f64().unwrap() >= r["empirical_rate"].as_f64().unwrap());
}

#[test]
fn verify_lemmas_pass_and_negative_control() {
    let out = mcras(&["verify-lemmas"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.contains("6.952119") && text.contains("19.354560"), "{text}");

    let out = mcras(&["verify-lemmas", "--inflate-alpha", "2", "--epsilon-grid", "0.05,0.1,0.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL h_min_upper"));

    let out = mcras(&["verify-lemmas", "--epsilon-grid", "0.1,0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_lemmas_json() {
    let out = mcras(&["verify-lemmas", "--epsilon-grid", "0.1,0.2", "--output", "json"]);
    let v = json(&out);
    assert_eq!(v["result"]["passed"], true);
    assert!((v["result"]["constants"]["scaled"].as_f64().unwrap() - 6.952_118_993_564_416).abs() < 1e-12);
    assert!((v["result"]["constants"]["median_of_means"].as_f64().unwrap() - 19.354_559_945_065_5).abs() < 1e-9);
    assert_eq!(v["config"]["epsilon_grid"].as_array().unwrap().len(), 2);
    assert!(v["plan"].is_null());
}

#[test]
fn config_file_with_flag_override() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "kind = \"mom\"\nc = 1.0\nepsilon = 0.1\ndelta = 0.05\noutput = \"json\"").unwrap();
    let path = file.path().to_str().unwrap();
    let v = json(&mcras(&["plan", "--config", path]));
    assert_eq!(v["plan"]["total"], 7200);
    let v = json(&mcras(&["plan", "--config", path, "--kind", "scaled"]));
    assert_eq!(v["plan"]["total"], 3375);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "epsilonn = 0.1").unwrap();
    assert_eq!(mcras(&["plan", "--config", bad.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_config_section() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "[verify]\nepsilon_grid = [0.1]\nmedian_p_grid = [0.45]").unwrap();
    let out = mcras(&["verify-lemmas", "--config", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL median_tail_bound"));
}

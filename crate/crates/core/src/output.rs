//! Structured output: JSON envelopes with 17-significant-digit reals, and per-trial CSV.
//!
//! Every JSON document has the same top-level fields: `plan`, `config`, `result`, `seed`
//! and `version`. Fields that do not apply are `null`. Object keys are emitted in sorted
//! order and non-finite reals as `null`, so equal inputs give byte-identical output.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number, Value};

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, TrialReport};
use crate::plan::SamplingPlan;
use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Parse(format!("unknown output format '{other}' (expected json or csv)"))),
        }
    }
}

/// `x` with 17 significant digits, trailing zeros removed, as C's `%.17g` prints it.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_number(out: &mut String, n: &Number) {
    if let Some(u) = n.as_u64() {
        write!(out, "{u}").unwrap();
    } else if let Some(i) = n.as_i64() {
        write!(out, "{i}").unwrap();
    } else {
        let x = n.as_f64().unwrap_or(f64::NAN);
        if x.is_finite() {
            out.push_str(&format_real(x));
        } else {
            out.push_str("null");
        }
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', 2 * n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (i, key) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty-printed JSON with [`format_real`] reals and sorted keys, ending in a newline.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

pub fn to_value<S: Serialize>(x: &S) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Parse(e.to_string()))
}

/// `{plan, config, result, seed, version}`.
pub fn envelope(plan: Option<&SamplingPlan>, config: Value, result: Value, seed: Option<u64>) -> Result<Value> {
    let plan = match plan {
        Some(p) => to_value(p)?,
        None => Value::Null,
    };
    Ok(json!({
        "plan": plan,
        "config": config,
        "result": result,
        "seed": seed,
        "version": VERSION,
    }))
}

pub fn experiment_config_value(config: &ExperimentConfig, format: OutputFormat) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), json!(config.kind.short_name()));
    m.insert("epsilon".into(), json!(config.accuracy.epsilon()));
    m.insert("delta".into(), json!(config.accuracy.delta()));
    m.insert("c".into(), json!(config.c.get()));
    m.insert("distribution".into(), json!(config.distribution.to_string()));
    m.insert("trials".into(), json!(config.trials));
    m.insert("master_seed".into(), json!(config.master_seed));
    m.insert("output".into(), to_value(&format).unwrap_or(Value::Null));
    Value::Object(m)
}

pub const TRIAL_CSV_HEADER: [&str; 4] = ["trial_index", "estimate", "rel_error", "failed"];

/// One row per trial; `failed` is written as 0 or 1.
pub fn write_trials_csv<W: io::Write>(out: W, trials: &[TrialReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_CSV_HEADER)?;
    for t in trials {
        w.write_record([
            t.trial_index.to_string(),
            format_real(t.estimate),
            format_real(t.rel_error),
            u8::from(t.failed).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.1), "0.10000000000000001");
        assert_eq!(format_real(1.0), "1");
        assert_eq!(format_real(3375.0), "3375");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(6.952118993564416), "6.9521189935644161");
        assert_eq!(format_real(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_real(1.5e20), "1.5e+20");
        assert_eq!(format_real(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_real(0.0001), "0.0001");
        assert_eq!(format_real(0.0), "0");
    }

    #[test]
    fn round_trips_exactly() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e300, 5e-324, 123456789.12345679, -7.25e-12] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_layout_is_stable() {
        let v = json!({"b": [1, 0.5], "a": {"x": null, "y": true}, "c": "q\"", "d": []});
        let s = to_json_string(&v);
        assert_eq!(
            s,
            "{\n  \"a\": {\n    \"x\": null,\n    \"y\": true\n  },\n  \"b\": [\n    1,\n    0.5\n  ],\n  \"c\": \"q\\\"\",\n  \"d\": []\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn non_finite_becomes_null() {
        let v = to_value(&[f64::NAN, 1.0]).unwrap();
        assert_eq!(to_json_string(&v), "[\n  null,\n  1\n]\n");
    }

    #[test]
    fn envelope_fields() {
        let plan = SamplingPlan::new(crate::EstimatorKind::ScaledMedian, 125, 27).unwrap();
        let v = envelope(Some(&plan), json!({}), json!(1), Some(7)).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["config", "plan", "result", "seed", "version"]);
        assert_eq!(v["plan"]["total"], 3375);
    }

    #[test]
    fn csv_columns() {
        let trials = [
            TrialReport { trial_index: 0, estimate: 1.05, rel_error: 0.05, failed: false },
            TrialReport { trial_index: 1, estimate: 0.8, rel_error: -0.2, failed: true },
        ];
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &trials).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "trial_index,estimate,rel_error,failed");
        assert_eq!(lines[2], "1,0.80000000000000004,-0.20000000000000001,1");
    }
}

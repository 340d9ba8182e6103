//! Report envelopes and deterministic number formatting.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::estimation::ScalingTable;

pub const TOOL: &str = "sldlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Every report carries the tool version, the seed and the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: Option<ExperimentConfig>,
    pub result: T,
}

impl<T> Report<T> {
    pub fn new(command: &str, seed: u64, config: Option<ExperimentConfig>, result: T) -> Self {
        Self { tool: TOOL.into(), version: VERSION.into(), command: command.into(), seed, config, result }
    }
}

/// x rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded; LF line endings and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", round_sig(x))
    }
}

pub const CSV_HEADER: &str = "n,f_classical,f_quantum,bound,delta_x_empirical";

/// Fixed column order; uninformative rows carry `inf` bounds and `nan` uncertainties.
pub fn scaling_csv(table: &ScalingTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let bound = r.bound.unwrap_or(f64::INFINITY);
        let dx = r.delta_x_empirical.unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            csv_number(r.f_classical),
            csv_number(r.f_quantum),
            csv_number(bound),
            csv_number(dx)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::ScalingRow;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-2.0000000000004), -2.0);
        assert_eq!(round_sig(0.0), 0.0);
        let s = to_json(&serde_json::json!({"a": [0.30000000000000004, 1u64], "b": {"c": 2.5e-17}})).unwrap();
        assert!(s.contains("0.3") && !s.contains("0.30000000000000004") && s.ends_with('\n'));
    }

    #[test]
    fn csv_layout() {
        let t = ScalingTable {
            x_true: 0.0,
            shots: 1,
            trials: 0,
            rows: vec![
                ScalingRow { n: 1, f_classical: 1.0, f_quantum: 1.0, bound: Some(0.01), delta_x_empirical: Some(0.0101), degenerate: false },
                ScalingRow { n: 2, f_classical: 0.0, f_quantum: 2.0, bound: None, delta_x_empirical: None, degenerate: true },
            ],
        };
        assert_eq!(scaling_csv(&t), "n,f_classical,f_quantum,bound,delta_x_empirical\n1,1,1,0.01,0.0101\n2,0,2,inf,nan\n");
    }
}

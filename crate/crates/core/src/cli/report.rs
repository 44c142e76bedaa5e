//! JSON report with stable key order and 9-significant-digit floats.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::Error;

use super::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    /// Input path → `sha256:<hex>` digest of the file bytes.
    pub inputs: BTreeMap<String, String>,
    pub results: BTreeMap<String, Value>,
    pub schema_version: &'static str,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            inputs: BTreeMap::new(),
            results: BTreeMap::new(),
            schema_version: SCHEMA_VERSION,
        }
    }

    pub fn input(&mut self, path: impl Into<String>, digest: String) {
        self.inputs.insert(path.into(), digest);
    }

    pub fn number(&mut self, key: &str, x: f64) -> Result<(), CliError> {
        let v = number(key, x)?;
        self.results.insert(key.to_owned(), v);
        Ok(())
    }

    pub fn numbers(&mut self, key: &str, xs: &[f64]) -> Result<(), CliError> {
        let v = xs.iter().map(|&x| number(key, x)).collect::<Result<Vec<_>, _>>()?;
        self.results.insert(key.to_owned(), Value::Array(v));
        Ok(())
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.to_owned(), v.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

/// Rounds to 9 significant digits; non-finite values are a numerical failure.
pub fn round_significant(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    Some(rounded + 0.0)
}

fn number(key: &str, x: f64) -> Result<Value, CliError> {
    round_significant(x)
        .and_then(serde_json::Number::from_f64)
        .map(Value::Number)
        .ok_or_else(|| {
            CliError::Compute(Error::Numerical {
                step: 0,
                detail: format!("result {key} is not finite ({x})"),
            })
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn rounding() {
        assert_eq!(round_significant(std::f64::consts::LN_2), Some(0.693147181));
        assert_eq!(round_significant(-0.0), Some(0.0));
        assert_eq!(round_significant(1234567890123.0), Some(1234567890000.0));
        assert_eq!(round_significant(f64::NAN), None);
    }

    #[test]
    fn layout_is_stable() {
        let mut r = Report::new("demo");
        r.number("b", 0.1 + 0.2).unwrap();
        r.value("a", true);
        assert_eq!(
            r.to_json(),
            "{\n  \"command\": \"demo\",\n  \"inputs\": {},\n  \"results\": {\n    \"a\": true,\n    \"b\": 0.3\n  },\n  \"schema_version\": \"1\"\n}\n"
        );
        assert!(r.number("c", f64::INFINITY).is_err());
    }
}

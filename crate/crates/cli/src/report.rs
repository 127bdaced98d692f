//! Machine-readable reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// JSON has no infinities or NaN; those are written as strings.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| {
            Value::String(if x.is_nan() {
                "nan".into()
            } else if x > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            })
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    /// `|value - target| <= tol * max(1, |target|)`.
    Eq,
    /// `value <= target + tol`.
    Le,
    /// `value >= target - tol`.
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub op: Op,
    pub target: Value,
    pub tol: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn check(op: Op, value: f64, target: f64, tol: f64) -> Assertion {
        let pass = match op {
            Op::Eq => (value - target).abs() <= tol * target.abs().max(1.0),
            Op::Le => value <= target + tol,
            Op::Ge => value >= target - tol,
        };
        Assertion {
            op,
            target: num(target),
            tol,
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Item {
    pub name: String,
    pub value: Value,
    pub flags: Vec<String>,
    #[serde(rename = "assert", skip_serializing_if = "Option::is_none")]
    pub assertion: Option<Assertion>,
}

impl Item {
    pub fn new(name: impl Into<String>, value: Value) -> Item {
        Item {
            name: name.into(),
            value,
            flags: Vec::new(),
            assertion: None,
        }
    }

    pub fn number(name: impl Into<String>, value: f64) -> Item {
        Item::new(name, num(value))
    }

    pub fn count(name: impl Into<String>, value: usize) -> Item {
        Item::new(name, Value::from(value))
    }

    pub fn flag(mut self, flag: &str, on: bool) -> Item {
        if on {
            self.flags.push(flag.to_string());
        }
        self
    }

    pub fn assert(mut self, op: Op, target: f64, tol: f64) -> Item {
        let value = match &self.value {
            Value::Number(v) => v.as_f64().unwrap_or(f64::NAN),
            Value::String(s) if s == "inf" => f64::INFINITY,
            _ => f64::NAN,
        };
        self.assertion = Some(Assertion::check(op, value, target, tol));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub results: Vec<Item>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            params: BTreeMap::new(),
            results: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: Value) {
        self.params.insert(key.to_string(), value);
    }

    pub fn push(&mut self, item: Item) {
        self.results.push(item);
    }

    /// Every assertion in the report passed.
    pub fn all_pass(&self) -> bool {
        self.results
            .iter()
            .all(|r| r.assertion.as_ref().is_none_or(|a| a.pass))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One line per result, for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let value = match &r.value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{}: {}", r.name, value));
            if !r.flags.is_empty() {
                out.push_str(&format!(" [{}]", r.flags.join(", ")));
            }
            if let Some(a) = &r.assertion {
                out.push_str(if a.pass { " PASS" } else { " FAIL" });
            }
            out.push('\n');
        }
        out
    }
}

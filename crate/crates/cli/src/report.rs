use std::collections::BTreeMap;

use griffiths_core::griffiths_forms::{residual_string, StructureReport};
use griffiths_core::Scalar;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: String,
}

/// Machine-readable outcome of one command. Contains nothing that varies
/// between runs with the same inputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_string(),
            summary: None,
            details: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, residual: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            residual: residual.into(),
        });
    }

    /// Passes when `value` vanishes; the residual is the value itself.
    pub fn check_zero<T: Scalar>(&mut self, name: impl Into<String>, value: &T) {
        let pass = value.is_negligible(1e-10);
        self.check(name, pass, residual_string(&value.abs()));
    }

    pub fn extend(&mut self, rep: &StructureReport) {
        for (name, outcome) in &rep.checks {
            self.check(name.clone(), outcome.pass, outcome.residual.clone());
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("serializable detail");
        self.details.insert(key.to_string(), v);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }
}

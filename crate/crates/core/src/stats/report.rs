//! Verification reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// A check passing iff `|observed - target| <= tol`. NaN never passes.
    pub fn new(name: impl Into<String>, observed: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            observed,
            target,
            tol,
            pass: (observed - target).abs() <= tol,
        }
    }

    pub fn recomputed_pass(&self) -> bool {
        (self.observed - self.target).abs() <= self.tol
    }
}

/// Outcome of one verification experiment.
///
/// JSON layout: `{"experiment", "config", "checks": [...], "distances", "counts"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub config: Map<String, Value>,
    pub checks: Vec<Check>,
    pub distances: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
}

impl VerificationReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        VerificationReport {
            experiment: experiment.into(),
            config: Map::new(),
            checks: Vec::new(),
            distances: BTreeMap::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn set_config(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.config.insert(key.to_owned(), v);
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Whether every stored `pass` flag agrees with its stored numbers.
    pub fn is_consistent(&self) -> bool {
        self.checks.iter().all(|c| c.pass == c.recomputed_pass())
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: VerificationReport = serde_json::from_str(s)?;
        if !r.is_consistent() {
            return Err(Error::Format("report pass flags disagree with stored values".into()));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(Check::new("a", 1.05, 1.0, 0.1).pass);
        assert!(!Check::new("a", 1.2, 1.0, 0.1).pass);
        assert!(Check::new("a", 0.0, 0.0, 0.0).pass);
        assert!(!Check::new("a", f64::NAN, 0.0, 1.0).pass);
    }

    #[test]
    fn json_round_trip_and_schema() {
        let mut r = VerificationReport::new("demo");
        r.set_config("n", 10);
        r.push(Check::new("mean", 0.5, 0.5, 0.1));
        r.distances.insert("ks".into(), 0.01);
        r.counts.insert("samples".into(), 3);
        let s = r.to_json_pretty().unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["checks", "config", "counts", "distances", "experiment"]);
        let c = &v["checks"][0];
        for k in ["name", "observed", "target", "tol", "pass"] {
            assert!(c.get(k).is_some(), "{k}");
        }
        assert_eq!(VerificationReport::from_json(&s).unwrap(), r);
    }

    #[test]
    fn tampered_flag_is_rejected() {
        let mut r = VerificationReport::new("demo");
        r.push(Check::new("x", 2.0, 0.0, 1.0));
        r.checks[0].pass = true;
        assert!(!r.is_consistent());
        assert!(VerificationReport::from_json(&r.to_json_pretty().unwrap()).is_err());
    }
}

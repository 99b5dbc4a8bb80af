//! Problem-definition files.
//!
//! A configuration is a JSON object; see the crate README (or
//! `fracsens --help`) for the schema. Validation walks the raw JSON value so
//! every error names the offending entry by its JSON pointer, and unknown
//! keys are rejected.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::problem::{CaputoProfile, ExprRhs, HistoryData, Mesh, MeshKind, Order, Problem};
use crate::volterra::{Corrector, SolverOptions};

/// Smallest and largest accepted mesh sizes (both powers of two).
pub const MIN_N: usize = 1 << 6;
pub const MAX_N: usize = 1 << 16;

/// Variable name of the history-derivative expression.
pub const LW_VAR: &str = "xi";

/// Encoding of ℓ_w on [0, t].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HistoryInput {
    /// Expression in `xi`, sampled on `cells` equal cells and joined linearly.
    Expr { expr: String, cells: usize },
    /// `values[i]` on (breaks[i], breaks[i+1]]; breaks run from 0 to t.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshChoice {
    Uniform,
    Graded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectorChoice {
    Newton,
    FixedPoint,
}

/// A validated problem definition with all defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub t: f64,
    pub w0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lw: Option<HistoryInput>,
    pub f: String,
    pub growth_gamma: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub mesh: MeshChoice,
    pub grading: f64,
    pub corrector: CorrectorChoice,
    #[serde(rename = "M_margin")]
    pub m_margin: f64,
    /// Exact solution x(τ) as an expression in `tau`, if known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

const KEYS: &[&str] = &[
    "alpha", "T", "t", "w0", "lw", "f", "growth_gamma", "N", "mesh", "grading", "corrector", "M_margin", "exact", "seed",
];

fn err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { pointer: pointer.into(), message: message.into() }
}

fn child(pointer: &str, key: &str) -> String {
    format!("{pointer}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], pointer: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(child(pointer, k), format!("unknown key `{k}`"))),
        None => Ok(()),
    }
}

fn number(obj: &Map<String, Value>, key: &str, pointer: &str) -> Result<Option<f64>> {
    let p = child(pointer, key);
    match obj.get(key) {
        None => Ok(None),
        Some(v) => match v.as_f64() {
            Some(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(err(p, "expected a finite number")),
        },
    }
}

fn required_number(obj: &Map<String, Value>, key: &str, pointer: &str) -> Result<f64> {
    number(obj, key, pointer)?.ok_or_else(|| err(child(pointer, key), "missing required number"))
}

fn string<'a>(obj: &'a Map<String, Value>, key: &str, pointer: &str) -> Result<Option<&'a str>> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(err(child(pointer, key), "expected a string")),
    }
}

fn unsigned(obj: &Map<String, Value>, key: &str, pointer: &str) -> Result<Option<u64>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| err(child(pointer, key), "expected a nonnegative integer")),
    }
}

fn number_array(obj: &Map<String, Value>, key: &str, pointer: &str) -> Result<Vec<f64>> {
    let p = child(pointer, key);
    let arr = obj.get(key).ok_or_else(|| err(&p, "missing required array"))?;
    let arr = arr.as_array().ok_or_else(|| err(&p, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| err(format!("{p}/{i}"), "expected a finite number")))
        .collect()
}

fn parse_history(v: &Value, t: f64, pointer: &str) -> Result<HistoryInput> {
    let obj = v.as_object().ok_or_else(|| err(pointer, "expected an object"))?;
    let kind = string(obj, "kind", pointer)?.ok_or_else(|| err(child(pointer, "kind"), "missing required string"))?;
    match kind {
        "expr" => {
            reject_unknown(obj, &["kind", "expr", "cells"], pointer)?;
            let expr =
                string(obj, "expr", pointer)?.ok_or_else(|| err(child(pointer, "expr"), "missing required string"))?;
            Expression::parse(expr, &[LW_VAR]).map_err(|e| err(child(pointer, "expr"), e.to_string()))?;
            let cells = unsigned(obj, "cells", pointer)?.unwrap_or(256);
            if cells == 0 {
                return Err(err(child(pointer, "cells"), "must be positive"));
            }
            Ok(HistoryInput::Expr { expr: expr.to_string(), cells: cells as usize })
        }
        "piecewise" => {
            reject_unknown(obj, &["kind", "breaks", "values"], pointer)?;
            let breaks = number_array(obj, "breaks", pointer)?;
            let values = number_array(obj, "values", pointer)?;
            let bp = child(pointer, "breaks");
            if values.is_empty() || breaks.len() != values.len() + 1 {
                return Err(err(bp, "needs exactly one more break than values (and at least one value)"));
            }
            if breaks[0] != 0.0 || *breaks.last().unwrap() != t {
                return Err(err(bp, format!("breaks must start at 0 and end at t = {t}")));
            }
            if let Some(i) = breaks.windows(2).position(|w| w[1] <= w[0]) {
                return Err(err(format!("{bp}/{}", i + 1), "breaks must be strictly increasing"));
            }
            Ok(HistoryInput::Piecewise { breaks, values })
        }
        other => Err(err(child(pointer, "kind"), format!("unknown kind `{other}` (expected `expr` or `piecewise`)"))),
    }
}

impl ProblemConfig {
    /// Validates a JSON value against the schema.
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| err("", "configuration must be a JSON object"))?;
        reject_unknown(obj, KEYS, "")?;
        let alpha = required_number(obj, "alpha", "")?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(err("/alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        let horizon = required_number(obj, "T", "")?;
        if !(horizon > 0.0) {
            return Err(err("/T", format!("must be positive, got {horizon}")));
        }
        let t = required_number(obj, "t", "")?;
        if !(t >= 0.0 && t < horizon) {
            return Err(err("/t", format!("must satisfy 0 <= t < T, got {t}")));
        }
        let w0 = required_number(obj, "w0", "")?;
        let lw = match (obj.get("lw"), t == 0.0) {
            (None, true) | (Some(Value::Null), true) => None,
            (None, false) => return Err(err("/lw", "required when t > 0")),
            (Some(_), true) => return Err(err("/lw", "must be omitted when t = 0")),
            (Some(v), false) => Some(parse_history(v, t, "/lw")?),
        };
        let f = string(obj, "f", "")?.ok_or_else(|| err("/f", "missing required string"))?;
        ExprRhs::parse(f).map_err(|e| err("/f", e.to_string()))?;
        let growth_gamma = required_number(obj, "growth_gamma", "")?;
        if growth_gamma < 0.0 {
            return Err(err("/growth_gamma", "must be nonnegative"));
        }
        let n = unsigned(obj, "N", "")?.ok_or_else(|| err("/N", "missing required integer"))?;
        if !(n as usize).is_power_of_two() || (n as usize) < MIN_N || (n as usize) > MAX_N {
            return Err(err("/N", format!("must be a power of two between {MIN_N} and {MAX_N}, got {n}")));
        }
        let mesh = match string(obj, "mesh", "")? {
            None | Some("uniform") => MeshChoice::Uniform,
            Some("graded") => MeshChoice::Graded,
            Some(other) => return Err(err("/mesh", format!("expected `uniform` or `graded`, got `{other}`"))),
        };
        let grading = number(obj, "grading", "")?.unwrap_or(match mesh {
            MeshChoice::Uniform => 1.0,
            MeshChoice::Graded => 2.0,
        });
        if mesh == MeshChoice::Uniform && grading != 1.0 {
            return Err(err("/grading", "only meaningful for a graded mesh"));
        }
        if !(grading >= 1.0) {
            return Err(err("/grading", format!("must be >= 1, got {grading}")));
        }
        let corrector = match string(obj, "corrector", "")? {
            None | Some("newton") => CorrectorChoice::Newton,
            Some("fixed-point") => CorrectorChoice::FixedPoint,
            Some(other) => return Err(err("/corrector", format!("expected `newton` or `fixed-point`, got `{other}`"))),
        };
        let m_margin = number(obj, "M_margin", "")?.unwrap_or(0.0);
        if m_margin < 0.0 {
            return Err(err("/M_margin", "must be nonnegative"));
        }
        let exact = string(obj, "exact", "")?.map(str::to_string);
        if let Some(src) = &exact {
            Expression::parse(src, &["tau"]).map_err(|e| err("/exact", e.to_string()))?;
        }
        let seed = unsigned(obj, "seed", "")?;
        Ok(Self {
            alpha,
            horizon,
            t,
            w0,
            lw,
            f: f.to_string(),
            growth_gamma,
            n: n as usize,
            mesh,
            grading,
            corrector,
            m_margin,
            exact,
            seed,
        })
    }

    pub fn from_json_str(src: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(src).map_err(|e| err("", format!("malformed JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Canonical serialization: defaults filled in, keys sorted, no
    /// whitespace.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config is always serializable");
        serde_json::to_string(&v).expect("value is always serializable")
    }

    /// SHA-256 of [`Self::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(Order::new(self.alpha)?, self.horizon, Arc::new(ExprRhs::parse(&self.f)?), self.growth_gamma)
    }

    pub fn history(&self) -> Result<HistoryData> {
        let lw = match &self.lw {
            None => return Ok(HistoryData::point(self.w0)),
            Some(HistoryInput::Expr { expr, cells }) => {
                CaputoProfile::sample_expression(0.0, self.t, *cells, &Expression::parse(expr, &[LW_VAR])?)?
            }
            Some(HistoryInput::Piecewise { breaks, values }) => CaputoProfile::piecewise_constant(breaks, values)?,
        };
        HistoryData::new(self.t, self.w0, lw, self.m_margin)
    }

    pub fn mesh_kind(&self) -> MeshKind {
        match self.mesh {
            MeshChoice::Uniform => MeshKind::Uniform,
            MeshChoice::Graded => MeshKind::Graded { r: self.grading },
        }
    }

    pub fn mesh(&self) -> Result<Mesh> {
        self.mesh_with(self.n)
    }

    /// Mesh of the configured kind with `n` cells.
    pub fn mesh_with(&self, n: usize) -> Result<Mesh> {
        Mesh::new(self.mesh_kind(), n)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let corrector = match self.corrector {
            CorrectorChoice::Newton => Corrector::Newton,
            CorrectorChoice::FixedPoint => Corrector::FixedPoint,
        };
        SolverOptions { corrector, ..SolverOptions::default() }
    }

    /// Parsed exact solution in `tau`, if one was given.
    pub fn exact_solution(&self) -> Result<Option<Expression>> {
        Ok(self.exact.as_deref().map(|s| Expression::parse(s, &["tau"])).transpose()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({"alpha": 0.5, "T": 1.0, "t": 0.0, "w0": 1.0, "f": "x", "growth_gamma": 1.0, "N": 256})
    }

    fn pointer_of(v: Value) -> String {
        match ProblemConfig::from_value(&v) {
            Err(Error::Config { pointer, .. }) => pointer,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ProblemConfig::from_value(&base()).unwrap();
        assert_eq!(c.mesh, MeshChoice::Uniform);
        assert_eq!(c.corrector, CorrectorChoice::Newton);
        assert_eq!(c.m_margin, 0.0);
        assert!(c.history().unwrap().lw().is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected_with_pointer() {
        let mut v = base();
        v["extra"] = json!(1);
        assert_eq!(pointer_of(v), "/extra");
        let mut v = base();
        v["t"] = json!(0.5);
        v["lw"] = json!({"kind": "piecewise", "breaks": [0.0, 0.5], "values": [1.0], "oops": 2});
        assert_eq!(pointer_of(v), "/lw/oops");
    }

    #[test]
    fn field_errors_carry_pointers() {
        let mut v = base();
        v["N"] = json!(100);
        assert_eq!(pointer_of(v), "/N");
        let mut v = base();
        v["N"] = json!(1 << 17);
        assert_eq!(pointer_of(v), "/N");
        let mut v = base();
        v["alpha"] = json!(1.0);
        assert_eq!(pointer_of(v), "/alpha");
        let mut v = base();
        v["f"] = json!("x +");
        assert_eq!(pointer_of(v), "/f");
        let mut v = base();
        v["t"] = json!(0.5);
        assert_eq!(pointer_of(v.clone()), "/lw");
        v["lw"] = json!({"kind": "piecewise", "breaks": [0.0, 0.3, 0.2, 0.5], "values": [1, 2, 3]});
        assert_eq!(pointer_of(v), "/lw/breaks/2");
        let mut v = base();
        v["t"] = json!(0.5);
        v["lw"] = json!({"kind": "expr", "expr": "tau"});
        assert_eq!(pointer_of(v), "/lw/expr");
        let mut v = base();
        v["mesh"] = json!("chebyshev");
        assert_eq!(pointer_of(v), "/mesh");
    }

    #[test]
    fn hash_is_stable_under_key_order_and_defaults() {
        let a = ProblemConfig::from_json_str(
            r#"{"N":256,"growth_gamma":1,"f":"x","w0":1,"t":0,"T":1,"alpha":0.5}"#,
        )
        .unwrap();
        let b = ProblemConfig::from_json_str(
            r#"{"alpha":0.5,"T":1,"t":0,"w0":1,"f":"x","growth_gamma":1,"N":256,"mesh":"uniform"}"#,
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ProblemConfig::from_json_str(
            r#"{"alpha":0.5,"T":1,"t":0,"w0":1,"f":"x","growth_gamma":1,"N":512}"#,
        )
        .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn canonical_json_round_trips() {
        let mut v = base();
        v["t"] = json!(0.5);
        v["T"] = json!(1.5);
        v["lw"] = json!({"kind": "expr", "expr": "sin(xi)", "cells": 16});
        v["mesh"] = json!("graded");
        let c = ProblemConfig::from_value(&v).unwrap();
        let again = ProblemConfig::from_json_str(&c.canonical_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.history().unwrap().lw().pieces().len(), 16);
        assert_eq!(again.mesh().unwrap().kind(), MeshKind::Graded { r: 2.0 });
    }
}

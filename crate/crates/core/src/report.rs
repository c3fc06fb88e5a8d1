//! Machine-readable reports.
//!
//! JSON objects are emitted with sorted keys and every float as a 17-digit
//! scientific literal, so identical runs give identical bytes. Wall time is
//! deliberately left out of the document.

use std::io;

use serde_json::{json, Map, Value};

use crate::checks::Verdict;
use crate::config::Source;
use crate::runner::{ConvergenceTable, RunOutcome, RunSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

const SIMPLY_CONNECTED: &str = "unchecked: sampled charts cannot see global topology";

#[derive(Debug, Clone)]
pub struct Report {
    config: Value,
    pub outcome: Option<RunOutcome>,
    pub convergence: Option<ConvergenceTable>,
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::Null
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn echo(source: &Source, spec: &RunSpec) -> Value {
    let t = &spec.target;
    let tol = &spec.tolerances;
    let e = &spec.expected;
    json!({
        "source": source.to_string(),
        "immersion": spec.immersion.name,
        "target": {
            "c1": num(t.c1()), "n1": t.factor1.dim(),
            "c2": num(t.c2()), "n2": t.factor2.dim(),
        },
        "chart": (0..spec.immersion.chart.dim()).map(|k| { let (a, b) = spec.immersion.chart.range(k); nums(&[a, b]) }).collect::<Vec<_>>(),
        "grid": spec.grid,
        "h": num(spec.h),
        "tolerances": {
            "algebraic": num(tol.algebraic), "fd": num(tol.fd), "classifier": num(tol.classifier),
            "spectral": num(tol.spectral), "complement": num(tol.complement), "onManifold": num(tol.on_manifold),
        },
        "checks": spec.checks.iter().map(|c| c.name).collect::<Vec<_>>(),
        "expected": {
            "minimal": e.minimal, "pluriharmonic": e.pluriharmonic,
            "antiPluriharmonic": e.anti_pluriharmonic, "parallelAlpha": e.parallel_alpha,
            "slice": e.slice.map(|s| s.label()),
            "equalityCases": e.equality_cases,
            "traceR": e.trace_r.map(|(a, b)| nums(&[a, b])),
            "ric": e.ric.map(num), "scal": e.scal.map(num),
        },
    })
}

fn outcome_json(o: &RunOutcome) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("verdict".into(), Value::from(o.verdict().to_string()));
    m.insert("slice".into(), Value::from(o.slice.label()));
    m.insert("sampleCount".into(), Value::from(o.samples.len()));
    m.insert(
        "sampleErrors".into(),
        o.errors
            .iter()
            .map(|e| json!({"sample": e.index, "point": nums(&e.point), "message": e.message}))
            .collect(),
    );
    m.insert(
        "aggregates".into(),
        o.aggregates
            .iter()
            .map(|a| {
                json!({
                    "name": a.name, "kind": a.kind.to_string(), "verdict": a.verdict.to_string(),
                    "maxAbs": num(a.max_abs), "minValue": num(a.min_value), "maxValue": num(a.max_value),
                    "pass": a.pass, "fail": a.fail, "notApplicable": a.not_applicable,
                    "labels": a.labels,
                })
            })
            .collect(),
    );
    m.insert(
        "results".into(),
        o.rows
            .iter()
            .map(|r| {
                let c = &r.result;
                json!({
                    "sample": r.sample, "point": nums(&c.sample_point), "name": c.name,
                    "kind": c.kind.to_string(), "value": num(c.value), "label": c.label,
                    "tolerance": num(c.tolerance), "verdict": c.verdict.to_string(), "notes": c.notes,
                })
            })
            .collect(),
    );
    m
}

fn convergence_json(t: &ConvergenceTable) -> Value {
    json!({
        "check": t.check,
        "rows": t.rows.iter().map(|r| json!({"h": num(r.h), "value": num(r.value)})).collect::<Vec<_>>(),
        "orders": nums(&t.orders),
        "monotone": t.monotone,
        "verdict": t.verdict.to_string(),
    })
}

/// Writes floats as `{:.16e}`; everything else as compact JSON.
struct Canonical;

impl serde_json::ser::Formatter for Canonical {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

impl Report {
    pub fn for_run(source: &Source, spec: &RunSpec, outcome: RunOutcome) -> Self {
        Self {
            config: echo(source, spec),
            outcome: Some(outcome),
            convergence: None,
        }
    }

    pub fn for_convergence(source: &Source, spec: &RunSpec, table: ConvergenceTable) -> Self {
        Self {
            config: echo(source, spec),
            outcome: None,
            convergence: Some(table),
        }
    }

    pub fn verdict(&self) -> Verdict {
        let run = self.outcome.as_ref().map_or(Verdict::Pass, |o| o.verdict());
        let conv = self
            .convergence
            .as_ref()
            .map_or(Verdict::Pass, |t| t.verdict);
        if run == Verdict::Fail || conv == Verdict::Fail {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("schemaVersion".into(), Value::from(SCHEMA_VERSION));
        m.insert("engineVersion".into(), Value::from(ENGINE_VERSION));
        m.insert("config".into(), self.config.clone());
        m.insert(
            "hypotheses".into(),
            json!({ "simplyConnected": SIMPLY_CONNECTED }),
        );
        m.insert("verdict".into(), Value::from(self.verdict().to_string()));
        if let Some(o) = &self.outcome {
            m.extend(outcome_json(o));
        }
        m.insert(
            "convergence".into(),
            self.convergence
                .as_ref()
                .map_or(Value::Null, convergence_json),
        );
        Value::Object(m)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical);
        serde::Serialize::serialize(&self.to_value(), &mut ser)
            .expect("in-memory JSON serialization");
        out.push(b'\n');
        out
    }

    /// One row per sample x selected check; a convergence report gives one
    /// row per step.
    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let f = |x: f64| {
            if x.is_finite() {
                format!("{x:.16e}")
            } else {
                String::new()
            }
        };
        if let Some(o) = &self.outcome {
            w.write_record([
                "sample",
                "point",
                "check",
                "kind",
                "value",
                "label",
                "tolerance",
                "verdict",
                "notes",
            ])?;
            for r in &o.rows {
                let c = &r.result;
                let point = c
                    .sample_point
                    .iter()
                    .map(|&x| f(x))
                    .collect::<Vec<_>>()
                    .join(" ");
                w.write_record([
                    r.sample.to_string(),
                    point,
                    c.name.clone(),
                    c.kind.to_string(),
                    f(c.value),
                    c.label.clone().unwrap_or_default(),
                    f(c.tolerance),
                    c.verdict.to_string(),
                    c.notes.clone(),
                ])?;
            }
        } else if let Some(t) = &self.convergence {
            w.write_record(["check", "h", "value", "order"])?;
            for (i, r) in t.rows.iter().enumerate() {
                let order = if i == 0 {
                    String::new()
                } else {
                    f(t.orders[i - 1])
                };
                w.write_record([t.check.clone(), f(r.h), f(r.value), order])?;
            }
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

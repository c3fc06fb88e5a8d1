//! Grid runs: evaluate samples, classify the grid, apply checks, aggregate.
//!
//! Samples are independent and may be evaluated in parallel; results are
//! always assembled in grid order and, within a sample, in check-name order.

use crate::ambient::AmbientProduct;
use crate::catalog::CatalogEntry;
use crate::checks::{
    evaluate_check, find_check, slice_classifier, CheckKind, CheckResult, CheckSpec, Expectations,
    GridFacts, SliceClass, Verdict, CHECKS,
};
use crate::error::{GeometryError, Result};
use crate::jetcalc::{ImmersionDefinition, Steps, DEFAULT_H};
use crate::par::{ordered_map, Execution};
use crate::sample::{evaluate_sample, Needs, SampleContext, Tolerances};

/// Smallest acceptable observed order in a convergence study.
pub const MIN_ORDER: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub immersion: ImmersionDefinition,
    pub target: AmbientProduct,
    pub expected: Expectations,
    /// Points per chart axis.
    pub grid: Vec<usize>,
    /// Base step; the per-axis step is `h` times the chart extent.
    pub h: f64,
    pub tolerances: Tolerances,
    /// Sorted by name.
    pub checks: Vec<&'static CheckSpec>,
    pub execution: Execution,
}

impl RunSpec {
    /// Every check at default step and tolerances.
    pub fn from_entry(entry: CatalogEntry) -> Self {
        Self {
            immersion: entry.immersion,
            target: entry.target,
            expected: entry.expected,
            grid: entry.grid,
            h: DEFAULT_H,
            tolerances: Tolerances::default(),
            checks: CHECKS.iter().collect(),
            execution: Execution::default(),
        }
    }

    /// Replaces the check selection; `["all"]` selects everything.
    pub fn select_checks<S: AsRef<str>>(&mut self, names: &[S]) -> Result<()> {
        if names.is_empty() {
            return Err(GeometryError::InvalidArgument("empty checks filter".into()));
        }
        if names.len() == 1 && names[0].as_ref() == "all" {
            self.checks = CHECKS.iter().collect();
            return Ok(());
        }
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let spec = find_check(n)
                .ok_or_else(|| GeometryError::InvalidArgument(format!("unknown check `{n}`")))?;
            out.push(spec);
        }
        out.sort_by_key(|c| c.name);
        out.dedup_by_key(|c| c.name);
        self.checks = out;
        Ok(())
    }

    pub fn steps(&self) -> Steps {
        Steps::scaled(&self.immersion.chart, self.h)
    }

    pub fn needs(&self) -> Needs {
        self.checks
            .iter()
            .fold(Needs::default(), |acc, c| acc.union(c.needs))
    }

    pub fn grid_points(&self) -> Result<Vec<Vec<f64>>> {
        self.immersion.chart.grid(&self.grid)
    }

    /// Tolerances, step, grid shape, stencil reach and on-manifold samples.
    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.checks.is_empty() {
            return Err(GeometryError::InvalidArgument("empty checks filter".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(GeometryError::InvalidArgument(format!(
                "step h must be positive, got {}",
                self.h
            )));
        }
        let dim = self.immersion.domain_dim();
        if self.grid.len() != dim || self.grid.contains(&0) {
            return Err(GeometryError::InvalidArgument(format!(
                "grid {:?} does not match a {dim}-dimensional chart",
                self.grid
            )));
        }
        // cell-centred samples sit half a cell from the boundary; nested
        // stencils reach two steps, four without exact partials
        let reach = if self.immersion.has_exact_partials() {
            2.0
        } else {
            4.0
        };
        for (axis, &p) in self.grid.iter().enumerate() {
            let half_cell = 0.5 / p as f64;
            if reach * self.h > half_cell {
                return Err(GeometryError::InvalidArgument(format!(
                    "step h = {} too large for {p} points on axis {axis} (limit {:.3e})",
                    self.h,
                    half_cell / reach
                )));
            }
        }
        let grid = self.grid_points()?;
        self.immersion
            .validate(&self.target, &grid, self.tolerances.on_manifold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleError {
    pub index: usize,
    pub point: Vec<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sample: usize,
    pub result: CheckResult,
}

/// Per-check summary over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub name: String,
    pub kind: CheckKind,
    pub verdict: Verdict,
    /// Largest `|value|` over applicable samples.
    pub max_abs: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
    /// Distinct labels, sorted.
    pub labels: Vec<String>,
}

fn aggregate(name: &str, kind: CheckKind, rows: &[&CheckResult]) -> Aggregate {
    let mut a = Aggregate {
        name: name.to_string(),
        kind,
        verdict: Verdict::NotApplicable,
        max_abs: f64::NAN,
        min_value: f64::NAN,
        max_value: f64::NAN,
        pass: 0,
        fail: 0,
        not_applicable: 0,
        labels: Vec::new(),
    };
    for r in rows {
        match r.verdict {
            Verdict::Pass => a.pass += 1,
            Verdict::Fail => a.fail += 1,
            Verdict::NotApplicable => {
                a.not_applicable += 1;
                continue;
            }
        }
        if r.value.is_finite() {
            a.max_abs = a.max_abs.max(r.value.abs());
            a.min_value = a.min_value.min(r.value);
            a.max_value = a.max_value.max(r.value);
        }
        if let Some(l) = &r.label {
            if !a.labels.contains(l) {
                a.labels.push(l.clone());
            }
        }
    }
    a.labels.sort();
    a.verdict = if a.fail > 0 {
        Verdict::Fail
    } else if a.pass > 0 {
        Verdict::Pass
    } else {
        Verdict::NotApplicable
    };
    a
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub samples: Vec<Vec<f64>>,
    pub slice: SliceClass,
    pub rows: Vec<ResultRow>,
    pub errors: Vec<SampleError>,
    /// In check-name order.
    pub aggregates: Vec<Aggregate>,
}

impl RunOutcome {
    /// Pass iff no check failed and every sample evaluated.
    pub fn verdict(&self) -> Verdict {
        if !self.errors.is_empty() || self.aggregates.iter().any(|a| a.verdict == Verdict::Fail) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }

    pub fn aggregate(&self, name: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.name == name)
    }

    /// All per-sample results of one check, in grid order.
    pub fn results_for<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a CheckResult> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.result.name == name)
            .map(|r| &r.result)
    }
}

/// Evaluates every grid sample; failures are kept per sample.
pub fn evaluate_grid(
    spec: &RunSpec,
) -> Result<(
    Vec<Vec<f64>>,
    Vec<std::result::Result<SampleContext, GeometryError>>,
)> {
    let grid = spec.grid_points()?;
    let steps = spec.steps();
    let needs = spec.needs();
    let contexts = ordered_map(&grid, spec.execution, |_, u| {
        evaluate_sample(
            &spec.immersion,
            &spec.target,
            u,
            &steps,
            &spec.tolerances,
            needs,
        )
    });
    Ok((grid, contexts))
}

pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let (samples, contexts) = evaluate_grid(spec)?;
    let mut errors = Vec::new();
    let mut ok = Vec::new();
    for (i, c) in contexts.iter().enumerate() {
        match c {
            Ok(ctx) => ok.push((i, ctx)),
            Err(e) => errors.push(SampleError {
                index: i,
                point: samples[i].clone(),
                message: e.to_string(),
            }),
        }
    }
    if ok.is_empty() {
        return Err(GeometryError::AllSamplesFailed {
            count: samples.len(),
            first: errors
                .first()
                .map(|e| e.message.clone())
                .unwrap_or_default(),
        });
    }
    let traces: Vec<f64> = ok.iter().map(|(_, c)| c.pt.trace_r).collect();
    let slice = slice_classifier(
        &traces,
        spec.immersion.domain_dim(),
        spec.tolerances.classifier,
    );
    let facts = GridFacts {
        ambient: &spec.target,
        slice,
        expected: &spec.expected,
        tol: &spec.tolerances,
    };
    let per_sample: Vec<Vec<ResultRow>> = ordered_map(&ok, spec.execution, |_, (i, ctx)| {
        spec.checks
            .iter()
            .map(|c| ResultRow {
                sample: *i,
                result: evaluate_check(c, ctx, &facts),
            })
            .collect()
    });
    let rows: Vec<ResultRow> = per_sample.into_iter().flatten().collect();
    let aggregates = spec
        .checks
        .iter()
        .map(|c| {
            let rs: Vec<&CheckResult> = rows
                .iter()
                .filter(|r| r.result.name == c.name)
                .map(|r| &r.result)
                .collect();
            aggregate(c.name, c.kind, &rs)
        })
        .collect();
    Ok(RunOutcome {
        samples,
        slice,
        rows,
        errors,
        aggregates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    /// Largest `|value|` of the check over the grid.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub check: String,
    pub rows: Vec<ConvergenceRow>,
    /// `log(v_i / v_{i+1}) / log(h_i / h_{i+1})` for consecutive rows.
    pub orders: Vec<f64>,
    pub monotone: bool,
    pub verdict: Verdict,
}

/// Reruns one residual check at each step in `hs` (strictly decreasing).
pub fn convergence(spec: &RunSpec, check: &str, hs: &[f64]) -> Result<ConvergenceTable> {
    let c = find_check(check)
        .ok_or_else(|| GeometryError::InvalidArgument(format!("unknown check `{check}`")))?;
    if c.kind != CheckKind::Residual {
        return Err(GeometryError::InvalidArgument(format!(
            "`{check}` is not a residual check"
        )));
    }
    if hs.len() < 2 {
        return Err(GeometryError::InvalidArgument(
            "convergence needs at least two steps".into(),
        ));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(GeometryError::InvalidArgument(
            "steps must be strictly decreasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(hs.len());
    for &h in hs {
        let mut s = spec.clone();
        s.h = h;
        s.checks = vec![c];
        let out = run(&s)?;
        if !out.errors.is_empty() {
            return Err(GeometryError::InvalidArgument(format!(
                "{} samples failed at h = {h}: {}",
                out.errors.len(),
                out.errors[0].message
            )));
        }
        let value = out.aggregate(check).map(|a| a.max_abs).unwrap_or(f64::NAN);
        rows.push(ConvergenceRow { h, value });
    }
    let orders: Vec<f64> = rows
        .windows(2)
        .map(|w| (w[0].value / w[1].value).ln() / (w[0].h / w[1].h).ln())
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].value < w[0].value);
    let ok = monotone && orders.iter().all(|&o| o >= MIN_ORDER);
    Ok(ConvergenceTable {
        check: check.to_string(),
        rows,
        orders,
        monotone,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
    })
}

//! TOML run configuration.
//!
//! ```toml
//! [target]
//! c1 = 1.0
//! n1 = 3
//! c2 = 0.0
//! n2 = 1
//!
//! [immersion]
//! entry = "clifford_torus_slice"      # or an inline definition:
//! # name = "torus"
//! # chart = [[0.0, 6.283], [0.0, 6.283]]
//! # map = ["cos(u1)/sqrt(2)", "sin(u1)/sqrt(2)", "cos(u2)/sqrt(2)", "sin(u2)/sqrt(2)", "0"]
//! # complex_structure = "standard"   # or "surface_rotation", or a row-major matrix
//!
//! [grid]
//! points = [9, 9]
//! h = 1e-3
//!
//! [checks]
//! names = ["all"]
//!
//! [tolerances]
//! algebraic = 1e-6
//!
//! [output]
//! path = "report.json"
//! format = "json"
//! ```

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use toml::Spanned;

use crate::ambient::AmbientProduct;
use crate::catalog::find_entry;
use crate::checks::{Expectations, SliceClass};
use crate::expr::Expr;
use crate::jetcalc::{
    standard_complex_structure, Chart, ComplexStructure, ImmersionDefinition, DEFAULT_H,
};
use crate::par::Execution;
use crate::runner::RunSpec;
use crate::sample::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line in the config text, when known.
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}, {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(Self::Json),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Entry(String),
    Inline(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Entry(n) => write!(f, "entry:{n}"),
            Self::Inline(n) => write!(f, "inline:{n}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub spec: RunSpec,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// A catalog entry with default settings.
    pub fn from_entry(name: &str) -> Result<Self, ConfigError> {
        let entry = find_entry(name).map_err(|e| err(None, "entry", e.to_string()))?;
        Ok(Self {
            source: Source::Entry(name.to_string()),
            spec: RunSpec::from_entry(entry),
            output: None,
            format: Format::Json,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: Raw = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start));
            err(line, "config", e.message().to_string())
        })?;
        build(raw, text)
    }
}

fn err(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.into(),
        message: message.into(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    target: Option<Spanned<RawTarget>>,
    immersion: Spanned<RawImmersion>,
    grid: Option<RawGrid>,
    checks: Option<RawChecks>,
    tolerances: Option<RawTolerances>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    c1: f64,
    n1: usize,
    c2: f64,
    n2: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Cell {
    Integer(i64),
    Number(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawJ {
    Named(String),
    Matrix(Vec<Vec<Cell>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImmersion {
    entry: Option<String>,
    name: Option<String>,
    chart: Option<Vec<[f64; 2]>>,
    map: Option<Vec<Spanned<String>>>,
    complex_structure: Option<Spanned<RawJ>>,
    allow_low_codimension: Option<bool>,
    expected: Option<RawExpected>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpected {
    minimal: Option<bool>,
    pluriharmonic: Option<bool>,
    anti_pluriharmonic: Option<bool>,
    parallel_alpha: Option<bool>,
    slice: Option<Spanned<String>>,
    equality_cases: Option<Vec<String>>,
    trace_r: Option<[f64; 2]>,
    ric: Option<f64>,
    scal: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<Spanned<Vec<usize>>>,
    h: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChecks {
    names: Spanned<Vec<Spanned<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    algebraic: Option<f64>,
    fd: Option<f64>,
    classifier: Option<f64>,
    spectral: Option<f64>,
    complement: Option<f64>,
    on_manifold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    format: Option<Spanned<String>>,
}

fn build(raw: Raw, text: &str) -> Result<RunConfig, ConfigError> {
    let at = |s: usize| Some(line_of(text, s));
    let target = match &raw.target {
        Some(t) => {
            let r = t.get_ref();
            Some(
                AmbientProduct::from_parts(r.c1, r.n1, r.c2, r.n2)
                    .map_err(|e| err(at(t.span().start), "target", e.to_string()))?,
            )
        }
        None => None,
    };
    let imm_span = raw.immersion.span();
    let imm = raw.immersion.into_inner();
    let (source, mut spec) = match &imm.entry {
        Some(name) => {
            if imm.map.is_some() || imm.chart.is_some() || imm.complex_structure.is_some() {
                return Err(err(
                    at(imm_span.start),
                    "immersion",
                    "`entry` cannot be combined with an inline definition",
                ));
            }
            let entry = find_entry(name)
                .map_err(|e| err(at(imm_span.start), "immersion.entry", e.to_string()))?;
            if let Some(t) = &target {
                if (t.c1(), t.factor1.dim(), t.c2(), t.factor2.dim())
                    != (
                        entry.target.c1(),
                        entry.target.factor1.dim(),
                        entry.target.c2(),
                        entry.target.factor2.dim(),
                    )
                {
                    return Err(err(
                        raw.target.as_ref().map(|t| line_of(text, t.span().start)),
                        "target",
                        format!("does not match the target of entry `{name}`"),
                    ));
                }
            }
            (Source::Entry(name.clone()), RunSpec::from_entry(entry))
        }
        None => {
            let target = target.ok_or_else(|| {
                err(
                    at(imm_span.start),
                    "target",
                    "inline immersions need a [target] section",
                )
            })?;
            let (name, imm_def) = inline_immersion(&imm, &target, text, imm_span.start)?;
            let spec = RunSpec {
                grid: vec![9; imm_def.domain_dim()],
                immersion: imm_def,
                target,
                expected: Expectations::default(),
                h: DEFAULT_H,
                tolerances: Tolerances::default(),
                checks: crate::checks::CHECKS.iter().collect(),
                execution: Execution::default(),
            };
            (Source::Inline(name), spec)
        }
    };
    if let Some(e) = &imm.expected {
        spec.expected = expectations(e, text)?;
    }
    if let Some(g) = raw.grid {
        if let Some(p) = g.points {
            let dim = spec.immersion.domain_dim();
            if p.get_ref().len() != dim || p.get_ref().contains(&0) {
                return Err(err(
                    at(p.span().start),
                    "grid.points",
                    format!("need {dim} positive counts"),
                ));
            }
            spec.grid = p.into_inner();
        }
        if let Some(h) = g.h {
            if !(*h.get_ref() > 0.0 && h.get_ref().is_finite()) {
                return Err(err(at(h.span().start), "grid.h", "must be positive"));
            }
            spec.h = h.into_inner();
        }
    }
    if let Some(c) = raw.checks {
        let span = c.names.span();
        let names = c.names.into_inner();
        if names.is_empty() {
            return Err(err(at(span.start), "checks.names", "empty checks filter"));
        }
        for n in &names {
            let s = n.get_ref();
            if s != "all" && crate::checks::find_check(s).is_none() {
                return Err(err(
                    at(n.span().start),
                    "checks.names",
                    format!("unknown check `{s}`"),
                ));
            }
        }
        let plain: Vec<String> = names.into_iter().map(|n| n.into_inner()).collect();
        spec.select_checks(&plain)
            .map_err(|e| err(at(span.start), "checks.names", e.to_string()))?;
    }
    if let Some(t) = raw.tolerances {
        let tol = &mut spec.tolerances;
        let fields = [
            (&mut tol.algebraic, t.algebraic),
            (&mut tol.fd, t.fd),
            (&mut tol.classifier, t.classifier),
            (&mut tol.spectral, t.spectral),
            (&mut tol.complement, t.complement),
            (&mut tol.on_manifold, t.on_manifold),
        ];
        for (slot, v) in fields {
            if let Some(v) = v {
                *slot = v;
            }
        }
        tol.validate()
            .map_err(|e| err(None, "tolerances", e.to_string()))?;
    }
    let (mut output, mut format) = (None, Format::Json);
    if let Some(o) = raw.output {
        output = o.path.map(PathBuf::from);
        if let Some(f) = o.format {
            format = Format::parse(f.get_ref()).ok_or_else(|| {
                err(
                    at(f.span().start),
                    "output.format",
                    format!("unknown format `{}`", f.get_ref()),
                )
            })?;
        }
    }
    Ok(RunConfig {
        source,
        spec,
        output,
        format,
    })
}

fn expectations(e: &RawExpected, text: &str) -> Result<Expectations, ConfigError> {
    let slice = match &e.slice {
        Some(s) => Some(SliceClass::parse(s.get_ref()).ok_or_else(|| {
            err(
                Some(line_of(text, s.span().start)),
                "immersion.expected.slice",
                format!("unknown label `{}`", s.get_ref()),
            )
        })?),
        None => None,
    };
    Ok(Expectations {
        minimal: e.minimal,
        pluriharmonic: e.pluriharmonic,
        anti_pluriharmonic: e.anti_pluriharmonic,
        parallel_alpha: e.parallel_alpha,
        slice,
        equality_cases: e.equality_cases.clone().unwrap_or_default(),
        trace_r: e.trace_r.map(|[a, b]| (a, b)),
        ric: e.ric,
        scal: e.scal,
    })
}

fn parse_expr(src: &str, dim: usize, field: String, line: usize) -> Result<Expr, ConfigError> {
    Expr::parse(src, dim).map_err(|e| err(Some(line), field, e.to_string()))
}

fn inline_immersion(
    imm: &RawImmersion,
    target: &AmbientProduct,
    text: &str,
    section: usize,
) -> Result<(String, ImmersionDefinition), ConfigError> {
    let line = |s: usize| line_of(text, s);
    let name = imm.name.clone().unwrap_or_else(|| "inline".to_string());
    let ranges = imm
        .chart
        .as_ref()
        .ok_or_else(|| err(Some(line(section)), "immersion.chart", "missing chart"))?;
    let ranges: Vec<(f64, f64)> = ranges.iter().map(|[a, b]| (*a, *b)).collect();
    let chart = Chart::new(&ranges)
        .map_err(|e| err(Some(line(section)), "immersion.chart", e.to_string()))?;
    let dim = chart.dim();
    let map_src = imm
        .map
        .as_ref()
        .ok_or_else(|| err(Some(line(section)), "immersion.map", "missing map"))?;
    if map_src.len() != target.flat_dim() {
        return Err(err(
            Some(line(section)),
            "immersion.map",
            format!(
                "{} components given, target needs {}",
                map_src.len(),
                target.flat_dim()
            ),
        ));
    }
    let exprs: Vec<Expr> = map_src
        .iter()
        .enumerate()
        .map(|(i, s)| {
            parse_expr(
                s.get_ref(),
                dim,
                format!("immersion.map[{i}]"),
                line(s.span().start),
            )
        })
        .collect::<Result<_, _>>()?;
    let exprs = Arc::new(exprs);
    let (m, p) = (exprs.clone(), exprs);
    let map =
        Arc::new(move |u: &[f64]| DVector::from_iterator(m.len(), m.iter().map(|e| e.eval(u))));
    let partials = Arc::new(move |u: &[f64]| {
        let duals: Vec<_> = p.iter().map(|e| e.eval_dual(u)).collect();
        (0..dim)
            .map(|a| DVector::from_iterator(duals.len(), duals.iter().map(|d| d.grad[a])))
            .collect()
    });
    let j = match &imm.complex_structure {
        None => ComplexStructure::Constant(standard_complex_structure(dim)),
        Some(s) => complex_structure(s, dim, text)?,
    };
    let mut def = ImmersionDefinition::new(name.clone(), chart, map)
        .with_partials(partials)
        .with_complex_structure(j);
    def.allow_low_codimension = imm.allow_low_codimension.unwrap_or(false);
    Ok((name, def))
}

fn complex_structure(
    s: &Spanned<RawJ>,
    dim: usize,
    text: &str,
) -> Result<ComplexStructure, ConfigError> {
    let field = "immersion.complex_structure";
    let at = Some(line_of(text, s.span().start));
    match s.get_ref() {
        RawJ::Named(n) => match n.as_str() {
            "standard" => Ok(ComplexStructure::Constant(standard_complex_structure(dim))),
            "surface_rotation" => Ok(ComplexStructure::SurfaceRotation),
            other => Err(err(at, field, format!("unknown structure `{other}`"))),
        },
        RawJ::Matrix(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(err(at, field, format!("need a {dim}x{dim} matrix")));
            }
            let mut cells = Vec::with_capacity(dim * dim);
            for (r, row) in rows.iter().enumerate() {
                for (c, cell) in row.iter().enumerate() {
                    let l = line_of(text, s.span().start);
                    let e = match cell {
                        Cell::Integer(x) => {
                            parse_expr(&x.to_string(), dim, format!("{field}[{r}][{c}]"), l)?
                        }
                        Cell::Number(x) => {
                            parse_expr(&format!("{x:e}"), dim, format!("{field}[{r}][{c}]"), l)?
                        }
                        Cell::Expr(src) => parse_expr(src, dim, format!("{field}[{r}][{c}]"), l)?,
                    };
                    cells.push(e);
                }
            }
            let cells = Arc::new(cells);
            Ok(ComplexStructure::Field(Arc::new(move |u: &[f64]| {
                DMatrix::from_row_iterator(dim, dim, cells.iter().map(|e| e.eval(u)))
            })))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = r#"
[target]
c1 = 1.0
n1 = 3
c2 = 0.0
n2 = 1

[immersion]
name = "torus"
chart = [[0.0, 6.283185307179586], [0.0, 6.283185307179586]]
map = ["cos(u1)/sqrt(2)", "sin(u1)/sqrt(2)", "cos(u2)/sqrt(2)", "sin(u2)/sqrt(2)", "0"]

[grid]
points = [5, 5]

[checks]
names = ["minimality", "pluriharmonic_residual"]
"#;

    #[test]
    fn inline_torus() {
        let c = RunConfig::parse(TORUS).unwrap();
        assert_eq!(c.source, Source::Inline("torus".into()));
        assert_eq!(c.spec.grid, vec![5, 5]);
        assert_eq!(c.spec.checks.len(), 2);
        let out = crate::runner::run(&c.spec).unwrap();
        assert_eq!(out.verdict(), crate::checks::Verdict::Pass);
    }

    #[test]
    fn entry_config() {
        let c = RunConfig::parse(
            "[immersion]\nentry = \"vertical_cylinder_S2xR\"\n[output]\nformat = \"csv\"\n",
        )
        .unwrap();
        assert_eq!(c.source, Source::Entry("vertical_cylinder_S2xR".into()));
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn diagnostics_have_lines() {
        let bad = TORUS.replace("\"0\"]", "\"0 +\"]");
        let e = RunConfig::parse(&bad).unwrap_err();
        assert_eq!(e.line, Some(11));
        assert!(e.field.starts_with("immersion.map[4]"));

        let bad = TORUS.replace("\"minimality\"", "\"nonsense\"");
        let e = RunConfig::parse(&bad).unwrap_err();
        assert_eq!(e.line, Some(17));

        let e = RunConfig::parse("[immersion]\nentry = \"x\"\nbogus = 1\n").unwrap_err();
        assert_eq!(e.line, Some(3));

        let e =
            RunConfig::parse(&TORUS.replace("[\"minimality\", \"pluriharmonic_residual\"]", "[]"))
                .unwrap_err();
        assert!(e.message.contains("empty"));
    }

    #[test]
    fn mismatched_target_rejected() {
        let text = "[target]\nc1 = 1.0\nn1 = 2\nc2 = 0.0\nn2 = 1\n[immersion]\nentry = \"clifford_torus_slice\"\n";
        assert!(RunConfig::parse(text).is_err());
    }
}

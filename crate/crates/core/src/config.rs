//! TOML problem documents and flat `key=value` reports.
//!
//! ```toml
//! [grid]
//! L = 15.0
//! N = 3001
//!
//! [a]
//! kind = "constant"
//! value = 1.0
//!
//! [b]
//! kind = "bump"
//! value = 0.5
//! support = [-1.0, 1.0]
//!
//! [c]
//! kind = "bump"
//! values = [1.0, 1.0]
//! supports = [[-2.0, -1.0], [1.0, 2.0]]
//!
//! [d]
//! kind = "piecewise"
//! breakpoints = [0.0]
//! values = [1.0, 4.0]
//!
//! [nonlinearity]
//! kind = "weakly-coupled"
//!
//! [solver]
//! theta = 0.5
//! symmetry = "none"
//! ```
//!
//! `[a]`, `[d]` and `[nonlinearity]` are required; missing `[b]`, `[c]`,
//! `[e]`, `[f]` are zero.

use std::fmt::{self, Write as _};

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{
    Bump, CoefficientField, CoefficientSet, FieldShape, Grid, NonlinearityKind, Preset, Problem,
    Role,
};
use crate::solver::SolverConfig;

pub const DEFAULT_HALF_WIDTH: f64 = 15.0;
pub const DEFAULT_POINTS: usize = 3001;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub problem: Problem,
    pub solver: SolverConfig,
}

/// Grid settings that take precedence over the document.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GridOverride {
    pub half_width: Option<f64>,
    pub points: Option<usize>,
}

pub fn parse_config(text: &str) -> Result<Config> {
    parse_config_with(text, GridOverride::default())
}

pub fn parse_config_with(text: &str, grid: GridOverride) -> Result<Config> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::parse("document", e.to_string().trim_end()))?;
    for key in doc.keys() {
        if !matches!(
            key.as_str(),
            "grid" | "a" | "b" | "c" | "d" | "e" | "f" | "nonlinearity" | "solver"
        ) {
            return Err(Error::parse("document", format!("unknown section [{key}]")));
        }
    }

    let grid_table = optional_section(&doc, "grid")?;
    let mut half_width = DEFAULT_HALF_WIDTH;
    let mut points = DEFAULT_POINTS;
    if let Some(t) = grid_table {
        let ctx = "[grid]";
        check_keys(t, ctx, &["L", "N"])?;
        if let Some(v) = t.get("L") {
            half_width = number(v, ctx, "L")?;
        }
        if let Some(v) = t.get("N") {
            points = count(v, ctx, "N")?;
        }
    }
    let grid = Grid::symmetric(
        grid.half_width.unwrap_or(half_width),
        grid.points.unwrap_or(points),
    )?;

    let field = |role: Role| -> Result<CoefficientField> {
        match optional_section(&doc, role.name())? {
            Some(t) => parse_field(t, &format!("[{}]", role.name())),
            None if role.is_potential() => Err(Error::parse(
                format!("[{}]", role.name()),
                "missing required section",
            )),
            None => Ok(CoefficientField::zero()),
        }
    };
    let coefficients = CoefficientSet {
        a: field(Role::A)?,
        b: field(Role::B)?,
        c: field(Role::C)?,
        d: field(Role::D)?,
        e: field(Role::E)?,
        f: field(Role::F)?,
    };

    let nl = optional_section(&doc, "nonlinearity")?
        .ok_or_else(|| Error::parse("[nonlinearity]", "missing required section"))?;
    check_keys(nl, "[nonlinearity]", &["kind"])?;
    let preset: Preset = string(required(nl, "[nonlinearity]", "kind")?, "[nonlinearity]", "kind")?
        .parse()?;

    let solver = match optional_section(&doc, "solver")? {
        Some(t) => parse_solver(t)?,
        None => SolverConfig::default(),
    };
    solver.validate()?;

    let problem = Problem::new(coefficients, preset.nonlinearity(), grid)?.validate_strict()?;
    Ok(Config { problem, solver })
}

fn optional_section<'a>(doc: &'a Table, name: &str) -> Result<Option<&'a Table>> {
    match doc.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(Error::parse(format!("[{name}]"), "expected a section")),
    }
}

fn check_keys(t: &Table, ctx: &str, allowed: &[&str]) -> Result<()> {
    for key in t.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::parse(ctx, format!("unknown key '{key}'")));
        }
    }
    Ok(())
}

fn required<'a>(t: &'a Table, ctx: &str, key: &str) -> Result<&'a Value> {
    t.get(key)
        .ok_or_else(|| Error::parse(ctx, format!("missing key '{key}'")))
}

fn number(v: &Value, ctx: &str, key: &str) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::parse(ctx, format!("'{key}' must be a number"))),
    }
}

fn count(v: &Value, ctx: &str, key: &str) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::parse(
            ctx,
            format!("'{key}' must be a non-negative integer"),
        )),
    }
}

fn string<'a>(v: &'a Value, ctx: &str, key: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::parse(ctx, format!("'{key}' must be a string")))
}

fn boolean(v: &Value, ctx: &str, key: &str) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::parse(ctx, format!("'{key}' must be true or false")))
}

fn numbers(v: &Value, ctx: &str, key: &str) -> Result<Vec<f64>> {
    match v {
        Value::Array(items) => items.iter().map(|x| number(x, ctx, key)).collect(),
        _ => Err(Error::parse(ctx, format!("'{key}' must be an array of numbers"))),
    }
}

fn interval(v: &Value, ctx: &str, key: &str) -> Result<(f64, f64)> {
    match numbers(v, ctx, key)?.as_slice() {
        &[lo, hi] => Ok((lo, hi)),
        _ => Err(Error::parse(ctx, format!("'{key}' must be [lo, hi]"))),
    }
}

fn parse_field(t: &Table, ctx: &str) -> Result<CoefficientField> {
    let kind = string(required(t, ctx, "kind")?, ctx, "kind")?;
    match kind {
        "constant" => {
            check_keys(t, ctx, &["kind", "value"])?;
            CoefficientField::constant(number(required(t, ctx, "value")?, ctx, "value")?)
        }
        "zero" => {
            check_keys(t, ctx, &["kind"])?;
            Ok(CoefficientField::zero())
        }
        "piecewise" => {
            check_keys(t, ctx, &["kind", "breakpoints", "values"])?;
            CoefficientField::piecewise(
                numbers(required(t, ctx, "breakpoints")?, ctx, "breakpoints")?,
                numbers(required(t, ctx, "values")?, ctx, "values")?,
            )
        }
        "bump" => {
            check_keys(t, ctx, &["kind", "value", "support", "values", "supports"])?;
            let bumps = match (t.get("value"), t.get("values")) {
                (Some(v), None) => {
                    if t.contains_key("supports") {
                        return Err(Error::parse(ctx, "use 'support' with 'value'"));
                    }
                    let (lo, hi) = interval(required(t, ctx, "support")?, ctx, "support")?;
                    vec![Bump {
                        value: number(v, ctx, "value")?,
                        lo,
                        hi,
                    }]
                }
                (None, Some(v)) => {
                    if t.contains_key("support") {
                        return Err(Error::parse(ctx, "use 'supports' with 'values'"));
                    }
                    let values = numbers(v, ctx, "values")?;
                    let supports = match required(t, ctx, "supports")? {
                        Value::Array(items) => items
                            .iter()
                            .map(|s| interval(s, ctx, "supports"))
                            .collect::<Result<Vec<_>>>()?,
                        _ => return Err(Error::parse(ctx, "'supports' must be a list of [lo, hi]")),
                    };
                    if values.len() != supports.len() {
                        return Err(Error::parse(
                            ctx,
                            format!(
                                "{} values for {} supports",
                                values.len(),
                                supports.len()
                            ),
                        ));
                    }
                    values
                        .into_iter()
                        .zip(supports)
                        .map(|(value, (lo, hi))| Bump { value, lo, hi })
                        .collect()
                }
                _ => {
                    return Err(Error::parse(
                        ctx,
                        "bump needs either 'value' + 'support' or 'values' + 'supports'",
                    ))
                }
            };
            CoefficientField::bumps(bumps)
        }
        other => Err(Error::parse(
            ctx,
            format!("unknown kind '{other}' (expected constant, piecewise, bump or zero)"),
        )),
    }
    .map_err(|e| match e {
        Error::InvalidCoefficient(m) => Error::InvalidCoefficient(format!("{ctx}: {m}")),
        other => other,
    })
}

fn parse_solver(t: &Table) -> Result<SolverConfig> {
    let ctx = "[solver]";
    check_keys(
        t,
        ctx,
        &[
            "theta",
            "tol",
            "residual_tol",
            "max_iter",
            "ladder",
            "newton_fallback",
            "symmetry",
            "stall_window",
        ],
    )?;
    let mut cfg = SolverConfig::default();
    for (key, v) in t {
        match key.as_str() {
            "theta" => cfg.theta = number(v, ctx, key)?,
            "tol" => cfg.tol = number(v, ctx, key)?,
            "residual_tol" => cfg.residual_tol = number(v, ctx, key)?,
            "max_iter" => cfg.max_iter = count(v, ctx, key)?,
            "ladder" => cfg.ladder = count(v, ctx, key)?,
            "stall_window" => cfg.stall_window = count(v, ctx, key)?,
            "newton_fallback" => cfg.newton_fallback = boolean(v, ctx, key)?,
            "symmetry" => cfg.symmetry = string(v, ctx, key)?.parse()?,
            _ => unreachable!("keys checked above"),
        }
    }
    Ok(cfg)
}

fn float_array(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

fn field_table(field: &CoefficientField) -> Table {
    let mut t = Table::new();
    match field.shape() {
        FieldShape::Constant(v) => {
            t.insert("kind".into(), "constant".into());
            t.insert("value".into(), Value::Float(*v));
        }
        FieldShape::Piecewise {
            breakpoints,
            values,
        } => {
            t.insert("kind".into(), "piecewise".into());
            t.insert("breakpoints".into(), float_array(breakpoints));
            t.insert("values".into(), float_array(values));
        }
        FieldShape::Bumps(bumps) => {
            t.insert("kind".into(), "bump".into());
            if let [b] = bumps.as_slice() {
                t.insert("value".into(), Value::Float(b.value));
                t.insert("support".into(), float_array(&[b.lo, b.hi]));
            } else {
                let values: Vec<f64> = bumps.iter().map(|b| b.value).collect();
                t.insert("values".into(), float_array(&values));
                t.insert(
                    "supports".into(),
                    Value::Array(bumps.iter().map(|b| float_array(&[b.lo, b.hi])).collect()),
                );
            }
        }
    }
    t
}

/// Serializes a problem and solver settings as a document that
/// [`parse_config`] reads back to the same values.
pub fn to_config_string(p: &Problem, cfg: &SolverConfig) -> Result<String> {
    let preset = match p.nonlinearity().kind() {
        NonlinearityKind::DecoupledCubic => Preset::WeaklyCoupled,
        NonlinearityKind::SpinorCubic => Preset::Spinor,
        NonlinearityKind::Custom => {
            return Err(Error::UnsupportedNonlinearity(
                p.nonlinearity().name().to_string(),
            ))
        }
    };
    let mut doc = Table::new();
    let mut grid = Table::new();
    grid.insert("L".into(), Value::Float(p.grid().half_width()));
    grid.insert("N".into(), Value::Integer(p.grid().len() as i64));
    doc.insert("grid".into(), Value::Table(grid));
    for role in Role::ALL {
        doc.insert(
            role.name().into(),
            Value::Table(field_table(p.coefficients().get(role))),
        );
    }
    let mut nl = Table::new();
    nl.insert("kind".into(), preset.name().into());
    doc.insert("nonlinearity".into(), Value::Table(nl));
    let mut s = Table::new();
    s.insert("theta".into(), Value::Float(cfg.theta));
    s.insert("tol".into(), Value::Float(cfg.tol));
    s.insert("residual_tol".into(), Value::Float(cfg.residual_tol));
    s.insert("max_iter".into(), Value::Integer(cfg.max_iter as i64));
    s.insert("ladder".into(), Value::Integer(cfg.ladder as i64));
    s.insert("stall_window".into(), Value::Integer(cfg.stall_window as i64));
    s.insert("newton_fallback".into(), Value::Boolean(cfg.newton_fallback));
    s.insert("symmetry".into(), cfg.symmetry.as_str().into());
    doc.insert("solver".into(), Value::Table(s));
    Ok(doc.to_string())
}

/// Ordered `key=value` lines. Floats use the shortest representation that
/// reads back to the same value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn float(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.lines.push((key.into(), format_float(value)));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn lines(&self) -> &[(String, String)] {
        &self.lines
    }

    /// Parses the output of `Display` back into a report.
    pub fn parse(text: &str) -> Result<Report> {
        let mut lines = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("report line {}", i + 1), "expected key=value"))?;
            lines.push((k.to_string(), v.to_string()));
        }
        Ok(Report { lines })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Shortest round-trip form, with exponents for very large or small values.
pub fn format_float(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x:?}").expect("writing to a string");
    s
}

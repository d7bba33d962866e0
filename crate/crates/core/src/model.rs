//! Coefficient fields, nonlinearities, the discretization grid and the
//! validated [`Problem`] describing
//!
//! ```text
//! -u1'' + a(x) u1 - b(x) u2 = c(x) F(u1, u2) u1
//! -u2'' + d(x) u2 - e(x) u1 = f(x) H(u1, u2) u2
//! ```
//!
//! with `u1, u2 -> 0` as `|x| -> inf`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypotheses::GrowthConstants;

/// Smallest accepted value of `sqrt(a_*) * (L - max|x| over M)`.
pub const MIN_DECAY_MARGIN: f64 = 10.0;
/// Decay margin below which the hypothesis report emits a warning.
pub const RECOMMENDED_DECAY_MARGIN: f64 = 20.0;

/// One top-hat bump `value * 1_[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldShape {
    Constant(f64),
    /// `values[k]` holds on `[breakpoints[k-1], breakpoints[k])`; the first
    /// and last values extend to infinity.
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Sum of closed top-hat bumps, zero elsewhere.
    Bumps(Vec<Bump>),
}

/// Support of a coefficient field.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    Empty,
    /// Sorted, disjoint closed intervals.
    Bounded(Vec<(f64, f64)>),
    Unbounded,
}

impl Support {
    pub fn hull(&self) -> Option<(f64, f64)> {
        match self {
            Support::Bounded(iv) if !iv.is_empty() => Some((iv[0].0, iv[iv.len() - 1].1)),
            _ => None,
        }
    }
}

/// A non-negative, piecewise-constant coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    shape: FieldShape,
}

fn check_value(v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidCoefficient(format!(
            "value {v} is negative or not finite"
        )));
    }
    Ok(())
}

impl CoefficientField {
    pub fn zero() -> Self {
        CoefficientField {
            shape: FieldShape::Constant(0.0),
        }
    }

    pub fn constant(value: f64) -> Result<Self> {
        check_value(value)?;
        Ok(CoefficientField {
            shape: FieldShape::Constant(value),
        })
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidCoefficient(format!(
                "piecewise field needs {} values for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCoefficient("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCoefficient(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        for &v in &values {
            check_value(v)?;
        }
        Ok(CoefficientField {
            shape: FieldShape::Piecewise {
                breakpoints,
                values,
            },
        })
    }

    pub fn bump(value: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::bumps(vec![Bump { value, lo, hi }])
    }

    pub fn bumps(bumps: Vec<Bump>) -> Result<Self> {
        for b in &bumps {
            check_value(b.value)?;
            if !(b.lo.is_finite() && b.hi.is_finite()) || b.lo > b.hi {
                return Err(Error::InvalidCoefficient(format!(
                    "bump support [{}, {}] is not a bounded interval",
                    b.lo, b.hi
                )));
            }
        }
        Ok(CoefficientField {
            shape: FieldShape::Bumps(bumps),
        })
    }

    pub fn shape(&self) -> &FieldShape {
        &self.shape
    }

    /// Field value at `x`. Piecewise fields are right-continuous, bumps are
    /// closed on both ends.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            FieldShape::Constant(v) => *v,
            FieldShape::Piecewise {
                breakpoints,
                values,
            } => values[breakpoints.partition_point(|&b| b <= x)],
            FieldShape::Bumps(bumps) => bumps
                .iter()
                .filter(|b| b.lo <= x && x <= b.hi)
                .map(|b| b.value)
                .sum(),
        }
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        match &self.shape {
            FieldShape::Constant(v) => *v,
            FieldShape::Piecewise {
                breakpoints,
                values,
            } => values[breakpoints.partition_point(|&b| b < x)],
            FieldShape::Bumps(bumps) => bumps
                .iter()
                .filter(|b| b.lo < x && x <= b.hi)
                .map(|b| b.value)
                .sum(),
        }
    }

    pub fn right_limit(&self, x: f64) -> f64 {
        match &self.shape {
            FieldShape::Bumps(bumps) => bumps
                .iter()
                .filter(|b| b.lo <= x && x < b.hi)
                .map(|b| b.value)
                .sum(),
            _ => self.eval(x),
        }
    }

    /// Mean of the one-sided limits; the value finite-difference stencils
    /// sample at a node.
    pub fn node_value(&self, x: f64) -> f64 {
        0.5 * (self.left_limit(x) + self.right_limit(x))
    }

    /// Sorted discontinuity candidates.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.shape {
            FieldShape::Constant(_) => Vec::new(),
            FieldShape::Piecewise { breakpoints, .. } => breakpoints.clone(),
            FieldShape::Bumps(bumps) => bumps
                .iter()
                .filter(|b| b.value > 0.0)
                .flat_map(|b| [b.lo, b.hi])
                .collect(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn support(&self) -> Support {
        let mut intervals: Vec<(f64, f64)> = match &self.shape {
            FieldShape::Constant(v) => {
                return if *v > 0.0 {
                    Support::Unbounded
                } else {
                    Support::Empty
                }
            }
            FieldShape::Piecewise {
                breakpoints,
                values,
            } => {
                if values[0] > 0.0 || values[values.len() - 1] > 0.0 {
                    return Support::Unbounded;
                }
                (1..values.len() - 1)
                    .filter(|&k| values[k] > 0.0)
                    .map(|k| (breakpoints[k - 1], breakpoints[k]))
                    .collect()
            }
            FieldShape::Bumps(bumps) => bumps
                .iter()
                .filter(|b| b.value > 0.0)
                .map(|b| (b.lo, b.hi))
                .collect(),
        };
        if intervals.is_empty() {
            return Support::Empty;
        }
        Support::Bounded(merge_intervals(&mut intervals))
    }

    /// Essential infimum over the real line.
    pub fn infimum(&self) -> f64 {
        match &self.shape {
            FieldShape::Constant(v) => *v,
            FieldShape::Piecewise { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            FieldShape::Bumps(_) => 0.0,
        }
    }

    pub fn supremum(&self) -> f64 {
        match &self.shape {
            FieldShape::Constant(v) => *v,
            FieldShape::Piecewise { values, .. } => values.iter().copied().fold(0.0, f64::max),
            FieldShape::Bumps(_) => {
                // overlapping bumps add up; probe every piece
                let bps = self.breakpoints();
                let mut best: f64 = 0.0;
                for w in bps.windows(2) {
                    best = best.max(self.eval(0.5 * (w[0] + w[1])));
                }
                for &x in &bps {
                    best = best.max(self.eval(x));
                }
                best
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> CoefficientField {
        let shape = match &self.shape {
            FieldShape::Constant(v) => FieldShape::Constant(v * factor),
            FieldShape::Piecewise {
                breakpoints,
                values,
            } => FieldShape::Piecewise {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
            FieldShape::Bumps(bumps) => FieldShape::Bumps(
                bumps
                    .iter()
                    .map(|b| Bump {
                        value: b.value * factor,
                        ..*b
                    })
                    .collect(),
            ),
        };
        CoefficientField { shape }
    }

    /// Even almost everywhere: breakpoints mirror about 0 and the values on
    /// mirrored pieces agree.
    pub fn is_even(&self) -> bool {
        let bps = self.breakpoints();
        let n = bps.len();
        if (0..n).any(|k| bps[k] != -bps[n - 1 - k]) {
            return false;
        }
        let probe = |k: usize| -> f64 {
            // value on the k-th open piece
            match (k, n) {
                (_, 0) => self.eval(0.0),
                (0, _) => self.eval(bps[0] - 1.0),
                (k, n) if k == n => self.eval(bps[n - 1] + 1.0),
                (k, _) => self.eval(0.5 * (bps[k - 1] + bps[k])),
            }
        };
        (0..=n).all(|k| probe(k) == probe(n - k))
    }
}

pub(crate) fn merge_intervals(intervals: &mut [(f64, f64)]) -> Vec<(f64, f64)> {
    intervals.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for &(lo, hi) in intervals.iter() {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// Which built-in nonlinearity, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearityKind {
    /// `F = u1^2`, `H = u2^2`.
    DecoupledCubic,
    /// `F = H = u1^2 + u2^2`.
    SpinorCubic,
    Custom,
}

type Scalar2 = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// User-supplied `F`, `H`, with optional growth constants for the small- and
/// large-norm bounds.
pub struct CustomNonlinearity {
    pub name: String,
    pub f: Box<Scalar2>,
    pub h: Box<Scalar2>,
    pub growth: Option<GrowthConstants>,
}

#[derive(Clone)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    custom: Option<Arc<CustomNonlinearity>>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Nonlinearity").field(&self.name()).finish()
    }
}

impl PartialEq for Nonlinearity {
    fn eq(&self, other: &Self) -> bool {
        match (&self.custom, &other.custom) {
            (None, None) => self.kind == other.kind,
            (Some(p), Some(q)) => Arc::ptr_eq(p, q),
            _ => false,
        }
    }
}

impl Nonlinearity {
    pub fn decoupled_cubic() -> Self {
        Nonlinearity {
            kind: NonlinearityKind::DecoupledCubic,
            custom: None,
        }
    }

    pub fn spinor_cubic() -> Self {
        Nonlinearity {
            kind: NonlinearityKind::SpinorCubic,
            custom: None,
        }
    }

    pub fn custom(custom: CustomNonlinearity) -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Custom,
            custom: Some(Arc::new(custom)),
        }
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn custom_parts(&self) -> Option<&CustomNonlinearity> {
        self.custom.as_deref()
    }

    pub fn name(&self) -> &str {
        match self.kind {
            NonlinearityKind::DecoupledCubic => Preset::WeaklyCoupled.name(),
            NonlinearityKind::SpinorCubic => Preset::Spinor.name(),
            NonlinearityKind::Custom => self.custom.as_ref().map_or("custom", |c| &c.name),
        }
    }

    #[inline]
    pub fn f(&self, u1: f64, u2: f64) -> f64 {
        match self.kind {
            NonlinearityKind::DecoupledCubic => u1 * u1,
            NonlinearityKind::SpinorCubic => u1 * u1 + u2 * u2,
            NonlinearityKind::Custom => (self.custom.as_ref().unwrap().f)(u1, u2),
        }
    }

    #[inline]
    pub fn h(&self, u1: f64, u2: f64) -> f64 {
        match self.kind {
            NonlinearityKind::DecoupledCubic => u2 * u2,
            NonlinearityKind::SpinorCubic => u1 * u1 + u2 * u2,
            NonlinearityKind::Custom => (self.custom.as_ref().unwrap().h)(u1, u2),
        }
    }

    /// `(dF/du1, dF/du2)`; central differences for custom kinds.
    pub fn f_grad(&self, u1: f64, u2: f64) -> (f64, f64) {
        match self.kind {
            NonlinearityKind::DecoupledCubic => (2.0 * u1, 0.0),
            NonlinearityKind::SpinorCubic => (2.0 * u1, 2.0 * u2),
            NonlinearityKind::Custom => numeric_grad(|p, q| self.f(p, q), u1, u2),
        }
    }

    pub fn h_grad(&self, u1: f64, u2: f64) -> (f64, f64) {
        match self.kind {
            NonlinearityKind::DecoupledCubic => (0.0, 2.0 * u2),
            NonlinearityKind::SpinorCubic => (2.0 * u1, 2.0 * u2),
            NonlinearityKind::Custom => numeric_grad(|p, q| self.h(p, q), u1, u2),
        }
    }
}

fn numeric_grad(g: impl Fn(f64, f64) -> f64, u1: f64, u2: f64) -> (f64, f64) {
    let s1 = 1e-6 * u1.abs().max(1.0);
    let s2 = 1e-6 * u2.abs().max(1.0);
    (
        (g(u1 + s1, u2) - g(u1 - s1, u2)) / (2.0 * s1),
        (g(u1, u2 + s2) - g(u1, u2 - s2)) / (2.0 * s2),
    )
}

/// Built-in problem families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Spatially separated condensates / coupled fibres, no cross-phase term.
    WeaklyCoupled,
    /// Spinor condensate with equal scattering lengths.
    Spinor,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::WeaklyCoupled => "weakly-coupled",
            Preset::Spinor => "spinor",
        }
    }

    pub fn nonlinearity(self) -> Nonlinearity {
        match self {
            Preset::WeaklyCoupled => Nonlinearity::decoupled_cubic(),
            Preset::Spinor => Nonlinearity::spinor_cubic(),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weakly-coupled" | "decoupled-cubic" => Ok(Preset::WeaklyCoupled),
            "spinor" | "spinor-cubic" => Ok(Preset::Spinor),
            other => Err(Error::parse(
                "[nonlinearity]",
                format!("unknown kind '{other}' (expected weakly-coupled or spinor)"),
            )),
        }
    }
}

/// Uniform grid `x_j = (j + start) * spacing`, `j = 0..len`.
///
/// Symmetric grids have `start = -(len - 1) / 2`, so nodes mirror exactly
/// about the origin and `x = 0` is a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    half_width: f64,
    spacing: f64,
    start: i64,
    len: usize,
}

impl Grid {
    /// `points` nodes on `[-half_width, half_width]`; `points` must be odd.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Grid> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width {half_width} must be positive"
            )));
        }
        if points < 5 || points % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "point count {points} must be odd and at least 5"
            )));
        }
        Ok(Grid {
            half_width,
            spacing: 2.0 * half_width / (points - 1) as f64,
            start: -((points as i64 - 1) / 2),
            len: points,
        })
    }

    /// The non-negative half `[0, L]` of a symmetric grid.
    pub fn half_line(&self) -> Grid {
        let offset = (-self.start) as usize;
        Grid {
            half_width: self.half_width,
            spacing: self.spacing,
            start: 0,
            len: self.len - offset,
        }
    }

    pub fn is_half_line(&self) -> bool {
        self.start == 0
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        (j as i64 + self.start) as f64 * self.spacing
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn lo(&self) -> f64 {
        self.x(0)
    }

    pub fn hi(&self) -> f64 {
        self.x(self.len - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.x(j)).collect()
    }

    /// Index of the cell `[x_j, x_{j+1}]` containing `x` (clamped).
    pub fn cell_of(&self, x: f64) -> usize {
        let t = (x / self.spacing - self.start as f64).floor();
        (t.max(0.0) as usize).min(self.len - 2)
    }

    /// Index of the node closest to `x` (clamped).
    pub fn nearest(&self, x: f64) -> usize {
        let t = (x / self.spacing - self.start as f64).round();
        (t.max(0.0) as usize).min(self.len - 1)
    }

    /// Indices of nodes inside `[lo, hi]`.
    pub fn nodes_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let tol = 1e-9 * self.spacing;
        let first = (0..self.len).find(|&j| self.x(j) >= lo - tol);
        match first {
            None => 0..0,
            Some(f) => {
                let mut end = f;
                while end < self.len && self.x(end) <= hi + tol {
                    end += 1;
                }
                f..end
            }
        }
    }
}

/// Names of the six coefficient slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Role {
    pub const ALL: [Role; 6] = [Role::A, Role::B, Role::C, Role::D, Role::E, Role::F];

    pub fn name(self) -> &'static str {
        match self {
            Role::A => "a",
            Role::B => "b",
            Role::C => "c",
            Role::D => "d",
            Role::E => "e",
            Role::F => "f",
        }
    }

    /// `a`, `d` carry the linear potentials; the rest are coupling terms.
    pub fn is_potential(self) -> bool {
        matches!(self, Role::A | Role::D)
    }
}

/// The six coefficients of the system.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    pub a: CoefficientField,
    pub b: CoefficientField,
    pub c: CoefficientField,
    pub d: CoefficientField,
    pub e: CoefficientField,
    pub f: CoefficientField,
}

impl CoefficientSet {
    pub fn get(&self, role: Role) -> &CoefficientField {
        match role {
            Role::A => &self.a,
            Role::B => &self.b,
            Role::C => &self.c,
            Role::D => &self.d,
            Role::E => &self.e,
            Role::F => &self.f,
        }
    }
}

/// A validated coupled system on a grid.
///
/// Construction enforces positivity of `a_*`, `d_*` and bounded supports for
/// `b, c, e, f`. An empty coupling support is allowed here so that the
/// hypothesis report can describe it; [`Problem::validate_strict`] rejects
/// it.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    coefficients: CoefficientSet,
    nonlinearity: Nonlinearity,
    grid: Grid,
}

impl Problem {
    pub fn new(
        coefficients: CoefficientSet,
        nonlinearity: Nonlinearity,
        grid: Grid,
    ) -> Result<Problem> {
        for role in Role::ALL {
            let field = coefficients.get(role);
            if role.is_potential() {
                let inf = field.infimum();
                if !(inf > 0.0) {
                    return Err(Error::InvalidCoefficient(format!(
                        "{} has essential infimum {inf}, must be positive",
                        role.name()
                    )));
                }
            } else if field.support() == Support::Unbounded {
                return Err(Error::InvalidCoefficient(format!(
                    "{} must have bounded support",
                    role.name()
                )));
            }
        }
        let problem = Problem {
            coefficients,
            nonlinearity,
            grid,
        };
        if let Ok((lo, hi)) = problem.support_union() {
            let reach = lo.abs().max(hi.abs());
            if reach >= grid.half_width() {
                return Err(Error::InvalidGrid(format!(
                    "half-width {} does not contain the coupling support [{lo}, {hi}]",
                    grid.half_width()
                )));
            }
            let margin = problem.decay_margin().unwrap_or(f64::INFINITY);
            if margin < MIN_DECAY_MARGIN {
                return Err(Error::InvalidGrid(format!(
                    "decay margin {margin:.3} below {MIN_DECAY_MARGIN}; enlarge the half-width"
                )));
            }
        }
        Ok(problem)
    }

    /// [`Problem::new`] plus a non-empty coupling support.
    pub fn validate_strict(self) -> Result<Problem> {
        self.support_union()?;
        Ok(self)
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coefficients
    }

    pub fn a(&self) -> &CoefficientField {
        &self.coefficients.a
    }
    pub fn b(&self) -> &CoefficientField {
        &self.coefficients.b
    }
    pub fn c(&self) -> &CoefficientField {
        &self.coefficients.c
    }
    pub fn d(&self) -> &CoefficientField {
        &self.coefficients.d
    }
    pub fn e(&self) -> &CoefficientField {
        &self.coefficients.e
    }
    pub fn f(&self) -> &CoefficientField {
        &self.coefficients.f
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn with_grid(&self, grid: Grid) -> Result<Problem> {
        Problem::new(self.coefficients.clone(), self.nonlinearity.clone(), grid)
    }

    /// Disjoint intervals making up `Supp(b) u Supp(c) u Supp(e) u Supp(f)`.
    pub fn coupling_support(&self) -> Vec<(f64, f64)> {
        let mut all = Vec::new();
        for role in [Role::B, Role::C, Role::E, Role::F] {
            if let Support::Bounded(iv) = self.coefficients.get(role).support() {
                all.extend(iv);
            }
        }
        merge_intervals(&mut all)
    }

    /// Smallest closed interval containing the coupling support `M`.
    pub fn support_union(&self) -> Result<(f64, f64)> {
        let iv = self.coupling_support();
        match (iv.first(), iv.last()) {
            (Some(first), Some(last)) => Ok((first.0, last.1)),
            _ => Err(Error::EmptySupport),
        }
    }

    /// Hull of `M` intersected with `[0, inf)`.
    pub fn positive_support(&self) -> Result<(f64, f64)> {
        let iv: Vec<(f64, f64)> = self
            .coupling_support()
            .into_iter()
            .filter(|&(_, hi)| hi >= 0.0)
            .map(|(lo, hi)| (lo.max(0.0), hi))
            .collect();
        match (iv.first(), iv.last()) {
            (Some(first), Some(last)) => Ok((first.0, last.1)),
            _ => Err(Error::EmptySupport),
        }
    }

    pub fn origin_in_support(&self) -> bool {
        self.coupling_support()
            .iter()
            .any(|&(lo, hi)| lo <= 0.0 && 0.0 <= hi)
    }

    /// `sqrt(min(a_*, d_*)) * (L - max|x| over M)`.
    pub fn decay_margin(&self) -> Option<f64> {
        let (lo, hi) = self.support_union().ok()?;
        let floor = self.a().infimum().min(self.d().infimum());
        Some(floor.sqrt() * (self.grid.half_width() - lo.abs().max(hi.abs())))
    }

    /// All coefficient discontinuities, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut all: Vec<f64> = Role::ALL
            .iter()
            .flat_map(|&r| self.coefficients.get(r).breakpoints())
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    /// Multiplies `b, e` by `linear` and `c, f` by `nonlinear`.
    pub fn scaled(&self, linear: f64, nonlinear: f64) -> Problem {
        let c = &self.coefficients;
        Problem {
            coefficients: CoefficientSet {
                a: c.a.clone(),
                b: c.b.scaled(linear),
                c: c.c.scaled(nonlinear),
                d: c.d.clone(),
                e: c.e.scaled(linear),
                f: c.f.scaled(nonlinear),
            },
            nonlinearity: self.nonlinearity.clone(),
            grid: self.grid,
        }
    }

    /// Names of the coefficients that are not even.
    pub fn uneven_coefficients(&self) -> Vec<&'static str> {
        Role::ALL
            .iter()
            .filter(|&&r| !self.coefficients.get(r).is_even())
            .map(|r| r.name())
            .collect()
    }
}

/// Builds a problem with one of the built-in nonlinearities and enforces
/// every model invariant, including a non-empty coupling support.
pub fn preset_problem(preset: Preset, coefficients: CoefficientSet, grid: Grid) -> Result<Problem> {
    Problem::new(coefficients, preset.nonlinearity(), grid)?.validate_strict()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_bumps() -> CoefficientSet {
        CoefficientSet {
            a: CoefficientField::constant(1.0).unwrap(),
            b: CoefficientField::bump(0.5, -1.0, 1.0).unwrap(),
            c: CoefficientField::bump(1.0, -1.0, 1.0).unwrap(),
            d: CoefficientField::constant(1.0).unwrap(),
            e: CoefficientField::bump(0.5, -1.0, 1.0).unwrap(),
            f: CoefficientField::bump(1.0, -1.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn eval_conventions() {
        assert_eq!(CoefficientField::constant(1.0).unwrap().eval(3.7), 1.0);
        let bump = CoefficientField::bump(2.0, -1.0, 1.0).unwrap();
        assert_eq!(bump.eval(2.0), 0.0);
        assert_eq!(bump.eval(1.0), 2.0);
        assert_eq!(bump.node_value(1.0), 1.0);
        let step = CoefficientField::piecewise(vec![0.0], vec![1.0, 4.0]).unwrap();
        assert_eq!(step.eval(0.0), 4.0);
        assert_eq!(step.left_limit(0.0), 1.0);
        assert_eq!(step.node_value(0.0), 2.5);
    }

    #[test]
    fn negative_values_rejected() {
        assert!(matches!(
            CoefficientField::bump(-1.0, 0.0, 1.0),
            Err(Error::InvalidCoefficient(_))
        ));
        assert!(CoefficientField::piecewise(vec![1.0, 0.0], vec![1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn support_union_examples() {
        let grid = Grid::symmetric(15.0, 301).unwrap();
        let mut set = unit_bumps();
        set.b = CoefficientField::bump(1.0, -1.0, 1.0).unwrap();
        set.c = CoefficientField::bump(1.0, 0.0, 2.0).unwrap();
        set.e = CoefficientField::zero();
        set.f = CoefficientField::zero();
        let p = Problem::new(set.clone(), Nonlinearity::decoupled_cubic(), grid).unwrap();
        assert_eq!(p.support_union().unwrap(), (-1.0, 2.0));

        set.b = CoefficientField::zero();
        set.c = CoefficientField::zero();
        let p = Problem::new(set.clone(), Nonlinearity::decoupled_cubic(), grid).unwrap();
        assert_eq!(p.support_union(), Err(Error::EmptySupport));
        assert!(p.clone().validate_strict().is_err());

        set.b = CoefficientField::bump(1.0, 1.0, 2.0).unwrap();
        let p = Problem::new(set, Nonlinearity::decoupled_cubic(), grid).unwrap();
        assert_eq!(p.support_union().unwrap(), (1.0, 2.0));
        assert!(!p.origin_in_support());
    }

    #[test]
    fn presets_wire_nonlinearities() {
        let grid = Grid::symmetric(15.0, 301).unwrap();
        let p = preset_problem(Preset::WeaklyCoupled, unit_bumps(), grid).unwrap();
        assert_eq!(p.nonlinearity().f(2.0, 3.0), 4.0);
        assert_eq!(p.nonlinearity().h(2.0, 3.0), 9.0);
        let p = preset_problem(Preset::Spinor, unit_bumps(), grid).unwrap();
        assert_eq!(p.nonlinearity().f(2.0, 3.0), 13.0);
        assert_eq!(p.nonlinearity().h(2.0, 3.0), 13.0);

        let mut bad = unit_bumps();
        bad.a = CoefficientField::zero();
        assert!(matches!(
            preset_problem(Preset::WeaklyCoupled, bad, grid),
            Err(Error::InvalidCoefficient(_))
        ));
        let mut unbounded = unit_bumps();
        unbounded.c = CoefficientField::constant(1.0).unwrap();
        assert!(matches!(
            preset_problem(Preset::WeaklyCoupled, unbounded, grid),
            Err(Error::InvalidCoefficient(_))
        ));
    }

    #[test]
    fn grid_rejects_even_counts_and_short_domains() {
        assert!(Grid::symmetric(10.0, 100).is_err());
        let grid = Grid::symmetric(5.0, 101).unwrap();
        assert!(matches!(
            Problem::new(unit_bumps(), Nonlinearity::decoupled_cubic(), grid),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn grid_is_mirror_exact() {
        let g = Grid::symmetric(15.0, 3001).unwrap();
        for j in 0..g.len() {
            assert_eq!(g.x(j), -g.x(g.len() - 1 - j));
        }
        assert_eq!(g.x(1500), 0.0);
        let half = g.half_line();
        assert_eq!(half.len(), 1501);
        assert_eq!(half.x(0), 0.0);
        assert_eq!(half.x(100), g.x(1600));
    }

    #[test]
    fn evenness() {
        let even = CoefficientField::bumps(vec![
            Bump { value: 1.0, lo: -2.0, hi: -1.0 },
            Bump { value: 1.0, lo: 1.0, hi: 2.0 },
        ])
        .unwrap();
        assert!(even.is_even());
        assert!(!CoefficientField::bump(1.0, 0.0, 1.0).unwrap().is_even());
        let well = CoefficientField::piecewise(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        assert!(well.is_even());
    }
}

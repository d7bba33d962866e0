//! Numerical checks of the existence hypotheses, growth constants for the
//! built-in nonlinearities, and the annulus radii `r < R` that bracket a
//! nontrivial fixed point.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::greens::{ConeConstants, Source};
use crate::model::{CoefficientField, Nonlinearity, NonlinearityKind, Problem, Role};
use crate::operator::Kernels;

/// Strict inequalities on grid maxima are tested against `1 - MARGIN`.
pub const MARGIN: f64 = 1e-9;

/// Growth constants for the small- and large-norm bounds on `F`, `H`.
///
/// Small norms: `F, H <= k ||u||^gamma` when `||u|| < r0`.
/// Large norms: `F >= K R^delta` when `u1` lies in the shell
/// `[m1 p01 R, R]` on `M` (and likewise `H` with `u2`), for `R > R0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthConstants {
    pub gamma: f64,
    pub k: f64,
    pub r0: f64,
    pub delta: f64,
    pub big_k: f64,
    pub big_r0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "n/a",
        }
    }

    fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One checked hypothesis with its witness values.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisEntry {
    /// `"i"` .. `"vi"`, or `"vi'"` for the ratio condition.
    pub id: &'static str,
    pub status: Status,
    pub detail: String,
    pub witnesses: Vec<(String, f64)>,
}

impl HypothesisEntry {
    fn new(id: &'static str, status: Status, detail: impl Into<String>) -> Self {
        HypothesisEntry {
            id,
            status,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }

    fn witness(mut self, name: &str, value: f64) -> Self {
        self.witnesses.push((name.to_string(), value));
        self
    }

    pub fn witness_value(&self, name: &str) -> Option<f64> {
        self.witnesses
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

/// Hypotheses `(i)`-`(vi)` that the existence result needs.
pub const REQUIRED: [&str; 6] = ["i", "ii", "iii", "iv", "v", "vi"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HypothesisReport {
    pub entries: Vec<HypothesisEntry>,
    pub cone: Option<ConeConstants>,
    pub growth: Option<GrowthConstants>,
    pub radii: Option<AnnulusRadii>,
    pub warnings: Vec<String>,
}

impl HypothesisReport {
    pub fn entry(&self, id: &str) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn status(&self, id: &str) -> Status {
        self.entry(id).map_or(Status::NotApplicable, |e| e.status)
    }

    pub fn passes(&self, id: &str) -> bool {
        self.status(id) == Status::Pass
    }

    /// Whether every required hypothesis passed.
    pub fn all_required_pass(&self) -> bool {
        REQUIRED.iter().all(|id| self.passes(id))
    }

    /// Ids of required hypotheses that did not pass.
    pub fn failures(&self) -> Vec<&'static str> {
        REQUIRED
            .iter()
            .copied()
            .filter(|id| !self.passes(id))
            .collect()
    }

    fn push(&mut self, entry: HypothesisEntry) {
        self.entries.retain(|e| e.id != entry.id);
        self.entries.push(entry);
    }
}

/// Side of the sample lattice for the sign check of `F`, `H`.
const LATTICE: usize = 41;
const LATTICE_EDGE: f64 = 10.0;

/// `(i)` positivity of `a, d` and non-negativity of `b, c, e, f`;
/// `(ii)` non-empty compact coupling support;
/// `(iii)` `F, H >= 0` on a lattice of `[0, 10]^2`.
pub fn check_structural(p: &Problem) -> HypothesisReport {
    let mut report = HypothesisReport::default();

    let mut worst: Option<(Role, f64)> = None;
    let mut i_entry = HypothesisEntry::new("i", Status::Pass, "");
    for role in Role::ALL {
        let inf = p.coefficients().get(role).infimum();
        i_entry = i_entry.witness(&format!("inf_{}", role.name()), inf);
        let ok = if role.is_potential() { inf > 0.0 } else { inf >= 0.0 };
        if !ok && worst.is_none() {
            worst = Some((role, inf));
        }
    }
    match worst {
        None => i_entry.detail = "a, d bounded below by positive constants; b, c, e, f >= 0".into(),
        Some((role, inf)) => {
            i_entry.status = Status::Fail;
            i_entry.detail = format!("{} has infimum {inf}", role.name());
        }
    }
    report.push(i_entry);

    let ii = match p.support_union() {
        Ok((lo, hi)) => HypothesisEntry::new("ii", Status::Pass, format!("M within [{lo}, {hi}]"))
            .witness("m_lo", lo)
            .witness("m_hi", hi),
        Err(e) => HypothesisEntry::new("ii", Status::Fail, e.to_string()),
    };
    report.push(ii);

    let nl = p.nonlinearity();
    let step = LATTICE_EDGE / (LATTICE - 1) as f64;
    let mut bad: Option<(f64, f64, &str, f64)> = None;
    'scan: for i in 0..LATTICE {
        for j in 0..LATTICE {
            let (u1, u2) = (i as f64 * step, j as f64 * step);
            for (name, v) in [("F", nl.f(u1, u2)), ("H", nl.h(u1, u2))] {
                if !(v >= 0.0) {
                    bad = Some((u1, u2, name, v));
                    break 'scan;
                }
            }
        }
    }
    let iii = match bad {
        None => HypothesisEntry::new("iii", Status::Pass, "F, H >= 0 on the sample lattice"),
        Some((u1, u2, name, v)) => HypothesisEntry::new(
            "iii",
            Status::Fail,
            format!("{name}({u1}, {u2}) = {v} < 0"),
        )
        .witness("u1", u1)
        .witness("u2", u2)
        .witness("value", v),
    };
    report.push(iii);
    report
}

/// Grid samples of `int_M G1 b`, `int_M G2 e`, `int_M G1 c`, `int_M G2 f`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessIntegrals {
    pub linear: [Vec<f64>; 2],
    pub nonlinear: [Vec<f64>; 2],
}

pub fn witness_integrals(p: &Problem, kernels: &Kernels) -> WitnessIntegrals {
    let ones = vec![1.0; kernels.grid().len()];
    let apply = |i: usize, w: &CoefficientField| {
        kernels.operator(i).apply(&[Source {
            weight: w,
            profile: &ones,
        }])
    };
    WitnessIntegrals {
        linear: [apply(0, p.b()), apply(1, p.e())],
        nonlinear: [apply(0, p.c()), apply(1, p.f())],
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// `(vi)`: `int_M G1 b < 1` and `int_M G2 e < 1` everywhere.
pub fn check_linear_smallness(p: &Problem, kernels: &Kernels) -> HypothesisEntry {
    let w = witness_integrals(p, kernels);
    linear_smallness_entry(&w)
}

fn linear_smallness_entry(w: &WitnessIntegrals) -> HypothesisEntry {
    let v1 = max_of(&w.linear[0]);
    let v2 = max_of(&w.linear[1]);
    let ok = v1 < 1.0 - MARGIN && v2 < 1.0 - MARGIN;
    HypothesisEntry::new(
        "vi",
        Status::from_bool(ok),
        format!("max int G1 b = {v1}, max int G2 e = {v2}"),
    )
    .witness("max_G1b", v1)
    .witness("max_G2e", v2)
}

/// `sup num/den` over nodes, cell midpoints and one-sided limits at every
/// breakpoint of either field.
fn sup_ratio(p: &Problem, num: &CoefficientField, den: &CoefficientField) -> Result<f64> {
    let g = p.grid();
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(2 * g.len());
    for j in 0..g.len() {
        let x = g.x(j);
        samples.push((num.eval(x), den.eval(x)));
        if j + 1 < g.len() {
            let m = 0.5 * (x + g.x(j + 1));
            samples.push((num.eval(m), den.eval(m)));
        }
    }
    let mut cuts = num.breakpoints();
    cuts.extend(den.breakpoints());
    for x in cuts {
        samples.push((num.left_limit(x), den.left_limit(x)));
        samples.push((num.right_limit(x), den.right_limit(x)));
    }
    let mut worst: f64 = 0.0;
    for (i, &(n, d)) in samples.iter().enumerate() {
        if n == 0.0 {
            continue;
        }
        if !(d > 0.0) {
            let x = if i < 2 * g.len() { g.x(i / 2) } else { f64::NAN };
            return Err(Error::DivisionDomain(x));
        }
        worst = worst.max(n / d);
    }
    Ok(worst)
}

/// `(vi')`: `sup b/a < 1` and `sup e/d < 1`.
pub fn check_ratio_condition(p: &Problem) -> Result<HypothesisEntry> {
    let r1 = sup_ratio(p, p.b(), p.a())?;
    let r2 = sup_ratio(p, p.e(), p.d())?;
    Ok(HypothesisEntry::new(
        "vi'",
        Status::from_bool(r1 < 1.0 && r2 < 1.0),
        format!("sup b/a = {r1}, sup e/d = {r2}"),
    )
    .witness("sup_b_over_a", r1)
    .witness("sup_e_over_d", r2))
}

/// Growth constants for the built-in cubic nonlinearities, or the ones a
/// custom nonlinearity carries.
pub fn growth_constants(nl: &Nonlinearity, cone: &ConeConstants) -> Result<GrowthConstants> {
    let shell = cone.product(0).min(cone.product(1));
    let power = |k| GrowthConstants {
        gamma: 2.0,
        k,
        r0: f64::INFINITY,
        delta: 2.0,
        big_k: shell * shell,
        big_r0: 0.0,
    };
    match nl.kind() {
        NonlinearityKind::DecoupledCubic => Ok(power(1.0)),
        NonlinearityKind::SpinorCubic => Ok(power(2.0)),
        NonlinearityKind::Custom => nl
            .custom_parts()
            .and_then(|c| c.growth)
            .ok_or_else(|| Error::UnsupportedNonlinearity(nl.name().to_string())),
    }
}

/// Radii of the annulus `r <= ||u|| <= R` holding a nontrivial fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusRadii {
    pub r: f64,
    pub big_r: f64,
    /// `max_x max(int G1 b, int G2 e)`.
    pub b: f64,
    /// `max_x max(int G1 c, int G2 f)`.
    pub c_max: f64,
    /// `min_i max_{x in M} int G_i c_i`.
    pub c_min: f64,
}

/// `B`, `C_max` and `C_min` from the witness integrals.
fn annulus_inputs(w: &WitnessIntegrals, p: &Problem, kernels: &Kernels) -> Result<(f64, f64, f64)> {
    let b = max_of(&w.linear[0]).max(max_of(&w.linear[1]));
    let c_max = max_of(&w.nonlinear[0]).max(max_of(&w.nonlinear[1]));
    let (lo, hi) = kernels.cone_support(p)?;
    let on_m = kernels.grid().nodes_in(lo, hi);
    let c_min = (0..2)
        .map(|i| on_m.clone().map(|j| w.nonlinear[i][j]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    Ok((b, c_max, c_min))
}

pub fn annulus_radii(p: &Problem, kernels: &Kernels, gc: &GrowthConstants) -> Result<AnnulusRadii> {
    let w = witness_integrals(p, kernels);
    radii_from(&w, p, kernels, gc)
}

fn radii_from(
    w: &WitnessIntegrals,
    p: &Problem,
    kernels: &Kernels,
    gc: &GrowthConstants,
) -> Result<AnnulusRadii> {
    let (b, c_max, c_min) = annulus_inputs(w, p, kernels)?;
    if b >= 1.0 {
        return Err(Error::HypothesisFailure(format!(
            "linear smallness fails: B = {b} >= 1"
        )));
    }
    if !(c_min > 0.0) {
        return Err(Error::HypothesisFailure(
            "C_min = 0: the large-norm bound cannot hold".into(),
        ));
    }
    let r = ((1.0 - b) / (gc.k * c_max)).powf(1.0 / gc.gamma).min(gc.r0);
    let mut big_r = (1.0 / (gc.big_k * c_min)).powf(1.0 / gc.delta).max(gc.big_r0);
    if big_r <= r {
        big_r = 2.0 * r;
    }
    Ok(AnnulusRadii {
        r,
        big_r,
        b,
        c_max,
        c_min,
    })
}

/// Which coefficients a branch parameter `lambda` multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `c, f` scaled by `lambda`.
    NonlinearScaled,
    /// `b, c, e, f` all scaled by `lambda`.
    FullyScaled,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::NonlinearScaled => "nonlinear",
            Variant::FullyScaled => "fully",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "nonlinear" | "nonlinear-scaled" => Ok(Variant::NonlinearScaled),
            "fully" | "fully-scaled" => Ok(Variant::FullyScaled),
            other => Err(Error::parse(
                "variant",
                format!("unknown variant '{other}' (expected nonlinear or fully)"),
            )),
        }
    }
}

/// Radii `r_lambda <= R_lambda` for one branch parameter, with the
/// admissible bound `m` on `lambda` for the fully-scaled variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchBounds {
    pub lambda: f64,
    pub r: f64,
    pub big_r: f64,
    pub parameter_bound: Option<f64>,
}

/// Problem-level constants shared by every `lambda` on a branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchConstants {
    pub b: f64,
    pub c_max: f64,
    /// `m1 p01 * max_{x in M} int G1 c`.
    pub shell: f64,
}

pub fn branch_constants(p: &Problem, kernels: &Kernels) -> Result<BranchConstants> {
    let w = witness_integrals(p, kernels);
    let cone = kernels.cone(p)?;
    let (b, c_max, _) = annulus_inputs(&w, p, kernels)?;
    let (lo, hi) = kernels.cone_support(p)?;
    let c1_on_m = kernels
        .grid()
        .nodes_in(lo, hi)
        .map(|j| w.nonlinear[0][j])
        .fold(0.0, f64::max);
    Ok(BranchConstants {
        b,
        c_max,
        shell: cone.product(0) * c1_on_m,
    })
}

pub fn branch_bounds_from(
    k: &BranchConstants,
    lambda: f64,
    variant: Variant,
) -> Result<BranchBounds> {
    let bound = match variant {
        Variant::NonlinearScaled => f64::INFINITY,
        Variant::FullyScaled => 1.0 / k.b,
    };
    if !(lambda > 0.0) || lambda >= bound {
        return Err(Error::ParameterOutOfRange {
            value: lambda,
            bound,
        });
    }
    let linear = match variant {
        Variant::NonlinearScaled => k.b,
        Variant::FullyScaled => lambda * k.b,
    };
    if linear >= 1.0 - MARGIN {
        return Err(Error::HypothesisFailure(format!(
            "linear smallness fails: B = {linear}"
        )));
    }
    if !(k.c_max > 0.0 && k.shell > 0.0) {
        return Err(Error::HypothesisFailure(
            "c vanishes on M: the large-norm bound cannot hold".into(),
        ));
    }
    let r = ((1.0 - linear) / (lambda * k.c_max)).sqrt();
    let big_r = (1.0 / (lambda * k.shell)).sqrt().max(r);
    Ok(BranchBounds {
        lambda,
        r,
        big_r,
        parameter_bound: (variant == Variant::FullyScaled).then_some(bound),
    })
}

pub fn branch_bounds(
    p: &Problem,
    kernels: &Kernels,
    lambda: f64,
    variant: Variant,
) -> Result<BranchBounds> {
    branch_bounds_from(&branch_constants(p, kernels)?, lambda, variant)
}

/// Runs every check and fills in cone, growth constants and radii when they
/// can be derived. Errors only on failures to build the linear basis.
pub fn check_all(p: &Problem, kernels: &Kernels) -> HypothesisReport {
    let mut report = check_structural(p);
    if let Some(m) = p.decay_margin() {
        if m < crate::model::RECOMMENDED_DECAY_MARGIN {
            report.warnings.push(format!(
                "decay margin {m:.3} is below the recommended {}",
                crate::model::RECOMMENDED_DECAY_MARGIN
            ));
        }
    }
    let w = witness_integrals(p, kernels);
    report.push(linear_smallness_entry(&w));
    match check_ratio_condition(p) {
        Ok(e) => report.push(e),
        Err(e) => report.push(HypothesisEntry::new("vi'", Status::Fail, e.to_string())),
    }

    let cone = match kernels.cone(p) {
        Ok(c) => c,
        Err(e) => {
            let msg = format!("no cone: {e}");
            report.push(HypothesisEntry::new("iv", Status::NotApplicable, msg.clone()));
            report.push(HypothesisEntry::new("v", Status::NotApplicable, msg));
            report.entries.sort_by_key(|e| order(e.id));
            return report;
        }
    };
    report.cone = Some(cone);
    match growth_constants(p.nonlinearity(), &cone) {
        Ok(gc) => {
            report.growth = Some(gc);
            report.push(
                HypothesisEntry::new(
                    "iv",
                    Status::Pass,
                    format!("F, H <= {} |u|^{} for |u| < {}", gc.k, gc.gamma, gc.r0),
                )
                .witness("gamma", gc.gamma)
                .witness("k", gc.k)
                .witness("r0", gc.r0),
            );
            report.push(
                HypothesisEntry::new(
                    "v",
                    Status::Pass,
                    format!("F, H >= {} R^{} on the shell for R > {}", gc.big_k, gc.delta, gc.big_r0),
                )
                .witness("delta", gc.delta)
                .witness("K", gc.big_k)
                .witness("R0", gc.big_r0),
            );
            match radii_from(&w, p, kernels, &gc) {
                Ok(radii) => report.radii = Some(radii),
                Err(e) => report.warnings.push(format!("no annulus: {e}")),
            }
        }
        Err(e) => {
            report.push(HypothesisEntry::new("iv", Status::Fail, e.to_string()));
            report.push(HypothesisEntry::new("v", Status::Fail, e.to_string()));
        }
    }
    report.entries.sort_by_key(|e| order(e.id));
    report
}

fn order(id: &str) -> usize {
    ["i", "ii", "iii", "iv", "v", "vi", "vi'"]
        .iter()
        .position(|&x| x == id)
        .unwrap_or(usize::MAX)
}

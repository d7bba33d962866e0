//! Decaying solutions of `-phi'' + a(x) phi = 0`, the Green's kernel
//! `G(x, s) = phi1(min(x, s)) * phi2(max(x, s))`, its O(N) application to
//! compactly supported sources, and the cone constants `m_i`, `p0_i`.
//!
//! `phi1` is integrated from the left boundary and `phi2` from the right,
//! both in log-derivative form so that nothing overflows for wide domains.
//! On the half line `[0, L]`, `phi1` is the solution vanishing at the origin
//! and is integrated through the reciprocal variable `z = phi / phi'`.
//!
//! The pair is normalized so that `phi1 phi2' - phi1' phi2 = -1` and
//! `phi1(x0) = phi2(x0)` at their crossing point `x0`.

use crate::error::{Error, Result};
use crate::model::{CoefficientField, Grid};
use crate::quadrature::PanelPlan;

/// Which boundary-value problem the basis belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Decay at both ends of `[-L, L]`.
    FullLine,
    /// `u(0) = 0` and decay at `L`.
    HalfLine,
}

#[derive(Clone, Copy, Debug)]
enum Form {
    /// `w = phi'/phi`, `l = ln phi`.
    LogDerivative,
    /// `z = phi/phi'`, `l = ln phi'`.
    Reciprocal,
}

#[derive(Clone, Copy, Debug)]
struct State {
    y: f64,
    l: f64,
}

#[inline]
fn rk4(form: Form, a: f64, s: State, dt: f64) -> State {
    let rhs = |y: f64| -> (f64, f64) {
        match form {
            Form::LogDerivative => (a - y * y, y),
            Form::Reciprocal => (1.0 - a * y * y, a * y),
        }
    };
    let (k1y, k1l) = rhs(s.y);
    let (k2y, k2l) = rhs(s.y + 0.5 * dt * k1y);
    let (k3y, k3l) = rhs(s.y + 0.5 * dt * k2y);
    let (k4y, k4l) = rhs(s.y + dt * k3y);
    State {
        y: s.y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        l: s.l + dt / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l),
    }
}

/// Integrates from `from` to `to` (either direction), one RK4 step per
/// piece of constant coefficient, with steps no longer than `max_step`.
fn advance(
    field: &CoefficientField,
    breaks: &[f64],
    form: Form,
    from: f64,
    to: f64,
    mut s: State,
    max_step: f64,
) -> State {
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    let i0 = breaks.partition_point(|&b| b <= lo);
    let i1 = breaks.partition_point(|&b| b < hi);
    let mut marks = Vec::with_capacity(i1.saturating_sub(i0) + 2);
    marks.push(from);
    if from < to {
        marks.extend(breaks[i0..i1].iter().copied());
    } else {
        marks.extend(breaks[i0..i1].iter().rev().copied());
    }
    marks.push(to);
    for w in marks.windows(2) {
        let span = w[1] - w[0];
        if span == 0.0 {
            continue;
        }
        let a = field.eval(0.5 * (w[0] + w[1]));
        let steps = (span.abs() / max_step).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            s = rk4(form, a, s, dt);
        }
    }
    s
}

#[derive(Clone, Debug)]
struct Sweep {
    nodes: Vec<State>,
    mids: Vec<State>,
}

fn sweep(
    field: &CoefficientField,
    breaks: &[f64],
    grid: &Grid,
    form: Form,
    forward: bool,
    init: State,
    substeps: usize,
) -> Sweep {
    let n = grid.len();
    let h = grid.spacing();
    let max_step = h / (2 * substeps) as f64 * (1.0 + 1e-12);
    let mut nodes = vec![init; n];
    let mut mids = vec![init; n - 1];
    if forward {
        for j in 0..n - 1 {
            let (x, xm, xn) = (grid.x(j), grid.x(j) + 0.5 * h, grid.x(j + 1));
            mids[j] = advance(field, breaks, form, x, xm, nodes[j], max_step);
            nodes[j + 1] = advance(field, breaks, form, xm, xn, mids[j], max_step);
        }
    } else {
        for j in (0..n - 1).rev() {
            let (x, xm, xp) = (grid.x(j + 1), grid.x(j) + 0.5 * h, grid.x(j));
            mids[j] = advance(field, breaks, form, x, xm, nodes[j + 1], max_step);
            nodes[j] = advance(field, breaks, form, xm, xp, mids[j], max_step);
        }
    }
    Sweep { nodes, mids }
}

/// Numerical quality figures recorded when a basis is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisCertificate {
    /// Raw Wronskian before normalization (at the node nearest `x0`).
    pub raw_wronskian: f64,
    /// `max_j |W_j / W_ref - 1|` over all nodes.
    pub wronskian_drift: f64,
    /// Step-doubling estimate of the error in `ln phi` (max over nodes).
    pub richardson_error: f64,
    /// Richardson-refined finite-difference residual of the ODE, relative to
    /// `max |phi|`.
    pub ode_residual: f64,
}

/// The two decaying solutions of one linear operator on a grid.
#[derive(Clone, Debug)]
pub struct LinearBasis {
    grid: Grid,
    domain: Domain,
    field: CoefficientField,
    breaks: Vec<f64>,
    /// normalized `ln phi_i` at nodes and cell midpoints
    log_phi: [Vec<f64>; 2],
    mid_log_phi: [Vec<f64>; 2],
    raw1: Vec<State>,
    raw2: Vec<State>,
    shift: f64,
    x0: f64,
    certificate: BasisCertificate,
}

/// Full-line basis for `-phi'' + a phi = 0` on a symmetric grid.
pub fn build_linear_basis(field: &CoefficientField, grid: &Grid) -> Result<LinearBasis> {
    LinearBasis::new(field, grid, Domain::FullLine)
}

fn log_sum_exp(p: f64, q: f64) -> f64 {
    let m = p.max(q);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((p - m).exp() + (q - m).exp()).ln()
}

impl LinearBasis {
    /// `grid` must be symmetric for [`Domain::FullLine`] and start at the
    /// origin for [`Domain::HalfLine`].
    pub fn new(field: &CoefficientField, grid: &Grid, domain: Domain) -> Result<LinearBasis> {
        let inf = field.infimum();
        if !(inf > 0.0) {
            return Err(Error::NonPositivePotential(inf));
        }
        match domain {
            Domain::FullLine if grid.is_half_line() => {
                return Err(Error::InvalidGrid("full-line basis needs a symmetric grid".into()))
            }
            Domain::HalfLine if !grid.is_half_line() => {
                return Err(Error::InvalidGrid("half-line basis needs a grid starting at 0".into()))
            }
            _ => {}
        }
        let breaks = field.breakpoints();
        let (lo, hi) = (grid.lo(), grid.hi());

        let run = |substeps: usize| -> (Sweep, Sweep) {
            let first = match domain {
                Domain::FullLine => sweep(
                    field,
                    &breaks,
                    grid,
                    Form::LogDerivative,
                    true,
                    State {
                        y: field.right_limit(lo).sqrt(),
                        l: 0.0,
                    },
                    substeps,
                ),
                Domain::HalfLine => sweep(
                    field,
                    &breaks,
                    grid,
                    Form::Reciprocal,
                    true,
                    State { y: 0.0, l: 0.0 },
                    substeps,
                ),
            };
            let second = sweep(
                field,
                &breaks,
                grid,
                Form::LogDerivative,
                false,
                State {
                    y: -field.left_limit(hi).sqrt(),
                    l: 0.0,
                },
                substeps,
            );
            (first, second)
        };
        let (s1, s2) = run(1);
        let (f1, f2) = run(2);

        let form1 = match domain {
            Domain::FullLine => Form::LogDerivative,
            Domain::HalfLine => Form::Reciprocal,
        };
        // (ln phi, ln |phi'|) from a raw state
        let logs = |form: Form, s: &State| -> (f64, f64) {
            match form {
                Form::LogDerivative => (s.l, s.l + s.y.abs().ln()),
                Form::Reciprocal => (s.y.ln() + s.l, s.l),
            }
        };

        let n = grid.len();
        let mut l1 = Vec::with_capacity(n);
        let mut l2 = Vec::with_capacity(n);
        let mut log_w = Vec::with_capacity(n);
        let mut richardson: f64 = 0.0;
        for j in 0..n {
            let (a1, d1) = logs(form1, &s1.nodes[j]);
            let (a2, d2) = logs(Form::LogDerivative, &s2.nodes[j]);
            if !(a1.is_finite() || (domain == Domain::HalfLine && j == 0)) || !a2.is_finite() {
                return Err(Error::IntegrationOverflow(grid.x(j)));
            }
            l1.push(a1);
            l2.push(a2);
            // W = -(phi1 |phi2'| + phi1' phi2)
            log_w.push(log_sum_exp(a1 + d2, d1 + a2));
            let (r1, _) = logs(form1, &f1.nodes[j]);
            let (r2, _) = logs(Form::LogDerivative, &f2.nodes[j]);
            if a1.is_finite() {
                richardson = richardson.max((a1 - r1).abs() * 16.0 / 15.0);
            }
            richardson = richardson.max((a2 - r2).abs() * 16.0 / 15.0);
        }

        // crossing of ln phi1 - ln phi2, which is strictly increasing
        let diff = |j: usize| l1[j] - l2[j];
        let k = (0..n).position(|j| diff(j) > 0.0).unwrap_or(n - 1).max(1);
        let (dl, dr) = (diff(k - 1), diff(k));
        let x0 = if dl.is_finite() && dr > dl {
            grid.x(k - 1) + grid.spacing() * (-dl) / (dr - dl)
        } else {
            grid.x(k)
        };

        let j_ref = grid.nearest(x0);
        let log_w_ref = log_w[j_ref];
        let drift = log_w
            .iter()
            .map(|lw| (lw - log_w_ref).exp_m1().abs())
            .fold(0.0, f64::max);
        // equal shifts keep phi1(x0) = phi2(x0) and give |W| = 1
        let shift = -0.5 * log_w_ref;

        let log_phi = [
            l1.iter().map(|v| v + shift).collect::<Vec<_>>(),
            l2.iter().map(|v| v + shift).collect::<Vec<_>>(),
        ];
        let mid_log_phi = [
            s1.mids.iter().map(|s| logs(form1, s).0 + shift).collect(),
            s2.mids
                .iter()
                .map(|s| logs(Form::LogDerivative, s).0 + shift)
                .collect(),
        ];

        let mut basis = LinearBasis {
            grid: *grid,
            domain,
            field: field.clone(),
            breaks,
            log_phi,
            mid_log_phi,
            raw1: s1.nodes,
            raw2: s2.nodes,
            shift,
            x0,
            certificate: BasisCertificate {
                raw_wronskian: -log_w_ref.exp(),
                wronskian_drift: drift,
                richardson_error: richardson,
                ode_residual: 0.0,
            },
        };
        basis.certificate.ode_residual = basis.ode_residual();
        Ok(basis)
    }

    fn ode_residual(&self) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            let l = &self.log_phi[i];
            let lm = &self.mid_log_phi[i];
            let lmax = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for j in 1..g.len() - 1 {
                let (xl, xr) = (g.x(j - 1), g.x(j + 1));
                if self.breaks.iter().any(|&b| b > xl && b < xr) || !l[j - 1].is_finite() {
                    continue;
                }
                let coarse = ((l[j + 1] - l[j]).exp_m1() + (l[j - 1] - l[j]).exp_m1()) / (h * h);
                let fine =
                    ((lm[j] - l[j]).exp_m1() + (lm[j - 1] - l[j]).exp_m1()) / (0.25 * h * h);
                let second = (4.0 * fine - coarse) / 3.0;
                let r = (self.field.eval(g.x(j)) - second).abs() * (l[j] - lmax).exp();
                worst = worst.max(r);
            }
        }
        worst
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    /// Crossing point of `phi1` and `phi2`.
    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn certificate(&self) -> &BasisCertificate {
        &self.certificate
    }

    /// Normalized `ln phi_i` at the nodes, `i` in `{0, 1}`.
    pub fn log_phi(&self, i: usize) -> &[f64] {
        &self.log_phi[i]
    }

    pub(crate) fn mid_log_phi(&self, i: usize) -> &[f64] {
        &self.mid_log_phi[i]
    }

    /// `ln phi_i(x)` by linear interpolation between nodes.
    pub fn log_phi_interp(&self, i: usize, x: f64) -> f64 {
        let g = &self.grid;
        let j = g.cell_of(x);
        let t = (x - g.x(j)) / g.spacing();
        let (p, q) = (self.log_phi[i][j], self.log_phi[i][j + 1]);
        if t <= 0.0 {
            return p;
        }
        if t >= 1.0 {
            return q;
        }
        if p == f64::NEG_INFINITY {
            // phi1 ~ x near the origin on the half line
            return q + (t).ln();
        }
        p + t * (q - p)
    }

    /// `ln phi_i(x)`: the stored value at nodes, [`LinearBasis::log_phi_fine`]
    /// between them.
    pub fn log_phi_at(&self, i: usize, x: f64) -> f64 {
        let g = &self.grid;
        let j = g.cell_of(x);
        if x == g.x(j) {
            self.log_phi[i][j]
        } else if x == g.x(j + 1) {
            self.log_phi[i][j + 1]
        } else {
            self.log_phi_fine(i, x)
        }
    }

    pub fn phi1(&self, x: f64) -> f64 {
        self.log_phi_at(0, x).exp()
    }

    pub fn phi2(&self, x: f64) -> f64 {
        self.log_phi_at(1, x).exp()
    }

    /// `ln phi_i(x)` by integrating the ODE from the neighbouring node.
    pub fn log_phi_fine(&self, i: usize, x: f64) -> f64 {
        let g = &self.grid;
        let j = g.cell_of(x);
        let max_step = 0.5 * g.spacing();
        if i == 0 {
            let form = match self.domain {
                Domain::FullLine => Form::LogDerivative,
                Domain::HalfLine => Form::Reciprocal,
            };
            let s = advance(&self.field, &self.breaks, form, g.x(j), x, self.raw1[j], max_step);
            let raw = match form {
                Form::LogDerivative => s.l,
                Form::Reciprocal => s.y.ln() + s.l,
            };
            raw + self.shift
        } else {
            let s = advance(
                &self.field,
                &self.breaks,
                Form::LogDerivative,
                g.x(j + 1),
                x,
                self.raw2[j + 1],
                max_step,
            );
            s.l + self.shift
        }
    }

    /// Cone weight `p(x)`: `1/phi2` left of `x0`, `1/phi1` right of it.
    pub fn weight(&self, x: f64) -> f64 {
        if x <= self.x0 {
            1.0 / self.phi2(x)
        } else {
            1.0 / self.phi1(x)
        }
    }
}

/// `G(x, s) = phi1(min(x, s)) phi2(max(x, s))`.
#[derive(Clone, Debug)]
pub struct GreensKernel {
    basis: LinearBasis,
}

impl GreensKernel {
    pub fn new(basis: LinearBasis) -> Self {
        GreensKernel { basis }
    }

    pub fn basis(&self) -> &LinearBasis {
        &self.basis
    }

    pub fn grid(&self) -> &Grid {
        &self.basis.grid
    }

    pub fn eval(&self, x: f64, s: f64) -> f64 {
        let (lo, hi) = if x <= s { (x, s) } else { (s, x) };
        (self.basis.log_phi_at(0, lo) + self.basis.log_phi_at(1, hi)).exp()
    }

    /// Kernel at grid nodes `(j, k)`.
    #[inline]
    pub fn at_nodes(&self, j: usize, k: usize) -> f64 {
        let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
        (self.basis.log_phi[0][lo] + self.basis.log_phi[1][hi]).exp()
    }

    /// Integration operator for sources whose coefficients jump only at
    /// `cuts`.
    pub fn operator(&self, cuts: &[f64]) -> GreensOperator {
        GreensOperator::new(self, cuts)
    }
}

/// Greens-function evaluation `G(x, s)`.
pub fn greens_eval(kernel: &GreensKernel, x: f64, s: f64) -> f64 {
    kernel.eval(x, s)
}

/// One term `weight(s) * profile(s)` of a source; `weight` is piecewise
/// constant and `profile` is sampled at the grid nodes.
#[derive(Clone, Copy, Debug)]
pub struct Source<'a> {
    pub weight: &'a CoefficientField,
    pub profile: &'a [f64],
}

/// `u(x) = int G(x, s) h(s) ds` for `h` a sum of [`Source`] terms, by the
/// two-sweep factorization
/// `u(x) = phi2(x) int_lo^x phi1 h + phi1(x) int_x^hi phi2 h`.
pub fn greens_apply(kernel: &GreensKernel, sources: &[Source<'_>]) -> Vec<f64> {
    let mut cuts: Vec<f64> = sources.iter().flat_map(|s| s.weight.breakpoints()).collect();
    cuts.extend(kernel.basis.field.breakpoints());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    kernel.operator(&cuts).apply(sources)
}

/// Precomputed sweep factors for repeated applications of one kernel.
#[derive(Clone, Debug)]
pub struct GreensOperator {
    grid: Grid,
    plan: PanelPlan,
    /// `phi1(s) phi2(x_{j+1})` at each panel point
    left: Vec<[f64; 3]>,
    /// `phi2(s) phi1(x_j)` at each panel point
    right: Vec<[f64; 3]>,
    /// `phi2(x_{j+1}) / phi2(x_j)`
    decay_left: Vec<f64>,
    /// `phi1(x_j) / phi1(x_{j+1})`
    decay_right: Vec<f64>,
}

impl GreensOperator {
    fn new(kernel: &GreensKernel, cuts: &[f64]) -> Self {
        let basis = &kernel.basis;
        let grid = basis.grid;
        let plan = PanelPlan::new(&grid, cuts);
        let (l1, l2) = (&basis.log_phi[0], &basis.log_phi[1]);
        let log_at = |i: usize, panel: &crate::quadrature::Panel, k: usize| -> f64 {
            if let Some(j) = panel.stencils[k].node_index() {
                if grid.x(j) == panel.points[k] {
                    return basis.log_phi[i][j];
                }
            }
            if k == 1 && panel.full_cell {
                return basis.mid_log_phi(i)[panel.cell];
            }
            basis.log_phi_fine(i, panel.points[k])
        };
        let mut left = Vec::with_capacity(plan.panels.len());
        let mut right = Vec::with_capacity(plan.panels.len());
        for p in &plan.panels {
            let j = p.cell;
            let mut lf = [0.0; 3];
            let mut rf = [0.0; 3];
            for k in 0..3 {
                lf[k] = (log_at(0, p, k) + l2[j + 1]).exp();
                rf[k] = (log_at(1, p, k) + l1[j]).exp();
            }
            left.push(lf);
            right.push(rf);
        }
        let n = grid.len();
        let decay_left = (0..n - 1).map(|j| (l2[j + 1] - l2[j]).exp()).collect();
        let decay_right = (0..n - 1)
            .map(|j| {
                if l1[j] == f64::NEG_INFINITY {
                    0.0
                } else {
                    (l1[j] - l1[j + 1]).exp()
                }
            })
            .collect();
        GreensOperator {
            grid,
            plan,
            left,
            right,
            decay_left,
            decay_right,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply(&self, sources: &[Source<'_>]) -> Vec<f64> {
        let n = self.grid.len();
        let mut cell_left = vec![0.0; n - 1];
        let mut cell_right = vec![0.0; n - 1];
        assert!(sources.len() <= 8, "at most 8 source terms");
        let mut weights = [0.0; 8];
        for (p, panel) in self.plan.panels.iter().enumerate() {
            let mid = panel.midpoint();
            let mut any = false;
            for (t, s) in sources.iter().enumerate() {
                weights[t] = s.weight.eval(mid);
                any |= weights[t] != 0.0;
            }
            if !any {
                continue;
            }
            let sw = panel.simpson_weights();
            let (mut acc_l, mut acc_r) = (0.0, 0.0);
            for k in 0..3 {
                let mut hk = 0.0;
                for (t, s) in sources.iter().enumerate() {
                    if weights[t] != 0.0 {
                        hk += weights[t] * panel.stencils[k].apply(s.profile);
                    }
                }
                acc_l += sw[k] * self.left[p][k] * hk;
                acc_r += sw[k] * self.right[p][k] * hk;
            }
            cell_left[panel.cell] += acc_l;
            cell_right[panel.cell] += acc_r;
        }
        let mut u = vec![0.0; n];
        let mut acc = 0.0;
        for j in 0..n - 1 {
            acc = self.decay_left[j] * acc + cell_left[j];
            u[j + 1] = acc;
        }
        acc = 0.0;
        for j in (0..n - 1).rev() {
            acc = self.decay_right[j] * acc + cell_right[j];
            u[j] += acc;
        }
        u
    }
}

/// Cone constants for a compact set `P = [lo, hi]`:
/// `m_i = min(phi1(lo), phi2(hi))` and `p0_i = inf_P p_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeConstants {
    pub support: (f64, f64),
    pub m: [f64; 2],
    pub p0: [f64; 2],
}

impl ConeConstants {
    /// `m_i * p0_i`, the shell factor of component `i`.
    pub fn product(&self, i: usize) -> f64 {
        self.m[i] * self.p0[i]
    }
}

/// Constants `m(P)` and `p0 = inf_P p` for one basis.
pub fn basis_cone_pair(basis: &LinearBasis, support: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = support;
    let m = basis.phi1(lo).min(basis.phi2(hi));
    // p rises up to x0 and falls after it, so its infimum sits at an end
    let p0 = basis.weight(lo).min(basis.weight(hi));
    (m, p0)
}

pub fn cone_constants(
    first: &LinearBasis,
    second: &LinearBasis,
    support: (f64, f64),
) -> Result<ConeConstants> {
    let (lo, hi) = support;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::EmptySupport);
    }
    let g = first.grid();
    if lo < g.lo() || hi > g.hi() {
        return Err(Error::InvalidGrid(format!(
            "support [{lo}, {hi}] leaves the grid [{}, {}]",
            g.lo(),
            g.hi()
        )));
    }
    let (m1, p1) = basis_cone_pair(first, support);
    let (m2, p2) = basis_cone_pair(second, support);
    let cone = ConeConstants {
        support,
        m: [m1, m2],
        p0: [p1, p2],
    };
    for i in 0..2 {
        let prod = cone.product(i);
        if !(prod > 0.0 && prod < 1.0) {
            return Err(Error::HypothesisFailure(format!(
                "cone factor m{0} p0{0} = {prod} is outside (0, 1)",
                i + 1
            )));
        }
    }
    Ok(cone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, SQRT_2};

    fn constant_basis(a: f64, half_width: f64, n: usize) -> LinearBasis {
        let grid = Grid::symmetric(half_width, n).unwrap();
        build_linear_basis(&CoefficientField::constant(a).unwrap(), &grid).unwrap()
    }

    #[test]
    fn constant_potential_closed_forms() {
        let b = constant_basis(1.0, 10.0, 2001);
        for &x in &[-3.0, -0.5, 0.0, 1.25, 4.0] {
            assert!((b.phi1(x) - x.exp() / SQRT_2).abs() < 1e-8 * x.exp().max(1.0));
            assert!((b.phi2(x) - (-x).exp() / SQRT_2).abs() < 1e-8 * (-x).exp().max(1.0));
        }
        assert!(b.x0().abs() < 1e-12);
        let b4 = constant_basis(4.0, 10.0, 2001);
        assert!((b4.phi1(0.5) - E / 2.0).abs() < 1e-8);
        assert!(b4.certificate().wronskian_drift < 1e-10);
    }

    #[test]
    fn kernel_values() {
        let k = GreensKernel::new(constant_basis(1.0, 10.0, 2001));
        assert!((greens_eval(&k, 0.0, 0.0) - 0.5).abs() < 1e-12);
        let k4 = GreensKernel::new(constant_basis(4.0, 10.0, 2001));
        assert!((k4.eval(1.0, -1.0) - 0.25 * (-4.0f64).exp()).abs() < 1e-12);
        assert_eq!(k4.eval(0.3, -0.2), k4.eval(-0.2, 0.3));
    }

    #[test]
    fn apply_indicator_source() {
        let k = GreensKernel::new(constant_basis(1.0, 15.0, 3001));
        let field = CoefficientField::bump(1.0, -1.0, 1.0).unwrap();
        let ones = vec![1.0; 3001];
        let u = greens_apply(&k, &[Source { weight: &field, profile: &ones }]);
        let g = k.grid();
        assert!((u[g.nearest(0.0)] - (1.0 - (-1.0f64).exp())).abs() < 1e-10);
        assert!((u[g.nearest(1.0)] - (1.0 - 1f64.cosh() / E)).abs() < 1e-10);
        let zero = vec![0.0; 3001];
        let u0 = greens_apply(&k, &[Source { weight: &field, profile: &zero }]);
        assert!(u0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cone_constants_closed_form() {
        let b = constant_basis(1.0, 15.0, 3001);
        let cone = cone_constants(&b, &b, (-1.0, 1.0)).unwrap();
        assert!((cone.m[0] - (-1.0f64).exp() / SQRT_2).abs() < 1e-10);
        assert!((cone.p0[0] - SQRT_2 * (-1.0f64).exp()).abs() < 1e-10);
        assert!((cone.product(0) - (-2.0f64).exp()).abs() < 1e-10);
        let wide = cone_constants(&b, &b, (-2.0, 2.0)).unwrap();
        assert!((wide.product(1) - (-4.0f64).exp()).abs() < 1e-10);
        let right = cone_constants(&b, &b, (1.0, 2.0)).unwrap();
        assert!((right.m[0] - (-2.0f64).exp() / SQRT_2).abs() < 1e-10);
        assert!((right.p0[0] - SQRT_2 * (-2.0f64).exp()).abs() < 1e-10);
        assert!(matches!(
            cone_constants(&b, &b, (1.0, -1.0)),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn rejects_non_positive_potential() {
        let grid = Grid::symmetric(5.0, 101).unwrap();
        let field = CoefficientField::piecewise(vec![0.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            build_linear_basis(&field, &grid),
            Err(Error::NonPositivePotential(_))
        ));
    }

    #[test]
    fn half_line_basis_vanishes_at_origin() {
        let grid = Grid::symmetric(10.0, 2001).unwrap().half_line();
        let b = LinearBasis::new(&CoefficientField::constant(1.0).unwrap(), &grid, Domain::HalfLine)
            .unwrap();
        assert_eq!(b.phi1(0.0), 0.0);
        // phi1 = C sinh x, phi2 = D e^{-x}, C D = 1 from the Wronskian
        let ratio = b.phi1(2.0) / 2f64.sinh();
        let ratio2 = b.phi2(2.0) / (-2f64).exp();
        assert!((ratio * ratio2 - 1.0).abs() < 1e-8);
        assert!(b.certificate().wronskian_drift < 1e-8);
    }
}

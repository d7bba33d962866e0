//! The fixed-point operator `T = (T1, T2)`,
//!
//! ```text
//! T1 u(x) = int_M G1(x, s) [b u2 + c F(u1, u2) u1](s) ds
//! T2 u(x) = int_M G2(x, s) [e u1 + f H(u1, u2) u2](s) ds
//! ```
//!
//! together with the cone-membership gap and the finite-difference residual
//! of the differential system.

use crate::error::{Error, Result};
use crate::greens::{
    cone_constants, ConeConstants, Domain, GreensKernel, GreensOperator, LinearBasis, Source,
};
use crate::model::{Grid, Problem};

/// Grid samples of a candidate pair `(u1, u2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WavePair {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

impl WavePair {
    pub fn new(u1: Vec<f64>, u2: Vec<f64>) -> Self {
        assert_eq!(u1.len(), u2.len(), "components must share the grid");
        WavePair { u1, u2 }
    }

    pub fn zeros(n: usize) -> Self {
        WavePair::new(vec![0.0; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        if i == 0 {
            &self.u1
        } else {
            &self.u2
        }
    }

    pub fn sup_norms(&self) -> [f64; 2] {
        [sup(&self.u1), sup(&self.u2)]
    }

    /// `max_i ||u_i||_inf`.
    pub fn norm(&self) -> f64 {
        let [n1, n2] = self.sup_norms();
        n1.max(n2)
    }

    pub fn scaled(&self, t: f64) -> WavePair {
        WavePair::new(
            self.u1.iter().map(|v| v * t).collect(),
            self.u2.iter().map(|v| v * t).collect(),
        )
    }

    /// `max_i ||u_i - v_i||_inf`.
    pub fn distance(&self, other: &WavePair) -> f64 {
        let d = |p: &[f64], q: &[f64]| p.iter().zip(q).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        d(&self.u1, &other.u1).max(d(&self.u2, &other.u2))
    }

    /// Most negative sample, or 0.
    pub fn min_value(&self) -> f64 {
        self.u1
            .iter()
            .chain(&self.u2)
            .fold(0.0, |m: f64, &v| m.min(v))
    }

    /// Odd extension of a half-line pair (sampled on `[0, L]`) to the
    /// symmetric grid `[-L, L]`.
    pub fn odd_extension(&self) -> WavePair {
        let ext = |v: &[f64]| -> Vec<f64> {
            let mut out: Vec<f64> = v[1..].iter().rev().map(|x| -x).collect();
            out.push(0.0);
            out.extend_from_slice(&v[1..]);
            out
        };
        WavePair::new(ext(&self.u1), ext(&self.u2))
    }

    /// `max_i max_x |u_i(x) + u_i(-x)|` on a symmetric grid.
    pub fn oddness_defect(&self) -> f64 {
        let n = self.len();
        let d = |v: &[f64]| (0..n).fold(0.0, |m: f64, j| m.max((v[j] + v[n - 1 - j]).abs()));
        d(&self.u1).max(d(&self.u2))
    }
}

/// Green's kernels and integration operators for both components of one
/// problem, on the full line or the half line.
#[derive(Clone, Debug)]
pub struct Kernels {
    domain: Domain,
    grid: Grid,
    kernels: [GreensKernel; 2],
    operators: [GreensOperator; 2],
}

impl Kernels {
    pub fn new(problem: &Problem, domain: Domain) -> Result<Kernels> {
        let grid = match domain {
            Domain::FullLine => *problem.grid(),
            Domain::HalfLine => problem.grid().half_line(),
        };
        let k1 = GreensKernel::new(LinearBasis::new(problem.a(), &grid, domain)?);
        let k2 = GreensKernel::new(LinearBasis::new(problem.d(), &grid, domain)?);
        let cuts = problem.breakpoints();
        let operators = [k1.operator(&cuts), k2.operator(&cuts)];
        Ok(Kernels {
            domain,
            grid,
            kernels: [k1, k2],
            operators,
        })
    }

    pub fn full_line(problem: &Problem) -> Result<Kernels> {
        Kernels::new(problem, Domain::FullLine)
    }

    pub fn half_line(problem: &Problem) -> Result<Kernels> {
        Kernels::new(problem, Domain::HalfLine)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel(&self, i: usize) -> &GreensKernel {
        &self.kernels[i]
    }

    pub fn operator(&self, i: usize) -> &GreensOperator {
        &self.operators[i]
    }

    /// The set `M` the cone is built on: the hull of the coupling support,
    /// or of its positive part on the half line.
    pub fn cone_support(&self, problem: &Problem) -> Result<(f64, f64)> {
        match self.domain {
            Domain::FullLine => problem.support_union(),
            Domain::HalfLine => {
                if problem.origin_in_support() {
                    return Err(Error::SupportContainsOrigin);
                }
                problem.positive_support()
            }
        }
    }

    pub fn cone(&self, problem: &Problem) -> Result<ConeConstants> {
        let support = self.cone_support(problem)?;
        cone_constants(self.kernels[0].basis(), self.kernels[1].basis(), support)
    }
}

/// `(linear, nonlinear)` parts of `T u`: the `b, e` terms and the `c, f`
/// terms.
pub fn apply_t_parts(problem: &Problem, kernels: &Kernels, u: &WavePair) -> (WavePair, WavePair) {
    let (fu, hu) = nonlinear_profiles(problem, u);
    let op = |i: usize, w, p: &[f64]| kernels.operators[i].apply(&[Source { weight: w, profile: p }]);
    let linear = WavePair::new(op(0, problem.b(), &u.u2), op(1, problem.e(), &u.u1));
    let nonlinear = WavePair::new(op(0, problem.c(), &fu), op(1, problem.f(), &hu));
    (linear, nonlinear)
}

/// `F(u) u1` and `H(u) u2` at the nodes.
fn nonlinear_profiles(problem: &Problem, u: &WavePair) -> (Vec<f64>, Vec<f64>) {
    let nl = problem.nonlinearity();
    let fu = u
        .u1
        .iter()
        .zip(&u.u2)
        .map(|(&p, &q)| nl.f(p, q) * p)
        .collect();
    let hu = u
        .u1
        .iter()
        .zip(&u.u2)
        .map(|(&p, &q)| nl.h(p, q) * q)
        .collect();
    (fu, hu)
}

/// `T u` sampled on the kernels' grid.
pub fn apply_t(problem: &Problem, kernels: &Kernels, u: &WavePair) -> WavePair {
    assert_eq!(u.len(), kernels.grid.len(), "wave pair does not match the grid");
    let (fu, hu) = nonlinear_profiles(problem, u);
    let t1 = kernels.operators[0].apply(&[
        Source {
            weight: problem.b(),
            profile: &u.u2,
        },
        Source {
            weight: problem.c(),
            profile: &fu,
        },
    ]);
    let t2 = kernels.operators[1].apply(&[
        Source {
            weight: problem.e(),
            profile: &u.u1,
        },
        Source {
            weight: problem.f(),
            profile: &hu,
        },
    ]);
    WavePair::new(t1, t2)
}

/// `min_{x in M} u_i(x) - m_i p0_i ||u_i||` for each component; both
/// non-negative certifies cone membership.
pub fn cone_gap(u: &WavePair, cone: &ConeConstants, grid: &Grid) -> [f64; 2] {
    let nodes = grid.nodes_in(cone.support.0, cone.support.1);
    let norms = u.sup_norms();
    let mut gaps = [0.0; 2];
    for (i, gap) in gaps.iter_mut().enumerate() {
        let v = u.component(i);
        let min_m = nodes.clone().map(|j| v[j]).fold(f64::INFINITY, f64::min);
        let min_m = if min_m.is_finite() { min_m } else { 0.0 };
        *gap = min_m - cone.product(i) * norms[i];
    }
    gaps
}

/// Finite-difference residual of the differential system.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    /// Pointwise residual per component; zero at the boundary nodes.
    pub components: [Vec<f64>; 2],
    /// Sup over interior nodes and both components.
    pub sup: f64,
    /// `max |u_i|` at the boundary nodes.
    pub boundary: f64,
}

/// Second-order centred residual of
/// `-u1'' + a u1 - b u2 - c F u1` and `-u2'' + d u2 - e u1 - f H u2`.
/// Coefficients are sampled as the mean of their one-sided limits.
pub fn residual(problem: &Problem, grid: &Grid, u: &WavePair) -> Residual {
    let n = grid.len();
    assert_eq!(u.len(), n, "wave pair does not match the grid");
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let nl = problem.nonlinearity();
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for j in 1..n - 1 {
        let x = grid.x(j);
        let (p, q) = (u.u1[j], u.u2[j]);
        let lap1 = (u.u1[j - 1] - 2.0 * p + u.u1[j + 1]) * inv_h2;
        let lap2 = (u.u2[j - 1] - 2.0 * q + u.u2[j + 1]) * inv_h2;
        r1[j] = -lap1 + problem.a().node_value(x) * p
            - problem.b().node_value(x) * q
            - problem.c().node_value(x) * nl.f(p, q) * p;
        r2[j] = -lap2 + problem.d().node_value(x) * q
            - problem.e().node_value(x) * p
            - problem.f().node_value(x) * nl.h(p, q) * q;
        worst = worst.max(r1[j].abs()).max(r2[j].abs());
    }
    let boundary = [u.u1[0], u.u1[n - 1], u.u2[0], u.u2[n - 1]]
        .iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    Residual {
        components: [r1, r2],
        sup: worst,
        boundary,
    }
}

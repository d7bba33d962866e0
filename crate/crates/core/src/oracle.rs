//! Independent finite-difference solver for the coupled system.
//!
//! Second-order central differences with Dirichlet zero boundary values,
//! solved by Newton's method with Armijo backtracking on a banded Jacobian.
//! Nothing here touches the Green's function pipeline.

use crate::banded::Banded;
use crate::error::{Error, Result};
use crate::model::{Grid, Nonlinearity, Problem};
use crate::operator::WavePair;

/// Boundary setup: `[-L, L]` with zero ends, or `[0, L]` with `u(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    FullLine,
    HalfLine,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub max_iter: usize,
    /// Converged once the largest Newton update is at most this.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_iter: 100,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome {
    pub wave: WavePair,
    pub iterations: usize,
    /// Sup-norm of the discrete residual at the returned state.
    pub residual: f64,
}

/// Discrete system on the interior nodes. Unknowns are interleaved as
/// `(u1_1, u2_1, u1_2, u2_2, ...)` so the Jacobian has bandwidth 2.
pub(crate) struct FdSystem {
    n: usize,
    inv_h2: f64,
    coef: [Vec<f64>; 6],
    nl: Nonlinearity,
    forcing: Option<WavePair>,
}

impl FdSystem {
    pub(crate) fn new(p: &Problem, grid: &Grid, forcing: Option<&WavePair>) -> FdSystem {
        let n = grid.len();
        let sample = |f: &crate::model::CoefficientField| -> Vec<f64> {
            (0..n).map(|j| f.node_value(grid.x(j))).collect()
        };
        if let Some(s) = forcing {
            assert_eq!(s.len(), n, "forcing does not match the grid");
        }
        FdSystem {
            n,
            inv_h2: 1.0 / (grid.spacing() * grid.spacing()),
            coef: [
                sample(p.a()),
                sample(p.b()),
                sample(p.c()),
                sample(p.d()),
                sample(p.e()),
                sample(p.f()),
            ],
            nl: p.nonlinearity().clone(),
            forcing: forcing.cloned(),
        }
    }

    pub(crate) fn unknowns(&self) -> usize {
        2 * (self.n - 2)
    }

    /// Interleaved residual at the interior nodes.
    pub(crate) fn residual(&self, u: &WavePair) -> Vec<f64> {
        let [a, b, c, d, e, f] = &self.coef;
        let mut r = Vec::with_capacity(self.unknowns());
        for j in 1..self.n - 1 {
            let (p, q) = (u.u1[j], u.u2[j]);
            let lap1 = (u.u1[j - 1] - 2.0 * p + u.u1[j + 1]) * self.inv_h2;
            let lap2 = (u.u2[j - 1] - 2.0 * q + u.u2[j + 1]) * self.inv_h2;
            let mut r1 = -lap1 + a[j] * p - b[j] * q - c[j] * self.nl.f(p, q) * p;
            let mut r2 = -lap2 + d[j] * q - e[j] * p - f[j] * self.nl.h(p, q) * q;
            if let Some(s) = &self.forcing {
                r1 -= s.u1[j];
                r2 -= s.u2[j];
            }
            r.push(r1);
            r.push(r2);
        }
        r
    }

    /// `-D2 v + (a, d) v` at the interior nodes, interleaved; boundary
    /// values of `v` are used as given.
    pub(crate) fn diagonal_part(&self, v: &WavePair) -> Vec<f64> {
        let (a, d) = (&self.coef[0], &self.coef[3]);
        let mut out = Vec::with_capacity(self.unknowns());
        for j in 1..self.n - 1 {
            let lap1 = (v.u1[j - 1] - 2.0 * v.u1[j] + v.u1[j + 1]) * self.inv_h2;
            let lap2 = (v.u2[j - 1] - 2.0 * v.u2[j] + v.u2[j + 1]) * self.inv_h2;
            out.push(-lap1 + a[j] * v.u1[j]);
            out.push(-lap2 + d[j] * v.u2[j]);
        }
        out
    }

    /// Linear part of [`FdSystem::residual`], coupling included.
    fn linear_part(&self, v: &WavePair) -> Vec<f64> {
        let (b, e) = (&self.coef[1], &self.coef[4]);
        let mut out = self.diagonal_part(v);
        for j in 1..self.n - 1 {
            let k = 2 * (j - 1);
            out[k] -= b[j] * v.u2[j];
            out[k + 1] -= e[j] * v.u1[j];
        }
        out
    }

    /// `-(c F u1, f H u2)` at the interior nodes, interleaved.
    fn nonlinear_part(&self, u: &WavePair) -> Vec<f64> {
        let (c, f) = (&self.coef[2], &self.coef[5]);
        let mut out = Vec::with_capacity(self.unknowns());
        for j in 1..self.n - 1 {
            let (p, q) = (u.u1[j], u.u2[j]);
            out.push(-c[j] * self.nl.f(p, q) * p);
            out.push(-f[j] * self.nl.h(p, q) * q);
        }
        out
    }

    /// Analytic Jacobian of [`FdSystem::residual`].
    pub(crate) fn jacobian(&self, u: &WavePair) -> Banded {
        let [a, b, c, d, e, f] = &self.coef;
        let m = self.unknowns();
        let mut jac = Banded::zeros(m, 2, 2);
        for j in 1..self.n - 1 {
            let k = 2 * (j - 1);
            let (p, q) = (u.u1[j], u.u2[j]);
            let fv = self.nl.f(p, q);
            let hv = self.nl.h(p, q);
            let (f1, f2) = self.nl.f_grad(p, q);
            let (h1, h2) = self.nl.h_grad(p, q);
            jac.add(k, k, 2.0 * self.inv_h2 + a[j] - c[j] * (fv + f1 * p));
            jac.add(k, k + 1, -b[j] - c[j] * f2 * p);
            jac.add(k + 1, k, -e[j] - f[j] * h1 * q);
            jac.add(k + 1, k + 1, 2.0 * self.inv_h2 + d[j] - f[j] * (hv + h2 * q));
            if k >= 2 {
                jac.add(k, k - 2, -self.inv_h2);
                jac.add(k + 1, k - 1, -self.inv_h2);
            }
            if k + 2 < m {
                jac.add(k, k + 2, -self.inv_h2);
                jac.add(k + 1, k + 3, -self.inv_h2);
            }
        }
        jac
    }

    /// Adds an interleaved interior update to `u`.
    pub(crate) fn step(&self, u: &WavePair, delta: &[f64], t: f64) -> WavePair {
        let mut out = u.clone();
        for j in 1..self.n - 1 {
            let k = 2 * (j - 1);
            out.u1[j] += t * delta[k];
            out.u2[j] += t * delta[k + 1];
        }
        out
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn grid_for(p: &Problem, bc: Boundary) -> Grid {
    match bc {
        Boundary::FullLine => *p.grid(),
        Boundary::HalfLine => p.grid().half_line(),
    }
}

/// Newton solve from `init`, on the full grid or on `[0, L]`.
pub fn oracle_solve(p: &Problem, init: &WavePair, bc: Boundary) -> Result<WavePair> {
    oracle_solve_with(p, init, bc, None, OracleOptions::default()).map(|o| o.wave)
}

/// [`oracle_solve`] with an optional source term `s` added to the right-hand
/// side: `-u1'' + a u1 - b u2 - c F u1 = s1`, likewise for `u2`.
pub fn oracle_solve_with(
    p: &Problem,
    init: &WavePair,
    bc: Boundary,
    forcing: Option<&WavePair>,
    opts: OracleOptions,
) -> Result<OracleOutcome> {
    let grid = grid_for(p, bc);
    let n = grid.len();
    if init.len() != n {
        return Err(Error::InvalidGrid(format!(
            "initial guess has {} samples, grid has {n}",
            init.len()
        )));
    }
    let sys = FdSystem::new(p, &grid, forcing);
    let mut u = init.clone();
    for v in [&mut u.u1, &mut u.u2] {
        v[0] = 0.0;
        v[n - 1] = 0.0;
    }
    let mut r = sys.residual(&u);
    let mut rnorm = norm2(&r);
    for it in 1..=opts.max_iter {
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = sys.jacobian(&u).solve(neg)?;
        let size = sup(&delta);
        if !size.is_finite() {
            break;
        }
        if size <= opts.tol {
            let u = sys.step(&u, &delta, 1.0);
            let residual = sup(&sys.residual(&u));
            return Ok(OracleOutcome {
                wave: u,
                iterations: it,
                residual,
            });
        }
        let mut t = 1.0;
        loop {
            let trial = sys.step(&u, &delta, t);
            let rt = sys.residual(&trial);
            let nt = norm2(&rt);
            if nt.is_finite() && nt <= (1.0 - 1e-4 * t) * rnorm {
                u = trial;
                r = rt;
                rnorm = nt;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                // no descent left: accept a full step near rounding level,
                // otherwise give up
                if size <= 1e3 * opts.tol {
                    u = sys.step(&u, &delta, 1.0);
                    r = sys.residual(&u);
                    rnorm = norm2(&r);
                    break;
                }
                return Err(Error::NewtonDivergence {
                    iterations: it,
                    residual: sup(&r),
                });
            }
        }
    }
    Err(Error::NewtonDivergence {
        iterations: opts.max_iter,
        residual: sup(&r),
    })
}

/// Smooth test direction vanishing at both ends of the grid.
fn direction(grid: &Grid, k: usize) -> WavePair {
    let (lo, hi) = (grid.lo(), grid.hi());
    let n = grid.len();
    let mut v = WavePair::zeros(n);
    for j in 1..n - 1 {
        let t = (grid.x(j) - lo) / (hi - lo);
        let s = (std::f64::consts::PI * t).sin();
        let kf = k as f64 + 1.0;
        v.u1[j] = s * (3.0 * kf * t).cos();
        v.u2[j] = s * (0.7 + (5.0 * kf * t + 0.3).sin()) * 0.8;
    }
    v
}

/// Largest relative discrepancy between analytic Jacobian-vector products
/// and central differences with step `1e-6`, over three fixed smooth
/// directions, on the problem's full grid.
pub fn jacobian_check(p: &Problem, u: &WavePair) -> f64 {
    let grid = *p.grid();
    let sys = FdSystem::new(p, &grid, None);
    let jac = sys.jacobian(u);
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let v = direction(&grid, k);
        let mut vi = Vec::with_capacity(sys.unknowns());
        for j in 1..grid.len() - 1 {
            vi.push(v.u1[j]);
            vi.push(v.u2[j]);
        }
        let jv = jac.mul(&vi);
        // The linear part is differenced exactly: its quotient is `L v`, and
        // forming it from `R(u + eps v) - R(u - eps v)` only subtracts two
        // O(|u| / h^2) numbers.
        let dir = sys.step(&WavePair::zeros(grid.len()), &vi, 1.0);
        let lin = sys.linear_part(&dir);
        let plus = sys.nonlinear_part(&sys.step(u, &vi, eps));
        let minus = sys.nonlinear_part(&sys.step(u, &vi, -eps));
        let scale = sup(&jv).max(f64::MIN_POSITIVE);
        let err = jv
            .iter()
            .zip(lin.iter().zip(plus.iter().zip(&minus)))
            .fold(0.0, |m: f64, (j, (l, (a, b)))| {
                m.max((j - l - (a - b) / (2.0 * eps)).abs())
            });
        worst = worst.max(err / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientField, CoefficientSet};

    fn problem(nl: Nonlinearity, n: usize) -> Problem {
        let one = CoefficientField::constant(1.0).unwrap();
        let bump = |v: f64| CoefficientField::bump(v, -1.0, 1.0).unwrap();
        Problem::new(
            CoefficientSet {
                a: one.clone(),
                b: bump(0.5),
                c: bump(1.0),
                d: one,
                e: bump(0.5),
                f: bump(1.0),
            },
            nl,
            Grid::symmetric(15.0, n).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let p = problem(Nonlinearity::decoupled_cubic(), 301);
        let out = oracle_solve_with(&p, &WavePair::zeros(301), Boundary::FullLine, None, OracleOptions::default())
            .unwrap();
        assert_eq!(out.wave.norm(), 0.0);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn jacobian_matches_differences() {
        for nl in [Nonlinearity::decoupled_cubic(), Nonlinearity::spinor_cubic()] {
            let p = problem(nl, 601);
            assert!(jacobian_check(&p, &WavePair::zeros(601)) < 1e-8);
            let u = WavePair::new(
                p.grid().nodes().iter().map(|x| 1.3 / x.cosh()).collect(),
                p.grid().nodes().iter().map(|x| 0.9 * (-x * x / 4.0).exp()).collect(),
            );
            let d = jacobian_check(&p, &u);
            assert!(d < 1e-6, "{d}");
        }
    }

    #[test]
    fn residual_splits_into_linear_and_nonlinear_parts() {
        let p = problem(Nonlinearity::spinor_cubic(), 401);
        let sys = FdSystem::new(&p, p.grid(), None);
        let u = WavePair::new(
            p.grid().nodes().iter().map(|x| 1.7 / x.cosh()).collect(),
            p.grid().nodes().iter().map(|x| 0.6 * (-x * x / 3.0).exp()).collect(),
        );
        let r = sys.residual(&u);
        let (l, nl) = (sys.linear_part(&u), sys.nonlinear_part(&u));
        for k in 0..r.len() {
            assert!((r[k] - l[k] - nl[k]).abs() <= 1e-9 * (1.0 + l[k].abs()), "{k}");
        }
    }

    #[test]
    fn finds_a_positive_wave() {
        let p = problem(Nonlinearity::decoupled_cubic(), 601);
        let seed: Vec<f64> = p.grid().nodes().iter().map(|x| 2.0 * (-x.abs()).exp()).collect();
        let w = oracle_solve(&p, &WavePair::new(seed.clone(), seed), Boundary::FullLine).unwrap();
        assert!(w.norm() > 0.5);
        assert!(w.min_value() > -1e-12);
    }
}

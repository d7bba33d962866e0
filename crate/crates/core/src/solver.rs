//! Nontrivial fixed points of `T` in the cone annulus `r <= ||u|| <= R`.
//!
//! Each seed on a geometric ladder in `[r, R]` is iterated with damped
//! Picard steps and cone clipping. The nontrivial fixed point of a
//! superlinear `T` repels plain Picard, so when the iteration stalls,
//! collapses to zero or grows past `4R` the best iterate seen is handed to
//! a Newton stage: finite-difference Newton from the oracle, then defect
//! correction `(L_h - N_h'(u)) delta = -L_h (u - T u)` until `u = T u` to
//! the requested tolerance.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::greens::{ConeConstants, Source};
use crate::hypotheses::{check_all, HypothesisReport};
use crate::model::{Bump, CoefficientField, Grid, Problem};
use crate::operator::{apply_t, cone_gap, residual, Kernels, WavePair};
use crate::oracle::{oracle_solve_with, Boundary, FdSystem, OracleOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Odd,
}

impl Symmetry {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetry::None => "none",
            Symmetry::Odd => "odd",
        }
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Symmetry> {
        match s {
            "none" => Ok(Symmetry::None),
            "odd" => Ok(Symmetry::Odd),
            other => Err(Error::parse(
                "solver.symmetry",
                format!("unknown symmetry '{other}' (expected none or odd)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Picard damping `theta` in `(0, 1]`.
    pub theta: f64,
    pub max_iter: usize,
    /// Sup-norm tolerance on `u - T u`.
    pub tol: f64,
    /// Sup-norm tolerance on the finite-difference residual of the wave.
    pub residual_tol: f64,
    /// Number of seed levels between `r` and `R`.
    pub ladder: usize,
    pub newton_fallback: bool,
    pub symmetry: Symmetry,
    /// Solve even when a required hypothesis fails.
    pub override_hypotheses: bool,
    pub stall_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: 0.5,
            max_iter: 1000,
            tol: 1e-8,
            residual_tol: 1e-6,
            ladder: 8,
            newton_fallback: true,
            symmetry: Symmetry::None,
            override_hypotheses: false,
            stall_window: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::parse("solver", m));
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("theta = {} must lie in (0, 1]", self.theta));
        }
        if !(self.tol > 0.0) || !(self.residual_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.ladder == 0 || self.max_iter == 0 || self.stall_window == 0 {
            return bad("ladder, max_iter and stall window must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Picard,
    NewtonPolished,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Picard => "picard",
            Method::NewtonPolished => "newton-polished",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// Picard steps plus Newton steps.
    pub iterations: usize,
    /// `||u - T u||` at the returned fixed point.
    pub fixed_point_defect: f64,
    /// Finite-difference residual of the polished wave.
    pub residual: f64,
    /// Largest boundary sample of the wave.
    pub boundary: f64,
    /// `||wave - fixed_point||`, the gap between the two discretizations.
    pub discretization_gap: f64,
    pub cone_gap: [f64; 2],
    pub norm: f64,
    pub method: Method,
    /// Index of the seed level that produced the solution, or `None` for a
    /// caller-supplied seed.
    pub seed_level: Option<usize>,
    /// Largest negative part removed (Picard) or present (Newton) at the
    /// returned iterate.
    pub clipped: f64,
    pub r: f64,
    pub big_r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Fixed point of the integral operator on the full grid.
    pub fixed_point: WavePair,
    /// The fixed point polished by finite-difference Newton.
    pub wave: WavePair,
    pub grid: Grid,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub fn norm(&self) -> f64 {
        self.diagnostics.norm
    }
}

/// Everything a solve needs that does not depend on the seed.
struct Setup {
    kernels: Kernels,
    bc: Boundary,
    cone: Option<ConeConstants>,
    r: f64,
    big_r: f64,
    direction: WavePair,
}

/// Fallback radii when hypotheses are overridden and no annulus exists.
const FALLBACK_RADII: (f64, f64) = (0.1, 10.0);

fn prepare(p: &Problem, cfg: &SolverConfig) -> Result<(Setup, HypothesisReport)> {
    cfg.validate()?;
    let bc = match cfg.symmetry {
        Symmetry::None => Boundary::FullLine,
        Symmetry::Odd => {
            let uneven = p.uneven_coefficients();
            if !uneven.is_empty() {
                return Err(Error::SymmetryViolation(format!(
                    "not even: {}",
                    uneven.join(", ")
                )));
            }
            if p.origin_in_support() {
                return Err(Error::SupportContainsOrigin);
            }
            Boundary::HalfLine
        }
    };
    let kernels = match bc {
        Boundary::FullLine => Kernels::full_line(p)?,
        Boundary::HalfLine => Kernels::half_line(p)?,
    };
    let report = check_all(p, &kernels);
    if !cfg.override_hypotheses && !report.all_required_pass() {
        let failed: Vec<String> = report
            .failures()
            .iter()
            .map(|id| {
                let detail = report.entry(id).map_or("", |e| e.detail.as_str());
                format!("({id}) {detail}")
            })
            .collect();
        return Err(Error::HypothesisFailure(failed.join("; ")));
    }
    let (r, big_r) = match report.radii {
        Some(a) => (a.r, a.big_r),
        None if cfg.override_hypotheses => FALLBACK_RADII,
        None => {
            return Err(Error::HypothesisFailure(report.warnings.join("; ")));
        }
    };
    let direction = seed_direction(p, &kernels);
    Ok((
        Setup {
            cone: report.cone,
            kernels,
            bc,
            r,
            big_r,
            direction,
        },
        report,
    ))
}

/// `G_i` applied to the indicator of `M`, each component scaled to unit
/// sup-norm.
fn seed_direction(p: &Problem, kernels: &Kernels) -> WavePair {
    let n = kernels.grid().len();
    let bumps: Vec<Bump> = p
        .coupling_support()
        .into_iter()
        .map(|(lo, hi)| Bump { value: 1.0, lo, hi })
        .collect();
    if bumps.is_empty() {
        return WavePair::zeros(n);
    }
    let indicator = CoefficientField::bumps(bumps).expect("merged support intervals are valid");
    let ones = vec![1.0; n];
    let mut parts = (0..2).map(|i| {
        let mut v = kernels.operator(i).apply(&[Source {
            weight: &indicator,
            profile: &ones,
        }]);
        let m = v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        if m > 0.0 {
            v.iter_mut().for_each(|x| *x /= m);
        }
        v
    });
    let u1 = parts.next().unwrap();
    let u2 = parts.next().unwrap();
    WavePair::new(u1, u2)
}

fn clip(u: &mut WavePair) -> f64 {
    let mut worst: f64 = 0.0;
    for v in [&mut u.u1, &mut u.u2] {
        for x in v.iter_mut() {
            if *x < 0.0 {
                worst = worst.max(-*x);
                *x = 0.0;
            }
        }
    }
    worst
}

enum Picard {
    Converged { u: WavePair, iterations: usize, clipped: f64 },
    Stopped { best: WavePair, iterations: usize },
}

fn picard(p: &Problem, s: &Setup, seed: WavePair, cfg: &SolverConfig) -> Picard {
    let mut u = seed;
    let mut best = (f64::INFINITY, u.clone());
    let mut history: Vec<f64> = Vec::new();
    let mut clipped = 0.0;
    for it in 1..=cfg.max_iter {
        let t = apply_t(p, &s.kernels, &u);
        let d = u.distance(&t);
        if d <= cfg.tol {
            return Picard::Converged {
                u,
                iterations: it,
                clipped,
            };
        }
        if d < best.0 {
            best = (d, u.clone());
        }
        history.push(d);
        let w = cfg.stall_window;
        let stalled = history.len() > w
            && history[history.len() - w - 1..]
                .windows(2)
                .all(|x| x[1] >= x[0]);
        let mut next = WavePair::new(
            u.u1.iter()
                .zip(&t.u1)
                .map(|(a, b)| (1.0 - cfg.theta) * a + cfg.theta * b)
                .collect(),
            u.u2.iter()
                .zip(&t.u2)
                .map(|(a, b)| (1.0 - cfg.theta) * a + cfg.theta * b)
                .collect(),
        );
        clipped = clip(&mut next);
        let norm = next.norm();
        if stalled || !norm.is_finite() || norm > 4.0 * s.big_r || norm < 0.5 * s.r {
            return Picard::Stopped {
                best: best.1,
                iterations: it,
            };
        }
        u = next;
    }
    Picard::Stopped {
        best: best.1,
        iterations: cfg.max_iter,
    }
}

/// Defect correction on `u = T u`, preconditioned by the finite-difference
/// Jacobian.
fn refine_fixed_point(
    p: &Problem,
    s: &Setup,
    sys: &FdSystem,
    start: WavePair,
    tol: f64,
) -> Result<(WavePair, usize)> {
    const MAX_STEPS: usize = 50;
    let mut u = start;
    let mut last = f64::INFINITY;
    for it in 0..MAX_STEPS {
        let t = apply_t(p, &s.kernels, &u);
        let d = WavePair::new(
            u.u1.iter().zip(&t.u1).map(|(a, b)| a - b).collect(),
            u.u2.iter().zip(&t.u2).map(|(a, b)| a - b).collect(),
        );
        let defect = d.norm();
        if defect <= tol {
            return Ok((u, it));
        }
        if !defect.is_finite() || (it > 5 && defect > last) {
            return Err(Error::NewtonDivergence {
                iterations: it,
                residual: defect,
            });
        }
        last = defect;
        let rhs: Vec<f64> = sys.diagonal_part(&d).iter().map(|x| -x).collect();
        let delta = sys.jacobian(&u).solve(rhs)?;
        u = sys.step(&u, &delta, 1.0);
        let n = u.len();
        u.u1[0] = t.u1[0];
        u.u2[0] = t.u2[0];
        u.u1[n - 1] = t.u1[n - 1];
        u.u2[n - 1] = t.u2[n - 1];
    }
    Err(Error::NewtonDivergence {
        iterations: MAX_STEPS,
        residual: last,
    })
}

/// Why a seed did not produce a solution.
fn describe(level: Option<usize>, what: impl fmt::Display) -> String {
    match level {
        Some(k) => format!("seed {k}: {what}"),
        None => format!("supplied seed: {what}"),
    }
}

fn attempt(
    p: &Problem,
    s: &Setup,
    seed: WavePair,
    level: Option<usize>,
    cfg: &SolverConfig,
) -> std::result::Result<Solution, String> {
    let domain_grid = *s.kernels.grid();
    let (fixed_point, iterations, method, clipped) = match picard(p, s, seed, cfg) {
        Picard::Converged {
            u,
            iterations,
            clipped,
        } => (u, iterations, Method::Picard, clipped),
        Picard::Stopped { best, iterations } => {
            if !cfg.newton_fallback {
                return Err(describe(level, "Picard iteration stalled"));
            }
            let opts = OracleOptions::default();
            let fd = oracle_solve_with(p, &best, s.bc, None, opts)
                .map_err(|e| describe(level, e))?;
            if fd.wave.norm() < 0.5 * s.r {
                return Err(describe(level, "Newton converged to the zero solution"));
            }
            let sys = FdSystem::new(p, &domain_grid, None);
            let (u, steps) = refine_fixed_point(p, s, &sys, fd.wave, cfg.tol)
                .map_err(|e| describe(level, e))?;
            let neg = (-u.min_value()).max(0.0);
            (u, iterations + fd.iterations + steps, Method::NewtonPolished, neg)
        }
    };
    let norm = fixed_point.norm();
    if norm < 0.5 * s.r {
        return Err(describe(level, format!("collapsed to zero (norm {norm:e})")));
    }
    if norm > 2.0 * s.big_r {
        return Err(describe(level, format!("left the annulus (norm {norm})")));
    }
    let defect = fixed_point.distance(&apply_t(p, &s.kernels, &fixed_point));
    let polished = oracle_solve_with(p, &fixed_point, s.bc, None, OracleOptions::default())
        .map_err(|e| describe(level, e))?;
    let gaps = match &s.cone {
        Some(c) => cone_gap(&fixed_point, c, &domain_grid),
        None => [f64::NAN; 2],
    };
    let (fixed_point, wave, grid) = match s.bc {
        Boundary::FullLine => (fixed_point, polished.wave, domain_grid),
        Boundary::HalfLine => (
            fixed_point.odd_extension(),
            polished.wave.odd_extension(),
            *p.grid(),
        ),
    };
    let res = residual(p, &grid, &wave);
    if res.sup > cfg.residual_tol {
        return Err(describe(
            level,
            format!("residual {:e} above tolerance", res.sup),
        ));
    }
    Ok(Solution {
        diagnostics: Diagnostics {
            iterations,
            fixed_point_defect: defect,
            residual: res.sup,
            boundary: res.boundary,
            discretization_gap: wave.distance(&fixed_point),
            cone_gap: gaps,
            norm,
            method,
            seed_level: level,
            clipped,
            r: s.r,
            big_r: s.big_r,
        },
        fixed_point,
        wave,
        grid,
    })
}

fn ladder(s: &Setup, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![(s.r * s.big_r).sqrt()];
    }
    (0..count)
        .map(|k| s.r * (s.big_r / s.r).powf(k as f64 / (count - 1) as f64))
        .collect()
}

fn run_ladder(p: &Problem, s: &Setup, cfg: &SolverConfig, mut notes: Vec<String>) -> Result<Solution> {
    if s.direction.norm() == 0.0 {
        return Err(Error::NoNontrivialSolution(
            "empty coupling support: T vanishes identically".into(),
        ));
    }
    for (k, level) in ladder(s, cfg.ladder).into_iter().enumerate() {
        match attempt(p, s, s.direction.scaled(level), Some(k), cfg) {
            Ok(sol) => return Ok(sol),
            Err(why) => notes.push(why),
        }
    }
    Err(Error::NoNontrivialSolution(notes.join("; ")))
}

/// Dispatches on `cfg.symmetry`.
pub fn solve(p: &Problem, cfg: &SolverConfig) -> Result<Solution> {
    let (setup, _) = prepare(p, cfg)?;
    run_ladder(p, &setup, cfg, Vec::new())
}

/// Positive solution on the full line.
pub fn solve_ground_state(p: &Problem, cfg: &SolverConfig) -> Result<Solution> {
    solve(
        p,
        &SolverConfig {
            symmetry: Symmetry::None,
            ..*cfg
        },
    )
}

/// Odd solution built on the half line and extended to `[-L, L]`.
pub fn solve_odd(p: &Problem, cfg: &SolverConfig) -> Result<Solution> {
    solve(
        p,
        &SolverConfig {
            symmetry: Symmetry::Odd,
            ..*cfg
        },
    )
}

/// Tries `seed` (sampled on the full grid) first, then the ladder.
pub fn solve_from_seed(p: &Problem, cfg: &SolverConfig, seed: &WavePair) -> Result<Solution> {
    let (setup, _) = prepare(p, cfg)?;
    let n = p.grid().len();
    if seed.len() != n {
        return Err(Error::InvalidGrid(format!(
            "seed has {} samples, grid has {n}",
            seed.len()
        )));
    }
    let local = match setup.bc {
        Boundary::FullLine => seed.clone(),
        Boundary::HalfLine => {
            let mid = n / 2;
            WavePair::new(seed.u1[mid..].to_vec(), seed.u2[mid..].to_vec())
        }
    };
    match attempt(p, &setup, local, None, cfg) {
        Ok(sol) => Ok(sol),
        Err(why) => run_ladder(p, &setup, cfg, vec![why]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientSet, Nonlinearity};

    fn weakly_coupled(n: usize) -> Problem {
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
            Nonlinearity::decoupled_cubic(),
            Grid::symmetric(15.0, n).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn ground_state_is_positive_and_in_the_annulus() {
        let p = weakly_coupled(1501);
        let sol = solve_ground_state(&p, &SolverConfig::default()).unwrap();
        let d = &sol.diagnostics;
        assert!(d.fixed_point_defect <= 1e-8);
        assert!(d.residual <= 1e-6);
        assert!(d.norm >= d.r && d.norm <= d.big_r, "{d:?}");
        assert!(sol.fixed_point.min_value() >= -1e-9);
        assert!(d.cone_gap[0] >= -1e-9 && d.cone_gap[1] >= -1e-9);
    }

    #[test]
    fn odd_requires_even_coefficients() {
        let p = weakly_coupled(301);
        assert_eq!(
            solve_odd(&p, &SolverConfig::default()).unwrap_err(),
            Error::SupportContainsOrigin
        );
    }
}

//! Solution branches in a parameter `lambda`.
//!
//! Nonlinear-scaled: `c, f` become `lambda c, lambda f`. A solution `u` at
//! `lambda = 1` maps to the exact solution `u / sqrt(lambda)`, so each point
//! is seeded by rescaling its predecessor. Fully-scaled: `b, c, e, f` all
//! carry `lambda`; no exact map exists and the previous point is reused as
//! it is.

use crate::error::{Error, Result};
use crate::hypotheses::{branch_bounds_from, branch_constants, Variant};
use crate::model::Problem;
use crate::operator::{Kernels, WavePair};
use crate::solver::{solve, solve_from_seed, Solution, SolverConfig, Symmetry};

#[derive(Clone, Debug, PartialEq)]
pub struct BranchPoint {
    pub lambda: f64,
    pub r_lambda: f64,
    pub big_r_lambda: f64,
    /// `None` when the solve at this `lambda` failed; see `error`.
    pub solution: Option<Solution>,
    pub error: Option<String>,
}

impl BranchPoint {
    pub fn converged(&self) -> bool {
        self.solution.is_some()
    }

    pub fn norm(&self) -> Option<f64> {
        self.solution.as_ref().map(Solution::norm)
    }
}

/// `u / sqrt(lambda)`.
pub fn scaling_seed(u: &WavePair, lambda: f64) -> WavePair {
    assert!(lambda > 0.0, "lambda must be positive");
    u.scaled(1.0 / lambda.sqrt())
}

/// The problem at parameter `lambda`.
pub fn scaled_problem(p: &Problem, lambda: f64, variant: Variant) -> Problem {
    match variant {
        Variant::NonlinearScaled => p.scaled(1.0, lambda),
        Variant::FullyScaled => p.scaled(lambda, lambda),
    }
}

/// Solves at each `lambda` in the given order. Individual failures are
/// recorded on the point and the branch continues.
pub fn trace_branch(
    p: &Problem,
    lambdas: &[f64],
    variant: Variant,
    cfg: &SolverConfig,
) -> Result<Vec<BranchPoint>> {
    let kernels = match cfg.symmetry {
        Symmetry::None => Kernels::full_line(p)?,
        Symmetry::Odd => Kernels::half_line(p)?,
    };
    let constants = branch_constants(p, &kernels)?;
    let bounds = lambdas
        .iter()
        .map(|&l| branch_bounds_from(&constants, l, variant))
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(lambdas.len());
    // last converged fixed point, stored at its own lambda
    let mut previous: Option<(f64, WavePair)> = None;
    for (&lambda, b) in lambdas.iter().zip(&bounds) {
        let problem = scaled_problem(p, lambda, variant);
        let outcome = match &previous {
            None => solve(&problem, cfg),
            Some((at, u)) => {
                let seed = match variant {
                    Variant::NonlinearScaled => scaling_seed(&u.scaled(at.sqrt()), lambda),
                    Variant::FullyScaled => u.clone(),
                };
                solve_from_seed(&problem, cfg, &seed)
            }
        };
        let (solution, error) = match outcome {
            Ok(s) => {
                previous = Some((lambda, s.fixed_point.clone()));
                (Some(s), None)
            }
            Err(e @ Error::NoNontrivialSolution(_)) | Err(e @ Error::HypothesisFailure(_)) => {
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e),
        };
        points.push(BranchPoint {
            lambda,
            r_lambda: b.r,
            big_r_lambda: b.big_r,
            solution,
            error,
        });
    }
    Ok(points)
}

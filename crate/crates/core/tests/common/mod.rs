#![allow(dead_code)]

use cnls_core::model::{Bump, CoefficientField, CoefficientSet, Grid, Nonlinearity, Problem};
use cnls_core::operator::WavePair;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn constant(v: f64) -> CoefficientField {
    CoefficientField::constant(v).unwrap()
}

pub fn bump(v: f64, lo: f64, hi: f64) -> CoefficientField {
    if v == 0.0 {
        CoefficientField::zero()
    } else {
        CoefficientField::bump(v, lo, hi).unwrap()
    }
}

/// `v` on `[-2, -1]` and `[1, 2]`.
pub fn twin(v: f64) -> CoefficientField {
    CoefficientField::bumps(vec![
        Bump { value: v, lo: -2.0, hi: -1.0 },
        Bump { value: v, lo: 1.0, hi: 2.0 },
    ])
    .unwrap()
}

/// `a = d = 1`, `b = e = 0.5 * 1_[-1,1]`, `c = f = 1_[-1,1]`.
pub fn unit_set() -> CoefficientSet {
    CoefficientSet {
        a: constant(1.0),
        b: bump(0.5, -1.0, 1.0),
        c: bump(1.0, -1.0, 1.0),
        d: constant(1.0),
        e: bump(0.5, -1.0, 1.0),
        f: bump(1.0, -1.0, 1.0),
    }
}

pub fn weakly_coupled(points: usize) -> Problem {
    Problem::new(unit_set(), Nonlinearity::decoupled_cubic(), Grid::symmetric(15.0, points).unwrap())
        .unwrap()
}

pub fn spinor(points: usize) -> Problem {
    Problem::new(unit_set(), Nonlinearity::spinor_cubic(), Grid::symmetric(15.0, points).unwrap())
        .unwrap()
}

pub fn twin_problem(points: usize) -> Problem {
    Problem::new(
        CoefficientSet {
            a: constant(1.0),
            b: twin(0.5),
            c: twin(1.0),
            d: constant(1.0),
            e: twin(0.5),
            f: twin(1.0),
        },
        Nonlinearity::decoupled_cubic(),
        Grid::symmetric(15.0, points).unwrap(),
    )
    .unwrap()
}

/// Piecewise-constant potential with at most `max_pieces` pieces, values
/// in `[lo, hi]` and breakpoints in `[-3, 3]`.
pub fn random_potential(rng: &mut ChaCha8Rng, max_pieces: usize, lo: f64, hi: f64) -> CoefficientField {
    let pieces = rng.gen_range(1..=max_pieces);
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let values = (0..=cuts.len()).map(|_| rng.gen_range(lo..=hi)).collect();
    if cuts.is_empty() {
        return constant(rng.gen_range(lo..=hi));
    }
    CoefficientField::piecewise(cuts, values).unwrap()
}

/// Random interval inside `[-span, span]` of length at least `0.2`.
pub fn random_interval(rng: &mut ChaCha8Rng, span: f64) -> (f64, f64) {
    let lo = rng.gen_range(-span..span - 0.2);
    let hi = rng.gen_range(lo + 0.2..=span);
    (lo, hi)
}

/// Sum of positive Gaussians, scaled to unit sup-norm.
pub fn random_profile(rng: &mut ChaCha8Rng, grid: &Grid) -> Vec<f64> {
    let terms: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..4))
        .map(|_| {
            (
                rng.gen_range(0.2..1.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.3..2.0),
            )
        })
        .collect();
    let mut v: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| {
            terms
                .iter()
                .map(|&(amp, c, w)| amp * (-((x - c) / w).powi(2)).exp())
                .sum()
        })
        .collect();
    let m = v.iter().cloned().fold(0.0, f64::max);
    v.iter_mut().for_each(|x| *x /= m);
    v
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// CSV text with full-precision floats, as the command line writes it.
pub fn csv(grid: &Grid, u: &WavePair) -> String {
    use cnls_core::config::format_float;
    let mut s = String::from("x,u1,u2\n");
    for j in 0..grid.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            format_float(grid.x(j)),
            format_float(u.u1[j]),
            format_float(u.u2[j])
        ));
    }
    s
}

//! Panel layout for integrating piecewise-smooth grid functions.
//!
//! Every grid cell becomes one Simpson panel, or several when a cut point
//! (a coefficient discontinuity) falls strictly inside it. Grid functions
//! are reconstructed inside a panel by Lagrange interpolation over at most
//! four nodes taken from the same smooth piece, so stencils never reach
//! across a cut.

use crate::model::Grid;

/// Interpolation weights over consecutive nodes `start..start + len`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil {
    start: usize,
    len: usize,
    weights: [f64; 4],
}

impl Stencil {
    fn node(j: usize) -> Stencil {
        Stencil {
            start: j,
            len: 1,
            weights: [1.0, 0.0, 0.0, 0.0],
        }
    }

    fn lagrange(grid: &Grid, start: usize, len: usize, x: f64) -> Stencil {
        let mut weights = [0.0; 4];
        for (k, w) in weights.iter_mut().enumerate().take(len) {
            let xk = grid.x(start + k);
            let mut l = 1.0;
            for m in 0..len {
                if m != k {
                    let xm = grid.x(start + m);
                    l *= (x - xm) / (xk - xm);
                }
            }
            *w = l;
        }
        Stencil {
            start,
            len,
            weights,
        }
    }

    #[inline]
    pub(crate) fn apply(&self, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.len {
            acc += self.weights[k] * f[self.start + k];
        }
        acc
    }

    pub(crate) fn node_index(&self) -> Option<usize> {
        (self.len == 1).then_some(self.start)
    }
}

/// One Simpson panel `[lo, hi]` inside grid cell `cell`.
#[derive(Clone, Debug)]
pub(crate) struct Panel {
    pub cell: usize,
    pub lo: f64,
    pub hi: f64,
    /// `lo`, midpoint, `hi`.
    pub points: [f64; 3],
    pub stencils: [Stencil; 3],
    /// Whether the middle point is the cell midpoint.
    pub full_cell: bool,
}

impl Panel {
    pub(crate) fn midpoint(&self) -> f64 {
        self.points[1]
    }

    pub(crate) fn simpson_weights(&self) -> [f64; 3] {
        let w = (self.hi - self.lo) / 6.0;
        [w, 4.0 * w, w]
    }
}

#[derive(Clone, Debug)]
pub(crate) struct PanelPlan {
    pub panels: Vec<Panel>,
}

impl PanelPlan {
    pub(crate) fn new(grid: &Grid, cuts: &[f64]) -> PanelPlan {
        let h = grid.spacing();
        let snap = 1e-9 * h;
        let n = grid.len();

        // Interior cuts per cell, and the kink list with node-snapped values.
        let mut inner: Vec<Vec<f64>> = vec![Vec::new(); n - 1];
        let mut kinks: Vec<f64> = Vec::with_capacity(cuts.len());
        for &c in cuts {
            if !c.is_finite() {
                continue;
            }
            let j = grid.nearest(c);
            if (grid.x(j) - c).abs() <= snap {
                kinks.push(grid.x(j));
            } else {
                kinks.push(c);
                if c > grid.lo() && c < grid.hi() {
                    inner[grid.cell_of(c)].push(c);
                }
            }
        }
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();

        let piece_nodes = |m: f64| -> (usize, usize) {
            let k = kinks.partition_point(|&c| c <= m);
            let left = if k == 0 { f64::NEG_INFINITY } else { kinks[k - 1] };
            let right = if k == kinks.len() { f64::INFINITY } else { kinks[k] };
            let lo = if left.is_finite() {
                let j = grid.cell_of(left);
                if grid.x(j) >= left - snap {
                    j
                } else {
                    j + 1
                }
            } else {
                0
            };
            let hi = if right.is_finite() {
                let j = grid.cell_of(right) + 1;
                if grid.x(j) <= right + snap {
                    j
                } else {
                    j - 1
                }
            } else {
                n - 1
            };
            (lo.min(n - 1), hi.min(n - 1))
        };

        let stencil_at = |x: f64, cell: usize, piece: (usize, usize)| -> Stencil {
            let (plo, phi) = piece;
            let count = (phi + 1).saturating_sub(plo).clamp(1, 4);
            let latest = phi + 1 - count;
            let start = cell.saturating_sub(1).clamp(plo, latest.max(plo));
            Stencil::lagrange(grid, start, count, x)
        };

        let mut panels = Vec::with_capacity(n);
        for (j, cuts_in) in inner.iter_mut().enumerate() {
            cuts_in.sort_by(f64::total_cmp);
            let mut edges = Vec::with_capacity(cuts_in.len() + 2);
            edges.push(grid.x(j));
            edges.extend(cuts_in.iter().copied());
            edges.push(grid.x(j + 1));
            let full_cell = edges.len() == 2;
            for k in 0..edges.len() - 1 {
                let (lo, hi) = (edges[k], edges[k + 1]);
                let mid = 0.5 * (lo + hi);
                let piece = piece_nodes(mid);
                let s_lo = if k == 0 {
                    Stencil::node(j)
                } else {
                    stencil_at(lo, j, piece)
                };
                let s_hi = if k + 2 == edges.len() {
                    Stencil::node(j + 1)
                } else {
                    stencil_at(hi, j, piece)
                };
                panels.push(Panel {
                    cell: j,
                    lo,
                    hi,
                    points: [lo, mid, hi],
                    stencils: [s_lo, stencil_at(mid, j, piece), s_hi],
                    full_cell,
                });
            }
        }
        PanelPlan { panels }
    }
}

#[cfg(test)]
/// Composite Simpson integral of `weight(x) * profile(x)` over the grid,
/// where `weight` is constant on every panel.
pub(crate) fn integrate(
    plan: &PanelPlan,
    weight: impl Fn(f64) -> f64,
    profile: &[f64],
) -> f64 {
    plan.panels
        .iter()
        .map(|p| {
            let w = weight(p.midpoint());
            if w == 0.0 {
                return 0.0;
            }
            let sw = p.simpson_weights();
            w * (0..3).map(|k| sw[k] * p.stencils[k].apply(profile)).sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_smooth_profiles() {
        let grid = Grid::symmetric(3.0, 61).unwrap();
        let plan = PanelPlan::new(&grid, &[]);
        let f: Vec<f64> = grid.nodes().iter().map(|x| x.cos()).collect();
        let got = integrate(&plan, |_| 1.0, &f);
        assert!((got - 2.0 * 3f64.sin()).abs() < 1e-5, "{got}");
    }

    #[test]
    fn cuts_inside_cells_are_exact_for_indicators() {
        let grid = Grid::symmetric(3.0, 61).unwrap();
        let (lo, hi) = (-0.737, 1.213);
        let plan = PanelPlan::new(&grid, &[lo, hi]);
        let ones = vec![1.0; grid.len()];
        let got = integrate(&plan, |x| if (lo..=hi).contains(&x) { 1.0 } else { 0.0 }, &ones);
        assert!((got - (hi - lo)).abs() < 1e-13);
        // a kinked profile is integrated piece by piece
        let kinked: Vec<f64> = grid.nodes().iter().map(|&x| (x - lo).abs()).collect();
        let got = integrate(&plan, |_| 1.0, &kinked);
        let exact = 0.5 * (lo + 3.0).powi(2) + 0.5 * (3.0 - lo).powi(2);
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn stencils_stay_inside_their_piece() {
        let grid = Grid::symmetric(1.0, 21).unwrap();
        let plan = PanelPlan::new(&grid, &[0.0]);
        for p in &plan.panels {
            for s in &p.stencils {
                let first = grid.x(s.start);
                let last = grid.x(s.start + s.len - 1);
                if p.midpoint() < 0.0 {
                    assert!(last <= 1e-12);
                } else {
                    assert!(first >= -1e-12);
                }
            }
        }
    }
}

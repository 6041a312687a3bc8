//! Grid geometry and the monotone five-point stencil shared by time stepping,
//! residual evaluation and the corrector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::CoefficientField;

/// Uniform grid: step `dx` in `x1`, `ny` periodic nodes across the unit transverse section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub dx: f64,
    pub ny: usize,
}

impl Grid {
    pub fn new(dim: usize, dx: f64, ny: usize) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::Config(format!("dx = {dx} must be positive")));
        }
        if dim == 1 && ny != 1 || ny == 0 || !(1..=2).contains(&dim) {
            return Err(Error::Config(format!(
                "dimension {dim} with {ny} transverse nodes"
            )));
        }
        Ok(Self { dim, dx, ny })
    }

    /// `dy = dx` rounded to divide the unit section.
    pub fn square(dim: usize, dx: f64) -> Result<Self> {
        let ny = if dim == 1 {
            1
        } else {
            (1.0 / dx).round().max(3.0) as usize
        };
        Self::new(dim, dx, ny)
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    /// Grid steps per period `p`, if `p` is a grid multiple.
    pub fn cells_per(&self, p: f64) -> Option<usize> {
        let m = (p / self.dx).round();
        ((m * self.dx - p).abs() <= 1e-9 * p && m >= 1.0).then_some(m as usize)
    }
}

/// Weights of `L u = div(A grad u) - q . grad u` at one node:
/// `L u_ij = xm u_{i-1,j} + xp u_{i+1,j} + ym u_{i,j-1} + yp u_{i,j+1} + c u_ij`.
///
/// Diffusion is conservative with face-averaged `A`; advection is the upwind flux form
/// of `div(q u)` with face-averaged velocities. Off-diagonal weights are non-negative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NodeWeights {
    pub xm: f64,
    pub xp: f64,
    pub ym: f64,
    pub yp: f64,
    pub c: f64,
}

#[derive(Clone, Debug)]
pub struct Stencil {
    grid: Grid,
    /// Columns per coefficient period (1 for media constant in `x1`).
    n1: usize,
    /// Transverse coefficient rows (1 for media constant in `x2`).
    n2: usize,
    weights: Vec<NodeWeights>,
    max_advective_diag: f64,
}

impl Stencil {
    pub fn new(coeffs: &CoefficientField, grid: Grid) -> Result<Self> {
        if coeffs.dim() != grid.dim {
            return Err(Error::Config(format!(
                "medium of dimension {} on a {}-D grid",
                coeffs.dim(),
                grid.dim
            )));
        }
        if coeffs.has_cross_diffusion() {
            return Err(Error::Config(
                "the monotone scheme needs a diagonal diffusion matrix (a12 = 0)".into(),
            ));
        }
        let (c1, c2) = coeffs.shape();
        let n1 = if coeffs.is_constant() { 1 } else { c1 };
        if n1 > 1 && grid.cells_per(coeffs.period()) != Some(n1) {
            return Err(Error::Config(format!(
                "grid step {} does not match the coefficient grid {} per period {}",
                grid.dx,
                n1,
                coeffs.period()
            )));
        }
        let n2 = if coeffs.is_constant() || c2 == 1 {
            1
        } else {
            c2
        };
        if n2 > 1 && n2 != grid.ny {
            return Err(Error::Config(format!(
                "{} transverse nodes do not match the coefficient grid ({n2})",
                grid.ny
            )));
        }
        let cf = if coeffs.is_constant() {
            CoefficientField::new(
                coeffs.dim(),
                coeffs.period(),
                1,
                1,
                vec![coeffs.q(0, 0)],
                vec![coeffs.a(0, 0)],
            )?
        } else {
            coeffs.clone()
        };
        let (dx, dy) = (grid.dx, grid.dy());
        let mut weights = Vec::with_capacity(n1 * n2);
        let mut max_adv = 0.0f64;
        for i in 0..n1 {
            let ie = (i + 1) % n1;
            let iw = (i + n1 - 1) % n1;
            for j in 0..n2 {
                let jn = (j + 1) % n2;
                let js = (j + n2 - 1) % n2;
                let (ac, ae, aw) = (cf.a(i, j), cf.a(ie, j), cf.a(iw, j));
                let (qc, qe, qw) = (cf.q(i, j), cf.q(ie, j), cf.q(iw, j));
                let axp = 0.5 * (ac[0] + ae[0]);
                let axm = 0.5 * (aw[0] + ac[0]);
                let vxp = 0.5 * (qc[0] + qe[0]);
                let vxm = 0.5 * (qw[0] + qc[0]);
                let mut w = NodeWeights {
                    xm: axm / (dx * dx) + vxm.max(0.0) / dx,
                    xp: axp / (dx * dx) - vxp.min(0.0) / dx,
                    ..Default::default()
                };
                let mut adv = (vxp.max(0.0) - vxm.min(0.0)) / dx;
                w.c = -(axp + axm) / (dx * dx);
                if grid.dim == 2 {
                    let (an, as_) = (cf.a(i, jn), cf.a(i, js));
                    let (qn, qs) = (cf.q(i, jn), cf.q(i, js));
                    let ayp = 0.5 * (ac[2] + an[2]);
                    let aym = 0.5 * (as_[2] + ac[2]);
                    let vyp = 0.5 * (qc[1] + qn[1]);
                    let vym = 0.5 * (qs[1] + qc[1]);
                    w.ym = aym / (dy * dy) + vym.max(0.0) / dy;
                    w.yp = ayp / (dy * dy) - vyp.min(0.0) / dy;
                    w.c -= (ayp + aym) / (dy * dy);
                    adv += (vyp.max(0.0) - vym.min(0.0)) / dy;
                }
                w.c -= adv;
                max_adv = max_adv.max(adv);
                weights.push(w);
            }
        }
        Ok(Self {
            grid,
            n1,
            n2,
            weights,
            max_advective_diag: max_adv,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Columns per coefficient period.
    pub fn period_cols(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn cell_of(&self, g: i64) -> usize {
        g.rem_euclid(self.n1 as i64) as usize
    }

    /// Weights for global column `g`, transverse row `j`.
    #[inline]
    pub fn at(&self, g: i64, j: usize) -> &NodeWeights {
        let c = self.cell_of(g);
        &self.weights[c * self.n2 + if self.n2 == 1 { 0 } else { j }]
    }

    /// Weights of all rows of cell column `c`.
    #[inline]
    pub fn column(&self, c: usize) -> ColumnWeights<'_> {
        ColumnWeights {
            w: &self.weights[c * self.n2..(c + 1) * self.n2],
        }
    }

    pub fn max_advective_diag(&self) -> f64 {
        self.max_advective_diag
    }

    /// `L u` at node `(i, j)` of column-major `values` with `nx` columns, using the
    /// given fills beyond the first and last column. `g0` is the global index of column 0.
    #[inline]
    pub fn apply(
        &self,
        values: &[f64],
        nx: usize,
        g0: i64,
        fills: (f64, f64),
        i: usize,
        j: usize,
    ) -> f64 {
        let ny = self.grid.ny;
        let w = self.at(g0 + i as i64, j);
        let u = values[i * ny + j];
        let um = if i == 0 {
            fills.0
        } else {
            values[(i - 1) * ny + j]
        };
        let up = if i + 1 == nx {
            fills.1
        } else {
            values[(i + 1) * ny + j]
        };
        let mut s = w.xm * um + w.xp * up + w.c * u;
        if self.grid.dim == 2 {
            let jm = if j == 0 { ny - 1 } else { j - 1 };
            let jp = if j + 1 == ny { 0 } else { j + 1 };
            s += w.ym * values[i * ny + jm] + w.yp * values[i * ny + jp];
        }
        s
    }
}

#[derive(Clone, Copy)]
pub struct ColumnWeights<'a> {
    w: &'a [NodeWeights],
}

impl<'a> ColumnWeights<'a> {
    #[inline]
    pub fn row(&self, j: usize) -> &'a NodeWeights {
        if self.w.len() == 1 {
            &self.w[0]
        } else {
            &self.w[j]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn annihilates_constants() {
        let c = CoefficientField::from_fn(2, 1.0, 8, 8, |x, y| {
            (
                [(2.0 * PI * y).sin(), 0.0],
                [1.0 + 0.3 * (2.0 * PI * x).cos(), 0.0, 1.2],
            )
        })
        .unwrap();
        let s = Stencil::new(&c, Grid::new(2, 1.0 / 8.0, 8).unwrap()).unwrap();
        for w in &s.weights {
            let sum = w.xm + w.xp + w.ym + w.yp + w.c;
            assert!(sum.abs() < 1e-10, "{sum}");
            assert!(w.xm >= 0.0 && w.xp >= 0.0 && w.ym >= 0.0 && w.yp >= 0.0);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let c =
            CoefficientField::from_fn(1, 1.0, 8, 1, |x, _| ([0.0; 2], [1.0 + 0.1 * x, 0.0, 0.0]))
                .unwrap();
        assert!(Stencil::new(&c, Grid::new(1, 0.1, 1).unwrap()).is_err());
        assert!(Stencil::new(&c, Grid::new(1, 0.125, 1).unwrap()).is_ok());
        let id = CoefficientField::identity(1, 1.0);
        assert!(Stencil::new(&id, Grid::new(1, 0.37, 1).unwrap()).is_ok());
    }

    #[test]
    fn laplacian_weights() {
        let id = CoefficientField::identity(1, 1.0);
        let s = Stencil::new(&id, Grid::new(1, 0.1, 1).unwrap()).unwrap();
        let w = s.at(17, 0);
        assert!((w.xm - 100.0).abs() < 1e-12 && (w.xp - 100.0).abs() < 1e-12);
        assert!((w.c + 200.0).abs() < 1e-12);
    }
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Stencil};
use crate::medium::CoefficientField;

/// Periodic cell function on the coefficient grid, stored at `i*n2 + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFunction {
    pub n1: usize,
    pub n2: usize,
    pub period: f64,
    pub values: Vec<f64>,
}

impl CellFunction {
    pub fn constant(n1: usize, n2: usize, period: f64, v: f64) -> Self {
        Self {
            n1,
            n2,
            period,
            values: vec![v; n1 * n2],
        }
    }

    /// Value at global grid column `g`, transverse row `j`.
    #[inline]
    pub fn at(&self, g: i64, j: usize) -> f64 {
        let i = g.rem_euclid(self.n1 as i64) as usize;
        let j = if self.n2 == 1 { 0 } else { j % self.n2 };
        self.values[i * self.n2 + j]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
            ..self.clone()
        }
    }
}

/// Natural grid of a coefficient field: its own sampling, with `ny = n2`.
pub fn cell_grid(coeffs: &CoefficientField) -> Result<Grid> {
    let (n1, n2) = coeffs.shape();
    Grid::new(
        coeffs.dim(),
        coeffs.period() / n1 as f64,
        if coeffs.dim() == 1 { 1 } else { n2 },
    )
}

/// Dense matrix of the evolution stencil `L` on the periodic cell.
pub fn stencil_matrix(stencil: &Stencil, n1: usize, ny: usize) -> DMatrix<f64> {
    let n = n1 * ny;
    let mut m = DMatrix::<f64>::zeros(n, n);
    let dim = stencil.grid().dim;
    for i in 0..n1 {
        let ie = (i + 1) % n1;
        let iw = (i + n1 - 1) % n1;
        for j in 0..ny {
            let w = stencil.at(i as i64, j);
            let r = i * ny + j;
            m[(r, r)] += w.c;
            m[(r, ie * ny + j)] += w.xp;
            m[(r, iw * ny + j)] += w.xm;
            if dim == 2 {
                m[(r, i * ny + (j + 1) % ny)] += w.yp;
                m[(r, i * ny + (j + ny - 1) % ny)] += w.ym;
            }
        }
    }
    m
}

/// Solves `-div(A grad v) + q.grad v = q1 - div(A e1)` (direction +1) or the mirrored
/// problem with right-hand side `-q1 + div(A e1)` (direction -1) on the periodic cell.
///
/// The discretization is the evolution stencil, so `x1 - v` (resp. `x1 + v`) is exactly
/// annihilated by the discrete operator. The returned solution has zero mean.
pub fn solve_corrector(coeffs: &CoefficientField, direction: i32) -> Result<CellFunction> {
    solve_corrector_on(coeffs, direction, cell_grid(coeffs)?)
}

/// As [`solve_corrector`] on an explicit grid (the transverse resolution matters for
/// media constant in `x2`).
pub fn solve_corrector_on(
    coeffs: &CoefficientField,
    direction: i32,
    grid: Grid,
) -> Result<CellFunction> {
    if direction != 1 && direction != -1 {
        return Err(Error::Domain(format!(
            "direction {direction} must be +1 or -1"
        )));
    }
    let stencil = Stencil::new(coeffs, grid)?;
    let n1 = stencil.period_cols();
    let ny = grid.ny;
    let period = coeffs.period();
    if coeffs.is_constant() {
        return Ok(CellFunction::constant(n1, ny, period, 0.0));
    }
    let n = n1 * ny;
    let l = stencil_matrix(&stencil, n1, ny);
    // L x1 evaluated with offsets relative to each node.
    let sign = direction as f64;
    let b = DVector::from_iterator(
        n,
        (0..n1).flat_map(|i| {
            let st = &stencil;
            (0..ny).map(move |j| {
                let w = st.at(i as i64, j);
                sign * grid.dx * (w.xp - w.xm)
            })
        }),
    );
    let scale = (0..n).fold(0.0f64, |m, k| m.max(l[(k, k)].abs())).max(1.0);
    let s = scale / n as f64;
    let mut bmat = l.clone();
    bmat.add_scalar_mut(s);
    let lu = bmat.lu();
    let mut x = lu
        .solve(&b)
        .ok_or_else(|| Error::Solver("corrector matrix is singular".into()))?;
    let mut res = f64::INFINITY;
    for _ in 0..6 {
        let mean = x.mean();
        x.add_scalar_mut(-mean);
        let r = &b - &l * &x;
        res = r.amax();
        if res <= 1e-12 * scale {
            break;
        }
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
    }
    let mean = x.mean();
    x.add_scalar_mut(-mean);
    let r = &b - &l * &x;
    res = res.min(r.amax());
    if !(res <= 1e-10) {
        let svd = l.clone().singular_values();
        let smax = svd.max();
        let smin = svd
            .iter()
            .cloned()
            .filter(|v| *v > 0.0)
            .fold(f64::INFINITY, f64::min);
        return Err(Error::Solver(format!(
            "corrector residual {res:.3e} above 1e-10; singular values span [{smin:.3e}, {smax:.3e}]"
        )));
    }
    Ok(CellFunction {
        n1,
        n2: ny,
        period,
        values: x.iter().copied().collect(),
    })
}

/// Max-norm of `L v - direction * L x1` for a computed corrector.
pub fn corrector_residual(
    coeffs: &CoefficientField,
    direction: i32,
    grid: Grid,
    v: &CellFunction,
) -> Result<f64> {
    let stencil = Stencil::new(coeffs, grid)?;
    let n1 = stencil.period_cols();
    let ny = grid.ny;
    let mut worst = 0.0f64;
    for i in 0..n1 {
        for j in 0..ny {
            let w = stencil.at(i as i64, j);
            let g = i as i64;
            let mut lv = w.c * v.at(g, j) + w.xp * v.at(g + 1, j) + w.xm * v.at(g - 1, j);
            if grid.dim == 2 {
                lv += w.yp * v.at(g, (j + 1) % ny) + w.ym * v.at(g, (j + ny - 1) % ny);
            }
            let rhs = direction as f64 * grid.dx * (w.xp - w.xm);
            worst = worst.max((lv - rhs).abs());
        }
    }
    Ok(worst)
}

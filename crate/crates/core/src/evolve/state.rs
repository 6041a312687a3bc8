use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Grid function on the window of columns `i_lo .. i_lo + nx` (global column `g` sits at
/// `x1 = g*dx`), stored column-major at `i*ny + j`. Fills are per transverse row and stand
/// for the solution beyond each window edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionState {
    pub time: f64,
    pub dt: f64,
    pub grid: Grid,
    pub i_lo: i64,
    pub nx: usize,
    pub left_fill: Vec<f64>,
    pub right_fill: Vec<f64>,
    pub values: Vec<f64>,
}

impl SolutionState {
    pub fn new(
        grid: Grid,
        dt: f64,
        i_lo: i64,
        nx: usize,
        fills: (f64, f64),
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != nx * grid.ny || nx < 3 {
            return Err(Error::Config(format!(
                "{} values for a {nx} x {} window",
                values.len(),
                grid.ny
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt = {dt} must be positive")));
        }
        let s = Self {
            time: 0.0,
            dt,
            grid,
            i_lo,
            nx,
            left_fill: vec![fills.0; grid.ny],
            right_fill: vec![fills.1; grid.ny],
            values,
        };
        s.check_range()?;
        Ok(s)
    }

    /// Samples `u(x1, x2)` at the nodes of the window `[x_lo, x_hi]` (rounded outward to the grid).
    pub fn from_fn(
        grid: Grid,
        dt: f64,
        window: (f64, f64),
        fills: (f64, f64),
        u: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let i_lo = (window.0 / grid.dx).floor() as i64;
        let i_hi = (window.1 / grid.dx).ceil() as i64;
        let nx = (i_hi - i_lo + 1).max(0) as usize;
        let ny = grid.ny;
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let x1 = (i_lo + i as i64) as f64 * grid.dx;
            for j in 0..ny {
                values.push(u(x1, j as f64 * grid.dy()));
            }
        }
        Self::new(grid, dt, i_lo, nx, fills, values)
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    #[inline]
    pub fn x1(&self, i: usize) -> f64 {
        (self.i_lo + i as i64) as f64 * self.grid.dx
    }

    #[inline]
    pub fn x2(&self, j: usize) -> f64 {
        j as f64 * self.grid.dy()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.x1(0), self.x1(self.nx - 1))
    }

    #[inline]
    pub fn column(&self, i: usize) -> &[f64] {
        let ny = self.grid.ny;
        &self.values[i * ny..(i + 1) * ny]
    }

    /// Value at global column `g`, with the fills outside the window.
    #[inline]
    pub fn at_global(&self, g: i64, j: usize) -> f64 {
        let i = g - self.i_lo;
        if i < 0 {
            self.left_fill[j]
        } else if i >= self.nx as i64 {
            self.right_fill[j]
        } else {
            self.values[i as usize * self.grid.ny + j]
        }
    }

    /// Linear interpolation in `x1` at row `j`, fills outside.
    pub fn at_x1(&self, x1: f64, j: usize) -> f64 {
        let t = x1 / self.grid.dx;
        let g = t.floor();
        let w = t - g;
        let g = g as i64;
        let a = self.at_global(g, j);
        if w == 0.0 {
            a
        } else {
            (1.0 - w) * a + w * self.at_global(g + 1, j)
        }
    }

    pub fn set_fills(&mut self, left: f64, right: f64) {
        self.left_fill.iter_mut().for_each(|v| *v = left);
        self.right_fill.iter_mut().for_each(|v| *v = right);
    }

    pub(crate) fn check_range(&self) -> Result<()> {
        let ny = self.grid.ny;
        let fills = self.left_fill.iter().chain(&self.right_fill);
        if let Some(v) = fills.clone().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("fill value {v} outside [0, 1]")));
        }
        if let Some(k) = self.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Instability {
                column: self.i_lo + (k / ny) as i64,
                row: k % ny,
                time: self.time,
                value: self.values[k],
            });
        }
        Ok(())
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

    /// `sum u * dx * dy`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx * self.grid.dy()
    }

    /// Sup-norm distance over the union of both windows (fills outside each).
    pub fn distance(&self, other: &SolutionState) -> f64 {
        let lo = self.i_lo.min(other.i_lo);
        let hi = (self.i_lo + self.nx as i64).max(other.i_lo + other.nx as i64);
        let mut d = 0.0f64;
        for g in lo..hi {
            for j in 0..self.grid.ny {
                d = d.max((self.at_global(g, j) - other.at_global(g, j)).abs());
            }
        }
        d
    }

    /// CSV `t,x1[,x2],u` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(if self.grid.dim == 2 {
            "t,x1,x2,u\n"
        } else {
            "t,x1,u\n"
        });
        for i in 0..self.nx {
            for j in 0..self.grid.ny {
                let u = self.values[i * self.grid.ny + j];
                if self.grid.dim == 2 {
                    s += &format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        self.time,
                        self.x1(i),
                        self.x2(j),
                        u
                    );
                } else {
                    s += &format!("{:.16e},{:.16e},{:.16e}\n", self.time, self.x1(i), u);
                }
            }
        }
        s
    }
}

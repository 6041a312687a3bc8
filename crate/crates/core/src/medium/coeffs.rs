//! Periodic advection `q` and diffusion `A` sampled on the periodicity cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples of `q = (q1, q2)` and symmetric `A = [[a11, a12], [a12, a22]]` on an
/// `n1 x n2` grid of the cell `[0, p) x [0, 1)`. Node `(i, j)` sits at
/// `(i*p/n1, j/n2)` and is stored at index `i*n2 + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoeffDoc", into = "CoeffDoc")]
pub struct CoefficientField {
    dim: usize,
    period: f64,
    n1: usize,
    n2: usize,
    q: Vec<[f64; 2]>,
    a: Vec<[f64; 3]>,
    a_lower: f64,
    a_upper: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffDoc {
    dim: usize,
    period: f64,
    shape: [usize; 2],
    q: Vec<[f64; 2]>,
    #[serde(rename = "A")]
    a: Vec<[f64; 3]>,
}

impl TryFrom<CoeffDoc> for CoefficientField {
    type Error = Error;
    fn try_from(d: CoeffDoc) -> Result<Self> {
        CoefficientField::new(d.dim, d.period, d.shape[0], d.shape[1], d.q, d.a)
    }
}

impl From<CoefficientField> for CoeffDoc {
    fn from(c: CoefficientField) -> Self {
        CoeffDoc {
            dim: c.dim,
            period: c.period,
            shape: [c.n1, c.n2],
            q: c.q,
            a: c.a,
        }
    }
}

fn eig_bounds(dim: usize, a: &[f64; 3]) -> (f64, f64) {
    if dim == 1 {
        return (a[0], a[0]);
    }
    let m = 0.5 * (a[0] + a[2]);
    let d = (0.25 * (a[0] - a[2]).powi(2) + a[1] * a[1]).sqrt();
    (m - d, m + d)
}

impl CoefficientField {
    pub fn new(
        dim: usize,
        period: f64,
        n1: usize,
        n2: usize,
        q: Vec<[f64; 2]>,
        a: Vec<[f64; 3]>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidMedium(format!(
                "dimension {dim} not supported"
            )));
        }
        if !(period > 0.0) {
            return Err(Error::InvalidMedium(format!(
                "period {period} must be positive"
            )));
        }
        if n1 == 0 || n2 == 0 || (dim == 1 && n2 != 1) {
            return Err(Error::InvalidMedium(format!("bad cell shape {n1} x {n2}")));
        }
        if q.len() != n1 * n2 || a.len() != n1 * n2 {
            return Err(Error::InvalidMedium(format!(
                "expected {} samples, got q: {}, A: {}",
                n1 * n2,
                q.len(),
                a.len()
            )));
        }
        if q.iter()
            .flatten()
            .chain(a.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidMedium("non-finite coefficient sample".into()));
        }
        if dim == 1 && q.iter().any(|v| v[0] != 0.0 || v[1] != 0.0) {
            return Err(Error::InvalidMedium(
                "a divergence-free mean-zero flow in one dimension vanishes; got nonzero q".into(),
            ));
        }
        let mut a = a;
        if dim == 1 {
            for s in a.iter_mut() {
                s[1] = 0.0;
                s[2] = s[0];
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for s in &a {
            let (l, h) = eig_bounds(dim, s);
            lo = lo.min(l);
            hi = hi.max(h);
        }
        if !(lo > 0.0) {
            return Err(Error::InvalidMedium(format!(
                "diffusion matrix not uniformly elliptic (smallest eigenvalue {lo})"
            )));
        }
        Ok(Self {
            dim,
            period,
            n1,
            n2,
            q,
            a,
            a_lower: lo,
            a_upper: hi,
        })
    }

    /// `A = I`, `q = 0`.
    pub fn identity(dim: usize, period: f64) -> Self {
        Self::new(dim, period, 1, 1, vec![[0.0; 2]], vec![[1.0, 0.0, 1.0]])
            .expect("identity coefficients are valid")
    }

    /// Samples `(q, A)` of a closure on the `n1 x n2` cell grid.
    pub fn from_fn(
        dim: usize,
        period: f64,
        n1: usize,
        n2: usize,
        f: impl Fn(f64, f64) -> ([f64; 2], [f64; 3]),
    ) -> Result<Self> {
        let mut q = Vec::with_capacity(n1 * n2);
        let mut a = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                let (qq, aa) = f(i as f64 * period / n1 as f64, j as f64 / n2 as f64);
                q.push(qq);
                a.push(aa);
            }
        }
        Self::new(dim, period, n1, n2, q, a)
    }

    /// The same medium on an `n1 x n2` grid. Only constant fields can be resampled.
    pub fn at_resolution(&self, n1: usize, n2: usize) -> Result<Self> {
        if (n1, n2) == (self.n1, self.n2) {
            return Ok(self.clone());
        }
        if self.dim == 1 && n2 != 1 {
            return Err(Error::Config("one-dimensional media have n2 = 1".into()));
        }
        let const1 = self.n1 == 1 || n1 == self.n1;
        let const2 = self.n2 == 1 || n2 == self.n2;
        if !(const1 && const2) {
            return Err(Error::Config(format!(
                "coefficients sampled on {} x {} cannot be used at {n1} x {n2}",
                self.n1, self.n2
            )));
        }
        let mut q = Vec::with_capacity(n1 * n2);
        let mut a = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                let s = self.index(i % self.n1, j % self.n2);
                q.push(self.q[s]);
                a.push(self.a[s]);
            }
        }
        Self::new(self.dim, self.period, n1, n2, q, a)
    }

    /// Mirror image under `x1 -> -x1`.
    pub fn reflected(&self) -> Self {
        let mut q = Vec::with_capacity(self.q.len());
        let mut a = Vec::with_capacity(self.a.len());
        for i in 0..self.n1 {
            let src = (self.n1 - i) % self.n1;
            for j in 0..self.n2 {
                let s = self.index(src, j);
                q.push([-self.q[s][0], self.q[s][1]]);
                a.push([self.a[s][0], -self.a[s][1], self.a[s][2]]);
            }
        }
        Self::new(self.dim, self.period, self.n1, self.n2, q, a)
            .expect("reflection preserves validity")
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn h1(&self) -> f64 {
        self.period / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        1.0 / self.n2 as f64
    }

    pub fn q(&self, i: usize, j: usize) -> [f64; 2] {
        self.q[self.index(i, j)]
    }

    /// `[a11, a12, a22]`.
    pub fn a(&self, i: usize, j: usize) -> [f64; 3] {
        self.a[self.index(i, j)]
    }

    pub fn a_lower(&self) -> f64 {
        self.a_lower
    }

    pub fn a_upper(&self) -> f64 {
        self.a_upper
    }

    pub fn max_abs_q(&self) -> [f64; 2] {
        self.q.iter().fold([0.0, 0.0], |m, v| {
            [m[0].max(v[0].abs()), m[1].max(v[1].abs())]
        })
    }

    pub fn is_constant(&self) -> bool {
        self.q.iter().all(|v| *v == self.q[0]) && self.a.iter().all(|v| *v == self.a[0])
    }

    pub fn has_cross_diffusion(&self) -> bool {
        self.a.iter().any(|v| v[1] != 0.0)
    }

    /// Largest `|div q|` on the face-averaged (staggered) stencil.
    pub fn max_discrete_divergence(&self) -> f64 {
        let (n1, n2) = (self.n1, self.n2);
        let (h1, h2) = (self.h1(), self.h2());
        let mut worst = 0.0f64;
        for i in 0..n1 {
            for j in 0..n2 {
                let ip = (i + 1) % n1;
                let im = (i + n1 - 1) % n1;
                let jp = (j + 1) % n2;
                let jm = (j + n2 - 1) % n2;
                let c = self.q(i, j);
                let fx = 0.5 * (c[0] + self.q(ip, j)[0]) - 0.5 * (self.q(im, j)[0] + c[0]);
                let fy = if self.dim == 2 {
                    0.5 * (c[1] + self.q(i, jp)[1]) - 0.5 * (self.q(i, jm)[1] + c[1])
                } else {
                    0.0
                };
                worst = worst.max((fx / h1 + fy / h2).abs());
            }
        }
        worst
    }

    /// Cell average of `q1`.
    pub fn mean_q1(&self) -> f64 {
        self.q.iter().map(|v| v[0]).sum::<f64>() / self.q.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_one_dimensional_flow() {
        let r = CoefficientField::new(
            1,
            1.0,
            2,
            1,
            vec![[0.1, 0.0], [-0.1, 0.0]],
            vec![[1.0, 0.0, 1.0]; 2],
        );
        assert!(r.is_err());
    }

    #[test]
    fn rejects_non_elliptic() {
        let r = CoefficientField::new(2, 1.0, 1, 1, vec![[0.0; 2]], vec![[1.0, 1.0, 1.0]]);
        assert!(r.is_err());
    }

    #[test]
    fn ellipticity_bounds() {
        let c = CoefficientField::from_fn(1, 1.0, 64, 1, |x, _| {
            ([0.0; 2], [1.0 + 0.5 * (2.0 * PI * x).sin(), 0.0, 0.0])
        })
        .unwrap();
        assert!((c.a_lower() - 0.5).abs() < 1e-12);
        assert!((c.a_upper() - 1.5).abs() < 1e-12);
        let c = CoefficientField::new(2, 1.0, 1, 1, vec![[0.0; 2]], vec![[2.0, 1.0, 2.0]]).unwrap();
        assert!((c.a_lower() - 1.0).abs() < 1e-15 && (c.a_upper() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn shear_is_discretely_incompressible() {
        let c = CoefficientField::from_fn(2, 1.0, 1, 16, |_, y| {
            ([(2.0 * PI * y).sin(), 0.0], [1.0, 0.0, 1.0])
        })
        .unwrap();
        assert!(c.max_discrete_divergence() <= 1e-12);
        assert!(c.mean_q1().abs() <= 1e-12);
    }

    #[test]
    fn resolution_and_reflection() {
        let c = CoefficientField::identity(2, 0.5);
        let d = c.at_resolution(8, 4).unwrap();
        assert_eq!(d.shape(), (8, 4));
        assert!(d.is_constant());
        let p = CoefficientField::from_fn(1, 1.0, 4, 1, |x, _| ([0.0; 2], [1.0 + x, 0.0, 0.0]))
            .unwrap();
        assert!(p.at_resolution(8, 1).is_err());
        let r = p.reflected();
        assert_eq!(r.a(1, 0)[0], p.a(3, 0)[0]);
        assert_eq!(r.a(0, 0)[0], p.a(0, 0)[0]);
    }

    #[test]
    fn json_roundtrip() {
        let c =
            CoefficientField::from_fn(2, 1.0, 2, 3, |_, y| ([y - 1.0 / 3.0, 0.0], [1.0, 0.0, 2.0]))
                .unwrap();
        let d = CoefficientField::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(c, d);
    }
}

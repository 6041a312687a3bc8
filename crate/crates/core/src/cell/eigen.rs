use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::corrector::CellFunction;
use crate::error::{Error, Result};
use crate::medium::CoefficientField;

const MAX_ITER: usize = 300;

/// Principal eigenpair `(kappa, gamma)` of the twisted cell operator at decay rate `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub lambda: f64,
    pub direction: i32,
    pub kappa: f64,
    /// Positive, normalized so that `min gamma = 1`.
    pub gamma: CellFunction,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Centered discretization of
/// `div(A grad g) - q.grad g - lambda (A e1 + A^T e1).grad g + lambda (lambda a11 - div(A e1) + q1) g`
/// on the coefficient grid. Direction -1 replaces `e1, q1` by `-e1, -q1`, which is the
/// same operator at `-lambda`.
pub fn eigen_operator(coeffs: &CoefficientField, lambda: f64, direction: i32) -> DMatrix<f64> {
    let lam = lambda * direction as f64;
    let (n1, n2) = coeffs.shape();
    let (h1, h2) = (coeffs.h1(), coeffs.h2());
    let two_d = coeffs.dim() == 2;
    let n = n1 * n2;
    let idx = |i: usize, j: usize| i * n2 + j;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n1 {
        let ie = (i + 1) % n1;
        let iw = (i + n1 - 1) % n1;
        for j in 0..n2 {
            let jn = (j + 1) % n2;
            let js = (j + n2 - 1) % n2;
            let r = idx(i, j);
            let a = coeffs.a(i, j);
            let (ae, aw) = (coeffs.a(ie, j), coeffs.a(iw, j));
            let q = coeffs.q(i, j);
            let axp = 0.5 * (a[0] + ae[0]);
            let axm = 0.5 * (aw[0] + a[0]);
            m[(r, idx(ie, j))] += axp / (h1 * h1);
            m[(r, idx(iw, j))] += axm / (h1 * h1);
            m[(r, r)] -= (axp + axm) / (h1 * h1);
            let mut div_ae1 = (ae[0] - aw[0]) / (2.0 * h1);
            let mut b = [-q[0] - 2.0 * lam * a[0], 0.0];
            if two_d {
                let (an, as_) = (coeffs.a(i, jn), coeffs.a(i, js));
                let ayp = 0.5 * (a[2] + an[2]);
                let aym = 0.5 * (as_[2] + a[2]);
                m[(r, idx(i, jn))] += ayp / (h2 * h2);
                m[(r, idx(i, js))] += aym / (h2 * h2);
                m[(r, r)] -= (ayp + aym) / (h2 * h2);
                // d1(a12 d2 g) + d2(a12 d1 g)
                let k = 1.0 / (4.0 * h1 * h2);
                let (a12e, a12w, a12n, a12s) = (ae[1], aw[1], an[1], as_[1]);
                if a12e != 0.0 || a12w != 0.0 || a12n != 0.0 || a12s != 0.0 {
                    m[(r, idx(ie, jn))] += k * (a12e + a12n);
                    m[(r, idx(ie, js))] -= k * (a12e + a12s);
                    m[(r, idx(iw, jn))] -= k * (a12w + a12n);
                    m[(r, idx(iw, js))] += k * (a12w + a12s);
                }
                div_ae1 += (an[1] - as_[1]) / (2.0 * h2);
                b[1] = -q[1] - 2.0 * lam * a[1];
            }
            m[(r, idx(ie, j))] += b[0] / (2.0 * h1);
            m[(r, idx(iw, j))] -= b[0] / (2.0 * h1);
            if two_d {
                m[(r, idx(i, jn))] += b[1] / (2.0 * h2);
                m[(r, idx(i, js))] -= b[1] / (2.0 * h2);
            }
            m[(r, r)] += lam * (lam * a[0] - div_ae1 + q[0]);
        }
    }
    m
}

fn cw_bounds(l: &DMatrix<f64>, y: &DVector<f64>) -> (f64, f64) {
    let ly = l * y;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in ly.iter().zip(y.iter()) {
        let r = a / b;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Principal eigenvalue `kappa(lambda)` (maximal real part) with positive eigenfunction,
/// by shifted inverse iteration. The shift starts above the Gershgorin bound and moves
/// down to the Collatz-Wielandt upper bound as the iterate improves.
pub fn principal_eigen(
    coeffs: &CoefficientField,
    lambda: f64,
    direction: i32,
) -> Result<EigenSolution> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda = {lambda} must be >= 0")));
    }
    if direction != 1 && direction != -1 {
        return Err(Error::Domain(format!(
            "direction {direction} must be +1 or -1"
        )));
    }
    let (n1, n2) = coeffs.shape();
    let period = coeffs.period();
    if lambda == 0.0 {
        return Ok(EigenSolution {
            lambda,
            direction,
            kappa: 0.0,
            gamma: CellFunction::constant(n1, n2, period, 1.0),
            residual_norm: 0.0,
            iterations: 0,
        });
    }
    let l = eigen_operator(coeffs, lambda, direction);
    let n = l.nrows();
    let mut gersh = f64::NEG_INFINITY;
    let mut diag_scale = 0.0f64;
    for r in 0..n {
        let off: f64 = (0..n).filter(|&c| c != r).map(|c| l[(r, c)].abs()).sum();
        gersh = gersh.max(l[(r, r)] + off);
        diag_scale = diag_scale.max(l[(r, r)].abs());
    }
    let mut sigma = gersh + 1.0;
    let shifted = |s: f64| {
        let mut b = -l.clone();
        for k in 0..n {
            b[(k, k)] += s;
        }
        b.lu()
    };
    let mut lu = shifted(sigma);
    let mut y = DVector::from_element(n, 1.0);
    let mut history = Vec::new();
    let tol = 1e-12 * diag_scale.max(1.0);
    for it in 1..=MAX_ITER {
        let z = lu
            .solve(&y)
            .ok_or_else(|| Error::Solver("singular shifted eigen operator".into()))?;
        let zmax = z.amax();
        y = z / zmax;
        if let Some(k) = y.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Solver(format!(
                "eigen iterate lost positivity at node {k} (value {})",
                y[k]
            )));
        }
        let (lo, hi) = cw_bounds(&l, &y);
        let gap = hi - lo;
        history.push(gap);
        if gap <= tol + 1e-13 * hi.abs() {
            let kappa = 0.5 * (lo + hi);
            let ymin = y.min();
            let gamma: Vec<f64> = y.iter().map(|v| v / ymin).collect();
            let g = DVector::from_vec(gamma.clone());
            let residual_norm = (&l * &g - kappa * &g).amax();
            return Ok(EigenSolution {
                lambda,
                direction,
                kappa,
                gamma: CellFunction {
                    n1,
                    n2,
                    period,
                    values: gamma,
                },
                residual_norm,
                iterations: it,
            });
        }
        let target = hi + gap.max(1e-9 * hi.abs().max(1.0));
        if target < sigma && (target - hi) < 0.5 * (sigma - hi) {
            sigma = target;
            lu = shifted(sigma);
        }
    }
    let tail = history.len().saturating_sub(8);
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        history: history[tail..].to_vec(),
    })
}

/// Report of convexity, lower-bound and origin checks on sampled `kappa(lambda)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaShapeReport {
    pub lambdas: Vec<f64>,
    pub kappas: Vec<f64>,
    /// `min over midpoint triples of (kappa(a)+kappa(b))/2 - kappa((a+b)/2)`.
    pub convexity_slack: f64,
    /// `min_k kappa(lambda_k) - A_lower lambda_k^2`.
    pub lower_bound_slack: f64,
    pub kappa_at_zero: Option<f64>,
    /// `kappa(h)/h` for a shrinking sequence of `h`.
    pub origin_slopes: Vec<(f64, f64)>,
    pub passed: bool,
}

/// Samples `kappa` on `lambdas` and checks the shape properties.
pub fn kappa_shape_check(
    coeffs: &CoefficientField,
    lambdas: &[f64],
    direction: i32,
    tol: f64,
) -> Result<KappaShapeReport> {
    use rayon::prelude::*;
    if lambdas.windows(2).any(|w| w[1] < w[0]) || lambdas.iter().any(|&l| l < 0.0) {
        return Err(Error::Domain(
            "lambdas must be sorted and non-negative".into(),
        ));
    }
    let kappas: Vec<f64> = lambdas
        .par_iter()
        .map(|&l| principal_eigen(coeffs, l, direction).map(|e| e.kappa))
        .collect::<Result<_>>()?;
    let mut convexity_slack = f64::INFINITY;
    let m = lambdas.len();
    for a in 0..m {
        for b in a + 2..m {
            let mid = 0.5 * (lambdas[a] + lambdas[b]);
            if let Some(c) = (a + 1..b).find(|&c| (lambdas[c] - mid).abs() <= 1e-12 * mid.max(1.0))
            {
                convexity_slack = convexity_slack.min(0.5 * (kappas[a] + kappas[b]) - kappas[c]);
            }
        }
    }
    let al = coeffs.a_lower();
    let lower_bound_slack = lambdas
        .iter()
        .zip(&kappas)
        .fold(f64::INFINITY, |s, (l, k)| s.min(k - al * l * l));
    let kappa_at_zero = lambdas.iter().position(|&l| l == 0.0).map(|k| kappas[k]);
    let origin_slopes = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&h| principal_eigen(coeffs, h, direction).map(|e| (h, e.kappa / h)))
        .collect::<Result<Vec<_>>>()?;
    let slopes_shrink = origin_slopes
        .windows(2)
        .all(|w| w[1].1.abs() <= w[0].1.abs() + tol)
        && origin_slopes.last().is_none_or(|s| s.1.abs() <= 1e-2);
    let passed = convexity_slack >= -tol
        && lower_bound_slack >= -tol
        && kappa_at_zero.is_none_or(|k| k == 0.0)
        && slopes_shrink;
    Ok(KappaShapeReport {
        lambdas: lambdas.to_vec(),
        kappas,
        convexity_slack: if convexity_slack.is_finite() {
            convexity_slack
        } else {
            0.0
        },
        lower_bound_slack: if lower_bound_slack.is_finite() {
            lower_bound_slack
        } else {
            0.0
        },
        kappa_at_zero,
        origin_slopes,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn periodic_a(n: usize) -> CoefficientField {
        CoefficientField::from_fn(1, 1.0, n, 1, |x, _| {
            ([0.0; 2], [1.0 + 0.5 * (2.0 * PI * x).sin(), 0.0, 0.0])
        })
        .unwrap()
    }

    #[test]
    fn identity_gives_lambda_squared() {
        let c = CoefficientField::identity(1, 1.0)
            .at_resolution(32, 1)
            .unwrap();
        for lam in [0.0, 0.5, 1.0, 2.0] {
            let e = principal_eigen(&c, lam, 1).unwrap();
            assert!(
                (e.kappa - lam * lam).abs() <= 1e-10 * lam.max(1.0).powi(2),
                "{lam}: {}",
                e.kappa
            );
            assert!(e.gamma.values.iter().all(|&g| (g - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn zero_lambda_is_exact() {
        let e = principal_eigen(&periodic_a(16), 0.0, 1).unwrap();
        assert_eq!(e.kappa, 0.0);
        assert!(e.gamma.values.iter().all(|&g| g == 1.0));
    }

    #[test]
    fn matches_dense_eigendecomposition() {
        let c = periodic_a(24);
        let e = principal_eigen(&c, 1.0, 1).unwrap();
        let m = eigen_operator(&c, 1.0, 1);
        let ev = m.complex_eigenvalues();
        let top = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (e.kappa - top).abs() < 1e-9 * top.abs().max(1.0),
            "{} vs {top}",
            e.kappa
        );
        assert!(e.gamma.min() == 1.0 && e.gamma.values.iter().all(|&g| g >= 1.0));
        assert!(e.residual_norm < 1e-7);
    }

    #[test]
    fn lower_bound_and_symmetry() {
        let c = periodic_a(32);
        for lam in [0.25, 1.0, 3.0] {
            let p = principal_eigen(&c, lam, 1).unwrap();
            let m = principal_eigen(&c, lam, -1).unwrap();
            assert!(p.kappa >= c.a_lower() * lam * lam - 1e-8);
            // symmetric about x = 1/4; the spectrum is invariant under reflection
            assert!((p.kappa - m.kappa).abs() < 1e-9, "{} {}", p.kappa, m.kappa);
        }
    }

    #[test]
    fn two_dimensional_shear() {
        let c = CoefficientField::from_fn(2, 1.0, 4, 8, |_, y| {
            ([(2.0 * PI * y).sin(), 0.0], [1.0, 0.0, 1.0])
        })
        .unwrap();
        let e = principal_eigen(&c, 0.7, 1).unwrap();
        let ev = eigen_operator(&c, 0.7, 1).complex_eigenvalues();
        let top = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!((e.kappa - top).abs() < 1e-9, "{} {top}", e.kappa);
        assert!(e.kappa >= 0.49 - 1e-9);
    }
}

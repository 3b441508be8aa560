//! Natural cubic smoothing spline (Reinsch form) with GCV-selected smoothing.
//!
//! With knot spacings `h_i = x_{i+1} − x_i`, let `Q` be the `n × (n−2)`
//! second-difference matrix and `R` the `(n−2) × (n−2)` tridiagonal Gram
//! matrix of the hat functions. The minimizer of
//! `Σ (y_i − f(x_i))² + λ ∫ f''²` has knot values `g` and interior second
//! derivatives `γ` with
//!
//! ```text
//! (R + λ QᵀQ) γ = Qᵀ y,        g = y − λ Q γ
//! ```
//!
//! The hat matrix is `A(λ) = I − λ Q (R + λQᵀQ)⁻¹ Qᵀ` and
//! `GCV(λ) = n · RSS / (n − tr A)²`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const GCV_GRID_POINTS: usize = 25;
pub const GCV_GRID_MIN: f64 = 1e-8;
pub const GCV_GRID_MAX: f64 = 1e2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// GCV over the fixed logarithmic grid, scaled by `tr R / tr QᵀQ`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSpline {
    x: Vec<f64>,
    /// fitted values at the knots
    g: Vec<f64>,
    /// second derivatives at the knots, zero at both ends
    gamma: Vec<f64>,
    lambda: f64,
    gcv: f64,
}

/// `(γ, g, tr A)`
type Fit = (DVector<f64>, DVector<f64>, f64);

struct Reinsch {
    n: usize,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    qtq: DMatrix<f64>,
    qty: DVector<f64>,
    y: DVector<f64>,
}

impl Reinsch {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m = n - 2;
        let mut q = DMatrix::zeros(n, m);
        let mut r = DMatrix::zeros(m, m);
        for j in 0..m {
            // column j belongs to interior knot j + 1
            q[(j, j)] = 1.0 / h[j];
            q[(j + 1, j)] = -1.0 / h[j] - 1.0 / h[j + 1];
            q[(j + 2, j)] = 1.0 / h[j + 1];
            r[(j, j)] = (h[j] + h[j + 1]) / 3.0;
            if j + 1 < m {
                r[(j, j + 1)] = h[j + 1] / 6.0;
                r[(j + 1, j)] = h[j + 1] / 6.0;
            }
        }
        let y = DVector::from_column_slice(y);
        let qtq = q.transpose() * &q;
        let qty = q.transpose() * &y;
        Reinsch { n, q, r, qtq, qty, y }
    }

    fn scale(&self) -> f64 {
        self.r.trace() / self.qtq.trace()
    }

    fn solve(&self, lambda: f64) -> Result<Fit> {
        let m = &self.r + &self.qtq * lambda;
        let chol = m.cholesky().ok_or_else(|| {
            Error::InsufficientData(format!("smoothing system not positive definite at lambda = {lambda}"))
        })?;
        let gamma = chol.solve(&self.qty);
        let g = &self.y - &self.q * &gamma * lambda;
        let trace_a = self.n as f64 - lambda * chol.solve(&self.qtq).trace();
        Ok((gamma, g, trace_a))
    }

    fn gcv(&self, g: &DVector<f64>, trace_a: f64) -> f64 {
        let rss = (&self.y - g).norm_squared();
        let denom = self.n as f64 - trace_a;
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            self.n as f64 * rss / (denom * denom)
        }
    }
}

/// The `λ` values tried by [`Smoothing::Auto`] for the given knots.
pub fn gcv_grid(x: &[f64]) -> Result<Vec<f64>> {
    check_points(x, x)?;
    let scale = Reinsch::new(x, &vec![0.0; x.len()]).scale();
    Ok(log_grid(scale))
}

fn log_grid(scale: f64) -> Vec<f64> {
    let (lo, hi) = (GCV_GRID_MIN.log10(), GCV_GRID_MAX.log10());
    (0..GCV_GRID_POINTS)
        .map(|i| scale * 10f64.powf(lo + (hi - lo) * i as f64 / (GCV_GRID_POINTS - 1) as f64))
        .collect()
}

fn check_points(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "spline x and y",
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "smoothing spline needs at least 4 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("spline data", "non-finite", "all values must be finite"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("x", "non-monotone", "knots must be strictly increasing"));
    }
    Ok(())
}

pub fn fit_smoothing_spline(x: &[f64], y: &[f64], smoothing: Smoothing) -> Result<SmoothingSpline> {
    check_points(x, y)?;
    let sys = Reinsch::new(x, y);
    let (lambda, (gamma, g, trace_a)) = match smoothing {
        Smoothing::Fixed(lambda) => {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Error::invalid("lambda", lambda, "must be finite and >= 0"));
            }
            (lambda, sys.solve(lambda)?)
        }
        Smoothing::Auto => {
            let mut best: Option<(f64, f64, Fit)> = None;
            for lambda in log_grid(sys.scale()) {
                let fit = sys.solve(lambda)?;
                let score = sys.gcv(&fit.1, fit.2);
                if best.as_ref().is_none_or(|b| score < b.1) {
                    best = Some((lambda, score, fit));
                }
            }
            let (lambda, _, fit) = best.expect("non-empty grid");
            (lambda, fit)
        }
    };
    let gcv = sys.gcv(&g, trace_a);
    let mut gamma_full = vec![0.0; x.len()];
    gamma_full[1..x.len() - 1].copy_from_slice(gamma.as_slice());
    Ok(SmoothingSpline {
        x: x.to_vec(),
        g: g.as_slice().to_vec(),
        gamma: gamma_full,
        lambda,
        gcv,
    })
}

impl SmoothingSpline {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gcv_score(&self) -> f64 {
        self.gcv
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn fitted(&self) -> &[f64] {
        &self.g
    }

    /// Value at `t`; linear beyond the end knots.
    pub fn eval(&self, t: f64) -> f64 {
        let (x, g, gam) = (&self.x, &self.g, &self.gamma);
        let last = x.len() - 1;
        if t <= x[0] {
            let h = x[1] - x[0];
            let slope = (g[1] - g[0]) / h - h * gam[1] / 6.0;
            return g[0] + slope * (t - x[0]);
        }
        if t >= x[last] {
            let h = x[last] - x[last - 1];
            let slope = (g[last] - g[last - 1]) / h + h * gam[last - 1] / 6.0;
            return g[last] + slope * (t - x[last]);
        }
        let i = x.partition_point(|&k| k <= t).saturating_sub(1).min(last - 1);
        let h = x[i + 1] - x[i];
        let (a, b) = (t - x[i], x[i + 1] - t);
        (a * g[i + 1] + b * g[i]) / h
            - a * b / 6.0 * ((1.0 + a / h) * gam[i + 1] + (1.0 + b / h) * gam[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(fit_smoothing_spline(&[0.0, 1.0, 2.0], &[0.0; 3], Smoothing::Auto).is_err());
        assert!(fit_smoothing_spline(&[0.0, 1.0, 1.0, 2.0], &[0.0; 4], Smoothing::Auto).is_err());
        assert!(fit_smoothing_spline(&[0.0, 1.0, 2.0, 3.0], &[0.0; 3], Smoothing::Auto).is_err());
        assert!(fit_smoothing_spline(&[0.0, 1.0, 2.0, 3.0], &[0.0; 4], Smoothing::Fixed(-1.0)).is_err());
    }

    #[test]
    fn eval_hits_knots_and_is_continuous() {
        let x = [0.0, 0.1, 0.25, 0.3, 0.6];
        let y = [1.0, -0.5, 0.3, 2.0, 0.0];
        let s = fit_smoothing_spline(&x, &y, Smoothing::Fixed(1e-3)).unwrap();
        for (k, g) in x.iter().zip(s.fitted()) {
            assert!((s.eval(*k) - g).abs() < 1e-12);
            assert!((s.eval(k - 1e-9) - s.eval(k + 1e-9)).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_spans_the_scaled_range() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let grid = gcv_grid(&x).unwrap();
        assert_eq!(grid.len(), GCV_GRID_POINTS);
        let ratio = grid[GCV_GRID_POINTS - 1] / grid[0];
        assert!((ratio / 1e10 - 1.0).abs() < 1e-9);
    }
}

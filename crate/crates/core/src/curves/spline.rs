//! Periodic C² cubic spline through tabulated curve samples.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Periodic cubic spline with period 1 in the parameter.
#[derive(Debug, Clone)]
pub struct PeriodicSpline<T> {
    knots: Vec<T>,
    /// `values[i]` is the sample at `knots[i]`, one entry per coordinate.
    values: Vec<Vec<T>>,
    /// Second derivatives at the knots, same layout as `values`.
    moments: Vec<Vec<T>>,
}

impl<T: Scalar> PeriodicSpline<T> {
    /// `knots` must be strictly increasing inside `[0, 1)`; at least 4 knots.
    pub fn new(knots: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        let n = knots.len();
        if n < 4 || values.len() != n {
            return Err(Error::Domain(format!("periodic spline needs >= 4 samples, got {n}")));
        }
        if knots[0] < T::zero() || knots[n - 1] >= T::one() {
            return Err(Error::Domain("spline knots must lie in [0, 1)".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("spline knots must be strictly increasing".into()));
        }
        let dim = values[0].len();
        let widths: Vec<T> = (0..n)
            .map(|i| if i + 1 < n { knots[i + 1] - knots[i] } else { T::one() + knots[0] - knots[n - 1] })
            .collect();
        let six = T::lit(6.0);
        let two = T::lit(2.0);
        let mut moments = vec![vec![T::zero(); dim]; n];
        for c in 0..dim {
            let mut sub = vec![T::zero(); n];
            let mut diag = vec![T::zero(); n];
            let mut sup = vec![T::zero(); n];
            let mut rhs = vec![T::zero(); n];
            for i in 0..n {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                let hp = widths[prev];
                let hn = widths[i];
                sub[i] = hp;
                diag[i] = two * (hp + hn);
                sup[i] = hn;
                rhs[i] = six * ((values[next][c] - values[i][c]) / hn - (values[i][c] - values[prev][c]) / hp);
            }
            let m = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
            for i in 0..n {
                moments[i][c] = m[i];
            }
        }
        Ok(Self { knots, values, moments })
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    /// Value, first and second derivative at `u` (wrapped into `[0, 1)`).
    pub fn eval(&self, u: T) -> [Vec<T>; 3] {
        let n = self.knots.len();
        let u = u - u.floor();
        // interval [knots[i], knots[i+1]) with wrap-around after the last knot
        let (i, left, width) = match self.knots.partition_point(|&k| k <= u) {
            0 => (n - 1, self.knots[n - 1] - T::one(), T::one() + self.knots[0] - self.knots[n - 1]),
            p if p == n => (n - 1, self.knots[n - 1], T::one() + self.knots[0] - self.knots[n - 1]),
            p => (p - 1, self.knots[p - 1], self.knots[p] - self.knots[p - 1]),
        };
        let j = (i + 1) % n;
        let b = (u - left) / width;
        let a = T::one() - b;
        let six = T::lit(6.0);
        let three = T::lit(3.0);
        let h2 = width * width;
        let dim = self.dim();
        let mut p = vec![T::zero(); dim];
        let mut d1 = vec![T::zero(); dim];
        let mut d2 = vec![T::zero(); dim];
        for c in 0..dim {
            let (yi, yj) = (self.values[i][c], self.values[j][c]);
            let (mi, mj) = (self.moments[i][c], self.moments[j][c]);
            p[c] = a * yi + b * yj + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h2 / six;
            d1[c] = (yj - yi) / width - (three * a * a - T::one()) / six * width * mi
                + (three * b * b - T::one()) / six * width * mj;
            d2[c] = a * mi + b * mj;
        }
        [p, d1, d2]
    }
}

/// Solves a cyclic tridiagonal system by Sherman–Morrison. Row `i` reads
/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]` with indices mod n.
fn solve_cyclic_tridiagonal<T: Scalar>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let alpha = sup[n - 1]; // row n-1 couples to x[0]
    let beta = sub[0]; // row 0 couples to x[n-1]
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] = diag[0] - gamma;
    d[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &d, sup, rhs);
    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &d, sup, &u);
    let factor = (x[0] + beta * x[n - 1] / gamma) / (T::one() + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(&xi, &zi)| xi - factor * zi).collect()
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal<T: Scalar>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { T::zero() };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] = x[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn cyclic_solver_matches_dense_residual() {
        let n = 7;
        let sub: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
        let sup: Vec<f64> = (0..n).map(|i| 0.5 + 0.05 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + i as f64).collect();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
        for i in 0..n {
            let r = sub[i] * x[(i + n - 1) % n] + diag[i] * x[i] + sup[i] * x[(i + 1) % n] - rhs[i];
            assert!(r.abs() < 1e-13, "row {i}: {r}");
        }
    }

    #[test]
    fn spline_reproduces_circle_and_its_derivatives() {
        let n = 256;
        let knots: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let values: Vec<Vec<f64>> = knots.iter().map(|&u| vec![(TAU * u).cos(), (TAU * u).sin()]).collect();
        let sp = PeriodicSpline::new(knots, values).unwrap();
        for k in 0..50 {
            let u = 0.013 + k as f64 * 0.0197;
            let [p, d1, d2] = sp.eval(u);
            assert!((p[0] - (TAU * u).cos()).abs() < 1e-8);
            assert!((d1[1] - TAU * (TAU * u).cos()).abs() < 1e-4);
            assert!((d2[0] + TAU * TAU * (TAU * u).cos()).abs() < 1e-2);
        }
        // periodic wrap
        let a = sp.eval(0.999_999_9);
        let b = sp.eval(-0.000_000_1);
        assert!((a[0][0] - b[0][0]).abs() < 1e-14);
    }
}

//! Spherical shells `A_{r,R} = {x ∈ R^d : r < |x| < R}`.
//!
//! Powers of the radii only enter through `q = r/R` and `(r/t)^d`, which
//! stay in `[0, 1]`, so the formulas do not overflow for large `d`.

use crate::error::{domain, Result};
use crate::linalg::norm;
use crate::scalar::Scalar;
use crate::tube::unit_ball_volume;

pub const MAX_SHELL_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSpec<T> {
    inner: T,
    outer: T,
    dim: usize,
}

impl<T: Scalar> ShellSpec<T> {
    pub fn new(inner: T, outer: T, dim: usize) -> Result<Self> {
        if !(inner > T::zero() && inner.is_finite() && outer.is_finite()) {
            return Err(domain(format!("inner radius must be positive and finite, got {inner}")));
        }
        if !(inner < outer) {
            return Err(domain(format!("need r < R, got r = {inner}, R = {outer}")));
        }
        if !(2..=MAX_SHELL_DIM).contains(&dim) {
            return Err(domain(format!("shell dimension must be in 2..={MAX_SHELL_DIM}, got {dim}")));
        }
        Ok(Self { inner, outer, dim })
    }

    pub fn inner(&self) -> T {
        self.inner
    }

    pub fn outer(&self) -> T {
        self.outer
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `ln(r/R) < 0`.
    fn ln_q(&self) -> T {
        (self.inner / self.outer).ln()
    }

    /// `1 − (r/R)^k`, accurate when `r/R` is close to 1.
    fn one_minus_q_pow(&self, k: usize) -> T {
        -(T::from_count(k) * self.ln_q()).exp_m1()
    }

    /// `C = (R^{d−1} + r^{d−1}) / (R^d − r^d)`.
    pub fn constant(&self) -> T {
        let d = self.dim;
        let q_dm1 = (T::from_count(d - 1) * self.ln_q()).exp();
        (T::one() + q_dm1) / (self.outer * self.one_minus_q_pow(d))
    }

    pub fn profile(&self) -> ShellFieldProfile<T> {
        let c = self.constant();
        ShellFieldProfile { spec: *self, c, k: c + self.inner.recip() }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        let t = norm(x);
        x.len() == self.dim && t > self.inner && t < self.outer
    }

    /// `min(|x| − r, R − |x|)`, negative outside.
    pub fn boundary_distance(&self, x: &[T]) -> T {
        let t = norm(x);
        (t - self.inner).min(self.outer - t)
    }
}

/// Radial profile `f(t) = C − (C r^d + r^{d−1}) t^{−d}` of the certificate
/// field `V(x) = f(|x|) x`.
#[derive(Debug, Clone, Copy)]
pub struct ShellFieldProfile<T> {
    spec: ShellSpec<T>,
    c: T,
    /// `C + 1/r`, so that `(C r^d + r^{d−1}) t^{−d} = k (r/t)^d`.
    k: T,
}

/// Results of sampling the profile on a uniform grid of `(r, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCheck<T> {
    /// `|R f(R) − 1|`.
    pub outer_residual: T,
    /// `|r f(r) + 1|`.
    pub inner_residual: T,
    pub max_t_abs_f: T,
    /// `1 − max t|f(t)|`.
    pub delta: T,
    /// Smallest `(t f)'` over the grid.
    pub min_slope: T,
    pub grid: usize,
}

impl<T: Scalar> ProfileCheck<T> {
    pub fn passed(&self, tol: T) -> bool {
        self.outer_residual <= tol && self.inner_residual <= tol && self.delta > T::zero() && self.min_slope > T::zero()
    }
}

impl<T: Scalar> ShellFieldProfile<T> {
    pub fn constant(&self) -> T {
        self.c
    }

    fn ratio_pow(&self, t: T) -> T {
        (T::from_count(self.spec.dim) * (self.spec.inner / t).ln()).exp()
    }

    pub fn f(&self, t: T) -> T {
        self.c - self.k * self.ratio_pow(t)
    }

    /// `f'(t) = d (C r^d + r^{d−1}) t^{−d−1}`.
    pub fn df(&self, t: T) -> T {
        T::from_count(self.spec.dim) * self.k * self.ratio_pow(t) / t
    }

    pub fn t_f(&self, t: T) -> T {
        t * self.f(t)
    }

    /// `(t f)'(t) = C + (d − 1)(C r^d + r^{d−1}) t^{−d}`.
    pub fn t_f_slope(&self, t: T) -> T {
        self.c + T::from_count(self.spec.dim - 1) * self.k * self.ratio_pow(t)
    }

    /// Evaluates the profile identities at the endpoints and on `grid`
    /// interior points `t_i = r + (R − r) i / (grid + 1)`.
    pub fn check(&self, grid: usize) -> ProfileCheck<T> {
        let (r, big_r) = (self.spec.inner, self.spec.outer);
        let outer_residual = (self.t_f(big_r) - T::one()).abs();
        let inner_residual = (self.t_f(r) + T::one()).abs();
        let mut max_t_abs_f = T::zero();
        let mut min_slope = T::infinity();
        let step = (big_r - r) / T::from_count(grid + 1);
        for i in 1..=grid {
            let t = r + step * T::from_count(i);
            max_t_abs_f = max_t_abs_f.max(self.t_f(t).abs());
            min_slope = min_slope.min(self.t_f_slope(t));
        }
        ProfileCheck { outer_residual, inner_residual, max_t_abs_f, delta: T::one() - max_t_abs_f, min_slope, grid }
    }
}

/// `h(A_{r,R}) = d (R^{d−1} + r^{d−1}) / (R^d − r^d)`.
pub fn shell_cheeger<T: Scalar>(spec: &ShellSpec<T>) -> T {
    T::from_count(spec.dim) * spec.constant()
}

/// `(|∂A|, |A|) = (d ω_d (R^{d−1} + r^{d−1}), ω_d (R^d − r^d))`.
pub fn shell_perimeter_volume<T: Scalar>(spec: &ShellSpec<T>) -> Result<(T, T)> {
    let d = spec.dim;
    let omega: T = unit_ball_volume(d as i64)?;
    let ln_r = spec.outer.ln();
    let q_dm1 = (T::from_count(d - 1) * spec.ln_q()).exp();
    let perimeter = T::from_count(d) * omega * (T::from_count(d - 1) * ln_r).exp() * (T::one() + q_dm1);
    let volume = omega * (T::from_count(d) * ln_r).exp() * spec.one_minus_q_pow(d);
    Ok((perimeter, volume))
}

fn check_point<T: Scalar>(spec: &ShellSpec<T>, x: &[T], closed: bool) -> Result<T> {
    if x.len() != spec.dim {
        return Err(domain(format!("point has {} coordinates, shell dimension is {}", x.len(), spec.dim)));
    }
    let t = norm(x);
    let inside = if closed { t >= spec.inner && t <= spec.outer } else { t > spec.inner && t < spec.outer };
    if !inside {
        let (lb, rb) = if closed { ('[', ']') } else { ('(', ')') };
        return Err(domain(format!("|x| = {t} outside {lb}{}, {}{rb}", spec.inner, spec.outer)));
    }
    Ok(t)
}

/// `V(x) = f(|x|) x` for `r < |x| < R`.
pub fn shell_field<T: Scalar>(spec: &ShellSpec<T>, x: &[T]) -> Result<Vec<T>> {
    let t = check_point(spec, x, false)?;
    let f = spec.profile().f(t);
    Ok(x.iter().map(|&xi| f * xi).collect())
}

/// [`shell_field`] on the closed shell `r ≤ |x| ≤ R`, where it equals the
/// outward unit normal `x/R` on the outer sphere and `−x/r` on the inner one.
pub fn shell_field_closed<T: Scalar>(spec: &ShellSpec<T>, x: &[T]) -> Result<Vec<T>> {
    let t = check_point(spec, x, true)?;
    let f = spec.profile().f(t);
    Ok(x.iter().map(|&xi| f * xi).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellDivergence<T> {
    /// `d C`.
    pub analytic: T,
    /// `f'(t) t + d f(t)` at `t = |x|`.
    pub expanded: T,
}

pub fn shell_divergence<T: Scalar>(spec: &ShellSpec<T>, x: &[T]) -> Result<ShellDivergence<T>> {
    let t = check_point(spec, x, false)?;
    let p = spec.profile();
    Ok(ShellDivergence {
        analytic: shell_cheeger(spec),
        expanded: p.df(t) * t + T::from_count(spec.dim) * p.f(t),
    })
}

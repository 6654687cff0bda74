use super::CurveSpec;
use crate::error::{domain, Error, Result};
use crate::linalg::{dot, norm};
use crate::quadrature::{gauss_legendre8, integrate_adaptive};
use crate::scalar::Scalar;

/// Monotone map `u ↦ s(u)` tabulated on a uniform grid of the curve parameter.
#[derive(Debug, Clone)]
pub struct ArcLengthTable<T> {
    length: T,
    /// `cumulative[i] = s(i / cells)`; `cumulative[cells] = length`.
    cumulative: Vec<T>,
}

/// Unit-speed data of `γ(s) = p(u(s))` at one arc-length position.
#[derive(Debug, Clone)]
pub struct UnitSpeedJet<T> {
    pub u: T,
    pub point: Vec<T>,
    /// `γ̇`, unit length.
    pub tangent: Vec<T>,
    /// `γ̈`, orthogonal to the tangent.
    pub accel: Vec<T>,
}

/// Total length `∫₀¹ |p'(u)| du` by adaptive Gauss–Kronrod per grid cell,
/// to relative tolerance `tol`.
pub fn arc_length<T: Scalar>(curve: &CurveSpec<T>, tol: T) -> Result<ArcLengthTable<T>> {
    if !(tol > T::zero()) {
        return Err(domain("arc-length tolerance must be positive"));
    }
    curve.check_immersed()?;
    let cells = curve.samples();
    let speed = |u: T| norm(&curve.jet(u).d1);
    let width = T::one() / T::from_count(cells);
    let mut cumulative = Vec::with_capacity(cells + 1);
    cumulative.push(T::zero());
    let mut acc = T::zero();
    for i in 0..cells {
        let a = T::from_count(i) * width;
        let b = if i + 1 == cells { T::one() } else { T::from_count(i + 1) * width };
        let (piece, _) = integrate_adaptive(&speed, a, b, tol);
        if !piece.is_finite() {
            return Err(Error::Numeric("arc-length integrand"));
        }
        acc = acc + piece;
        cumulative.push(acc);
    }
    Ok(ArcLengthTable { length: acc, cumulative })
}

impl<T: Scalar> ArcLengthTable<T> {
    pub fn length(&self) -> T {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// Arc length at the parameter grid nodes.
    pub fn cumulative(&self) -> &[T] {
        &self.cumulative
    }

    /// `s(u)` for `u ∈ [0, 1]`.
    pub fn s_of_u(&self, curve: &CurveSpec<T>, u: T) -> T {
        let cells = self.cells();
        let n = T::from_count(cells);
        let u = u.max(T::zero()).min(T::one());
        let i = (u * n).floor().to_usize().unwrap_or(0).min(cells - 1);
        let left = T::from_count(i) / n;
        if u == left {
            return self.cumulative[i];
        }
        let speed = |v: T| norm(&curve.jet(v).d1);
        self.cumulative[i] + gauss_legendre8(&speed, left, u)
    }

    /// Inverse map `u(s)` for `s ∈ [0, L]`: bracketed Newton iteration inside
    /// the grid cell that contains `s`.
    pub fn u_of_s(&self, curve: &CurveSpec<T>, s: T) -> T {
        let cells = self.cells();
        let n = T::from_count(cells);
        let s = s.max(T::zero()).min(self.length);
        let i = self.cumulative.partition_point(|&c| c <= s).saturating_sub(1).min(cells - 1);
        let (mut lo, mut hi) = (T::from_count(i) / n, T::from_count(i + 1) / n);
        let (s_lo, s_hi) = (self.cumulative[i], self.cumulative[i + 1]);
        if s <= s_lo {
            return lo;
        }
        // linear guess inside the cell
        let mut u = lo + (hi - lo) * (s - s_lo) / (s_hi - s_lo);
        let eps = T::epsilon() * T::lit(4.0);
        for _ in 0..60 {
            let r = self.s_of_u(curve, u) - s;
            if r > T::zero() {
                hi = u;
            } else {
                lo = u;
            }
            let sp = norm(&curve.jet(u).d1);
            let mut next = u - r / sp;
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            if (next - u).abs() <= eps * (T::one() + u.abs()) {
                return next;
            }
            u = next;
        }
        u
    }

    /// `γ(s)`, `γ̇(s)`, `γ̈(s)` with no range check on `s` beyond clamping to `[0, L]`.
    pub fn unit_speed_jet(&self, curve: &CurveSpec<T>, s: T) -> UnitSpeedJet<T> {
        let u = self.u_of_s(curve, s);
        unit_speed_at_u(curve, u)
    }
}

pub(crate) fn unit_speed_at_u<T: Scalar>(curve: &CurveSpec<T>, u: T) -> UnitSpeedJet<T> {
    let jet = curve.jet(u);
    let speed = norm(&jet.d1);
    let tangent: Vec<T> = jet.d1.iter().map(|&x| x / speed).collect();
    let along = dot(&jet.d2, &tangent);
    let sq = speed * speed;
    let accel = jet.d2.iter().zip(&tangent).map(|(&a, &t)| (a - along * t) / sq).collect();
    UnitSpeedJet { u, point: jet.point, tangent, accel }
}

/// Unit tangent `e_1 = γ̇(s)` and curvature `κ = |γ̈(s)|` for `s ∈ [0, L)`.
pub fn tangent_and_curvature<T: Scalar>(
    curve: &CurveSpec<T>,
    table: &ArcLengthTable<T>,
    s: T,
) -> Result<(Vec<T>, T)> {
    if !(s >= T::zero() && s < table.length()) {
        return Err(domain(format!("arc length {s} outside [0, {})", table.length())));
    }
    let jet = table.unit_speed_jet(curve, s);
    let kappa = norm(&jet.accel);
    Ok((jet.tangent, kappa))
}

/// As [`tangent_and_curvature`], with `s` reduced modulo the curve length.
pub fn tangent_and_curvature_wrapped<T: Scalar>(
    curve: &CurveSpec<T>,
    table: &ArcLengthTable<T>,
    s: T,
) -> Result<(Vec<T>, T)> {
    if !s.is_finite() {
        return Err(Error::Numeric("arc length"));
    }
    let l = table.length();
    let mut r = s % l;
    if r < T::zero() {
        r = r + l;
    }
    if r >= l {
        r = T::zero();
    }
    tangent_and_curvature(curve, table, r)
}

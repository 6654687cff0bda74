//! Smooth closed curves in R^d: parametrizations, arc length, tangent and
//! curvature, and the parallel-transport (Bishop) frame.
//!
//! A curve is a periodic map `u ∈ [0, 1) ↦ p(u) ∈ R^d`. Everything downstream
//! works in arc length `s ∈ [0, L)`; the [`ArcLengthTable`] converts between
//! the two.

mod arclength;
mod frame;
mod spline;

pub use arclength::{arc_length, tangent_and_curvature, tangent_and_curvature_wrapped, ArcLengthTable, UnitSpeedJet};
pub use frame::{bishop_frame, bishop_frame_with_initial, FrameField, FrameSample, DRIFT_CAP};
pub use spline::PeriodicSpline;

use crate::error::{domain, Error, Result};
use crate::linalg::{dist, norm};
use crate::scalar::Scalar;

/// Analytic curve families with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset<T> {
    /// Circle of the given radius centred at the origin, in the coordinate
    /// plane spanned by axes `plane.0` and `plane.1`.
    Circle { radius: T, plane: (usize, usize) },
    /// Ellipse in the (x_1, x_2)-plane with semi-axes along x_1 and x_2.
    Ellipse { semi_x: T, semi_y: T },
    /// The trefoil knot `(sin t + 2 sin 2t, cos t − 2 cos 2t, −sin 3t)`
    /// scaled by `scale`, in the first three coordinates.
    Trefoil { scale: T },
}

#[derive(Debug, Clone)]
pub enum Parametrization<T> {
    Preset(Preset<T>),
    Tabulated(PeriodicSpline<T>),
}

/// Position, first and second derivative with respect to the curve parameter `u`.
#[derive(Debug, Clone)]
pub struct Jet<T> {
    pub point: Vec<T>,
    pub d1: Vec<T>,
    pub d2: Vec<T>,
}

/// A closed parametric curve `p : [0, 1) → R^d`.
#[derive(Debug, Clone)]
pub struct CurveSpec<T> {
    dim: usize,
    param: Parametrization<T>,
    samples: usize,
}

pub const DEFAULT_SAMPLES: usize = 2048;

impl<T: Scalar> CurveSpec<T> {
    pub fn circle(dim: usize, radius: T) -> Result<Self> {
        Self::circle_in_plane(dim, radius, (0, 1))
    }

    pub fn circle_in_plane(dim: usize, radius: T, plane: (usize, usize)) -> Result<Self> {
        check_dim(dim, 2)?;
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(domain(format!("circle radius must be positive, got {radius}")));
        }
        if plane.0 == plane.1 || plane.0 >= dim || plane.1 >= dim {
            return Err(domain(format!("invalid coordinate plane {plane:?} in R^{dim}")));
        }
        Ok(Self::from_preset(dim, Preset::Circle { radius, plane }))
    }

    pub fn ellipse(dim: usize, semi_x: T, semi_y: T) -> Result<Self> {
        check_dim(dim, 2)?;
        if !(semi_x > T::zero() && semi_y > T::zero()) {
            return Err(domain("ellipse semi-axes must be positive"));
        }
        Ok(Self::from_preset(dim, Preset::Ellipse { semi_x, semi_y }))
    }

    pub fn trefoil(dim: usize, scale: T) -> Result<Self> {
        check_dim(dim, 3)?;
        if !(scale > T::zero()) {
            return Err(domain("trefoil scale must be positive"));
        }
        Ok(Self::from_preset(dim, Preset::Trefoil { scale }))
    }

    /// Builds a preset from its configuration name and parameter list:
    /// `circle [radius]`, `ellipse [semi_x, semi_y]`, `trefoil [scale]`.
    pub fn from_name(name: &str, params: &[T], dim: usize) -> Result<Self> {
        let one = |default: T| -> Result<T> {
            match params {
                [] => Ok(default),
                [x] => Ok(*x),
                _ => Err(Error::Config(format!("preset '{name}' takes one parameter, got {}", params.len()))),
            }
        };
        match name {
            "circle" => Self::circle(dim, one(T::one())?),
            "trefoil" => Self::trefoil(dim, one(T::one())?),
            "ellipse" => match params {
                [a, b] => Self::ellipse(dim, *a, *b),
                _ => Err(Error::Config("preset 'ellipse' takes two semi-axes".into())),
            },
            other => Err(Error::Config(format!(
                "unknown curve preset '{other}' (expected circle, ellipse or trefoil)"
            ))),
        }
    }

    /// Tabulated curve from `(u, point)` rows with `u` increasing in `[0, 1]`.
    /// A trailing row at `u = 1` is accepted as a closing duplicate of the
    /// first row; any other evidence of an open curve is a closure error.
    pub fn tabulated(rows: Vec<(T, Vec<T>)>) -> Result<Self> {
        if rows.len() < 4 {
            return Err(domain(format!("tabulated curve needs >= 4 samples, got {}", rows.len())));
        }
        let dim = rows[0].1.len();
        check_dim(dim, 2)?;
        if rows.iter().any(|(u, p)| p.len() != dim || !u.is_finite() || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Numeric("tabulated curve rows"));
        }
        let mut rows = rows;
        let spacings: Vec<T> = rows.windows(2).map(|w| dist(&w[0].1, &w[1].1)).collect();
        let mut sorted = spacings.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let typical = sorted[sorted.len() / 2];
        let last = rows.len() - 1;
        if rows[last].0 >= T::one() {
            let gap = dist(&rows[last].1, &rows[0].1);
            if gap > T::lit(1e-6) * (T::one() + typical) {
                return Err(Error::Closure { gap: gap.to_f64_lossy(), spacing: typical.to_f64_lossy() });
            }
            rows.pop();
        } else {
            let gap = dist(&rows[last].1, &rows[0].1);
            if gap > T::lit(10.0) * typical {
                return Err(Error::Closure { gap: gap.to_f64_lossy(), spacing: typical.to_f64_lossy() });
            }
        }
        let samples = rows.len();
        let (knots, values): (Vec<T>, Vec<Vec<T>>) = rows.into_iter().unzip();
        let spline = PeriodicSpline::new(knots, values)?;
        let curve = Self { dim, param: Parametrization::Tabulated(spline), samples: samples.max(DEFAULT_SAMPLES) };
        curve.check_immersed()?;
        Ok(curve)
    }

    /// Parses the plain-text table format: one sample per line,
    /// `u x_1 … x_d` (whitespace or comma separated), `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map(T::lit).map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })
                })
                .collect::<Result<Vec<T>>>()?;
            if nums.len() < 3 {
                return Err(Error::Parse { line: lineno + 1, msg: "expected u followed by >= 2 coordinates".into() });
            }
            rows.push((nums[0], nums[1..].to_vec()));
        }
        Self::tabulated(rows)
    }

    fn from_preset(dim: usize, preset: Preset<T>) -> Self {
        Self { dim, param: Parametrization::Preset(preset), samples: DEFAULT_SAMPLES }
    }

    /// Sets the sample count used for numeric scans of the curve.
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples.max(16);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn parametrization(&self) -> &Parametrization<T> {
        &self.param
    }

    /// Position and derivatives at parameter `u` (periodic with period 1).
    pub fn jet(&self, u: T) -> Jet<T> {
        let tau = T::TAU();
        let mut point = vec![T::zero(); self.dim];
        let mut d1 = vec![T::zero(); self.dim];
        let mut d2 = vec![T::zero(); self.dim];
        match &self.param {
            Parametrization::Preset(Preset::Circle { radius, plane }) => {
                let (s, c) = (tau * u).sin_cos();
                let r = *radius;
                point[plane.0] = r * c;
                point[plane.1] = r * s;
                d1[plane.0] = -r * tau * s;
                d1[plane.1] = r * tau * c;
                d2[plane.0] = -r * tau * tau * c;
                d2[plane.1] = -r * tau * tau * s;
            }
            Parametrization::Preset(Preset::Ellipse { semi_x, semi_y }) => {
                let (s, c) = (tau * u).sin_cos();
                point[0] = *semi_x * c;
                point[1] = *semi_y * s;
                d1[0] = -*semi_x * tau * s;
                d1[1] = *semi_y * tau * c;
                d2[0] = -*semi_x * tau * tau * c;
                d2[1] = -*semi_y * tau * tau * s;
            }
            Parametrization::Preset(Preset::Trefoil { scale }) => {
                let t = tau * u;
                let two = T::lit(2.0);
                let (s1, c1) = t.sin_cos();
                let (s2, c2) = (two * t).sin_cos();
                let (s3, c3) = (T::lit(3.0) * t).sin_cos();
                let k = *scale;
                point[0] = k * (s1 + two * s2);
                point[1] = k * (c1 - two * c2);
                point[2] = -k * s3;
                let k1 = k * tau;
                d1[0] = k1 * (c1 + T::lit(4.0) * c2);
                d1[1] = k1 * (-s1 + T::lit(4.0) * s2);
                d1[2] = -k1 * T::lit(3.0) * c3;
                let k2 = k * tau * tau;
                d2[0] = k2 * (-s1 - T::lit(8.0) * s2);
                d2[1] = k2 * (-c1 + T::lit(8.0) * c2);
                d2[2] = k2 * T::lit(9.0) * s3;
            }
            Parametrization::Tabulated(sp) => {
                let [p, a, b] = sp.eval(u);
                point = p;
                d1 = a;
                d2 = b;
            }
        }
        Jet { point, d1, d2 }
    }

    pub fn point(&self, u: T) -> Vec<T> {
        self.jet(u).point
    }

    /// Fails with a degenerate-curve error if `|p'(u)|` vanishes (or is not
    /// finite) at any of the scan samples.
    pub fn check_immersed(&self) -> Result<()> {
        let n = self.samples;
        let mut max_speed = T::zero();
        let speeds: Vec<(T, T)> = (0..n)
            .map(|i| {
                let u = T::from_count(i) / T::from_count(n);
                let sp = norm(&self.jet(u).d1);
                max_speed = max_speed.max(sp);
                (u, sp)
            })
            .collect();
        for (u, sp) in speeds {
            if !sp.is_finite() {
                return Err(Error::Numeric("curve derivative"));
            }
            if !(sp > max_speed * T::lit(1e-12)) {
                return Err(Error::DegenerateCurve { u: u.to_f64_lossy(), speed: sp.to_f64_lossy() });
            }
        }
        Ok(())
    }
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(domain(format!("dimension {dim} too small (need >= {min})")));
    }
    Ok(())
}

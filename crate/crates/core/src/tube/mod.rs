//! Tubular neighbourhoods `Ω_a = {x : dist(x, Γ) < a}` of closed curves.
//!
//! A [`TubeSpec`] bundles the curve with its arc-length table, parallel
//! frame and the non-overlap verdict. Closed-form quantities refuse to
//! report anything when the verdict is [`OverlapVerdict::OverlapDetected`].

mod montecarlo;
mod nearest;
mod overlap;

pub use montecarlo::{montecarlo_volume, MonteCarloEstimate, MIN_MC_SAMPLES};
pub use nearest::{membership, nearest_point, NearestPoint};
pub use overlap::{check_nonoverlap, OverlapStatus, OverlapVerdict};

pub(crate) use nearest::nearest_param;
use nearest::CurveIndex;

use crate::curves::{arc_length, bishop_frame, ArcLengthTable, CurveSpec, FrameField, FrameSample};
use crate::error::{domain, Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::scalar::{ln_gamma_half_plus_one, Scalar};

/// Volume `π^{m/2} / Γ(m/2 + 1)` of the unit ball in R^m.
pub fn unit_ball_volume<T: Scalar>(m: i64) -> Result<T> {
    if m < 1 {
        return Err(domain(format!("unit ball dimension must be >= 1, got {m}")));
    }
    let m = u32::try_from(m).map_err(|_| domain("unit ball dimension too large"))?;
    let half_m = T::from_u32(m).unwrap() / T::lit(2.0);
    Ok((half_m * T::PI().ln() - ln_gamma_half_plus_one::<T>(m)).exp())
}

#[derive(Debug, Clone, Copy)]
pub struct TubeOptions<T> {
    pub arc_tol: T,
    pub frame_steps: usize,
    pub overlap_samples: usize,
}

impl<T: Scalar> Default for TubeOptions<T> {
    fn default() -> Self {
        Self { arc_tol: T::lit(1e-12), frame_steps: 4096, overlap_samples: 512 }
    }
}

/// Tube of radius `a` around a closed curve, with its frame and overlap verdict.
#[derive(Debug, Clone)]
pub struct TubeSpec<T> {
    curve: CurveSpec<T>,
    table: ArcLengthTable<T>,
    frame: FrameField<T>,
    radius: T,
    index: CurveIndex<T>,
    overlap: OverlapStatus<T>,
}

impl<T: Scalar> TubeSpec<T> {
    pub fn new(curve: CurveSpec<T>, radius: T) -> Result<Self> {
        Self::with_options(curve, radius, TubeOptions::default())
    }

    pub fn with_options(curve: CurveSpec<T>, radius: T, opts: TubeOptions<T>) -> Result<Self> {
        let table = arc_length(&curve, opts.arc_tol)?;
        let frame = bishop_frame(&curve, &table, opts.frame_steps)?;
        Self::from_parts(curve, table, frame, radius, opts.overlap_samples)
    }

    /// Assembles a tube from precomputed curve data and runs the overlap check.
    pub fn from_parts(
        curve: CurveSpec<T>,
        table: ArcLengthTable<T>,
        frame: FrameField<T>,
        radius: T,
        overlap_samples: usize,
    ) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(domain(format!("tube radius must be positive, got {radius}")));
        }
        let index = CurveIndex::new(&frame);
        let mut spec = Self { curve, table, frame, radius, index, overlap: OverlapStatus::pending() };
        spec.overlap = check_nonoverlap(&spec, overlap_samples);
        Ok(spec)
    }

    pub fn curve(&self) -> &CurveSpec<T> {
        &self.curve
    }

    pub fn table(&self) -> &ArcLengthTable<T> {
        &self.table
    }

    pub fn frame(&self) -> &FrameField<T> {
        &self.frame
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    pub fn length(&self) -> T {
        self.table.length()
    }

    pub fn overlap(&self) -> &OverlapStatus<T> {
        &self.overlap
    }

    pub(crate) fn index(&self) -> &CurveIndex<T> {
        &self.index
    }

    /// Axis-aligned box of the frame samples inflated by `a`.
    pub fn bounding_box(&self) -> (Vec<T>, Vec<T>) {
        let d = self.dim();
        let mut lo = vec![T::infinity(); d];
        let mut hi = vec![T::neg_infinity(); d];
        for p in self.frame.samples() {
            for c in 0..d {
                lo[c] = lo[c].min(p.point[c]);
                hi[c] = hi[c].max(p.point[c]);
            }
        }
        for c in 0..d {
            lo[c] = lo[c] - self.radius;
            hi[c] = hi[c] + self.radius;
        }
        (lo, hi)
    }

    fn frame_at(&self, s: T) -> Result<FrameSample<T>> {
        if !(s >= T::zero() && s < self.length()) {
            return Err(domain(format!("arc length {s} outside [0, {})", self.length())));
        }
        self.frame.frame_at(&self.curve, &self.table, s)
    }

    fn check_offset(&self, t: &[T]) -> Result<()> {
        if t.len() + 1 != self.dim() {
            return Err(domain(format!("normal offset needs {} components, got {}", self.dim() - 1, t.len())));
        }
        if !(norm(t) < self.radius) {
            return Err(domain(format!("|t| = {} is not below the radius {}", norm(t), self.radius)));
        }
        Ok(())
    }

    fn require_valid(&self) -> Result<()> {
        if self.overlap.verdict == OverlapVerdict::OverlapDetected {
            return Err(Error::InvalidGeometry(self.overlap.describe()));
        }
        Ok(())
    }
}

/// Fermi coordinates `φ(s, t) = γ(s) + t_μ e_μ(s)`.
pub fn fermi_map<T: Scalar>(spec: &TubeSpec<T>, s: T, t: &[T]) -> Result<Vec<T>> {
    spec.check_offset(t)?;
    let f = spec.frame_at(s)?;
    let mut x = f.point.clone();
    for (tm, e) in t.iter().zip(&f.frame[1..]) {
        axpy(*tm, e, &mut x);
    }
    Ok(x)
}

/// Metric factor `f(s, t) = 1 − κ_μ(s) t_μ` of the Fermi coordinates.
pub fn jacobian<T: Scalar>(spec: &TubeSpec<T>, s: T, t: &[T]) -> Result<T> {
    spec.check_offset(t)?;
    let f = spec.frame_at(s)?;
    Ok(T::one() - dot(&f.kappa_components, t))
}

/// Length, cross-section, volume, boundary area and Cheeger constant of a tube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeGeometry<T> {
    pub curve_length: T,
    pub cross_section: T,
    pub volume: T,
    pub boundary_area: T,
    pub cheeger: T,
}

fn cross_section<T: Scalar>(spec: &TubeSpec<T>) -> Result<T> {
    let m = spec.dim() as i64 - 1;
    Ok(unit_ball_volume::<T>(m)? * spec.radius.powi(m as i32))
}

/// `|Ω_a| = |Γ| |D_a|`.
pub fn tube_volume<T: Scalar>(spec: &TubeSpec<T>) -> Result<T> {
    spec.require_valid()?;
    Ok(spec.length() * cross_section(spec)?)
}

/// `|∂Ω_a| = (d − 1)/a · |Ω_a|`.
pub fn tube_boundary_area<T: Scalar>(spec: &TubeSpec<T>) -> Result<T> {
    let v = tube_volume(spec)?;
    Ok(T::from_count(spec.dim() - 1) / spec.radius * v)
}

/// `h(Ω_a) = (d − 1)/a`, an exact closed form whenever the tube does not
/// overlap itself.
pub fn tube_cheeger<T: Scalar>(spec: &TubeSpec<T>) -> Result<T> {
    if spec.overlap.verdict == OverlapVerdict::OverlapDetected {
        return Err(Error::HypothesisViolated(spec.overlap.describe()));
    }
    Ok(T::from_count(spec.dim() - 1) / spec.radius)
}

pub fn tube_geometry<T: Scalar>(spec: &TubeSpec<T>) -> Result<TubeGeometry<T>> {
    Ok(TubeGeometry {
        curve_length: spec.length(),
        cross_section: cross_section(spec)?,
        volume: tube_volume(spec)?,
        boundary_area: tube_boundary_area(spec)?,
        cheeger: tube_cheeger(spec)?,
    })
}

/// Upper bound `(d−1)/a + 2/|I|` from a straight-ish segment of length `|I|`
/// of a tube around an unbounded curve (the two end caps add `2|D_a|`).
pub fn unbounded_segment_upper_bound<T: Scalar>(segment_length: T, radius: T, dim: usize) -> Result<T> {
    if !(segment_length > T::zero() && radius > T::zero()) || dim < 2 {
        return Err(domain("segment length and radius must be positive and d >= 2"));
    }
    Ok(T::from_count(dim - 1) / radius + T::lit(2.0) / segment_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle_tube(d: usize, rho: f64, a: f64) -> TubeSpec<f64> {
        TubeSpec::new(CurveSpec::circle(d, rho).unwrap(), a).unwrap()
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume::<f64>(1).unwrap() - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume::<f64>(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume::<f64>(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        // ω_4 = π²/2
        assert!((unit_ball_volume::<f64>(4).unwrap() - PI * PI / 2.0).abs() < 1e-14);
        assert!(unit_ball_volume::<f64>(0).is_err());
        assert!(unit_ball_volume::<f64>(-3).is_err());
    }

    #[test]
    fn volume_and_area_of_circle_tubes() {
        let t = circle_tube(3, 2.0, 0.5);
        assert!((tube_volume(&t).unwrap() - PI * PI).abs() < 1e-11);
        assert!((tube_boundary_area(&t).unwrap() - 4.0 * PI * PI).abs() < 1e-10);
        let t = circle_tube(2, 2.0, 0.5);
        // annulus 1.5 < |x| < 2.5
        let annulus = PI * (2.5f64.powi(2) - 1.5f64.powi(2));
        assert!((tube_volume(&t).unwrap() - annulus).abs() < 1e-11);
        assert!((tube_boundary_area(&t).unwrap() - 2.0 * PI * (2.5 + 1.5)).abs() < 1e-10);
    }

    #[test]
    fn cheeger_closed_forms() {
        assert_eq!(tube_cheeger(&circle_tube(3, 2.0, 0.1)).unwrap(), 20.0);
        assert_eq!(tube_cheeger(&circle_tube(2, 2.0, 0.25)).unwrap(), 4.0);
        assert_eq!(tube_cheeger(&circle_tube(4, 2.0, 0.5)).unwrap(), 6.0);
        let g = tube_geometry(&circle_tube(3, 2.0, 0.4)).unwrap();
        assert!((g.boundary_area / g.volume - 5.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_tube_reports_nothing() {
        let t = circle_tube(3, 1.0, 1.5);
        assert_eq!(t.overlap().verdict, OverlapVerdict::OverlapDetected);
        assert!(matches!(tube_cheeger(&t), Err(Error::HypothesisViolated(_))));
        assert!(matches!(tube_volume(&t), Err(Error::InvalidGeometry(_))));
        assert!(tube_geometry(&t).is_err());
    }

    #[test]
    fn unbounded_segment_bound() {
        assert!((unbounded_segment_upper_bound(1.0f64, 0.1, 3).unwrap() - 22.0).abs() < 1e-12);
        assert_eq!(unbounded_segment_upper_bound(2.0f64, 1.0, 2).unwrap(), 2.0);
        assert!(unbounded_segment_upper_bound(0.0f64, 1.0, 2).is_err());
        assert!(unbounded_segment_upper_bound(1.0f64, -1.0, 2).is_err());
        assert!(unbounded_segment_upper_bound(1.0f64, 1.0, 1).is_err());
    }

    #[test]
    fn fermi_map_and_jacobian() {
        let t = circle_tube(3, 2.0, 0.4);
        let on_line = fermi_map(&t, 1.0, &[0.0, 0.0]).unwrap();
        let g = t.table().unit_speed_jet(t.curve(), 1.0).point;
        assert!(crate::linalg::dist(&on_line, &g) < 1e-14);
        // s = 0: default frame e_2 = +x (outward), so t_1 = −0.3 moves inward
        let x = fermi_map(&t, 0.0, &[-0.3, 0.0]).unwrap();
        assert!((x[0] - 1.7).abs() < 1e-14 && x[1].abs() < 1e-14);
        assert!((nearest_point(&t, &x).distance - 0.3).abs() < 1e-12);
        assert_eq!(jacobian(&t, 0.7, &[0.0, 0.0]).unwrap(), 1.0);
        // κ_1 = −1/2 with the outward normal, so f = 1 + 0.5 t_1
        assert!((jacobian(&t, 0.0, &[-0.4 + 1e-12, 0.0]).unwrap() - 0.8).abs() < 1e-11);
        assert!(fermi_map(&t, 0.0, &[0.4, 0.0]).is_err());
        assert!(fermi_map(&t, -1.0, &[0.0, 0.0]).is_err());
        assert!(jacobian(&t, 0.0, &[0.1]).is_err());
    }

    #[test]
    fn jacobian_integrates_to_cross_section() {
        // ∫_{D_a} f dt over each slice equals |D_a| because ∫ t dt = 0.
        let tube = TubeSpec::new(CurveSpec::trefoil(3, 1.0).unwrap(), 0.1).unwrap();
        let a = tube.radius();
        let (nr, nth) = (8, 16);
        let gl_x = [-0.960_289_856_497_536_3, -0.796_666_477_413_626_7, -0.525_532_409_916_329_0, -0.183_434_642_495_649_8,
            0.183_434_642_495_649_8, 0.525_532_409_916_329_0, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
        let gl_w = [0.101_228_536_290_376_3, 0.222_381_034_453_374_5, 0.313_706_645_877_887_3, 0.362_683_783_378_362_0,
            0.362_683_783_378_362_0, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
        for s in [0.0, 3.3, 11.9, 20.2] {
            let mut acc = 0.0;
            for i in 0..nr {
                let r = 0.5 * a * (gl_x[i] + 1.0) * (1.0 - 1e-12);
                for j in 0..nth {
                    let th = 2.0 * PI * j as f64 / nth as f64;
                    let f = jacobian(&tube, s, &[r * th.cos(), r * th.sin()]).unwrap();
                    acc += f * r * gl_w[i] * 0.5 * a * 2.0 * PI / nth as f64;
                }
            }
            assert!((acc / (PI * a * a) - 1.0).abs() < 1e-6, "slice at s={s}: {acc}");
        }
    }

    #[test]
    fn generic_over_f32() {
        let t: TubeSpec<f32> = TubeSpec::new(CurveSpec::circle(3, 2.0f32).unwrap(), 0.5).unwrap();
        let v = tube_volume(&t).unwrap();
        assert!((v - std::f32::consts::PI.powi(2)).abs() < 1e-4);
        assert_eq!(tube_cheeger(&t).unwrap(), 4.0f32);
    }
}

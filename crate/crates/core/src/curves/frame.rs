//! Parallel-transport frame along a closed curve.
//!
//! The normals obey `ė_μ = −κ_μ e_1` with `κ_μ = γ̈ · e_μ`, which is the
//! frame ODE with the tangent row `ė_1 = κ_μ e_μ` supplied exactly by the
//! curve. The normals are advanced with classical RK4 and re-orthonormalized
//! against the exact tangent after every step.

use std::fmt::Write as _;

use super::{ArcLengthTable, CurveSpec, UnitSpeedJet};
use crate::error::{domain, Error, Result};
use crate::linalg::{axpy, dot, gram_deviation, modified_gram_schmidt, norm};
use crate::scalar::Scalar;

/// Hard cap on the orthonormality drift of one RK4 step before
/// re-orthonormalization (raised to `64 ε` for scalars too coarse to meet it).
pub const DRIFT_CAP: f64 = 1e-6;

fn drift_cap<T: Scalar>() -> T {
    T::lit(DRIFT_CAP).max(T::epsilon() * T::lit(64.0))
}

/// Frame data at one arc-length sample.
#[derive(Debug, Clone)]
pub struct FrameSample<T> {
    pub s: T,
    pub u: T,
    pub point: Vec<T>,
    /// Rows `e_1, …, e_d`; `e_1` is the unit tangent.
    pub frame: Vec<Vec<T>>,
    /// `κ_1, …, κ_{d−1}`, the components of `γ̈` along `e_2, …, e_d`.
    pub kappa_components: Vec<T>,
    /// `|γ̈|`.
    pub kappa: T,
}

/// Sampled parallel-transport frame on the uniform grid `s_i = i L / N`, `i = 0..=N`.
#[derive(Debug, Clone)]
pub struct FrameField<T> {
    dim: usize,
    length: T,
    step: T,
    samples: Vec<FrameSample<T>>,
    max_drift: T,
}

pub fn bishop_frame<T: Scalar>(curve: &CurveSpec<T>, table: &ArcLengthTable<T>, n_steps: usize) -> Result<FrameField<T>> {
    bishop_frame_with_initial(curve, table, n_steps, None)
}

/// As [`bishop_frame`], starting from the given normals at `s = 0` (they are
/// orthonormalized against the tangent). `None` selects Gram–Schmidt of the
/// coordinate axes against `e_1(0)`.
pub fn bishop_frame_with_initial<T: Scalar>(
    curve: &CurveSpec<T>,
    table: &ArcLengthTable<T>,
    n_steps: usize,
    initial: Option<Vec<Vec<T>>>,
) -> Result<FrameField<T>> {
    if n_steps < 64 {
        return Err(domain(format!("bishop_frame needs n_steps >= 64, got {n_steps}")));
    }
    let length = table.length();
    let step = length / T::from_count(n_steps);
    let jet0 = checked_jet(curve, table, T::zero())?;
    let normals = initial_normals(&jet0.tangent, initial)?;

    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(make_sample(T::zero(), &jet0, normals));
    let mut max_drift = T::zero();
    let mut jet = jet0;
    for i in 0..n_steps {
        let s0 = T::from_count(i) * step;
        let s1 = if i + 1 == n_steps { length } else { T::from_count(i + 1) * step };
        let h = s1 - s0;
        let mid = checked_jet(curve, table, s0 + h * T::lit(0.5))?;
        let end = checked_jet(curve, table, s1)?;
        let prev = &samples[i].frame[1..];
        let (frame, drift) = rk4_step(prev, &jet, &mid, &end, h)?;
        max_drift = max_drift.max(drift);
        samples.push(make_sample(s1, &end, frame[1..].to_vec()));
        jet = end;
    }
    Ok(FrameField { dim: curve.dim(), length, step, samples, max_drift })
}

fn checked_jet<T: Scalar>(curve: &CurveSpec<T>, table: &ArcLengthTable<T>, s: T) -> Result<UnitSpeedJet<T>> {
    let jet = table.unit_speed_jet(curve, s);
    if jet.tangent.iter().chain(&jet.accel).chain(&jet.point).any(|x| !x.is_finite()) {
        return Err(Error::Numeric("curve derivative samples"));
    }
    Ok(jet)
}

fn initial_normals<T: Scalar>(tangent: &[T], initial: Option<Vec<Vec<T>>>) -> Result<Vec<Vec<T>>> {
    let d = tangent.len();
    match initial {
        Some(given) => {
            if given.len() != d - 1 || given.iter().any(|v| v.len() != d) {
                return Err(domain(format!("initial frame needs {} normals in R^{d}", d - 1)));
            }
            let mut basis = vec![tangent.to_vec()];
            basis.extend(given);
            if !modified_gram_schmidt(&mut basis, T::lit(1e-8)) {
                return Err(domain("initial normals are not independent of the tangent"));
            }
            Ok(basis.split_off(1))
        }
        None => {
            let mut basis = vec![tangent.to_vec()];
            for axis in 0..d {
                if basis.len() == d {
                    break;
                }
                let mut v = vec![T::zero(); d];
                v[axis] = T::one();
                for q in &basis {
                    let c = dot(&v, q);
                    axpy(-c, q, &mut v);
                }
                let n = norm(&v);
                if n > T::lit(1e-6) {
                    basis.push(v.into_iter().map(|x| x / n).collect());
                }
            }
            Ok(basis.split_off(1))
        }
    }
}

fn make_sample<T: Scalar>(s: T, jet: &UnitSpeedJet<T>, normals: Vec<Vec<T>>) -> FrameSample<T> {
    let kappa_components = normals.iter().map(|e| dot(&jet.accel, e)).collect();
    let mut frame = Vec::with_capacity(normals.len() + 1);
    frame.push(jet.tangent.clone());
    frame.extend(normals);
    FrameSample { s, u: jet.u, point: jet.point.clone(), frame, kappa_components, kappa: norm(&jet.accel) }
}

/// Right-hand side `ė_μ = −(γ̈ · e_μ) γ̇` for every normal.
fn transport_rate<T: Scalar>(jet: &UnitSpeedJet<T>, normals: &[Vec<T>]) -> Vec<Vec<T>> {
    normals.iter().map(|e| {
        let k = dot(&jet.accel, e);
        jet.tangent.iter().map(|&t| -k * t).collect()
    }).collect()
}

fn shifted<T: Scalar>(base: &[Vec<T>], rate: &[Vec<T>], h: T) -> Vec<Vec<T>> {
    base.iter()
        .zip(rate)
        .map(|(b, r)| {
            let mut v = b.clone();
            axpy(h, r, &mut v);
            v
        })
        .collect()
}

/// One RK4 step of the normals; returns the re-orthonormalized frame
/// (tangent first) and the drift measured before re-orthonormalization.
fn rk4_step<T: Scalar>(
    normals: &[Vec<T>],
    start: &UnitSpeedJet<T>,
    mid: &UnitSpeedJet<T>,
    end: &UnitSpeedJet<T>,
    h: T,
) -> Result<(Vec<Vec<T>>, T)> {
    let half = h * T::lit(0.5);
    let k1 = transport_rate(start, normals);
    let k2 = transport_rate(mid, &shifted(normals, &k1, half));
    let k3 = transport_rate(mid, &shifted(normals, &k2, half));
    let k4 = transport_rate(end, &shifted(normals, &k3, h));
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let mut frame = vec![end.tangent.clone()];
    for (mu, e) in normals.iter().enumerate() {
        let mut v = e.clone();
        for c in 0..v.len() {
            v[c] = v[c] + sixth * (k1[mu][c] + two * k2[mu][c] + two * k3[mu][c] + k4[mu][c]);
        }
        frame.push(v);
    }
    let drift = gram_deviation(&frame);
    if !drift.is_finite() {
        return Err(Error::Numeric("frame integration"));
    }
    if drift > drift_cap::<T>() {
        return Err(Error::IntegrationFailure { drift: drift.to_f64_lossy(), cap: drift_cap::<T>().to_f64_lossy() });
    }
    if !modified_gram_schmidt(&mut frame, T::lit(1e-8)) {
        return Err(Error::Numeric("frame re-orthonormalization"));
    }
    Ok((frame, drift))
}

impl<T: Scalar> FrameField<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn step(&self) -> T {
        self.step
    }

    /// `N + 1` samples; the last sits at `s = L` and may differ from the
    /// first by the holonomy of the normal bundle.
    pub fn samples(&self) -> &[FrameSample<T>] {
        &self.samples
    }

    /// Largest per-step drift seen before re-orthonormalization.
    pub fn max_drift(&self) -> T {
        self.max_drift
    }

    /// `‖κ‖∞` over the samples (a lower bound of the true supremum).
    pub fn max_curvature(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, p| m.max(p.kappa))
    }

    pub fn max_gram_deviation(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, p| m.max(gram_deviation(&p.frame)))
    }

    /// Worst relative mismatch `|Σκ_μ² − κ²| / κ²` over samples with `κ > 0`.
    pub fn max_curvature_identity_error(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, p| {
            let k2 = p.kappa * p.kappa;
            if k2 > T::zero() {
                let sum: T = p.kappa_components.iter().fold(T::zero(), |a, &k| a + k * k);
                m.max((sum - k2).abs() / k2)
            } else {
                m
            }
        })
    }

    /// Frame at an arbitrary `s ∈ [0, L]`: one RK4 step from the sample below.
    pub fn frame_at(&self, curve: &CurveSpec<T>, table: &ArcLengthTable<T>, s: T) -> Result<FrameSample<T>> {
        if !(s >= T::zero() && s <= self.length) {
            return Err(domain(format!("arc length {s} outside [0, {}]", self.length)));
        }
        let last = self.samples.len() - 2;
        let i = (s / self.step).floor().to_usize().unwrap_or(0).min(last);
        let base = &self.samples[i];
        let h = s - base.s;
        if h == T::zero() {
            return Ok(base.clone());
        }
        let start = checked_jet(curve, table, base.s)?;
        let mid = checked_jet(curve, table, base.s + h * T::lit(0.5))?;
        let end = checked_jet(curve, table, s)?;
        let (frame, _) = rk4_step(&base.frame[1..], &start, &mid, &end, h)?;
        Ok(make_sample(s, &end, frame[1..].to_vec()))
    }

    /// CSV rows `s, e_1 … e_d (row-major), κ_1 … κ_{d−1}` with a header line.
    pub fn to_csv(&self) -> String {
        let d = self.dim;
        let mut out = String::from("s");
        for i in 1..=d {
            for c in 1..=d {
                let _ = write!(out, ",e{i}_{c}");
            }
        }
        for m in 1..d {
            let _ = write!(out, ",kappa_{m}");
        }
        out.push('\n');
        for p in &self.samples {
            let _ = write!(out, "{:e}", p.s.to_f64_lossy());
            for x in p.frame.iter().flatten().chain(&p.kappa_components) {
                let _ = write!(out, ",{:e}", x.to_f64_lossy());
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::arc_length;

    fn frame_for(curve: &CurveSpec<f64>, steps: usize) -> FrameField<f64> {
        let table = arc_length(curve, 1e-12).unwrap();
        bishop_frame(curve, &table, steps).unwrap()
    }

    #[test]
    fn planar_circle_keeps_inward_normal() {
        let c = CurveSpec::<f64>::circle(3, 1.0).unwrap();
        let t = arc_length(&c, 1e-12).unwrap();
        // γ(0) = (1, 0, 0): inward normal (−1, 0, 0), binormal (0, 0, 1)
        let init = vec![vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        let f = bishop_frame_with_initial(&c, &t, 256, Some(init)).unwrap();
        for p in f.samples() {
            assert!((p.kappa_components[0] - 1.0).abs() < 1e-10);
            assert!(p.kappa_components[1].abs() < 1e-10);
        }
        // default Gram–Schmidt picks the outward x-axis, flipping the sign
        let g = bishop_frame(&c, &t, 256).unwrap();
        assert!((g.samples()[0].kappa_components[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearly_straight_curve_has_tiny_components() {
        let c = CurveSpec::<f64>::circle(3, 1e6).unwrap();
        let f = frame_for(&c, 4096);
        for p in f.samples() {
            assert!(p.kappa_components.iter().all(|k| k.abs() <= 1e-5));
        }
    }

    #[test]
    fn trefoil_frame_quality() {
        let c = CurveSpec::<f64>::trefoil(3, 1.0).unwrap();
        let f = frame_for(&c, 4096);
        assert!(f.max_gram_deviation() <= 1e-8);
        assert!(f.max_curvature_identity_error() <= 1e-6);
        assert!(f.max_drift() <= DRIFT_CAP);
    }

    #[test]
    fn curvature_squared_is_frame_independent() {
        let c = CurveSpec::<f64>::trefoil(3, 1.0).unwrap();
        let t = arc_length(&c, 1e-12).unwrap();
        let a = bishop_frame(&c, &t, 1024).unwrap();
        let e1 = a.samples()[0].frame[0].clone();
        // a rotated start: mix the default normals
        let n = &a.samples()[0].frame[1..];
        let (cs, sn) = (0.7f64.cos(), 0.7f64.sin());
        let rot = vec![
            n[0].iter().zip(&n[1]).map(|(x, y)| cs * x + sn * y).collect::<Vec<_>>(),
            n[0].iter().zip(&n[1]).map(|(x, y)| -sn * x + cs * y).collect::<Vec<_>>(),
        ];
        let b = bishop_frame_with_initial(&c, &t, 1024, Some(rot)).unwrap();
        assert_eq!(b.samples()[0].frame[0], e1);
        for (p, q) in a.samples().iter().zip(b.samples()) {
            let ka: f64 = p.kappa_components.iter().map(|k| k * k).sum();
            let kb: f64 = q.kappa_components.iter().map(|k| k * k).sum();
            assert!((ka - kb).abs() <= 1e-6 * ka);
            // the components themselves differ by the constant rotation
            let rotated = cs * p.kappa_components[0] + sn * p.kappa_components[1];
            assert!((rotated - q.kappa_components[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn too_few_steps_and_bad_initial_frame() {
        let c = CurveSpec::<f64>::circle(3, 1.0).unwrap();
        let t = arc_length(&c, 1e-10).unwrap();
        assert!(matches!(bishop_frame(&c, &t, 32), Err(Error::Domain(_))));
        // the tangent at s = 0 is the y-axis
        let bad = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(bishop_frame_with_initial(&c, &t, 128, Some(bad)).is_err());
    }

    #[test]
    fn frame_between_samples_is_orthonormal() {
        let c = CurveSpec::<f64>::trefoil(3, 1.0).unwrap();
        let t = arc_length(&c, 1e-12).unwrap();
        let f = bishop_frame(&c, &t, 512).unwrap();
        let s = 0.37 * f.step() + 10.0 * f.step();
        let mid = f.frame_at(&c, &t, s).unwrap();
        assert!(gram_deviation(&mid.frame) < 1e-12);
        let next = &f.samples()[11];
        let again = f.frame_at(&c, &t, next.s).unwrap();
        for (x, y) in again.frame.iter().flatten().zip(next.frame.iter().flatten()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_export_shape() {
        let c = CurveSpec::<f64>::circle(2, 1.0).unwrap();
        let f = frame_for(&c, 64);
        let csv = f.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "s,e1_1,e1_2,e2_1,e2_2,kappa_1");
        assert_eq!(lines.count(), 65);
    }
}

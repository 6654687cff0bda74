//! Nearest point on the centre curve.

use super::TubeSpec;
use crate::curves::{CurveSpec, FrameField};
use crate::linalg::{dist, dot, sub};
use crate::scalar::Scalar;

const CHUNK: usize = 32;

/// Frame sample positions grouped into consecutive chunks with bounding balls.
#[derive(Debug, Clone)]
pub(crate) struct CurveIndex<T> {
    points: Vec<Vec<T>>,
    params: Vec<T>,
    centers: Vec<Vec<T>>,
    radii: Vec<T>,
    spacing: T,
}

impl<T: Scalar> CurveIndex<T> {
    pub(crate) fn new(frame: &FrameField<T>) -> Self {
        // the last sample repeats the first point
        let samples = &frame.samples()[..frame.samples().len() - 1];
        let points: Vec<Vec<T>> = samples.iter().map(|p| p.point.clone()).collect();
        let params: Vec<T> = samples.iter().map(|p| p.u).collect();
        let mut centers = Vec::new();
        let mut radii = Vec::new();
        for chunk in points.chunks(CHUNK) {
            let d = chunk[0].len();
            let mut c = vec![T::zero(); d];
            for p in chunk {
                for k in 0..d {
                    c[k] = c[k] + p[k];
                }
            }
            let n = T::from_count(chunk.len());
            for x in c.iter_mut() {
                *x = *x / n;
            }
            let r = chunk.iter().fold(T::zero(), |m, p| m.max(dist(p, &c)));
            centers.push(c);
            radii.push(r);
        }
        Self { points, params, centers, radii, spacing: frame.step() }
    }

    pub(crate) fn len(&self) -> usize {
        self.points.len()
    }

    pub(crate) fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub(crate) fn param(&self, i: usize) -> T {
        self.params[i]
    }

    /// Sample indices that are discrete local minima of the distance to `x`
    /// within `spacing` of the best sampled distance.
    fn candidates(&self, x: &[T]) -> Vec<(usize, T)> {
        let n = self.points.len();
        let mut order: Vec<(T, usize)> =
            self.centers.iter().zip(&self.radii).enumerate().map(|(k, (c, &r))| (dist(x, c) - r, k)).collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut best = T::infinity();
        let mut visited = Vec::new();
        for &(lb, k) in &order {
            if lb > best + self.spacing {
                break;
            }
            let start = k * CHUNK;
            let end = (start + CHUNK).min(n);
            for i in start..end {
                let di = dist(x, &self.points[i]);
                best = best.min(di);
                visited.push((i, di));
            }
        }
        let band = best + self.spacing;
        let mut out = Vec::new();
        for &(i, di) in &visited {
            if di > band {
                continue;
            }
            let prev = dist(x, &self.points[(i + n - 1) % n]);
            let next = dist(x, &self.points[(i + 1) % n]);
            if di <= prev && di <= next {
                out.push((i, di));
            }
        }
        out
    }
}

/// Result of a nearest-point query.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestPoint<T> {
    /// Arc length of the minimizer.
    pub s: T,
    /// Curve parameter of the minimizer.
    pub u: T,
    pub distance: T,
    /// Arc length of a second minimizer at the same distance, if any.
    pub rival: Option<T>,
}

/// Local minimizer of `|x − p(u)|` in `[lo, hi]` (periodic parameter), by
/// safeguarded Newton on `g(u) = (x − p(u)) · p'(u)`.
pub(crate) fn refine<T: Scalar>(curve: &CurveSpec<T>, x: &[T], mut lo: T, mut hi: T, start: T) -> (T, T) {
    let g = |u: T| {
        let j = curve.jet(u);
        let r = sub(x, &j.point);
        (dot(&r, &j.d1), dot(&j.d1, &j.d1), dot(&r, &j.d2))
    };
    let (g_lo, _, _) = g(lo);
    let (g_hi, _, _) = g(hi);
    let bracketed = g_lo >= T::zero() && g_hi <= T::zero();
    let mut u = start;
    if bracketed {
        let eps = T::epsilon() * T::lit(4.0);
        for _ in 0..80 {
            let (gu, sp2, curv) = g(u);
            if gu > T::zero() {
                lo = u;
            } else {
                hi = u;
            }
            let dg = curv - sp2;
            let mut next = if dg < T::zero() { u - gu / dg } else { (lo + hi) * T::lit(0.5) };
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            let done = (next - u).abs() <= eps * (T::one() + u.abs()) || hi - lo <= eps * (T::one() + u.abs());
            u = next;
            if done {
                break;
            }
        }
    } else {
        // golden section on the squared distance
        let phi = T::lit(0.618_033_988_749_894_9);
        let f = |u: T| {
            let p = curve.point(u);
            let r = sub(x, &p);
            dot(&r, &r)
        };
        let (mut a, mut b) = (lo, hi);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..120 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
            if b - a <= T::epsilon() * T::lit(8.0) {
                break;
            }
        }
        u = (a + b) * T::lit(0.5);
        for end in [lo, hi] {
            if f(end) < f(u) {
                u = end;
            }
        }
    }
    let d = dist(x, &curve.point(u));
    (u, d)
}

fn wrap_unit<T: Scalar>(u: T) -> T {
    let w = u - u.floor();
    if w >= T::one() {
        T::zero()
    } else {
        w
    }
}

/// Parameter and distance of the nearest curve point, plus a rival minimizer
/// if one ties within rounding.
pub(crate) fn nearest_param<T: Scalar>(spec: &TubeSpec<T>, x: &[T]) -> (T, T, Option<T>) {
    let index = spec.index();
    let n = index.len();
    let curve = spec.curve();
    let mut refined: Vec<(T, T)> = index
        .candidates(x)
        .into_iter()
        .map(|(i, _)| {
            let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
            let u = index.param(i);
            let mut lo = index.param(prev);
            let mut hi = index.param(next);
            if lo > u {
                lo = lo - T::one();
            }
            if hi < u {
                hi = hi + T::one();
            }
            let (u, d) = refine(curve, x, lo, hi, u);
            (wrap_unit(u), d)
        })
        .collect();
    refined.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (u, d) = refined[0];
    let tie = T::lit(1e-9) * (T::one() + d);
    // a rival must be a separate minimizer, not the same one reached from a neighbour sample
    let du_min = T::lit(4.0) / T::from_count(n);
    let rival = refined[1..].iter().find(|(v, dv)| {
        let sep = (*v - u).abs().min(T::one() - (*v - u).abs());
        *dv - d <= tie && sep > du_min
    });
    (u, d, rival.map(|r| r.0))
}

/// Minimizer of `|x − γ(s)|` over `s ∈ [0, L)`: coarse scan of the frame
/// samples, then Newton refinement of each candidate local minimum.
pub fn nearest_point<T: Scalar>(spec: &TubeSpec<T>, x: &[T]) -> NearestPoint<T> {
    let (u, distance, rival) = nearest_param(spec, x);
    let table = spec.table();
    let to_s = |u: T| {
        let s = table.s_of_u(spec.curve(), u);
        if s >= table.length() {
            T::zero()
        } else {
            s
        }
    };
    NearestPoint { s: to_s(u), u, distance, rival: rival.map(to_s) }
}

/// `dist(x, Γ) < a` (the tube is open).
pub fn membership<T: Scalar>(spec: &TubeSpec<T>, x: &[T]) -> bool {
    nearest_param(spec, x).1 < spec.radius()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_on_curve_is_its_own_nearest() {
        let tube = TubeSpec::new(CurveSpec::<f64>::trefoil(3, 1.0).unwrap(), 0.1).unwrap();
        for s0 in [0.0, 1.234, 9.99, 27.5] {
            let x = tube.table().unit_speed_jet(tube.curve(), s0).point;
            let np = nearest_point(&tube, &x);
            assert!(np.distance < 1e-12);
            assert!((np.s - s0).abs() < 1e-9 * tube.length(), "{} vs {s0}", np.s);
        }
    }

    #[test]
    fn radial_distance_to_circle() {
        let tube = TubeSpec::new(CurveSpec::<f64>::circle(3, 2.0).unwrap(), 0.4).unwrap();
        let np = nearest_point(&tube, &[3.0, 0.0, 0.0]);
        assert!((np.distance - 1.0).abs() < 1e-14);
        assert!(np.s < 1e-12 || (tube.length() - np.s) < 1e-12);
        assert!(membership(&tube, &[2.39, 0.0, 0.0]));
        assert!(!membership(&tube, &[2.41, 0.0, 0.0]));
        assert!(membership(&tube, &[0.0, 2.0, 0.0]));
        // dist exactly a is outside the open tube
        assert!(!membership(&tube, &[2.0, 0.0, 0.4]));
    }

    #[test]
    fn refined_point_beats_every_grid_sample() {
        let tube = TubeSpec::new(CurveSpec::<f64>::trefoil(3, 1.0).unwrap(), 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.5..3.5)).collect();
            let np = nearest_point(&tube, &x);
            // exhaustive oracle over all frame samples
            let grid_best = tube
                .frame()
                .samples()
                .iter()
                .map(|p| dist(&x, &p.point))
                .fold(f64::INFINITY, f64::min);
            assert!(np.distance <= grid_best + 1e-12);
        }
    }

    #[test]
    fn centre_of_circle_has_rivals() {
        let tube = TubeSpec::new(CurveSpec::<f64>::circle(2, 1.0).unwrap(), 0.3).unwrap();
        let np = nearest_point(&tube, &[0.0, 0.0]);
        assert!((np.distance - 1.0).abs() < 1e-12);
        assert!(np.rival.is_some());
        let np = nearest_point(&tube, &[0.9, 0.1]);
        assert!(np.rival.is_none());
    }
}

//! The tube test field `V(x) = (x − γ(s))/a`, where `γ(s)` is the curve
//! point at distance exactly `a` from `x` lying behind `x` along the curve
//! (`(x − γ(s)) · γ̇(s) > 0`). Writing `x = γ(s) + a σ_k e_k(s)` with `σ` on
//! the unit sphere and `σ_1 > 0`, this is `V = σ_k e_k`, so `|V| = 1` and
//! `div V = (d − 1)/a`.

use crate::error::{domain, Error, Result};
use crate::linalg::{dot, sub};
use crate::tube::{nearest_param, TubeSpec};

/// Curve parameter of the backward crossing, starting from a parameter `u0`
/// with `|x − p(u0)| < a` on the same sheet as `x`.
pub(crate) fn backward_crossing(spec: &TubeSpec<f64>, x: &[f64], u0: f64) -> Result<f64> {
    let curve = spec.curve();
    let a = spec.radius();
    let a2 = a * a;
    let g = |u: f64| {
        let j = curve.jet(u);
        let r = sub(x, &j.point);
        (dot(&r, &r) - a2, -2.0 * dot(&r, &j.d1), j.d1)
    };
    let (g0, _, d1) = g(u0);
    if !(g0 < 0.0) {
        return Err(domain(format!("start parameter is {} from x, not inside the tube", (g0 + a2).sqrt())));
    }
    // march backwards a quarter radius of arc at a time
    let mut hi = u0;
    let mut speed = dot(&d1, &d1).sqrt();
    let max_steps = (4.0 * spec.length() / a) as usize + 16;
    let mut lo = None;
    for _ in 0..max_steps {
        let u = hi - 0.25 * a / speed;
        let (gu, _, d1) = g(u);
        if gu >= 0.0 {
            lo = Some(u);
            break;
        }
        hi = u;
        speed = dot(&d1, &d1).sqrt();
    }
    let mut lo = lo.ok_or(Error::Numeric("tube field: no point at distance a behind x"))?;
    // g(lo) ≥ 0 > g(hi); safeguarded Newton
    let mut u = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (gu, dg, _) = g(u);
        if gu == 0.0 {
            break;
        }
        if gu > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let tol = 4.0 * f64::EPSILON * (1.0 + u.abs());
        if dg < 0.0 {
            let newton = u - gu / dg;
            if (newton - u).abs() <= tol {
                u = newton;
                break;
            }
            if newton > lo && newton < hi {
                u = newton;
                continue;
            }
        }
        if hi - lo <= tol {
            break;
        }
        u = 0.5 * (lo + hi);
    }
    Ok(u - u.floor())
}

pub(crate) fn tube_field_from(spec: &TubeSpec<f64>, x: &[f64], u0: f64) -> Result<Vec<f64>> {
    let u = backward_crossing(spec, x, u0)?;
    let p = spec.curve().point(u);
    let a = spec.radius();
    Ok(x.iter().zip(&p).map(|(&xi, &pi)| (xi - pi) / a).collect())
}

/// Nearest curve parameter of an interior point; fails outside the tube or
/// when two distinct curve points are equally near.
pub(crate) fn interior_anchor(spec: &TubeSpec<f64>, x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != spec.dim() {
        return Err(domain(format!("point has {} coordinates, tube dimension is {}", x.len(), spec.dim())));
    }
    let (u, dist, rival) = nearest_param(spec, x);
    if !(dist < spec.radius()) {
        return Err(domain(format!("point at distance {dist} from the centre curve lies outside the tube")));
    }
    if let Some(v) = rival {
        let table = spec.table();
        return Err(Error::Ambiguous {
            s1: table.s_of_u(spec.curve(), u),
            s2: table.s_of_u(spec.curve(), v),
            distance: dist,
        });
    }
    Ok((u, dist))
}

pub fn tube_field(spec: &TubeSpec<f64>, x: &[f64]) -> Result<Vec<f64>> {
    let (u, _) = interior_anchor(spec, x)?;
    tube_field_from(spec, x, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveSpec;
    use crate::linalg::norm;

    fn circle_tube() -> TubeSpec<f64> {
        TubeSpec::new(CurveSpec::circle(3, 2.0).unwrap(), 0.4).unwrap()
    }

    #[test]
    fn unit_length_and_points_forward() {
        let tube = circle_tube();
        for x in [[2.2, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, -1.7, 0.1], [-1.5, 1.5, -0.2]] {
            let v = tube_field(&tube, &x).unwrap();
            assert!((norm(&v) - 1.0).abs() < 1e-14);
        }
        // at (2.2, 0, 0) the circle is traversed counter-clockwise, so γ(s)
        // lies below the x-axis and V has a positive y-component
        let v = tube_field(&tube, &[2.2, 0.0, 0.0]).unwrap();
        assert!(v[1] > 0.0 && v[2].abs() < 1e-14);
        // closed form: γ = 2(cos θ, −sin θ, 0) with |x − γ| = 0.4 ⇒ cos θ = (4.84 + 4 − 0.16)/8.8
        let c: f64 = (4.84 + 4.0 - 0.16) / 8.8;
        let s = (1.0 - c * c).sqrt();
        assert!((v[0] - (2.2 - 2.0 * c) / 0.4).abs() < 1e-13);
        assert!((v[1] - 2.0 * s / 0.4).abs() < 1e-13);
    }

    #[test]
    fn outside_and_ambiguous_points() {
        let tube = circle_tube();
        assert!(matches!(tube_field(&tube, &[2.5, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(tube_field(&tube, &[2.0, 0.0]).is_err());
        let thin = TubeSpec::new(CurveSpec::circle(2, 1.0).unwrap(), 0.3).unwrap();
        assert!(matches!(interior_anchor(&thin, &[0.0, 0.0]), Err(Error::Domain(_))));
        // overlapping tube: the centre is equidistant from the whole circle
        let fat = TubeSpec::new(CurveSpec::circle(2, 1.0).unwrap(), 1.5).unwrap();
        assert!(matches!(tube_field(&fat, &[0.0, 0.0]), Err(Error::Ambiguous { .. })));
    }
}

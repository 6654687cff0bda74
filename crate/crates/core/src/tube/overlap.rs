//! Non-overlap verification for tubes.
//!
//! `a‖κ‖∞ < 1` keeps the Fermi Jacobian positive but says nothing about
//! distant parts of the curve coming close. Two sampling falsifiers cover
//! that:
//!
//! * chord test: if the tube does not overlap, any two curve points at arc
//!   separation at least `πa` are at least `2a` apart, so a shorter chord
//!   is a witness of overlap;
//! * Fermi-map test: a point `φ(s, t)` whose nearest curve point is strictly
//!   closer than `|t|` is also reached from that other point, so the Fermi
//!   map is not injective.
//!
//! Neither can prove non-overlap; the verdict records what was checked.

use super::nearest::nearest_param;
use super::TubeSpec;
use crate::linalg::{axpy, dist};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OverlapVerdict {
    /// `a‖κ‖∞ < 1` and no double point was found.
    CertifiedSufficient,
    /// `a‖κ‖∞ ≥ 1` but the global samplers found no double point.
    #[serde(rename = "SufficientFails_GlobalPassed")]
    SufficientFailsGlobalPassed,
    /// A double point of the tube was found.
    OverlapDetected,
}

impl OverlapVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CertifiedSufficient => "CertifiedSufficient",
            Self::SufficientFailsGlobalPassed => "SufficientFails_GlobalPassed",
            Self::OverlapDetected => "OverlapDetected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapStatus<T> {
    /// `a ‖κ‖∞` with the sup taken over frame samples.
    pub sufficient_value: T,
    pub max_curvature: T,
    pub verdict: OverlapVerdict,
    /// Smallest chord between sampled points at arc separation ≥ πa, if any pair qualifies.
    pub min_self_distance: Option<T>,
    /// A point reached twice by the Fermi map or the midpoint of a short chord.
    pub witness: Option<Vec<T>>,
    pub samples: usize,
}

impl<T: Scalar> OverlapStatus<T> {
    pub(crate) fn pending() -> Self {
        Self {
            sufficient_value: T::nan(),
            max_curvature: T::nan(),
            verdict: OverlapVerdict::OverlapDetected,
            min_self_distance: None,
            witness: None,
            samples: 0,
        }
    }

    pub fn describe(&self) -> String {
        format!("{} (a·‖κ‖∞ = {})", self.verdict.as_str(), self.sufficient_value)
    }
}

/// Unit directions in the normal space used by the Fermi-map test: `±e_μ`
/// and, for every pair, `(±e_μ ± e_ν)/√2`.
fn normal_directions<T: Scalar>(m: usize) -> Vec<Vec<T>> {
    let mut dirs = Vec::new();
    for i in 0..m {
        for sign in [T::one(), -T::one()] {
            let mut v = vec![T::zero(); m];
            v[i] = sign;
            dirs.push(v);
        }
    }
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    for i in 0..m {
        for j in i + 1..m {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut v = vec![T::zero(); m];
                v[i] = T::lit(si) * h;
                v[j] = T::lit(sj) * h;
                dirs.push(v);
            }
        }
    }
    dirs
}

pub fn check_nonoverlap<T: Scalar>(spec: &TubeSpec<T>, n_samples: usize) -> OverlapStatus<T> {
    let a = spec.radius();
    let frame = spec.frame();
    let max_curvature = frame.max_curvature();
    let sufficient_value = a * max_curvature;
    let index = spec.index();
    let n_frame = index.len();
    let n = n_samples.clamp(8, n_frame);
    let picks: Vec<usize> = (0..n).map(|k| k * n_frame / n).collect();
    let length = spec.length();
    let samples = frame.samples();

    // chord test
    let min_arc = T::PI() * a;
    let mut min_self_distance: Option<T> = None;
    let mut witness = None;
    for (ii, &i) in picks.iter().enumerate() {
        for &j in &picks[ii + 1..] {
            let ds = (samples[j].s - samples[i].s).abs();
            let arc = ds.min(length - ds);
            if arc < min_arc {
                continue;
            }
            let chord = dist(index.point(i), index.point(j));
            if min_self_distance.map_or(true, |m| chord < m) {
                min_self_distance = Some(chord);
                if chord < a + a {
                    let mid = index.point(i).iter().zip(index.point(j)).map(|(&p, &q)| (p + q) * T::lit(0.5)).collect();
                    witness = Some(mid);
                }
            }
        }
    }

    // Fermi-map test
    if witness.is_none() {
        let dirs = normal_directions::<T>(spec.dim() - 1);
        let radii = [T::lit(0.5), T::lit(0.9), T::lit(0.999)];
        let slack = T::one() - T::lit(1e-7).max(T::epsilon() * T::lit(256.0));
        'outer: for &i in &picks {
            let sample = &samples[i];
            for dir in &dirs {
                for &frac in &radii {
                    let t = frac * a;
                    let mut x = sample.point.clone();
                    for (c, e) in dir.iter().zip(&sample.frame[1..]) {
                        axpy(*c * t, e, &mut x);
                    }
                    let (_, d, _) = nearest_param(spec, &x);
                    if d < t * slack {
                        witness = Some(x);
                        break 'outer;
                    }
                }
            }
        }
    }

    let verdict = if witness.is_some() {
        OverlapVerdict::OverlapDetected
    } else if sufficient_value < T::one() {
        OverlapVerdict::CertifiedSufficient
    } else {
        OverlapVerdict::SufficientFailsGlobalPassed
    };
    OverlapStatus { sufficient_value, max_curvature, verdict, min_self_distance, witness, samples: n }
}

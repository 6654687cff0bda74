//! Sampling certificates for Cheeger lower bounds.
//!
//! A vector field with `|V| ≤ 1` and `div V ≥ c` on `Ω` gives `h(Ω) ≥ c`.
//! [`certify_lower_bound`] checks both inequalities at deterministic
//! interior sample points, with the divergence taken by central
//! differences. A `Certified` verdict is numerical evidence, not a proof.

mod field;
mod sampler;
mod tabulated;

pub use field::tube_field;
pub use sampler::Sampler;
pub use tabulated::TabulatedField;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::shell::{shell_cheeger, shell_field, ShellSpec};
use crate::tube::{OverlapVerdict, TubeSpec};
use field::{interior_anchor, tube_field_from};
use sampler::{gaussian_cost, gaussians};

pub const MIN_CERT_SAMPLES: usize = 1000;

/// Region in which a field is certified.
#[derive(Debug, Clone)]
pub enum Domain<'a> {
    Tube(&'a TubeSpec<f64>),
    Shell(ShellSpec<f64>),
    /// Open axis-aligned box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

/// Distance to the boundary of a point, plus the nearest curve parameter
/// for tubes.
#[derive(Debug, Clone, Copy)]
struct Probe {
    margin: f64,
    anchor: Option<f64>,
}

impl Domain<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Tube(t) => t.dim(),
            Domain::Shell(s) => s.dim(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Tube(_) => "tube",
            Domain::Shell(_) => "shell",
            Domain::Box { .. } => "box",
        }
    }

    /// Default finite-difference step: `1e-4` times the domain thickness.
    pub fn default_step(&self) -> f64 {
        1e-4 * match self {
            Domain::Tube(t) => t.radius(),
            Domain::Shell(s) => s.outer() - s.inner(),
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min),
        }
    }

    fn probe(&self, x: &[f64]) -> Result<Probe> {
        if x.len() != self.dim() {
            return Err(domain(format!("point has {} coordinates, domain dimension is {}", x.len(), self.dim())));
        }
        Ok(match self {
            Domain::Tube(t) => {
                let (u, dist) = interior_anchor(t, x)?;
                Probe { margin: t.radius() - dist, anchor: Some(u) }
            }
            Domain::Shell(s) => Probe { margin: s.boundary_distance(x), anchor: None },
            Domain::Box { lo, hi } => {
                let m = x.iter().zip(lo.iter().zip(hi)).map(|(&v, (&l, &h))| (v - l).min(h - v)).fold(f64::INFINITY, f64::min);
                Probe { margin: m, anchor: None }
            }
        })
    }

    /// Volume fraction of the boundary layer of width `delta` that the
    /// samplers leave out.
    pub fn excluded_fraction(&self, delta: f64) -> f64 {
        match self {
            // the Fermi Jacobian integrates to 1 over every centred sphere
            Domain::Tube(t) => 1.0 - ((t.radius() - delta) / t.radius()).powi(t.dim() as i32 - 1),
            Domain::Shell(s) => {
                let (r, big_r, d) = (s.inner(), s.outer(), s.dim() as i32);
                let q = |t: f64| (t / big_r).powi(d);
                1.0 - (q(big_r - delta) - q(r + delta)) / (1.0 - q(r))
            }
            Domain::Box { lo, hi } => {
                1.0 - lo.iter().zip(hi).map(|(l, h)| ((h - l - 2.0 * delta) / (h - l)).max(0.0)).product::<f64>()
            }
        }
    }

    fn uniforms_per_attempt(&self) -> usize {
        match self {
            Domain::Tube(t) => 3 + gaussian_cost(t.dim() - 1),
            Domain::Shell(s) => 1 + gaussian_cost(s.dim()),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    /// Candidate point `k`: volume-uniform in the domain shrunk by `delta`.
    /// Tubes are sampled in normal coordinates `(s, t)` and thinned by the
    /// Jacobian `1 − γ̈·t`, so some attempts return `None`. Any orthonormal
    /// normal frame gives that Jacobian, so no parallel transport is needed.
    fn attempt(&self, sampler: &Sampler, k: u64, delta: f64, jac_max: f64) -> Result<Option<Vec<f64>>> {
        let mut u = vec![0.0; self.uniforms_per_attempt()];
        sampler.fill(k, &mut u);
        match self {
            Domain::Tube(t) => {
                let m = t.dim() - 1;
                let s = (u[0] * t.length()).min(t.length() * (1.0 - f64::EPSILON));
                let mut dir = vec![0.0; m];
                gaussians(&u[3..], &mut dir);
                let len = norm(&dir);
                let rho = (t.radius() - delta) * u[1].powf(1.0 / m as f64);
                let jet = t.table().unit_speed_jet(t.curve(), s);
                let mut x = jet.point;
                let mut bend = 0.0;
                for (z, n) in dir.iter().zip(normal_complement(&jet.tangent)) {
                    let c = z / len * rho;
                    bend += c * dot(&jet.accel, &n);
                    axpy(c, &n, &mut x);
                }
                if u[2] * jac_max > 1.0 - bend {
                    return Ok(None);
                }
                Ok(Some(x))
            }
            Domain::Shell(s) => {
                let d = s.dim();
                let mut dir = vec![0.0; d];
                gaussians(&u[1..], &mut dir);
                let len = norm(&dir);
                let (lo, hi) = (s.inner() + delta, s.outer() - delta);
                let qd = (lo / hi).powi(d as i32);
                let t = hi * (qd + u[0] * (1.0 - qd)).powf(1.0 / d as f64);
                Ok(Some(dir.iter().map(|&z| z / len * t).collect()))
            }
            Domain::Box { lo, hi } => Ok(Some(
                u.iter().zip(lo.iter().zip(hi)).map(|(&v, (&l, &h))| l + delta + v * (h - l - 2.0 * delta)).collect(),
            )),
        }
    }
}

/// Orthonormal basis of the complement of the unit vector `t`: the columns
/// `j ≠ k` of the Householder reflection taking `e_k` to `∓t`.
fn normal_complement(t: &[f64]) -> Vec<Vec<f64>> {
    let k = (0..t.len()).max_by(|&i, &j| t[i].abs().total_cmp(&t[j].abs())).unwrap();
    let mut v = t.to_vec();
    v[k] += t[k].signum();
    let vv = dot(&v, &v);
    (0..t.len())
        .filter(|&j| j != k)
        .map(|j| (0..t.len()).map(|i| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / vv).collect())
        .collect()
}

pub type FieldFn<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a>;

pub enum FieldKind<'a> {
    /// `(x − γ(s))/a` with `γ(s)` at distance `a` behind `x`.
    TubeProjection,
    /// `f(|x|) x` from the shell profile.
    ShellRadial,
    Tabulated(TabulatedField),
    Custom { name: String, f: FieldFn<'a> },
}

impl FieldKind<'_> {
    pub fn name(&self) -> &str {
        match self {
            FieldKind::TubeProjection => "tube-projection",
            FieldKind::ShellRadial => "shell-radial",
            FieldKind::Tabulated(_) => "tabulated",
            FieldKind::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for FieldKind<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A vector field on a domain together with the claimed divergence bound.
#[derive(Debug)]
pub struct FieldSpec<'a> {
    domain: Domain<'a>,
    kind: FieldKind<'a>,
    claimed: f64,
}

impl<'a> FieldSpec<'a> {
    pub fn new(domain: Domain<'a>, kind: FieldKind<'a>, claimed: f64) -> Result<Self> {
        if !claimed.is_finite() {
            return Err(domain_err("claimed constant must be finite"));
        }
        match (&domain, &kind) {
            (Domain::Tube(t), FieldKind::TubeProjection) => {
                if t.overlap().verdict == OverlapVerdict::OverlapDetected {
                    return Err(Error::HypothesisViolated(t.overlap().describe()));
                }
            }
            (Domain::Shell(_), FieldKind::ShellRadial) => {}
            (_, FieldKind::TubeProjection) | (_, FieldKind::ShellRadial) => {
                return Err(domain_err(format!("{} field is not defined on a {}", kind.name(), domain.name())));
            }
            (_, FieldKind::Tabulated(tab)) if tab.dim() != domain.dim() => {
                return Err(domain_err("tabulated field and domain differ in dimension"));
            }
            _ => {}
        }
        if let Domain::Box { lo, hi } = &domain {
            if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                return Err(domain_err("box corners must satisfy lo < hi on every axis"));
            }
        }
        Ok(Self { domain, kind, claimed })
    }

    /// Tube field with the claim `(d − 1)/a`.
    pub fn tube(spec: &'a TubeSpec<f64>) -> Result<Self> {
        let c = (spec.dim() - 1) as f64 / spec.radius();
        Self::new(Domain::Tube(spec), FieldKind::TubeProjection, c)
    }

    /// Shell field with the claim `d C`.
    pub fn shell(spec: ShellSpec<f64>) -> Result<Self> {
        Self::new(Domain::Shell(spec), FieldKind::ShellRadial, shell_cheeger(&spec))
    }

    pub fn with_claim(mut self, claimed: f64) -> Self {
        self.claimed = claimed;
        self
    }

    pub fn domain(&self) -> &Domain<'a> {
        &self.domain
    }

    pub fn kind(&self) -> &FieldKind<'a> {
        &self.kind
    }

    pub fn claimed(&self) -> f64 {
        self.claimed
    }

    fn eval_at(&self, x: &[f64], anchor: Option<f64>) -> Result<Vec<f64>> {
        match (&self.kind, &self.domain) {
            (FieldKind::TubeProjection, Domain::Tube(t)) => {
                tube_field_from(t, x, anchor.expect("tube probes carry an anchor"))
            }
            (FieldKind::ShellRadial, Domain::Shell(s)) => shell_field(s, x),
            (FieldKind::Tabulated(tab), _) => tab.eval(x),
            (FieldKind::Custom { f, .. }, _) => Ok(f(x)),
            _ => unreachable!("checked in FieldSpec::new"),
        }
    }

    /// Field value at an interior point.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let probe = self.domain.probe(x)?;
        if !(probe.margin > 0.0) {
            return Err(domain("point is not inside the domain"));
        }
        self.eval_at(x, probe.anchor)
    }

    fn divergence_at(&self, x: &[f64], anchor: Option<f64>, h: f64) -> Result<f64> {
        let mut y = x.to_vec();
        let mut sum = 0.0;
        for i in 0..x.len() {
            y[i] = x[i] + h;
            let plus = self.eval_at(&y, anchor)?[i];
            y[i] = x[i] - h;
            let minus = self.eval_at(&y, anchor)?[i];
            y[i] = x[i];
            sum += (plus - minus) / (2.0 * h);
        }
        Ok(sum)
    }

    /// Central differences with the step halved until two successive values
    /// agree to `tol` (at most [`MAX_HALVINGS`] times). Returns the value, the
    /// final step and whether the agreement was reached.
    fn divergence_refined(&self, x: &[f64], anchor: Option<f64>, h: f64, tol: f64) -> Result<(f64, f64, bool)> {
        let mut h = h;
        let mut prev = self.divergence_at(x, anchor, h)?;
        for _ in 0..MAX_HALVINGS {
            h *= 0.5;
            let next = self.divergence_at(x, anchor, h)?;
            if (next - prev).abs() <= tol {
                return Ok((next, h, true));
            }
            prev = next;
        }
        Ok((prev, h, false))
    }
}

/// Limit on step halvings per sample; `2^-16 h_fd` is still far above the
/// rounding floor of the fields used here.
pub const MAX_HALVINGS: usize = 16;

fn domain_err(msg: impl Into<String>) -> Error {
    domain(msg)
}

/// `Σ_i [V_i(x + h e_i) − V_i(x − h e_i)] / 2h`.
pub fn numeric_divergence(field: &FieldSpec<'_>, x: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(domain("finite-difference step must be positive"));
    }
    let probe = field.domain.probe(x)?;
    if !(probe.margin > h) {
        return Err(Error::Stencil { h, margin: probe.margin });
    }
    field.divergence_at(x, probe.anchor, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "Certified",
            Verdict::Violated => "Violated",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: Vec<f64>,
    pub norm: f64,
    pub divergence: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub samples: usize,
    pub sampler: Sampler,
    /// Defaults to [`Domain::default_step`].
    pub h_fd: Option<f64>,
    pub eps_norm: f64,
    /// Defaults to `1e-3 |c|`.
    pub eps_div: Option<f64>,
    pub max_violations: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { samples: 100_000, sampler: Sampler::default(), h_fd: None, eps_norm: 1e-9, eps_div: None, max_violations: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub domain: String,
    pub field: String,
    pub claimed: f64,
    pub sampler: String,
    pub seed: u64,
    pub requested: usize,
    /// Points at which both inequalities were evaluated.
    pub samples: usize,
    /// Candidates dropped because they sat closer than the margin to the boundary.
    pub rejected_margin: usize,
    /// Candidates at which the field could not be evaluated.
    pub field_errors: usize,
    /// Samples that needed more than one halving of `h_fd`.
    pub refined_samples: usize,
    /// Samples whose difference quotients still disagreed after refinement.
    pub unresolved_samples: usize,
    pub min_step: f64,
    pub max_norm: f64,
    pub min_divergence: f64,
    pub max_divergence: f64,
    /// `c − min div`; positive means some sample fell short of the claim.
    pub violation_margin: f64,
    pub h_fd: f64,
    pub eps_norm: f64,
    pub eps_div: f64,
    pub interior_margin: f64,
    pub excluded_volume_fraction: f64,
    pub verdict: Verdict,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

enum Outcome {
    Evaluated { norm: f64, div: f64, step: f64, resolved: bool },
    NearBoundary,
    FieldError,
}

/// Checks `|V| ≤ 1 + ε_norm` and `div V ≥ c − ε_div` at `samples` interior
/// points kept at least `2 h_fd` away from the boundary. Each divergence
/// starts from step `h_fd` and is refined by halving until consecutive
/// values agree to `ε_div / 10`.
pub fn certify_lower_bound(field: &FieldSpec<'_>, opts: &CertifyOptions) -> Result<Certificate> {
    let n = opts.samples;
    if n < MIN_CERT_SAMPLES {
        return Err(Error::TooFewSamples { got: n, min: MIN_CERT_SAMPLES });
    }
    let dom = &field.domain;
    let h = opts.h_fd.unwrap_or_else(|| dom.default_step());
    let c = field.claimed;
    let eps_div = opts.eps_div.unwrap_or(1e-3 * c.abs());
    let eps_norm = opts.eps_norm;
    if !(h > 0.0 && eps_div >= 0.0 && eps_norm >= 0.0) {
        return Err(domain("step and tolerances must be non-negative (step positive)"));
    }
    let delta = 2.0 * h;
    if !(dom.excluded_fraction(delta) < 1.0) {
        return Err(Error::Undersampled { admissible: 0, requested: n });
    }
    let jac_max = match dom {
        Domain::Tube(t) => 1.0 + 1.05 * t.radius() * t.frame().max_curvature(),
        _ => 1.0,
    };

    let mut points = Vec::with_capacity(n);
    let mut next = 0u64;
    // tube thinning keeps at least half of the attempts
    while points.len() < n {
        let batch = (2 * (n - points.len())).max(64) as u64;
        let got: Vec<Option<Vec<f64>>> = (next..next + batch)
            .into_par_iter()
            .map(|k| dom.attempt(&opts.sampler, k, delta, jac_max))
            .collect::<Result<_>>()?;
        points.extend(got.into_iter().flatten().take(n - points.len()));
        next += batch;
    }

    let outcomes: Vec<Outcome> = points
        .par_iter()
        .map(|x| {
            let probe = match dom.probe(x) {
                Ok(p) => p,
                Err(_) => return Outcome::FieldError,
            };
            if !(probe.margin > delta * (1.0 - 1e-9)) {
                return Outcome::NearBoundary;
            }
            let v = field.eval_at(x, probe.anchor);
            let div = field.divergence_refined(x, probe.anchor, h, 0.1 * eps_div);
            match (v, div) {
                (Ok(v), Ok((div, step, resolved))) if v.iter().all(|c| c.is_finite()) && div.is_finite() => {
                    Outcome::Evaluated { norm: norm(&v), div, step, resolved }
                }
                _ => Outcome::FieldError,
            }
        })
        .collect();

    let mut cert = Certificate {
        domain: dom.name().to_string(),
        field: field.kind.name().to_string(),
        claimed: c,
        sampler: opts.sampler.name().to_string(),
        seed: opts.sampler.seed(),
        requested: n,
        samples: 0,
        rejected_margin: 0,
        field_errors: 0,
        refined_samples: 0,
        unresolved_samples: 0,
        min_step: h,
        max_norm: 0.0,
        min_divergence: f64::INFINITY,
        max_divergence: f64::NEG_INFINITY,
        violation_margin: f64::NAN,
        h_fd: h,
        eps_norm,
        eps_div,
        interior_margin: delta,
        excluded_volume_fraction: dom.excluded_fraction(delta),
        verdict: Verdict::Certified,
        violation_count: 0,
        violations: Vec::new(),
    };
    let mut clear = false;
    for (x, out) in points.iter().zip(&outcomes) {
        match *out {
            Outcome::NearBoundary => cert.rejected_margin += 1,
            Outcome::FieldError => cert.field_errors += 1,
            Outcome::Evaluated { norm, div, step, resolved } => {
                cert.samples += 1;
                cert.refined_samples += usize::from(step < 0.375 * h);
                cert.unresolved_samples += usize::from(!resolved);
                cert.min_step = cert.min_step.min(step);
                cert.max_norm = cert.max_norm.max(norm);
                cert.min_divergence = cert.min_divergence.min(div);
                cert.max_divergence = cert.max_divergence.max(div);
                let (excess, deficit) = (norm - 1.0, c - div);
                if excess > eps_norm || deficit > eps_div {
                    cert.violation_count += 1;
                    if cert.violations.len() < opts.max_violations {
                        cert.violations.push(Violation { point: x.clone(), norm, divergence: div });
                    }
                    clear |= excess > 10.0 * eps_norm || deficit > 10.0 * eps_div;
                }
            }
        }
    }
    if 2 * cert.samples < n {
        return Err(Error::Undersampled { admissible: cert.samples, requested: n });
    }
    cert.violation_margin = c - cert.min_divergence;
    cert.verdict = if cert.violation_count == 0 {
        Verdict::Certified
    } else if clear {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(cert)
}

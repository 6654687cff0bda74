//! Command implementations. Parameters are validated before any
//! computation; validation problems are usage failures, everything later is
//! a computation failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use cheeger_core::certify::{
    certify_lower_bound, numeric_divergence, CertifyOptions, Domain, FieldKind, FieldSpec, Sampler, TabulatedField,
    Verdict,
};
use cheeger_core::oracle::{
    dinkelbach_cheeger, rasterize, svg_2d, write_mask, OracleOptions, Stencil, VoxelDomain, MAX_RESOLUTION_3D,
    MIN_RESOLUTION,
};
use cheeger_core::shell::{shell_cheeger, shell_perimeter_volume, ShellSpec};
use cheeger_core::tube::{membership, montecarlo_volume, tube_cheeger, tube_geometry, TubeOptions};
use cheeger_core::{Curve64, Tube64};
use serde::Serialize;

use crate::args::{CertifyArgs, Geometry, OracleArgs, ReportArgs, ShellArgs, TubeArgs};
use crate::report::*;

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<cheeger_core::Error> for Failure {
    fn from(e: cheeger_core::Error) -> Self {
        Failure::Compute(e.into())
    }
}

pub type Outcome<T> = Result<T, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn bad_input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

/// Output of one command: the serialized report and whether a certificate
/// was violated.
pub struct Output {
    pub report: String,
    pub violated: bool,
}

pub struct Context_ {
    pub out_dir: Option<PathBuf>,
    pub timings: bool,
}

impl Context_ {
    /// Relative artifact paths are placed in the output directory.
    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn write(&self, p: &Path, contents: &str) -> anyhow::Result<String> {
        let path = self.resolve(p);
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path.display().to_string())
    }

    fn timing(&self, start: Instant) -> Option<Timings> {
        self.timings.then(|| Timings { seconds: start.elapsed().as_secs_f64() })
    }
}

fn to_toml<T: Serialize>(report: &T) -> Outcome<String> {
    Ok(toml::to_string(report).context("serializing report")?)
}

fn positive(name: &str, v: Option<f64>) -> Outcome<Option<f64>> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(usage(format!("--{name} must be a positive number, got {x}"))),
        other => Ok(other),
    }
}

fn require(name: &str, v: Option<f64>, why: &str) -> Outcome<f64> {
    positive(name, v)?.ok_or_else(|| usage(format!("--{name} is required {why}")))
}

/// Curve, dimension and geometry echo for a tube.
fn tube_spec(g: &Geometry) -> Outcome<(Tube64, GeometryEcho)> {
    let a = require("a", g.a, "for a tube")?;
    positive("rho", g.rho)?;
    positive("semi-x", g.semi_x)?;
    positive("semi-y", g.semi_y)?;
    positive("scale", g.scale)?;
    if g.r.is_some() || g.outer.is_some() {
        return Err(usage("--r/--R describe a shell, not a tube"));
    }
    let (curve, preset, params) = match (&g.curve_file, &g.preset) {
        (Some(_), Some(_)) => return Err(usage("give either --preset or --curve-file, not both")),
        (None, None) => return Err(usage("a tube needs --preset circle|ellipse|trefoil or --curve-file")),
        (Some(path), None) => {
            if g.rho.is_some() || g.semi_x.is_some() || g.semi_y.is_some() || g.scale.is_some() {
                return Err(usage("preset parameters do not apply to --curve-file"));
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let curve = Curve64::parse_table(&text).map_err(bad_input)?;
            if let Some(d) = g.d {
                if d != curve.dim() {
                    return Err(usage(format!("--d {d} contradicts the {}-dimensional curve file", curve.dim())));
                }
            }
            (curve, None, Vec::new())
        }
        (None, Some(name)) => {
            let d = g.d.unwrap_or(3);
            let stray = |flags: &[(&str, bool)]| -> Outcome<()> {
                match flags.iter().find(|f| f.1) {
                    Some((f, _)) => Err(usage(format!("--{f} does not apply to preset '{name}'"))),
                    None => Ok(()),
                }
            };
            let params = match name.as_str() {
                "circle" => {
                    stray(&[("semi-x", g.semi_x.is_some()), ("semi-y", g.semi_y.is_some()), ("scale", g.scale.is_some())])?;
                    vec![g.rho.unwrap_or(1.0)]
                }
                "ellipse" => {
                    stray(&[("rho", g.rho.is_some()), ("scale", g.scale.is_some())])?;
                    vec![require("semi-x", g.semi_x, "for an ellipse")?, require("semi-y", g.semi_y, "for an ellipse")?]
                }
                "trefoil" => {
                    stray(&[("rho", g.rho.is_some()), ("semi-x", g.semi_x.is_some()), ("semi-y", g.semi_y.is_some())])?;
                    vec![g.scale.unwrap_or(1.0)]
                }
                other => return Err(usage(format!("unknown preset '{other}' (circle, ellipse or trefoil)"))),
            };
            (Curve64::from_name(name, &params, d).map_err(bad_input)?, Some(name.clone()), params)
        }
    };
    let steps = g.steps.unwrap_or(4096);
    if steps < 16 {
        return Err(usage("--steps must be at least 16"));
    }
    let mut echo = GeometryEcho::new("tube", curve.dim());
    echo.preset = preset;
    echo.params = params;
    echo.curve_file = g.curve_file.as_ref().map(|p| p.display().to_string());
    echo.a = Some(a);
    let opts = TubeOptions { frame_steps: steps, ..TubeOptions::default() };
    let spec = Tube64::with_options(curve, a, opts).map_err(bad_input)?;
    Ok((spec, echo))
}

fn shell_spec(g: &Geometry, default_d: usize) -> Outcome<(ShellSpec<f64>, GeometryEcho)> {
    let r = require("r", g.r, "for a shell")?;
    let outer = require("R", g.outer, "for a shell")?;
    if g.a.is_some() || g.preset.is_some() || g.curve_file.is_some() {
        return Err(usage("tube flags (--a, --preset, --curve-file) do not apply to a shell"));
    }
    let d = g.d.unwrap_or(default_d);
    let spec = ShellSpec::new(r, outer, d).map_err(bad_input)?;
    let mut echo = GeometryEcho::new("shell", d);
    echo.r = Some(r);
    echo.outer = Some(outer);
    Ok((spec, echo))
}

pub fn tube(args: &TubeArgs, ctx: &Context_) -> Outcome<Output> {
    let start = Instant::now();
    let overlap_samples = args.opts.overlap_samples.unwrap_or(512);
    let mc = args.opts.mc_samples.unwrap_or(0);
    let seed = args.opts.seed.unwrap_or(0);
    let (spec, echo) = tube_spec(&args.geometry)?;
    let spec = if overlap_samples == 512 {
        spec
    } else {
        let opts = TubeOptions { frame_steps: args.geometry.steps.unwrap_or(4096), overlap_samples, ..TubeOptions::default() };
        Tube64::with_options(spec.curve().clone(), spec.radius(), opts).map_err(bad_input)?
    };
    let geom = tube_geometry(&spec)?;
    let o = spec.overlap();
    let montecarlo = if mc > 0 {
        let est = montecarlo_volume(&spec, mc, seed)?;
        Some(VolumeEstimate {
            samples: est.samples,
            seed,
            estimate: est.estimate,
            std_error: est.std_error,
            z_score: (est.estimate - geom.volume) / est.std_error,
        })
    } else {
        None
    };
    if let Some(p) = &args.opts.frame_csv {
        ctx.write(p, &spec.frame().to_csv())?;
    }
    let report = TubeReport {
        command: "tube".into(),
        geometry: echo,
        cheeger: geom.cheeger,
        curve_length: geom.curve_length,
        cross_section: geom.cross_section,
        volume: geom.volume,
        boundary_area: geom.boundary_area,
        overlap: OverlapSection {
            verdict: o.verdict.as_str().into(),
            sufficient_value: o.sufficient_value,
            max_curvature: o.max_curvature,
            min_self_distance: o.min_self_distance,
            witness: o.witness.clone(),
            samples: o.samples,
        },
        frame: FrameSection {
            steps: spec.frame().samples().len() - 1,
            max_gram_deviation: spec.frame().max_gram_deviation(),
            max_curvature_identity_error: spec.frame().max_curvature_identity_error(),
        },
        montecarlo,
        timings: ctx.timing(start),
    };
    Ok(Output { report: to_toml(&report)?, violated: false })
}

/// Deterministic points spread over the shell: radii on a midpoint grid,
/// directions from a Halton sequence.
fn shell_points(spec: &ShellSpec<f64>, m: usize) -> Vec<Vec<f64>> {
    let d = spec.dim();
    let halton = Sampler::Halton { seed: 0 };
    let mut u = vec![0.0; d];
    (0..m)
        .map(|k| {
            let t = spec.inner() + (spec.outer() - spec.inner()) * (k as f64 + 0.5) / m as f64;
            halton.fill(k as u64, &mut u);
            let v: Vec<f64> = u.iter().map(|x| 2.0 * x - 1.0).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| t * x / n).collect()
        })
        .collect()
}

pub fn shell(args: &ShellArgs, ctx: &Context_) -> Outcome<Output> {
    let start = Instant::now();
    let grid = args.opts.grid.unwrap_or(10_000);
    let points = args.opts.fd_points.unwrap_or(64);
    if grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    if points == 0 || points > 10_000 {
        return Err(usage("--fd-points must be between 1 and 10000"));
    }
    let (spec, echo) = shell_spec(&args.geometry, 3)?;
    let check = spec.profile().check(grid);
    let (perimeter, volume) = shell_perimeter_volume(&spec)?;
    let field = FieldSpec::shell(spec)?;
    let analytic = spec.dim() as f64 * spec.constant();
    let step = 1e-4 * (spec.outer() - spec.inner());
    let mut max_err: f64 = 0.0;
    for x in shell_points(&spec, points) {
        let div = numeric_divergence(&field, &x, step)?;
        max_err = max_err.max((div - analytic).abs());
    }
    let report = ShellReport {
        command: "shell".into(),
        geometry: echo,
        cheeger: shell_cheeger(&spec),
        constant: spec.constant(),
        perimeter,
        volume,
        profile: ProfileSection {
            grid: check.grid,
            outer_residual: check.outer_residual,
            inner_residual: check.inner_residual,
            max_t_abs_f: check.max_t_abs_f,
            delta: check.delta,
            min_slope: check.min_slope,
            passed: check.passed(1e-12),
        },
        divergence: DivergenceSection { analytic, points, step, max_fd_error: max_err },
        timings: ctx.timing(start),
    };
    Ok(Output { report: to_toml(&report)?, violated: false })
}

pub fn certify(args: &CertifyArgs, ctx: &Context_) -> Outcome<Output> {
    let start = Instant::now();
    let o = &args.opts;
    let g = &args.geometry;
    let domain = match (o.domain.as_deref(), g.a.is_some(), g.outer.is_some()) {
        (Some(d), _, _) => d.to_string(),
        (None, true, false) => "tube".into(),
        (None, false, true) => "shell".into(),
        _ => return Err(usage("cannot tell the domain; pass --domain tube|shell")),
    };
    let sampler_seed = o.seed.unwrap_or(0);
    let sampler = match o.sampler.as_deref().unwrap_or("halton") {
        "halton" => Sampler::Halton { seed: sampler_seed },
        "uniform" => Sampler::Uniform { seed: sampler_seed },
        other => return Err(usage(format!("unknown sampler '{other}' (halton or uniform)"))),
    };
    let opts = CertifyOptions {
        samples: o.samples.unwrap_or(100_000),
        sampler,
        h_fd: positive("h-fd", o.h_fd)?,
        eps_norm: o.eps_norm.unwrap_or(1e-9),
        eps_div: o.eps_div,
        ..CertifyOptions::default()
    };
    if !(opts.eps_norm >= 0.0) || opts.eps_div.is_some_and(|e| !(e >= 0.0)) {
        return Err(usage("tolerances must be non-negative"));
    }
    if let Some(c) = o.claim {
        if !c.is_finite() {
            return Err(usage("--claim must be finite"));
        }
    }
    let tabulated = match &o.field_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(TabulatedField::parse(&text).map_err(bad_input)?)
        }
        None => None,
    };
    let tube_holder;
    let (field, echo, closed) = match domain.as_str() {
        "tube" => {
            let (spec, echo) = tube_spec(g)?;
            tube_holder = spec;
            let closed = tube_cheeger(&tube_holder)?;
            let field = match tabulated {
                Some(t) => FieldSpec::new(Domain::Tube(&tube_holder), FieldKind::Tabulated(t), closed),
                None => FieldSpec::tube(&tube_holder),
            }
            .map_err(bad_input)?;
            (field, echo, closed)
        }
        "shell" => {
            let (spec, echo) = shell_spec(g, 3)?;
            let closed = shell_cheeger(&spec);
            let field = match tabulated {
                Some(t) => FieldSpec::new(Domain::Shell(spec), FieldKind::Tabulated(t), closed),
                None => FieldSpec::shell(spec),
            }
            .map_err(bad_input)?;
            (field, echo, closed)
        }
        other => return Err(usage(format!("unknown domain '{other}' (tube or shell)"))),
    };
    let field = field.with_claim(o.claim.unwrap_or(closed));
    let cert = certify_lower_bound(&field, &opts).map_err(|e| match e {
        cheeger_core::Error::TooFewSamples { .. } => bad_input(e),
        e => e.into(),
    })?;
    let violated = cert.verdict == Verdict::Violated;
    let report = CertifyReport {
        command: "certify".into(),
        geometry: echo,
        closed_form: closed,
        field_file: o.field_file.as_ref().map(|p| p.display().to_string()),
        certificate: cert,
        timings: ctx.timing(start),
    };
    Ok(Output { report: to_toml(&report)?, violated })
}

/// Cheeger constant of the unit square, `(4 − π)/(2 − √π)`.
pub fn unit_square_cheeger() -> f64 {
    (4.0 - std::f64::consts::PI) / (2.0 - std::f64::consts::PI.sqrt())
}

pub fn oracle(args: &OracleArgs, ctx: &Context_) -> Outcome<Output> {
    let start = Instant::now();
    let o = &args.opts;
    let g = &args.geometry;
    let n = o.n.unwrap_or(256);
    let tol = o.tol.unwrap_or(1e-4);
    if n < MIN_RESOLUTION {
        return Err(usage(format!("--n must be at least {MIN_RESOLUTION}")));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(usage("--tol must be a finite non-negative number"));
    }
    let max_3d = o.max_n_3d.unwrap_or(MAX_RESOLUTION_3D);

    let (domain, echo, closed) = if let Some(path) = &o.mask_in {
        if o.shape.is_some() {
            return Err(usage("give either --shape or --mask-in, not both"));
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let domain = VoxelDomain::from_rle(&text).map_err(bad_input)?;
        let mut echo = GeometryEcho::new("mask", domain.dim());
        echo.mask_file = Some(path.display().to_string());
        (domain, echo, None)
    } else {
        let shape = o.shape.as_deref().ok_or_else(|| usage("--shape (ball, shell, square, tube) or --mask-in is required"))?;
        let dim = match shape {
            "tube" => g.d.unwrap_or(3),
            _ => g.d.unwrap_or(2),
        };
        if !(2..=3).contains(&dim) {
            return Err(usage(format!("the voxel oracle supports d = 2 or 3, got {dim}")));
        }
        if dim == 3 && n > max_3d {
            return Err(usage(format!("--n {n} exceeds the 3D cap {max_3d} (raise it with --max-n-3d)")));
        }
        match shape {
            "ball" | "disk" => {
                let r = positive("r", g.r)?.unwrap_or(1.0);
                if g.outer.is_some() || g.a.is_some() {
                    return Err(usage("a ball takes only --r"));
                }
                let b = 1.1 * r;
                let domain =
                    rasterize(|x| x.iter().map(|v| v * v).sum::<f64>() < r * r, &vec![-b; dim], &vec![b; dim], n)
                        .map_err(bad_input)?;
                let mut echo = GeometryEcho::new("ball", dim);
                echo.r = Some(r);
                (domain, echo, Some(dim as f64 / r))
            }
            "shell" | "annulus" => {
                let (spec, echo) = shell_spec(g, dim)?;
                let b = 1.05 * spec.outer();
                let domain = rasterize(|x| spec.contains(x), &vec![-b; dim], &vec![b; dim], n).map_err(bad_input)?;
                (domain, echo, Some(shell_cheeger(&spec)))
            }
            "square" => {
                if dim != 2 {
                    return Err(usage("the square is two-dimensional"));
                }
                let side = positive("side", g.side)?.unwrap_or(1.0);
                let domain = rasterize(|_| true, &[0.0, 0.0], &[side, side], n).map_err(bad_input)?;
                let mut echo = GeometryEcho::new("square", 2);
                echo.side = Some(side);
                (domain, echo, Some(unit_square_cheeger() / side))
            }
            "tube" => {
                let (spec, echo) = tube_spec(g)?;
                if spec.dim() != dim {
                    return Err(usage("--d does not match the curve"));
                }
                let closed = tube_cheeger(&spec)?;
                let (mut lo, mut hi) = spec.bounding_box();
                let pad = 0.05 * spec.radius();
                lo.iter_mut().for_each(|v| *v -= pad);
                hi.iter_mut().for_each(|v| *v += pad);
                let domain = rasterize(|x| membership(&spec, x), &lo, &hi, n).map_err(bad_input)?;
                (domain, echo, Some(closed))
            }
            other => return Err(usage(format!("unknown shape '{other}' (ball, shell, square or tube)"))),
        }
    };

    let stencil = match o.stencil {
        Some(k) => Stencil::from_neighbors(domain.dim(), k).map_err(bad_input)?,
        None => Stencil::default_for(domain.dim()).map_err(bad_input)?,
    };
    if o.svg.is_some() && domain.dim() != 2 {
        return Err(usage("--svg needs a 2D domain"));
    }
    let result =
        dinkelbach_cheeger(&domain, &OracleOptions { stencil: Some(stencil), tol, ..OracleOptions::default() })?;

    let mut artifacts = Artifacts { mask: None, domain: None, svg: None };
    if let Some(p) = &o.mask_out {
        let text = write_mask(domain.shape(), domain.spacing(), domain.origin(), &result.mask);
        artifacts.mask = Some(ctx.write(p, &text)?);
    }
    if let Some(p) = &o.domain_out {
        artifacts.domain = Some(ctx.write(p, &domain.to_rle())?);
    }
    if let Some(p) = &o.svg {
        artifacts.svg = Some(ctx.write(p, &svg_2d(&domain, &result.mask)?)?);
    }
    let report = OracleReport {
        command: "oracle".into(),
        geometry: echo,
        n,
        stencil: stencil.neighbors(),
        tol,
        grid: domain.shape().to_vec(),
        spacing: domain.spacing(),
        inside_cells: result.inside,
        selected_cells: result.selected,
        coverage: result.coverage(),
        perimeter: result.perimeter,
        volume: result.volume,
        h: result.ratio,
        closed_form: closed,
        relative_deviation: closed.map(|c| (result.ratio - c).abs() / c),
        iterations: result.trace.len(),
        trace: result.trace.clone(),
        artifacts,
        timings: ctx.timing(start),
    };
    Ok(Output { report: to_toml(&report)?, violated: false })
}

enum Input {
    Tube(TubeReport),
    Shell(ShellReport),
    Certify(CertifyReport),
    Oracle(OracleReport),
}

fn read_report(path: &Path) -> Outcome<Input> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let table: toml::Table =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(bad_input)?;
    let command = table.get("command").and_then(|v| v.as_str()).unwrap_or_default().to_string();
    let value = toml::Value::Table(table);
    let ctx = || format!("reading {} report {}", command, path.display());
    let input = match command.as_str() {
        "tube" => Input::Tube(value.try_into().with_context(ctx).map_err(bad_input)?),
        "shell" => Input::Shell(value.try_into().with_context(ctx).map_err(bad_input)?),
        "certify" => Input::Certify(value.try_into().with_context(ctx).map_err(bad_input)?),
        "oracle" => Input::Oracle(value.try_into().with_context(ctx).map_err(bad_input)?),
        "" => return Err(usage(format!("{} has no command key; not a cheeger report", path.display()))),
        other => return Err(usage(format!("{}: cannot join a '{other}' report", path.display()))),
    };
    Ok(input)
}

pub fn report(args: &ReportArgs, _ctx: &Context_) -> Outcome<Output> {
    let mut geometry: Option<(GeometryEcho, String)> = None;
    let mut out = ComparisonReport {
        command: "report".into(),
        geometry: GeometryEcho::new("", 0),
        sources: Vec::new(),
        closed_form: None,
        certificate: None,
        oracle: None,
        timings: Vec::new(),
    };
    let mut violated = false;
    for path in &args.inputs {
        let input = read_report(path)?;
        let (echo, command, closed, timings) = match &input {
            Input::Tube(r) => (&r.geometry, "tube", Some(r.cheeger), &r.timings),
            Input::Shell(r) => (&r.geometry, "shell", Some(r.cheeger), &r.timings),
            Input::Certify(r) => (&r.geometry, "certify", Some(r.closed_form), &r.timings),
            Input::Oracle(r) => (&r.geometry, "oracle", r.closed_form, &r.timings),
        };
        match &geometry {
            None => geometry = Some((echo.clone(), path.display().to_string())),
            Some((g, first)) if g != echo => {
                return Err(usage(format!(
                    "geometry of {} ({echo:?}) differs from {first} ({g:?}); refusing to compare",
                    path.display()
                )))
            }
            Some(_) => {}
        }
        if out.closed_form.is_none() {
            out.closed_form = closed;
        }
        if let Some(t) = timings {
            out.timings.push(SourceTiming { command: command.into(), seconds: t.seconds });
        }
        match input {
            Input::Certify(r) => {
                if out.certificate.is_some() {
                    return Err(usage("more than one certify report"));
                }
                violated |= r.certificate.verdict == Verdict::Violated;
                out.certificate = Some((&r.certificate).into());
            }
            Input::Oracle(r) => {
                if out.oracle.is_some() {
                    return Err(usage("more than one oracle report"));
                }
                out.oracle = Some(OracleSummary {
                    h: r.h,
                    relative_deviation: None,
                    n: r.n,
                    stencil: r.stencil,
                    tol: r.tol,
                    coverage: r.coverage,
                });
            }
            _ => {}
        }
        out.sources.push(path.display().to_string());
    }
    if let (Some(o), Some(c)) = (out.oracle.as_mut(), out.closed_form) {
        o.relative_deviation = Some((o.h - c).abs() / c);
    }
    out.geometry = geometry.map(|g| g.0).ok_or_else(|| usage("no reports given"))?;
    Ok(Output { report: to_toml(&out)?, violated })
}

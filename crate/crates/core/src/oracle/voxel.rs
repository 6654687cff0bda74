//! Voxelized domains, mask files and SVG export.
//!
//! Mask file: text header lines `cheeger-mask 1`, `dim`, `shape`, `spacing`,
//! `origin`, `runs <count>`, then the run lengths. Runs alternate between
//! outside and inside cells, starting with an outside run that may be zero,
//! over the cells in row-major order with the last axis fastest.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};

pub const MIN_RESOLUTION: usize = 16;
/// Default cap on cells per axis in 3D.
pub const MAX_RESOLUTION_3D: usize = 160;

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelDomain {
    shape: Vec<usize>,
    spacing: f64,
    /// Lower corner of cell 0.
    origin: Vec<f64>,
    mask: Vec<bool>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

impl VoxelDomain {
    /// Keeps the largest face-connected component of `mask`.
    pub fn new(shape: Vec<usize>, spacing: f64, origin: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let d = shape.len();
        if !(2..=3).contains(&d) {
            return Err(domain(format!("voxel domains are 2D or 3D, got d = {d}")));
        }
        if origin.len() != d || shape.iter().any(|&n| n == 0) {
            return Err(domain("shape and origin must have one positive entry per axis"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) || origin.iter().any(|o| !o.is_finite()) {
            return Err(domain("spacing must be positive and origin finite"));
        }
        if mask.len() != shape.iter().product::<usize>() {
            return Err(domain(format!("mask has {} cells, shape needs {}", mask.len(), shape.iter().product::<usize>())));
        }
        let mut v = Self { shape, spacing, origin, mask };
        v.keep_largest_component()?;
        Ok(v)
    }

    fn keep_largest_component(&mut self) -> Result<()> {
        let n = self.mask.len();
        let st = strides(&self.shape);
        let mut label = vec![u32::MAX; n];
        let mut sizes: Vec<usize> = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if !self.mask[start] || label[start] != u32::MAX {
                continue;
            }
            let id = sizes.len() as u32;
            label[start] = id;
            stack.push(start);
            let mut size = 0;
            while let Some(c) = stack.pop() {
                size += 1;
                for k in 0..self.shape.len() {
                    let i = (c / st[k]) % self.shape[k];
                    let mut visit = |q: usize| {
                        if self.mask[q] && label[q] == u32::MAX {
                            label[q] = id;
                            stack.push(q);
                        }
                    };
                    if i > 0 {
                        visit(c - st[k]);
                    }
                    if i + 1 < self.shape[k] {
                        visit(c + st[k]);
                    }
                }
            }
            sizes.push(size);
        }
        let Some((best, _)) = sizes.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))) else {
            return Err(Error::EmptyDomain);
        };
        if sizes.len() > 1 {
            let dropped: usize = sizes.iter().sum::<usize>() - sizes[best];
            log::warn!("voxel mask has {} components; dropping {dropped} cells outside the largest", sizes.len());
            for (m, &l) in self.mask.iter_mut().zip(&label) {
                *m = l == best as u32;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn cells(&self) -> usize {
        self.mask.len()
    }

    pub fn inside_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn volume(&self) -> f64 {
        self.inside_count() as f64 * self.cell_volume()
    }

    pub fn index(&self, ijk: &[usize]) -> usize {
        ijk.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn center(&self, cell: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        let mut rest = cell;
        for k in (0..self.dim()).rev() {
            x[k] = self.origin[k] + self.spacing * ((rest % self.shape[k]) as f64 + 0.5);
            rest /= self.shape[k];
        }
        x
    }

    /// Cell containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut cell = 0;
        for k in 0..self.dim() {
            let g = ((x[k] - self.origin[k]) / self.spacing).floor();
            if !(g >= 0.0 && g < self.shape[k] as f64) {
                return None;
            }
            cell = cell * self.shape[k] + g as usize;
        }
        Some(cell)
    }

    pub fn to_rle(&self) -> String {
        write_mask(&self.shape, self.spacing, &self.origin, &self.mask)
    }

    pub fn from_rle(text: &str) -> Result<Self> {
        let (shape, spacing, origin, mask) = read_mask(text)?;
        Self::new(shape, spacing, origin, mask)
    }
}

/// Samples `inside` at the cell centres of a grid covering `[lo, hi]` with
/// `n` cells along the longest side and the same spacing on every axis.
pub fn rasterize<F>(inside: F, lo: &[f64], hi: &[f64], n: usize) -> Result<VoxelDomain>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    let d = lo.len();
    if hi.len() != d {
        return Err(domain("bounding box corners differ in dimension"));
    }
    if n < MIN_RESOLUTION {
        return Err(domain(format!("resolution {n} is below the minimum {MIN_RESOLUTION}")));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
        return Err(domain("bounding box must have finite hi > lo on every axis"));
    }
    let longest = lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let spacing = longest / n as f64;
    let shape: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| (((b - a) / spacing) - 1e-9).ceil().max(1.0) as usize).collect();
    // centre the grid in the box
    let origin: Vec<f64> =
        (0..d).map(|k| 0.5 * (lo[k] + hi[k]) - 0.5 * shape[k] as f64 * spacing).collect();
    let total: usize = shape.iter().product();
    let probe = VoxelDomain { shape: shape.clone(), spacing, origin: origin.clone(), mask: Vec::new() };
    let mask: Vec<bool> = (0..total).into_par_iter().map(|c| inside(&probe.center(c))).collect();
    VoxelDomain::new(shape, spacing, origin, mask)
}

pub fn write_mask(shape: &[usize], spacing: f64, origin: &[f64], mask: &[bool]) -> String {
    let mut runs = Vec::new();
    let mut state = false;
    let mut len = 0usize;
    for &m in mask {
        if m != state {
            runs.push(len);
            state = m;
            len = 0;
        }
        len += 1;
    }
    runs.push(len);
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    writeln!(out, "cheeger-mask 1").unwrap();
    writeln!(out, "dim {}", shape.len()).unwrap();
    writeln!(out, "shape {}", shape.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")).unwrap();
    writeln!(out, "spacing {spacing:?}").unwrap();
    writeln!(out, "origin {}", join(origin)).unwrap();
    writeln!(out, "runs {}", runs.len()).unwrap();
    for chunk in runs.chunks(16) {
        writeln!(out, "{}", chunk.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")).unwrap();
    }
    out
}

type RawMask = (Vec<usize>, f64, Vec<f64>, Vec<bool>);

pub fn read_mask(text: &str) -> Result<RawMask> {
    let err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let mut field = |name: &str| -> Result<(usize, Vec<String>)> {
        let (i, l) = lines.next().ok_or_else(|| err(0, format!("missing {name} line")))?;
        let mut w = l.split_whitespace();
        if w.next() != Some(name) {
            return Err(err(i + 1, format!("expected {name:?}")));
        }
        Ok((i + 1, w.map(str::to_string).collect()))
    };
    fn nums<T: std::str::FromStr>(line: usize, w: &[String]) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        w.iter()
            .map(|t| t.parse::<T>().map_err(|e| Error::Parse { line, msg: format!("{t:?}: {e}") }))
            .collect()
    }
    let (l, v) = field("cheeger-mask")?;
    if v != ["1"] {
        return Err(err(l, "unsupported mask file version".into()));
    }
    let (l, v) = field("dim")?;
    let d: usize = nums::<usize>(l, &v)?.first().copied().ok_or_else(|| err(l, "empty dim".into()))?;
    let (l, v) = field("shape")?;
    let shape: Vec<usize> = nums(l, &v)?;
    if shape.len() != d {
        return Err(err(l, format!("shape has {} entries for d = {d}", shape.len())));
    }
    let (l, v) = field("spacing")?;
    let spacing = nums::<f64>(l, &v)?.first().copied().ok_or_else(|| err(l, "empty spacing".into()))?;
    let (l, v) = field("origin")?;
    let origin: Vec<f64> = nums(l, &v)?;
    let (l, v) = field("runs")?;
    let count = nums::<usize>(l, &v)?.first().copied().ok_or_else(|| err(l, "empty run count".into()))?;
    let mut runs = Vec::with_capacity(count);
    for (i, line) in lines {
        runs.extend(nums::<usize>(i + 1, &line.split_whitespace().map(str::to_string).collect::<Vec<_>>())?);
    }
    if runs.len() != count {
        return Err(err(0, format!("expected {count} runs, found {}", runs.len())));
    }
    let total: usize = shape.iter().product();
    if runs.iter().sum::<usize>() != total {
        return Err(err(0, format!("runs cover {} cells, shape has {total}", runs.iter().sum::<usize>())));
    }
    let mut mask = Vec::with_capacity(total);
    for (k, &r) in runs.iter().enumerate() {
        mask.extend(std::iter::repeat(k % 2 == 1).take(r));
    }
    Ok((shape, spacing, origin, mask))
}

/// SVG of a 2D domain (light) with `selected` cells drawn on top.
pub fn svg_2d(domain: &VoxelDomain, selected: &[bool]) -> Result<String> {
    if domain.dim() != 2 {
        return Err(self::domain("SVG export needs a 2D domain"));
    }
    if selected.len() != domain.cells() {
        return Err(self::domain("selection does not match the domain grid"));
    }
    let (nx, ny) = (domain.shape[0], domain.shape[1]);
    let px = (800 / nx.max(ny)).max(1);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#,
        w = nx * px,
        h = ny * px
    )
    .unwrap();
    writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    for (mask, colour) in [(domain.mask(), "#d9d9d9"), (selected, "#2b6cb0")] {
        writeln!(out, r#"<g fill="{colour}">"#).unwrap();
        for i in 0..nx {
            let col = &mask[i * ny..(i + 1) * ny];
            let mut j = 0;
            while j < ny {
                if !col[j] {
                    j += 1;
                    continue;
                }
                let start = j;
                while j < ny && col[j] {
                    j += 1;
                }
                // the y axis points up
                writeln!(out, r#"<rect x="{}" y="{}" width="{px}" height="{}"/>"#, i * px, (ny - j) * px, (j - start) * px)
                    .unwrap();
            }
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(n: usize) -> VoxelDomain {
        rasterize(|x| x[0] * x[0] + x[1] * x[1] < 1.0, &[-1.1, -1.1], &[1.1, 1.1], n).unwrap()
    }

    #[test]
    fn disk_cell_count_matches_area() {
        let v = disk(512);
        assert_eq!(v.shape(), [512, 512]);
        let expected = std::f64::consts::PI / (4.0 * 1.1 * 1.1) * 512.0 * 512.0;
        assert!((v.inside_count() as f64 / expected - 1.0).abs() < 0.01);
        assert!((v.volume() - std::f64::consts::PI).abs() < 0.01 * std::f64::consts::PI);
    }

    #[test]
    fn annulus_has_a_hole() {
        let v = rasterize(
            |x| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                (1.0..4.0).contains(&r2)
            },
            &[-2.1, -2.1],
            &[2.1, 2.1],
            512,
        )
        .unwrap();
        let c = v.locate(&[0.0, 0.0]).unwrap();
        assert!(!v.mask()[c]);
        assert!(v.mask()[v.locate(&[1.5, 0.0]).unwrap()]);
    }

    #[test]
    fn isotropic_spacing_and_centering() {
        let v = rasterize(|_| true, &[0.0, 0.0, -0.5], &[4.0, 2.0, 0.5], 32).unwrap();
        assert_eq!(v.shape(), [32, 16, 8]);
        assert_eq!(v.spacing(), 0.125);
        assert_eq!(v.center(0), vec![0.0625, 0.0625, -0.4375]);
        assert_eq!(v.locate(&[3.99, 1.99, 0.49]), Some(v.cells() - 1));
    }

    #[test]
    fn largest_component_is_kept() {
        // two disjoint disks of different sizes
        let v = rasterize(
            |x| (x[0] + 1.0).powi(2) + x[1] * x[1] < 0.64 || (x[0] - 1.0).powi(2) + x[1] * x[1] < 0.25,
            &[-2.0, -1.0],
            &[2.0, 1.0],
            64,
        )
        .unwrap();
        assert!(v.mask()[v.locate(&[-1.0, 0.0]).unwrap()]);
        assert!(!v.mask()[v.locate(&[1.0, 0.0]).unwrap()]);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(rasterize(|_| false, &[0.0, 0.0], &[1.0, 1.0], 32), Err(Error::EmptyDomain)));
        assert!(rasterize(|_| true, &[0.0, 0.0], &[1.0, 1.0], 15).is_err());
        assert!(rasterize(|_| true, &[0.0, 0.0], &[0.0, 1.0], 32).is_err());
        assert!(rasterize(|_| true, &[0.0; 4], &[1.0; 4], 16).is_err());
    }

    #[test]
    fn mask_file_round_trip() {
        let v = disk(40);
        let text = v.to_rle();
        assert!(text.starts_with("cheeger-mask 1\ndim 2\nshape 40 40\n"));
        assert_eq!(VoxelDomain::from_rle(&text).unwrap(), v);
        // a mask whose first cell is inside starts with an empty outside run
        let full = write_mask(&[2, 2], 1.0, &[0.0, 0.0], &[true, true, false, true]);
        assert!(full.ends_with("runs 4\n0 2 1 1\n"));
        assert_eq!(read_mask(&full).unwrap().3, vec![true, true, false, true]);
        assert!(matches!(read_mask(&full.replace("0 2 1 1", "0 2 1 2")), Err(Error::Parse { .. })));
        assert!(read_mask("cheeger-mask 2\n").is_err());
    }

    #[test]
    fn svg_draws_runs() {
        let v = disk(20);
        let svg = svg_2d(&v, v.mask()).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<g ").count(), 2);
        assert!(svg_2d(&v, &[true]).is_err());
    }
}

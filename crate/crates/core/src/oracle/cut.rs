//! Discrete perimeter, parametric min-cut and the Dinkelbach iteration for
//! `min Per(S)/Vol(S)` over subsets of a voxel domain.

use serde::{Deserialize, Serialize};

use super::maxflow::FlowGraph;
use super::stencil::Stencil;
use super::voxel::VoxelDomain;
use crate::error::{domain, Error, Result};

/// Capacity quantum relative to `Δ^{d−1}`.
const QUANTUM: f64 = 1e-9;

/// One node per inside cell. Cut edges to outside cells carry full weight,
/// so the perimeter includes the parts of `∂S` on `∂Ω`.
#[derive(Debug, Clone)]
pub struct CutGraph {
    stencil: Stencil,
    spacing: f64,
    cells: usize,
    /// Grid index of every node.
    cell_of: Vec<usize>,
    edges: Vec<(u32, u32, f64)>,
    /// Weight of the edges from each node to outside cells.
    boundary: Vec<f64>,
}

impl CutGraph {
    pub fn build(domain: &VoxelDomain, stencil: Stencil) -> Result<Self> {
        if stencil.dim() != domain.dim() {
            return Err(Error::Config(format!(
                "{}-neighbour stencil is {}D, domain is {}D",
                stencil.neighbors(),
                stencil.dim(),
                domain.dim()
            )));
        }
        let d = domain.dim();
        let shape = domain.shape();
        let scale = domain.spacing().powi(d as i32 - 1);
        let dirs = stencil.directions();
        let weights: Vec<f64> = stencil.coefficients().iter().map(|c| c * scale).collect();
        let mask = domain.mask();
        let cell_of: Vec<usize> = (0..mask.len()).filter(|&c| mask[c]).collect();
        let mut node_of = vec![u32::MAX; mask.len()];
        for (p, &c) in cell_of.iter().enumerate() {
            node_of[c] = p as u32;
        }
        let mut edges = Vec::with_capacity(cell_of.len() * dirs.len());
        let mut boundary = vec![0.0; cell_of.len()];
        let mut ijk = vec![0i64; d];
        let neighbour = |ijk: &[i64], v: &[i64], sign: i64| -> Option<usize> {
            let mut c = 0usize;
            for k in 0..d {
                let q = ijk[k] + sign * v[k];
                if q < 0 || q >= shape[k] as i64 {
                    return None;
                }
                c = c * shape[k] + q as usize;
            }
            mask[c].then_some(c)
        };
        for (p, &c) in cell_of.iter().enumerate() {
            let mut rest = c;
            for k in (0..d).rev() {
                ijk[k] = (rest % shape[k]) as i64;
                rest /= shape[k];
            }
            for (v, &w) in dirs.iter().zip(&weights) {
                match neighbour(&ijk, v, 1) {
                    Some(q) => edges.push((p as u32, node_of[q], w)),
                    None => boundary[p] += w,
                }
                if neighbour(&ijk, v, -1).is_none() {
                    boundary[p] += w;
                }
            }
        }
        Ok(Self { stencil, spacing: domain.spacing(), cells: mask.len(), cell_of, edges, boundary })
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn nodes(&self) -> usize {
        self.cell_of.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.stencil.dim() as i32)
    }

    fn check(&self, sel: &[bool]) {
        assert_eq!(sel.len(), self.nodes(), "selection must have one entry per node");
    }

    /// Weight of the edges between `S` and the rest of the domain.
    pub fn interior_cut(&self, sel: &[bool]) -> f64 {
        self.check(sel);
        self.edges.iter().filter(|&&(i, j, _)| sel[i as usize] != sel[j as usize]).map(|e| e.2).sum()
    }

    /// Full discrete perimeter of `S`, including edges to outside cells.
    pub fn perimeter(&self, sel: &[bool]) -> f64 {
        self.check(sel);
        let b: f64 = self.boundary.iter().zip(sel).filter(|(_, &s)| s).map(|(b, _)| b).sum();
        b + self.interior_cut(sel)
    }

    pub fn volume(&self, sel: &[bool]) -> f64 {
        self.check(sel);
        sel.iter().filter(|&&s| s).count() as f64 * self.cell_volume()
    }

    /// `Per(S)/Vol(S)`; infinite for the empty set.
    pub fn ratio(&self, sel: &[bool]) -> f64 {
        let v = self.volume(sel);
        if v == 0.0 {
            f64::INFINITY
        } else {
            self.perimeter(sel) / v
        }
    }

    /// Node selection to a grid-shaped mask.
    pub fn to_grid(&self, sel: &[bool]) -> Vec<bool> {
        self.check(sel);
        let mut grid = vec![false; self.cells];
        for (&c, &s) in self.cell_of.iter().zip(sel) {
            grid[c] = s;
        }
        grid
    }

    /// Grid-shaped mask to a node selection; cells outside the domain are ignored.
    pub fn from_grid(&self, grid: &[bool]) -> Vec<bool> {
        self.cell_of.iter().map(|&c| grid[c]).collect()
    }
}

/// Exact minimiser of `Per(S) − λ Vol(S)` on integer capacities, choosing the
/// smallest minimiser. Returns the node selection and the objective.
pub fn min_cut(graph: &CutGraph, lambda: f64) -> Result<(Vec<bool>, f64)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(domain(format!("min-cut needs a finite λ > 0, got {lambda}")));
    }
    let q = QUANTUM * graph.spacing.powi(graph.stencil.dim() as i32 - 1);
    let quantize = |w: f64| (w / q).round() as i64;
    let gain = quantize(lambda * graph.cell_volume());
    let mut g = FlowGraph::new(graph.nodes());
    for (p, &b) in graph.boundary.iter().enumerate() {
        // keeping p costs b, dropping it forgoes λΔ^d
        let (b, gain) = (quantize(b), gain);
        let net = b.min(gain);
        g.add_terminal(p, gain - net, b - net);
    }
    for &(i, j, w) in &graph.edges {
        let c = quantize(w);
        g.add_edge(i as usize, j as usize, c, c);
    }
    let sel = g.solve().source_side;
    let value = graph.perimeter(&sel) - lambda * graph.volume(&sel);
    Ok((sel, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub lambda: f64,
    pub cut_value: f64,
    pub size: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Default: 16 neighbours in 2D, 18 in 3D.
    pub stencil: Option<Stencil>,
    /// Stop once the relative decrease of λ is at most this.
    pub tol: f64,
    /// Default: the ratio of the whole domain.
    pub lambda0: Option<f64>,
    pub max_iter: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { stencil: None, tol: 1e-4, lambda0: None, max_iter: 64 }
    }
}

#[derive(Debug, Clone)]
pub struct CutResult {
    pub stencil: Stencil,
    /// Grid-shaped mask of the selected set.
    pub mask: Vec<bool>,
    pub perimeter: f64,
    pub volume: f64,
    pub ratio: f64,
    pub selected: usize,
    pub inside: usize,
    pub lambda0: f64,
    pub trace: Vec<TraceEntry>,
}

impl CutResult {
    /// Fraction of inside cells in the selected set.
    pub fn coverage(&self) -> f64 {
        self.selected as f64 / self.inside as f64
    }
}

pub fn dinkelbach_cheeger(domain: &VoxelDomain, opts: &OracleOptions) -> Result<CutResult> {
    let stencil = match opts.stencil {
        Some(s) => s,
        None => Stencil::default_for(domain.dim())?,
    };
    if !(opts.tol >= 0.0 && opts.tol.is_finite()) {
        return Err(Error::Config(format!("tolerance must be finite and non-negative, got {}", opts.tol)));
    }
    let graph = CutGraph::build(domain, stencil)?;
    let whole = vec![true; graph.nodes()];
    let whole_ratio = graph.ratio(&whole);
    let lambda0 = opts.lambda0.unwrap_or(whole_ratio);
    if !(lambda0 >= whole_ratio * (1.0 - 1e-12)) || !lambda0.is_finite() {
        return Err(Error::Config(format!("λ₀ = {lambda0} is below the ratio {whole_ratio} of the whole domain")));
    }
    let mut best = (whole, whole_ratio);
    let mut trace = Vec::new();
    let mut lambda = lambda0;
    for _ in 0..opts.max_iter {
        let (sel, value) = min_cut(&graph, lambda)?;
        let size = sel.iter().filter(|&&s| s).count();
        trace.push(TraceEntry { lambda, cut_value: value, size });
        if size == 0 {
            return Ok(finish(&graph, stencil, best.0, lambda0, trace));
        }
        let r = graph.ratio(&sel);
        let done = r >= lambda || (lambda - r) / lambda <= opts.tol;
        if r < best.1 {
            best = (sel, r);
        }
        if done {
            return Ok(finish(&graph, stencil, best.0, lambda0, trace));
        }
        lambda = r;
    }
    Err(Error::NonConvergence { trace })
}

fn finish(graph: &CutGraph, stencil: Stencil, sel: Vec<bool>, lambda0: f64, trace: Vec<TraceEntry>) -> CutResult {
    let perimeter = graph.perimeter(&sel);
    let volume = graph.volume(&sel);
    let selected = sel.iter().filter(|&&s| s).count();
    CutResult {
        stencil,
        mask: graph.to_grid(&sel),
        perimeter,
        volume,
        ratio: perimeter / volume,
        selected,
        inside: graph.nodes(),
        lambda0,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rasterize;

    fn square(n: usize) -> VoxelDomain {
        rasterize(|_| true, &[0.0, 0.0], &[1.0, 1.0], n).unwrap()
    }

    fn disk(radius: f64, n: usize) -> VoxelDomain {
        let b = 1.1 * radius;
        rasterize(|x| x[0] * x[0] + x[1] * x[1] < radius * radius, &[-b, -b], &[b, b], n).unwrap()
    }

    #[test]
    fn straight_and_diagonal_cuts() {
        let dom = square(512);
        let g = CutGraph::build(&dom, Stencil::N16).unwrap();
        let half = g.from_grid(&(0..dom.cells()).map(|c| dom.center(c)[0] < 0.5).collect::<Vec<_>>());
        let cut = g.interior_cut(&half);
        assert!((cut - 1.0).abs() < 0.01, "{cut}");
        let diag = g.from_grid(&(0..dom.cells()).map(|c| dom.center(c).iter().sum::<f64>() < 1.0).collect::<Vec<_>>());
        let cut = g.interior_cut(&diag);
        assert!((cut / 2f64.sqrt() - 1.0).abs() < 0.02, "{cut}");
        // the whole square: its outline, short by O(Δ) at the corners
        assert!((g.perimeter(&vec![true; g.nodes()]) - 4.0).abs() < 0.01);
    }

    #[test]
    fn circle_inside_square() {
        let dom = rasterize(|_| true, &[-1.0, -1.0], &[1.0, 1.0], 512).unwrap();
        let g = CutGraph::build(&dom, Stencil::N16).unwrap();
        let sel = g.from_grid(&(0..dom.cells()).map(|c| dom.center(c).iter().map(|v| v * v).sum::<f64>() < 0.64).collect::<Vec<_>>());
        let cut = g.interior_cut(&sel);
        let exact = 2.0 * std::f64::consts::PI * 0.8;
        assert!((cut / exact - 1.0).abs() < 0.02, "{cut} vs {exact}");
    }

    #[test]
    fn graph_weights_are_positive_and_stencil_checked() {
        let dom = disk(1.0, 32);
        for st in [Stencil::N4, Stencil::N8, Stencil::N16] {
            let g = CutGraph::build(&dom, st).unwrap();
            assert!(g.edges.iter().all(|e| e.2 > 0.0));
            assert!(g.edge_count() > 0);
        }
        assert!(matches!(CutGraph::build(&dom, Stencil::N18), Err(Error::Config(_))));
    }

    #[test]
    fn min_cut_regimes() {
        let dom = disk(1.0, 128);
        let g = CutGraph::build(&dom, Stencil::N16).unwrap();
        let (sel, v) = min_cut(&g, 1.5).unwrap();
        assert!(sel.iter().all(|&s| !s) && v == 0.0);
        let (sel, v) = min_cut(&g, 2.1).unwrap();
        assert!(sel.iter().filter(|&&s| s).count() as f64 > 0.99 * g.nodes() as f64);
        assert!(v < 0.0);
        let whole = vec![true; g.nodes()];
        let h = g.ratio(&whole);
        let (_, v) = min_cut(&g, h).unwrap();
        assert!(v <= 0.0 && v > -1e-3 * g.perimeter(&whole), "{v}");
        assert!(min_cut(&g, f64::NAN).is_err());
        assert!(min_cut(&g, 0.0).is_err());
    }

    /// Connected (4-neighbour) subsets of `inside` up to `max` cells.
    fn connected_subsets(side: usize, inside: &[bool], max: usize) -> Vec<Vec<usize>> {
        use std::collections::BTreeSet;
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut frontier: Vec<Vec<usize>> = (0..inside.len()).filter(|&c| inside[c]).map(|c| vec![c]).collect();
        while let Some(set) = frontier.pop() {
            if !seen.insert(set.clone()) || set.len() == max {
                continue;
            }
            for &c in &set {
                let (i, j) = (c / side, c % side);
                let mut nb = Vec::new();
                if i > 0 { nb.push(c - side) }
                if i + 1 < side { nb.push(c + side) }
                if j > 0 { nb.push(c - 1) }
                if j + 1 < side { nb.push(c + 1) }
                for q in nb {
                    if inside[q] && !set.contains(&q) {
                        let mut next = set.clone();
                        next.push(q);
                        next.sort_unstable();
                        if !seen.contains(&next) {
                            frontier.push(next);
                        }
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    fn small_domain(side: usize, inside: &[bool]) -> VoxelDomain {
        VoxelDomain::new(vec![side, side], 1.0 / side as f64, vec![0.0, 0.0], inside.to_vec()).unwrap()
    }

    #[test]
    fn exhaustive_four_by_four() {
        let inside = vec![true; 16];
        let dom = small_domain(4, &inside);
        for st in [Stencil::N4, Stencil::N8, Stencil::N16] {
            let g = CutGraph::build(&dom, st).unwrap();
            let best = (1u32..1 << 16)
                .map(|bits| g.ratio(&(0..16).map(|k| bits >> k & 1 == 1).collect::<Vec<_>>()))
                .fold(f64::INFINITY, f64::min);
            let res = dinkelbach_cheeger(&dom, &OracleOptions { stencil: Some(st), tol: 0.0, ..Default::default() }).unwrap();
            assert!((res.ratio - best).abs() <= 1e-9 * best, "{st:?}: {} vs {best}", res.ratio);
        }
    }

    #[test]
    fn six_by_six_against_connected_enumeration() {
        // an L-shaped region with a notch
        let side = 6;
        let inside: Vec<bool> = (0..36).map(|c| { let (i, j) = (c / 6, c % 6); !(i < 3 && j >= 3) && c != 13 }).collect();
        let dom = small_domain(side, &inside);
        let res = dinkelbach_cheeger(&dom, &OracleOptions { tol: 0.0, ..Default::default() }).unwrap();
        let g = CutGraph::build(&dom, Stencil::N16).unwrap();
        let best = connected_subsets(side, dom.mask(), 12)
            .iter()
            .map(|set| {
                let mut grid = vec![false; 36];
                set.iter().for_each(|&c| grid[c] = true);
                g.ratio(&g.from_grid(&grid))
            })
            .fold(f64::INFINITY, f64::min);
        assert!(res.ratio <= best + 1e-9, "{} vs {best}", res.ratio);
    }

    #[test]
    fn disk_ratio_trace_and_reevaluation() {
        let dom = disk(1.0, 128);
        let res = dinkelbach_cheeger(&dom, &OracleOptions::default()).unwrap();
        assert!((res.ratio / 2.0 - 1.0).abs() < 0.05, "{}", res.ratio);
        for w in res.trace.windows(2) {
            assert!(w[1].lambda < w[0].lambda);
        }
        assert!(res.trace.len() <= 64);
        let g = CutGraph::build(&dom, res.stencil).unwrap();
        let sel = g.from_grid(&res.mask);
        assert!((g.ratio(&sel) - res.ratio).abs() <= 1e-12 * res.ratio);
        assert_eq!(res.lambda0, g.ratio(&vec![true; g.nodes()]));
    }

    #[test]
    fn scaling_covariance() {
        let a = dinkelbach_cheeger(&disk(1.0, 128), &OracleOptions::default()).unwrap();
        let b = dinkelbach_cheeger(&disk(2.0, 128), &OracleOptions::default()).unwrap();
        assert!((b.ratio * 2.0 - a.ratio).abs() < 1e-9 * a.ratio, "{} {}", a.ratio, b.ratio);
    }

    #[test]
    fn invalid_options() {
        let dom = disk(1.0, 32);
        let low = OracleOptions { lambda0: Some(0.5), ..Default::default() };
        assert!(matches!(dinkelbach_cheeger(&dom, &low), Err(Error::Config(_))));
        let wrong = OracleOptions { stencil: Some(Stencil::N26), ..Default::default() };
        assert!(dinkelbach_cheeger(&dom, &wrong).is_err());
        let capped = OracleOptions { max_iter: 1, tol: 0.0, ..Default::default() };
        match dinkelbach_cheeger(&disk(1.0, 64), &capped) {
            Err(Error::NonConvergence { trace }) => assert_eq!(trace.len(), 1),
            other => panic!("{other:?}"),
        }
    }
}

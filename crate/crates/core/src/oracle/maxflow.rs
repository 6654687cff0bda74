//! Boykov–Kolmogorov max-flow on integer capacities.
//!
//! Two search trees grow from the terminals; a path is found when they
//! touch. Saturated tree arcs create orphans, which are re-adopted or freed.
//! Every operation is exact integer arithmetic, so the final residual graph
//! yields an exact minimum cut.

use std::collections::VecDeque;

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;
const INF_DIST: u32 = u32::MAX;

/// Undirected graph with terminal links, frozen into CSR form by [`FlowGraph::solve`].
#[derive(Debug, Clone)]
pub struct FlowGraph {
    /// `> 0`: residual capacity from the source; `< 0`: to the sink.
    tr_cap: Vec<i64>,
    edges: Vec<(u32, u32, i64, i64)>,
}

/// Max-flow value and the source side of the minimal minimum cut.
#[derive(Debug, Clone)]
pub struct MinCut {
    pub flow: i64,
    pub source_side: Vec<bool>,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        Self { tr_cap: vec![0; nodes], edges: Vec::new() }
    }

    pub fn nodes(&self) -> usize {
        self.tr_cap.len()
    }

    /// Adds capacity `source` from s to `i` and `sink` from `i` to t.
    /// The common part is routed immediately.
    pub fn add_terminal(&mut self, i: usize, source: i64, sink: i64) -> i64 {
        debug_assert!(source >= 0 && sink >= 0);
        self.tr_cap[i] += source - sink;
        source.min(sink)
    }

    /// Arc `i → j` with capacity `cap`, arc `j → i` with capacity `rev`.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: i64, rev: i64) {
        debug_assert!(i != j && cap >= 0 && rev >= 0);
        self.edges.push((i as u32, j as u32, cap, rev));
    }

    pub fn solve(self) -> MinCut {
        Solver::build(self).run()
    }
}

struct Solver {
    first: Vec<u32>,
    head: Vec<u32>,
    sister: Vec<u32>,
    r_cap: Vec<i64>,
    tr_cap: Vec<i64>,
    parent: Vec<u32>,
    is_sink: Vec<bool>,
    ts: Vec<u32>,
    dist: Vec<u32>,
    queued: Vec<bool>,
    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u32,
    flow: i64,
}

impl Solver {
    fn build(g: FlowGraph) -> Self {
        let n = g.tr_cap.len();
        let mut first = vec![0u32; n + 1];
        for &(i, j, _, _) in &g.edges {
            first[i as usize + 1] += 1;
            first[j as usize + 1] += 1;
        }
        for k in 0..n {
            first[k + 1] += first[k];
        }
        let m = first[n] as usize;
        let mut fill = first.clone();
        let mut head = vec![0u32; m];
        let mut sister = vec![0u32; m];
        let mut r_cap = vec![0i64; m];
        for &(i, j, c, r) in &g.edges {
            let a = fill[i as usize];
            fill[i as usize] += 1;
            let b = fill[j as usize];
            fill[j as usize] += 1;
            head[a as usize] = j;
            head[b as usize] = i;
            sister[a as usize] = b;
            sister[b as usize] = a;
            r_cap[a as usize] = c;
            r_cap[b as usize] = r;
        }
        Self {
            first,
            head,
            sister,
            r_cap,
            tr_cap: g.tr_cap,
            parent: vec![NONE; n],
            is_sink: vec![false; n],
            ts: vec![0; n],
            dist: vec![0; n],
            queued: vec![false; n],
            active: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
            flow: 0,
        }
    }

    fn arcs(&self, i: u32) -> std::ops::Range<usize> {
        self.first[i as usize] as usize..self.first[i as usize + 1] as usize
    }

    fn set_active(&mut self, i: u32) {
        if !self.queued[i as usize] {
            self.queued[i as usize] = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            self.queued[i as usize] = false;
            if self.parent[i as usize] != NONE {
                return Some(i);
            }
        }
        None
    }

    fn run(mut self) -> MinCut {
        for i in 0..self.tr_cap.len() {
            let c = self.tr_cap[i];
            if c != 0 {
                self.is_sink[i] = c < 0;
                self.parent[i] = TERMINAL;
                self.dist[i] = 1;
                self.set_active(i as u32);
            }
        }
        let mut current: Option<u32> = None;
        loop {
            let i = match current.filter(|&i| self.parent[i as usize] != NONE) {
                Some(i) => i,
                None => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };
            let found = self.grow(i);
            self.time = self.time.wrapping_add(1);
            match found {
                Some(a) => {
                    // the node may still have unexplored arcs
                    current = Some(i);
                    self.augment(a);
                    self.adopt();
                }
                None => current = None,
            }
        }
        let source_side = self.reachable_from_source();
        MinCut { flow: self.flow, source_side }
    }

    /// Grows the tree of `i`; returns the connecting arc, oriented from the
    /// source tree to the sink tree.
    fn grow(&mut self, i: u32) -> Option<usize> {
        let iu = i as usize;
        let sink = self.is_sink[iu];
        for a in self.arcs(i) {
            let residual = if sink { self.r_cap[self.sister[a] as usize] } else { self.r_cap[a] };
            if residual == 0 {
                continue;
            }
            let j = self.head[a];
            let ju = j as usize;
            if self.parent[ju] == NONE {
                self.is_sink[ju] = sink;
                self.parent[ju] = self.sister[a];
                self.ts[ju] = self.ts[iu];
                self.dist[ju] = self.dist[iu] + 1;
                self.set_active(j);
            } else if self.is_sink[ju] != sink {
                return Some(if sink { self.sister[a] as usize } else { a });
            } else if self.ts[ju] <= self.ts[iu] && self.dist[ju] > self.dist[iu] {
                // shorter route to the terminal
                self.parent[ju] = self.sister[a];
                self.ts[ju] = self.ts[iu];
                self.dist[ju] = self.dist[iu] + 1;
            }
        }
        None
    }

    fn set_orphan(&mut self, i: u32) {
        self.parent[i as usize] = ORPHAN;
        self.orphans.push_front(i);
    }

    fn augment(&mut self, mid: usize) {
        let s_end = self.head[self.sister[mid] as usize];
        let t_end = self.head[mid];
        let mut b = self.r_cap[mid];
        let mut i = s_end;
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                b = b.min(self.tr_cap[i as usize]);
                break;
            }
            b = b.min(self.r_cap[self.sister[pa as usize] as usize]);
            i = self.head[pa as usize];
        }
        let mut i = t_end;
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                b = b.min(-self.tr_cap[i as usize]);
                break;
            }
            b = b.min(self.r_cap[pa as usize]);
            i = self.head[pa as usize];
        }

        self.r_cap[self.sister[mid] as usize] += b;
        self.r_cap[mid] -= b;
        let mut i = s_end;
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                self.tr_cap[i as usize] -= b;
                if self.tr_cap[i as usize] == 0 {
                    self.set_orphan(i);
                }
                break;
            }
            let down = self.sister[pa as usize] as usize;
            self.r_cap[pa as usize] += b;
            self.r_cap[down] -= b;
            let next = self.head[pa as usize];
            if self.r_cap[down] == 0 {
                self.set_orphan(i);
            }
            i = next;
        }
        let mut i = t_end;
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                self.tr_cap[i as usize] += b;
                if self.tr_cap[i as usize] == 0 {
                    self.set_orphan(i);
                }
                break;
            }
            self.r_cap[self.sister[pa as usize] as usize] += b;
            self.r_cap[pa as usize] -= b;
            let next = self.head[pa as usize];
            if self.r_cap[pa as usize] == 0 {
                self.set_orphan(i);
            }
            i = next;
        }
        self.flow += b;
    }

    fn adopt(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            self.process_orphan(i);
        }
    }

    fn process_orphan(&mut self, i: u32) {
        let iu = i as usize;
        let sink = self.is_sink[iu];
        let mut best = NONE;
        let mut d_min = INF_DIST;
        for a0 in self.arcs(i) {
            // the tree arc must carry residual capacity toward the orphan's terminal
            let residual = if sink { self.r_cap[a0] } else { self.r_cap[self.sister[a0] as usize] };
            if residual == 0 {
                continue;
            }
            let mut j = self.head[a0];
            if self.is_sink[j as usize] != sink || self.parent[j as usize] == NONE {
                continue;
            }
            let mut d = 0u32;
            loop {
                let ju = j as usize;
                if self.ts[ju] == self.time {
                    d = d.saturating_add(self.dist[ju]);
                    break;
                }
                let a = self.parent[ju];
                d += 1;
                if a == TERMINAL {
                    self.ts[ju] = self.time;
                    self.dist[ju] = 1;
                    break;
                }
                if a == ORPHAN {
                    d = INF_DIST;
                    break;
                }
                j = self.head[a as usize];
            }
            if d < INF_DIST {
                if d < d_min {
                    best = a0 as u32;
                    d_min = d;
                }
                let mut j = self.head[a0];
                while self.ts[j as usize] != self.time {
                    self.ts[j as usize] = self.time;
                    self.dist[j as usize] = d;
                    d -= 1;
                    j = self.head[self.parent[j as usize] as usize];
                }
            }
        }
        self.parent[iu] = best;
        if best != NONE {
            self.ts[iu] = self.time;
            self.dist[iu] = d_min + 1;
            return;
        }
        for a0 in self.arcs(i) {
            let j = self.head[a0];
            let ju = j as usize;
            let a = self.parent[ju];
            if self.is_sink[ju] != sink || a == NONE {
                continue;
            }
            let residual = if sink { self.r_cap[a0] } else { self.r_cap[self.sister[a0] as usize] };
            if residual > 0 {
                self.set_active(j);
            }
            if a != TERMINAL && a != ORPHAN && self.head[a as usize] == i {
                self.parent[ju] = ORPHAN;
                self.orphans.push_back(j);
            }
        }
    }

    /// Nodes reachable from the source in the residual graph: the smallest
    /// source side over all minimum cuts.
    fn reachable_from_source(&self) -> Vec<bool> {
        let n = self.tr_cap.len();
        let mut seen = vec![false; n];
        let mut stack: Vec<u32> = (0..n as u32).filter(|&i| self.tr_cap[i as usize] > 0).collect();
        for &i in &stack {
            seen[i as usize] = true;
        }
        while let Some(i) = stack.pop() {
            for a in self.arcs(i) {
                let j = self.head[a];
                if self.r_cap[a] > 0 && !seen[j as usize] {
                    seen[j as usize] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Edmonds–Karp reference; node `n` is s, node `n + 1` is t.
    fn edmonds_karp(n: usize, terminals: &[(i64, i64)], edges: &[(usize, usize, i64, i64)]) -> (i64, Vec<bool>) {
        let (s, t) = (n, n + 1);
        let mut cap = vec![vec![0i64; n + 2]; n + 2];
        for (i, &(a, b)) in terminals.iter().enumerate() {
            cap[s][i] += a;
            cap[i][t] += b;
        }
        for &(i, j, c, r) in edges {
            cap[i][j] += c;
            cap[j][i] += r;
        }
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; n + 2];
            prev[s] = s;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for v in 0..n + 2 {
                    if prev[v] == usize::MAX && cap[u][v] > 0 {
                        prev[v] = u;
                        q.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                let side = (0..n).map(|i| prev[i] != usize::MAX).collect();
                return (flow, side);
            }
            let mut b = i64::MAX;
            let mut v = t;
            while v != s {
                b = b.min(cap[prev[v]][v]);
                v = prev[v];
            }
            let mut v = t;
            while v != s {
                cap[prev[v]][v] -= b;
                cap[v][prev[v]] += b;
                v = prev[v];
            }
            flow += b;
        }
    }

    #[test]
    fn matches_edmonds_karp_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..300 {
            let n = rng.gen_range(2..24);
            let terminals: Vec<(i64, i64)> = (0..n)
                .map(|_| {
                    let s = if rng.gen_bool(0.4) { rng.gen_range(0..20) } else { 0 };
                    let t = if rng.gen_bool(0.4) { rng.gen_range(0..20) } else { 0 };
                    (s, t)
                })
                .collect();
            let mut edges = Vec::new();
            for _ in 0..rng.gen_range(0..4 * n) {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    // symmetric and directed capacities, with zeros for ties
                    let c = rng.gen_range(0..12);
                    let r = if rng.gen_bool(0.5) { c } else { rng.gen_range(0..12) };
                    edges.push((i, j, c, r));
                }
            }
            let mut g = FlowGraph::new(n);
            let mut pre = 0;
            for (i, &(a, b)) in terminals.iter().enumerate() {
                pre += g.add_terminal(i, a, b);
            }
            for &(i, j, c, r) in &edges {
                g.add_edge(i, j, c, r);
            }
            let cut = g.solve();
            let (flow, side) = edmonds_karp(n, &terminals, &edges);
            assert_eq!(cut.flow + pre, flow, "trial {trial}");
            assert_eq!(cut.source_side, side, "trial {trial}");
        }
    }

    #[test]
    fn grid_chain_is_exact() {
        // a path s → 0 → 1 → … → 9 → t with a bottleneck in the middle
        let mut g = FlowGraph::new(10);
        g.add_terminal(0, 100, 0);
        g.add_terminal(9, 0, 100);
        for i in 0..9 {
            g.add_edge(i, i + 1, if i == 4 { 3 } else { 50 }, 0);
        }
        let cut = g.solve();
        assert_eq!(cut.flow, 3);
        assert_eq!(cut.source_side, (0..10).map(|i| i <= 4).collect::<Vec<_>>());
    }
}

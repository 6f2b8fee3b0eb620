//! Augmenting-path max-flow / min-cut on s-t networks with real capacities.
//!
//! The default solver grows search trees from both terminals simultaneously
//! and repairs them after each augmentation instead of rebuilding, which is
//! the strategy that works best on the grid-shaped graphs produced by the
//! layered construction. A level-graph shortest-augmenting-path solver is
//! kept behind [`MaxFlowAlgo`] for differential testing.
//!
//! Capacities are `f64`. Residuals never go negative (IEEE subtraction of a
//! bounded value is exact in sign); `RESIDUAL_EPS` only guards cancellation
//! crumbs left by repeated push/undo cycles.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Sentinel for "infinite" constraint arcs. Must exceed the total finite
/// capacity of the network; this is checked before solving.
pub const CAP_INF: f64 = 1e15;

/// Residuals at or below this threshold count as zero.
pub const RESIDUAL_EPS: f64 = 1e-9;

/// Which augmenting-path strategy to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFlowAlgo {
    /// Bidirectional tree growth with orphan adoption (default).
    TreeGrowth,
    /// BFS level graph + blocking flow.
    ShortestPath,
}

/// A directed s-t network. Arcs carry a forward capacity; the reverse
/// direction starts at zero.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    node_count: usize,
    source: usize,
    sink: usize,
    arcs: Vec<(u32, u32, f64)>,
}

impl FlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Result<FlowNetwork> {
        if source == sink {
            return Err(Error::InvalidModel("source and sink must differ".into()));
        }
        if source >= node_count || sink >= node_count {
            return Err(Error::InvalidModel("terminal index out of range".into()));
        }
        Ok(FlowNetwork { node_count, source, sink, arcs: Vec::new() })
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: f64) -> Result<()> {
        if from >= self.node_count || to >= self.node_count {
            return Err(Error::InvalidModel(format!("arc ({from}, {to}) out of range")));
        }
        if !(cap >= 0.0) || (cap.is_infinite()) {
            return Err(Error::InvalidModel(format!(
                "arc capacity {cap} must be finite and >= 0 (use CAP_INF for constraint arcs)"
            )));
        }
        self.arcs.push((from as u32, to as u32, cap));
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[(u32, u32, f64)] {
        &self.arcs
    }

    fn check_sentinel_budget(&self) -> Result<()> {
        let finite: f64 = self.arcs.iter().map(|a| a.2).filter(|c| *c < CAP_INF).sum();
        if finite >= CAP_INF {
            return Err(Error::InvalidModel(format!(
                "total finite capacity {finite} reaches the CAP_INF sentinel"
            )));
        }
        Ok(())
    }
}

/// Max-flow value plus a minimum cut certificate.
#[derive(Debug, Clone)]
pub struct CutResult {
    pub flow_value: f64,
    /// true = node on the source side of the cut.
    pub source_side: Vec<bool>,
}

/// Sum of capacities crossing from the source side to the sink side.
pub fn cut_capacity(net: &FlowNetwork, source_side: &[bool]) -> f64 {
    net.arcs
        .iter()
        .filter(|&&(u, v, _)| source_side[u as usize] && !source_side[v as usize])
        .map(|a| a.2)
        .sum()
}

/// Maximum flow with the default tree-growth solver.
pub fn max_flow(net: &FlowNetwork) -> Result<CutResult> {
    max_flow_with(net, MaxFlowAlgo::TreeGrowth)
}

pub fn max_flow_with(net: &FlowNetwork, algo: MaxFlowAlgo) -> Result<CutResult> {
    net.check_sentinel_budget()?;
    let mut g = ResidualGraph::build(net);
    let flow_value = match algo {
        MaxFlowAlgo::TreeGrowth => TreeGrowth::new(&mut g, net.source, net.sink).run(),
        MaxFlowAlgo::ShortestPath => shortest_path_flow(&mut g, net.source, net.sink),
    };
    let source_side = g.residual_reachable(net.source);
    if source_side[net.sink] {
        return Err(Error::Internal("sink reachable after termination".into()));
    }
    for &(u, v, cap) in &net.arcs {
        if cap >= CAP_INF && source_side[u as usize] && !source_side[v as usize] {
            return Err(Error::Internal(format!(
                "sentinel arc ({u}, {v}) crosses the minimum cut"
            )));
        }
    }
    Ok(CutResult { flow_value, source_side })
}

/// Exhaustive minimum-cut oracle: tries every bipartition of the
/// non-terminal nodes. Limited to 18 free nodes.
pub fn min_cut_value_bruteforce(net: &FlowNetwork) -> Result<f64> {
    let free: Vec<usize> =
        (0..net.node_count).filter(|&v| v != net.source && v != net.sink).collect();
    if free.len() > 18 {
        return Err(Error::BudgetExceeded { states: 1u128 << free.len(), cap: 1 << 18 });
    }
    let mut side = vec![false; net.node_count];
    side[net.source] = true;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << free.len()) {
        for (bit, &v) in free.iter().enumerate() {
            side[v] = mask & (1 << bit) != 0;
        }
        best = best.min(cut_capacity(net, &side));
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Residual representation shared by both solvers.

struct ResidualGraph {
    /// res[2k] = forward residual of declared arc k, res[2k^1] = reverse.
    res: Vec<f64>,
    head: Vec<u32>,
    adj: Vec<Vec<u32>>,
}

impl ResidualGraph {
    fn build(net: &FlowNetwork) -> ResidualGraph {
        let m = net.arcs.len();
        let mut res = Vec::with_capacity(2 * m);
        let mut head = Vec::with_capacity(2 * m);
        let mut adj = vec![Vec::new(); net.node_count];
        for &(u, v, cap) in &net.arcs {
            let id = res.len() as u32;
            res.push(cap);
            head.push(v);
            adj[u as usize].push(id);
            res.push(0.0);
            head.push(u);
            adj[v as usize].push(id + 1);
        }
        ResidualGraph { res, head, adj }
    }

    #[inline]
    fn usable(&self, arc: u32) -> bool {
        self.res[arc as usize] > RESIDUAL_EPS
    }

    fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::new();
        seen[source] = true;
        queue.push_back(source as u32);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u as usize] {
                let v = self.head[a as usize];
                if !seen[v as usize] && self.usable(a) {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

// ---------------------------------------------------------------------------
// Tree-growth solver.

const PARENT_NONE: u32 = u32::MAX;
const PARENT_TERMINAL: u32 = u32::MAX - 1;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tree {
    Free,
    Src,
    Snk,
}

/// Parent arc convention: for a source-tree node v, `parent[v]` is the arc
/// (parent -> v); for a sink-tree node v it is the arc (v -> parent). In
/// both cases the stored arc is the one that carries flow through v.
struct TreeGrowth<'g> {
    g: &'g mut ResidualGraph,
    tree: Vec<Tree>,
    parent: Vec<u32>,
    ts: Vec<u64>,
    dist: Vec<u64>,
    time: u64,
    active: VecDeque<u32>,
    in_active: Vec<bool>,
    orphans: VecDeque<u32>,
    path_buf: Vec<u32>,
}

impl<'g> TreeGrowth<'g> {
    fn new(g: &'g mut ResidualGraph, source: usize, sink: usize) -> Self {
        let n = g.adj.len();
        let mut s = TreeGrowth {
            g,
            tree: vec![Tree::Free; n],
            parent: vec![PARENT_NONE; n],
            ts: vec![0; n],
            dist: vec![0; n],
            time: 1,
            active: VecDeque::new(),
            in_active: vec![false; n],
            orphans: VecDeque::new(),
            path_buf: Vec::new(),
        };
        s.tree[source] = Tree::Src;
        s.tree[sink] = Tree::Snk;
        s.parent[source] = PARENT_TERMINAL;
        s.parent[sink] = PARENT_TERMINAL;
        s.activate(source as u32);
        s.activate(sink as u32);
        s
    }

    fn activate(&mut self, v: u32) {
        if !self.in_active[v as usize] {
            self.in_active[v as usize] = true;
            self.active.push_back(v);
        }
    }

    /// Parent node of v given its parent arc.
    #[inline]
    fn parent_node(&self, v: u32, pa: u32) -> u32 {
        match self.tree[v as usize] {
            Tree::Src => self.g.head[(pa ^ 1) as usize],
            Tree::Snk => self.g.head[pa as usize],
            Tree::Free => unreachable!(),
        }
    }

    fn run(mut self) -> f64 {
        let mut flow = 0.0;
        while let Some(bridge) = self.grow() {
            self.time += 1;
            flow += self.augment(bridge);
            self.adopt();
        }
        flow
    }

    /// Expands both trees; returns an arc from the source tree into the
    /// sink tree with positive residual, if one appears.
    fn grow(&mut self) -> Option<u32> {
        while let Some(p) = self.active.pop_front() {
            self.in_active[p as usize] = false;
            let tp = self.tree[p as usize];
            if tp == Tree::Free {
                continue;
            }
            for idx in 0..self.g.adj[p as usize].len() {
                let a = self.g.adj[p as usize][idx];
                // Source tree pushes along a; sink tree pulls along a^1.
                let usable = match tp {
                    Tree::Src => self.g.usable(a),
                    Tree::Snk => self.g.usable(a ^ 1),
                    Tree::Free => unreachable!(),
                };
                if !usable {
                    continue;
                }
                let q = self.g.head[a as usize];
                match self.tree[q as usize] {
                    Tree::Free => {
                        self.tree[q as usize] = tp;
                        self.parent[q as usize] = if tp == Tree::Src { a } else { a ^ 1 };
                        self.ts[q as usize] = self.ts[p as usize];
                        self.dist[q as usize] = self.dist[p as usize] + 1;
                        self.activate(q);
                    }
                    t if t == tp => {}
                    _ => {
                        // Bridge between the trees; keep p active so the
                        // remaining neighbors are scanned later.
                        self.activate(p);
                        return Some(if tp == Tree::Src { a } else { a ^ 1 });
                    }
                }
            }
        }
        None
    }

    fn augment(&mut self, bridge: u32) -> f64 {
        // Collect the source-side and sink-side parent chains, then push
        // the bottleneck along the whole path.
        let mut bottleneck = self.g.res[bridge as usize];
        self.path_buf.clear();
        self.path_buf.push(bridge);

        let mut v = self.g.head[(bridge ^ 1) as usize]; // tail of the bridge
        loop {
            let pa = self.parent[v as usize];
            if pa == PARENT_TERMINAL {
                break;
            }
            debug_assert!(pa != PARENT_NONE);
            self.path_buf.push(pa);
            bottleneck = bottleneck.min(self.g.res[pa as usize]);
            v = self.g.head[(pa ^ 1) as usize];
        }
        let mut v = self.g.head[bridge as usize]; // head of the bridge
        loop {
            let pa = self.parent[v as usize];
            if pa == PARENT_TERMINAL {
                break;
            }
            debug_assert!(pa != PARENT_NONE);
            self.path_buf.push(pa);
            bottleneck = bottleneck.min(self.g.res[pa as usize]);
            v = self.g.head[pa as usize];
        }

        let path = std::mem::take(&mut self.path_buf);
        for &a in &path {
            self.g.res[a as usize] -= bottleneck;
            self.g.res[(a ^ 1) as usize] += bottleneck;
        }
        // Orphan the nodes whose parent arc saturated. Source-tree nodes
        // store (parent -> v), so the owner is the head; sink-tree nodes
        // store (v -> parent), so the owner is the tail.
        for &a in &path[1..] {
            if self.g.res[a as usize] <= RESIDUAL_EPS {
                let head = self.g.head[a as usize];
                let tail = self.g.head[(a ^ 1) as usize];
                let owner = if self.tree[head as usize] == Tree::Src
                    && self.parent[head as usize] == a
                {
                    Some(head)
                } else if self.tree[tail as usize] == Tree::Snk && self.parent[tail as usize] == a
                {
                    Some(tail)
                } else {
                    None
                };
                if let Some(o) = owner {
                    self.parent[o as usize] = PARENT_NONE;
                    self.orphans.push_back(o);
                }
            }
        }
        self.path_buf = path;
        bottleneck
    }

    /// Distance from q to its tree terminal, or None if q hangs off an
    /// orphaned chain. Marks verified nodes with the current timestamp.
    fn origin_distance(&mut self, q: u32) -> Option<u64> {
        let mut d = 0u64;
        let mut j = q;
        loop {
            if self.ts[j as usize] == self.time {
                d += self.dist[j as usize];
                break;
            }
            let pa = self.parent[j as usize];
            if pa == PARENT_TERMINAL {
                break;
            }
            if pa == PARENT_NONE {
                return None;
            }
            j = self.parent_node(j, pa);
            d += 1;
        }
        // Re-walk to cache distances.
        let mut j = q;
        let mut dd = d;
        while self.ts[j as usize] != self.time {
            self.ts[j as usize] = self.time;
            self.dist[j as usize] = dd;
            let pa = self.parent[j as usize];
            if pa == PARENT_TERMINAL {
                break;
            }
            dd -= 1;
            j = self.parent_node(j, pa);
        }
        Some(d)
    }

    fn adopt(&mut self) {
        while let Some(p) = self.orphans.pop_front() {
            let tp = self.tree[p as usize];
            debug_assert!(tp != Tree::Free);
            let mut best: Option<(u64, u32)> = None;
            for idx in 0..self.g.adj[p as usize].len() {
                let a = self.g.adj[p as usize][idx];
                let q = self.g.head[a as usize];
                if self.tree[q as usize] != tp {
                    continue;
                }
                // A parent must be able to carry flow through p.
                let usable = match tp {
                    Tree::Src => self.g.usable(a ^ 1),
                    Tree::Snk => self.g.usable(a),
                    Tree::Free => unreachable!(),
                };
                if !usable {
                    continue;
                }
                if let Some(d) = self.origin_distance(q) {
                    let parent_arc = if tp == Tree::Src { a ^ 1 } else { a };
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, parent_arc));
                    }
                }
            }
            match best {
                Some((d, pa)) => {
                    self.parent[p as usize] = pa;
                    self.ts[p as usize] = self.time;
                    self.dist[p as usize] = d + 1;
                }
                None => {
                    // p leaves the tree; its children become orphans and
                    // potential parents become active.
                    for idx in 0..self.g.adj[p as usize].len() {
                        let a = self.g.adj[p as usize][idx];
                        let q = self.g.head[a as usize];
                        if self.tree[q as usize] != tp {
                            continue;
                        }
                        let usable = match tp {
                            Tree::Src => self.g.usable(a ^ 1),
                            Tree::Snk => self.g.usable(a),
                            Tree::Free => unreachable!(),
                        };
                        if usable {
                            self.activate(q);
                        }
                        let child_arc = if tp == Tree::Src { a } else { a ^ 1 };
                        if self.parent[q as usize] == child_arc {
                            self.parent[q as usize] = PARENT_NONE;
                            self.orphans.push_back(q);
                        }
                    }
                    self.tree[p as usize] = Tree::Free;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Shortest-augmenting-path fallback (level graph + blocking flow).

fn shortest_path_flow(g: &mut ResidualGraph, source: usize, sink: usize) -> f64 {
    let n = g.adj.len();
    let mut flow = 0.0;
    let mut level = vec![u32::MAX; n];
    let mut iter = vec![0usize; n];
    loop {
        level.iter_mut().for_each(|l| *l = u32::MAX);
        level[source] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source as u32);
        while let Some(u) = queue.pop_front() {
            for &a in &g.adj[u as usize] {
                let v = g.head[a as usize];
                if level[v as usize] == u32::MAX && g.usable(a) {
                    level[v as usize] = level[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[sink] == u32::MAX {
            return flow;
        }
        iter.iter_mut().for_each(|i| *i = 0);
        loop {
            let pushed = blocking_dfs(g, &level, &mut iter, source, sink, f64::INFINITY);
            if pushed <= RESIDUAL_EPS {
                break;
            }
            flow += pushed;
        }
    }
}

fn blocking_dfs(
    g: &mut ResidualGraph,
    level: &[u32],
    iter: &mut [usize],
    v: usize,
    sink: usize,
    limit: f64,
) -> f64 {
    if v == sink {
        return limit;
    }
    while iter[v] < g.adj[v].len() {
        let a = g.adj[v][iter[v]];
        let to = g.head[a as usize] as usize;
        if level[to] == level[v] + 1 && g.usable(a) {
            let d = blocking_dfs(g, level, iter, to, sink, limit.min(g.res[a as usize]));
            if d > RESIDUAL_EPS {
                g.res[a as usize] -= d;
                g.res[(a ^ 1) as usize] += d;
                return d;
            }
        }
        iter[v] += 1;
    }
    0.0
}

// ---------------------------------------------------------------------------
// DIMACS max-flow text format.

/// Writes the network in DIMACS max-flow form (1-based node ids).
pub fn write_dimacs<W: Write>(net: &FlowNetwork, w: &mut W) -> Result<()> {
    writeln!(w, "p max {} {}", net.node_count, net.arcs.len())?;
    writeln!(w, "n {} s", net.source + 1)?;
    writeln!(w, "n {} t", net.sink + 1)?;
    for &(u, v, cap) in &net.arcs {
        writeln!(w, "a {} {} {}", u + 1, v + 1, cap)?;
    }
    Ok(())
}

/// Reads a DIMACS max-flow problem. Capacities may be real-valued.
pub fn read_dimacs<R: BufRead>(r: R) -> Result<FlowNetwork> {
    let mut node_count = None;
    let mut source = None;
    let mut sink = None;
    let mut arcs: Vec<(usize, usize, f64)> = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let mut parts = line.split_whitespace();
        let err = |msg: &str| Error::Parse { line: ln + 1, msg: msg.into() };
        match parts.next() {
            None | Some("c") => {}
            Some("p") => {
                if parts.next() != Some("max") {
                    return Err(err("expected 'p max'"));
                }
                let n: usize =
                    parts.next().ok_or_else(|| err("missing node count"))?.parse().map_err(
                        |_| err("bad node count"),
                    )?;
                node_count = Some(n);
            }
            Some("n") => {
                let id: usize = parts
                    .next()
                    .ok_or_else(|| err("missing node id"))?
                    .parse()
                    .map_err(|_| err("bad node id"))?;
                match parts.next() {
                    Some("s") => source = Some(id - 1),
                    Some("t") => sink = Some(id - 1),
                    _ => return Err(err("node designator must be s or t")),
                }
            }
            Some("a") => {
                let mut next = || parts.next().ok_or_else(|| Error::Parse {
                    line: ln + 1,
                    msg: "arc line needs 'a from to cap'".into(),
                });
                let u: usize = next()?.parse().map_err(|_| err("bad arc tail"))?;
                let v: usize = next()?.parse().map_err(|_| err("bad arc head"))?;
                let cap: f64 = next()?.parse().map_err(|_| err("bad capacity"))?;
                arcs.push((u - 1, v - 1, cap));
            }
            Some(other) => {
                return Err(err(&format!("unknown line type '{other}'")));
            }
        }
    }
    let node_count = node_count.ok_or(Error::Parse { line: 0, msg: "missing p line".into() })?;
    let source = source.ok_or(Error::Parse { line: 0, msg: "missing source".into() })?;
    let sink = sink.ok_or(Error::Parse { line: 0, msg: "missing sink".into() })?;
    let mut net = FlowNetwork::new(node_count, source, sink)?;
    for (u, v, cap) in arcs {
        net.add_arc(u, v, cap)?;
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> FlowNetwork {
        // s=0, a=1, b=2, t=3
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        net.add_arc(0, 1, 3.0).unwrap();
        net.add_arc(1, 2, 2.0).unwrap();
        net.add_arc(2, 3, 4.0).unwrap();
        net.add_arc(0, 2, 1.0).unwrap();
        net
    }

    #[test]
    fn diamond_flow_is_three() {
        for algo in [MaxFlowAlgo::TreeGrowth, MaxFlowAlgo::ShortestPath] {
            let cut = max_flow_with(&diamond(), algo).unwrap();
            assert!((cut.flow_value - 3.0).abs() < 1e-12, "{algo:?}");
            assert!((cut_capacity(&diamond(), &cut.source_side) - 3.0).abs() < 1e-12);
        }
        assert_eq!(min_cut_value_bruteforce(&diamond()).unwrap(), 3.0);
    }

    #[test]
    fn no_path_means_zero_flow() {
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        net.add_arc(0, 1, 5.0).unwrap();
        net.add_arc(2, 3, 5.0).unwrap();
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value, 0.0);
        assert!(cut.source_side[0] && cut.source_side[1]);
        assert!(!cut.source_side[2] && !cut.source_side[3]);
        assert_eq!(min_cut_value_bruteforce(&net).unwrap(), 0.0);
    }

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 7.5).unwrap();
        assert_eq!(max_flow(&net).unwrap().flow_value, 7.5);
        assert_eq!(min_cut_value_bruteforce(&net).unwrap(), 7.5);
    }

    #[test]
    fn sentinel_arcs_stay_uncut() {
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, CAP_INF).unwrap();
        net.add_arc(1, 2, 2.5).unwrap();
        let cut = max_flow(&net).unwrap();
        assert!((cut.flow_value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_capacity() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        assert!(net.add_arc(0, 1, -1.0).is_err());
        assert!(net.add_arc(0, 1, f64::NAN).is_err());
        assert!(net.add_arc(0, 1, f64::INFINITY).is_err());
    }

    #[test]
    fn bruteforce_rejects_large() {
        let net = FlowNetwork::new(25, 0, 24).unwrap();
        assert!(min_cut_value_bruteforce(&net).is_err());
    }

    #[test]
    fn dimacs_roundtrip() {
        let net = diamond();
        let mut buf = Vec::new();
        write_dimacs(&net, &mut buf).unwrap();
        let back = read_dimacs(&buf[..]).unwrap();
        assert_eq!(back.node_count(), net.node_count());
        assert_eq!(back.source(), net.source());
        assert_eq!(back.sink(), net.sink());
        assert_eq!(back.arcs(), net.arcs());
        assert!((max_flow(&back).unwrap().flow_value - 3.0).abs() < 1e-12);
    }
}

//! Service paths on the auxiliary network, k-shortest candidates and
//! enumeration oracles.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::auxnet::{AuxKind, AuxNetwork, AuxNode};
use crate::netmodel::{Demand, NodeId, PhysicalNetwork};

/// Default cap on the number of simple paths an oracle may enumerate.
pub const ORACLE_LIMIT: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("no feasible service path for demand {0}")]
    NoPath(String),
    #[error("auxiliary network is not an SFC network")]
    NotSfc,
    #[error("endpoints of demand {0} are not attached")]
    MissingEndpoint(String),
    #[error("path enumeration exceeded {0} paths")]
    Guard(usize),
}

/// Capacity of an NF copy with failure probability `rho`: `ln(1 + (1 - rho))`.
pub fn capacity(rho: f64) -> f64 {
    (2.0 - rho).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServicePath {
    /// NF copies in service order.
    pub aux_nodes: Vec<AuxNode>,
    /// Concatenated arc realizations, from source to target.
    pub physical: Vec<NodeId>,
    pub total_weight: f64,
    /// Minimum copy capacity along the path.
    pub bottleneck: f64,
}

impl ServicePath {
    /// Probability that every designated copy survives.
    pub fn survivable_prob(&self, network: &PhysicalNetwork) -> f64 {
        self.aux_nodes
            .iter()
            .map(|n| 1.0 - network.failure_prob(n.phys))
            .product()
    }

    /// Designated copies visit `chain` in order.
    pub fn respects_order(&self, chain: &[String]) -> bool {
        self.aux_nodes.len() == chain.len()
            && self
                .aux_nodes
                .iter()
                .zip(chain)
                .all(|(n, f)| n.nf() == Some(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Aux indices reachable for a demand: its endpoints and copies of its NFs.
struct View<'a> {
    aux: &'a AuxNetwork,
    s: usize,
    t: usize,
    allowed: Vec<bool>,
    /// Position of each node in lexicographic aux-node order.
    rank: Vec<usize>,
}

impl<'a> View<'a> {
    fn new(aux: &'a AuxNetwork, demand: &Demand) -> Result<Self, PathError> {
        if aux.kind() != AuxKind::Sfc {
            return Err(PathError::NotSfc);
        }
        let (Some(s), Some(t)) = (aux.source(demand.source), aux.target(demand.target)) else {
            return Err(PathError::MissingEndpoint(demand.label()));
        };
        let allowed = (0..aux.len())
            .map(|i| i == s || i == t || aux.node(i).nf().is_some_and(|f| demand.requires(f)))
            .collect();
        let mut order: Vec<usize> = (0..aux.len()).collect();
        order.sort_by(|&a, &b| aux.node(a).cmp(aux.node(b)));
        let mut rank = vec![0; aux.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Ok(Self {
            aux,
            s,
            t,
            allowed,
            rank,
        })
    }

    fn cap(&self, i: usize) -> f64 {
        if self.aux.node(i).nf().is_some() {
            capacity(self.aux.failure_prob(i))
        } else {
            f64::INFINITY
        }
    }

    /// Minimum-weight s-t path over allowed nodes; `None` if unreachable.
    fn shortest(&self, allowed: &[bool]) -> Option<Vec<usize>> {
        let n = self.aux.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[self.s] = 0.0;
        heap.push(Reverse((Key(0.0), self.rank[self.s], self.s)));
        while let Some(Reverse((Key(d), _, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == self.t {
                break;
            }
            for &a in self.aux.out_arcs(u) {
                let arc = &self.aux.arcs()[a];
                let v = arc.to;
                if !allowed[v] || done[v] {
                    continue;
                }
                let nd = d + arc.weight;
                let better = nd < dist[v]
                    || (nd == dist[v] && pred[v].is_some_and(|p| self.rank[u] < self.rank[p]));
                if better {
                    dist[v] = nd;
                    pred[v] = Some(u);
                    heap.push(Reverse((Key(nd), self.rank[v], v)));
                }
            }
        }
        trace(&pred, self.s, self.t, dist[self.t])
    }

    /// Largest achievable bottleneck over allowed nodes.
    fn widest(&self) -> Option<f64> {
        let n = self.aux.len();
        let mut width = vec![f64::NEG_INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        width[self.s] = f64::INFINITY;
        heap.push((Key(f64::INFINITY), Reverse(self.rank[self.s]), self.s));
        // frontier node of maximum label is settled first
        while let Some((Key(w), _, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == self.t {
                return Some(w);
            }
            for &a in self.aux.out_arcs(u) {
                let v = self.aux.arcs()[a].to;
                if !self.allowed[v] || done[v] {
                    continue;
                }
                let nw = w.min(self.cap(v));
                if nw > width[v] {
                    width[v] = nw;
                    heap.push((Key(nw), Reverse(self.rank[v]), v));
                }
            }
        }
        None
    }

    fn service_path(&self, nodes: &[usize]) -> ServicePath {
        to_service_path(self.aux, nodes)
    }
}

fn trace(pred: &[Option<usize>], s: usize, t: usize, dist: f64) -> Option<Vec<usize>> {
    if !dist.is_finite() {
        return None;
    }
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = pred[cur]?;
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

/// Builds a [`ServicePath`] from a sequence of aux node indices.
pub fn to_service_path(aux: &AuxNetwork, nodes: &[usize]) -> ServicePath {
    let mut physical: Vec<NodeId> = Vec::new();
    let mut total_weight = 0.0;
    for w in nodes.windows(2) {
        let arc = aux
            .out_arcs(w[0])
            .iter()
            .map(|&a| &aux.arcs()[a])
            .filter(|a| a.to == w[1])
            .min_by(|x, y| x.weight.total_cmp(&y.weight))
            .expect("consecutive aux nodes are joined by an arc");
        total_weight += arc.weight;
        let skip = usize::from(!physical.is_empty());
        physical.extend(arc.realization.iter().skip(skip).copied());
    }
    if physical.is_empty() {
        if let Some(&only) = nodes.first() {
            physical.push(aux.node(only).phys);
        }
    }
    let copies: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&i| aux.node(i).nf().is_some())
        .collect();
    let bottleneck = copies
        .iter()
        .map(|&i| capacity(aux.failure_prob(i)))
        .fold(f64::INFINITY, f64::min);
    ServicePath {
        aux_nodes: copies.iter().map(|&i| aux.node(i).clone()).collect(),
        physical,
        total_weight,
        bottleneck,
    }
}

/// Minimum-weight SFC path for an attached demand.
pub fn sfc_shortest_path(aux: &AuxNetwork, demand: &Demand) -> Result<ServicePath, PathError> {
    let view = View::new(aux, demand)?;
    let path = view
        .shortest(&view.allowed)
        .ok_or_else(|| PathError::NoPath(demand.label()))?;
    Ok(view.service_path(&path))
}

/// Maximum-bottleneck SFC path; among those, the minimum-weight one.
pub fn robust_sfc_path(aux: &AuxNetwork, demand: &Demand) -> Result<ServicePath, PathError> {
    let view = View::new(aux, demand)?;
    let best = view
        .widest()
        .ok_or_else(|| PathError::NoPath(demand.label()))?;
    let allowed: Vec<bool> = (0..aux.len())
        .map(|i| view.allowed[i] && view.cap(i) >= best)
        .collect();
    let path = view
        .shortest(&allowed)
        .ok_or_else(|| PathError::NoPath(demand.label()))?;
    let mut sp = view.service_path(&path);
    sp.bottleneck = best;
    Ok(sp)
}

/// Fixes the NF order of an unordered demand lexicographically.
pub fn canonicalize_nonchained(demand: &Demand) -> Demand {
    if demand.ordered {
        return demand.clone();
    }
    let mut out = demand.clone();
    out.nfs.sort();
    out.ordered = true;
    out.canonicalized = true;
    out
}

/// Simple weighted digraph whose node indices follow lexicographic order.
#[derive(Debug, Clone)]
pub struct Digraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_arc(&mut self, u: usize, v: usize, w: f64) {
        self.adj[u].push((v, w));
        self.adj[u].sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn arcs_from(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adj[u]
            .iter()
            .filter(|a| a.0 == v)
            .map(|a| a.1)
            .reduce(f64::min)
    }

    pub fn path_weight(&self, path: &[usize]) -> f64 {
        path.windows(2)
            .map(|w| self.weight(w[0], w[1]).unwrap_or(f64::INFINITY))
            .sum()
    }

    /// Digraph of a physical network with nodes ordered by id; returns the id table.
    pub fn from_network(network: &PhysicalNetwork) -> (Self, Vec<NodeId>) {
        let mut ids: Vec<NodeId> = network.nodes().iter().map(|n| n.id).collect();
        ids.sort_unstable();
        let pos = |id: NodeId| ids.binary_search(&id).expect("known id");
        let mut g = Self::new(ids.len());
        for e in network.edges() {
            g.adj[pos(e.u)].push((pos(e.v), e.weight));
            if !network.is_directed() {
                g.adj[pos(e.v)].push((pos(e.u), e.weight));
            }
        }
        for list in &mut g.adj {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        (g, ids)
    }

    /// Lexicographically smallest minimum-weight path avoiding `blocked`
    /// nodes and `removed` arcs.
    fn best_path(
        &self,
        s: usize,
        t: usize,
        blocked: &[bool],
        removed: &BTreeSet<(usize, usize)>,
    ) -> Option<Vec<usize>> {
        let n = self.len();
        let usable = |u: usize, v: usize| !blocked[v] && !blocked[u] && !removed.contains(&(u, v));
        // distances to t over reversed arcs
        let mut rev: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for u in 0..n {
            for &(v, w) in &self.adj[u] {
                if usable(u, v) {
                    rev[v].push((u, w));
                }
            }
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[t] = 0.0;
        heap.push(Reverse((Key(0.0), t)));
        while let Some(Reverse((Key(d), v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, w) in &rev[v] {
                if d + w < dist[u] {
                    dist[u] = d + w;
                    heap.push(Reverse((Key(d + w), u)));
                }
            }
        }
        if !dist[s].is_finite() || blocked[s] {
            return None;
        }
        let tol = |x: f64| 1e-12 * x.abs().max(1.0);
        let mut path = vec![s];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut cur = s;
        while cur != t {
            let next = self.adj[cur].iter().find(|&&(v, w)| {
                usable(cur, v) && !seen[v] && (w + dist[v] - dist[cur]).abs() <= tol(dist[cur])
            });
            match next {
                Some(&(v, _)) => {
                    seen[v] = true;
                    path.push(v);
                    cur = v;
                }
                None => return self.plain_path(s, t, blocked, removed),
            }
        }
        Some(path)
    }

    /// Plain Dijkstra fallback for zero-weight cycles.
    fn plain_path(
        &self,
        s: usize,
        t: usize,
        blocked: &[bool],
        removed: &BTreeSet<(usize, usize)>,
    ) -> Option<Vec<usize>> {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(Reverse((Key(0.0), s)));
        while let Some(Reverse((Key(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                if blocked[v] || removed.contains(&(u, v)) {
                    continue;
                }
                if d + w < dist[v] {
                    dist[v] = d + w;
                    pred[v] = Some(u);
                    heap.push(Reverse((Key(d + w), v)));
                }
            }
        }
        trace(&pred, s, t, dist[t])
    }

    /// Up to `k` loopless s-t paths by nondecreasing weight, ties broken by
    /// lexicographic node sequence.
    pub fn k_shortest(&self, s: usize, t: usize, k: usize) -> Vec<(f64, Vec<usize>)> {
        let n = self.len();
        let mut found: Vec<(f64, Vec<usize>)> = Vec::new();
        if k == 0 || s == t {
            return found;
        }
        let Some(first) = self.best_path(s, t, &vec![false; n], &BTreeSet::new()) else {
            return found;
        };
        found.push((self.path_weight(&first), first));
        let mut candidates: BTreeSet<(Key, Vec<usize>)> = BTreeSet::new();
        while found.len() < k {
            let last = found.last().expect("nonempty").1.clone();
            for i in 0..last.len() - 1 {
                let root = &last[..=i];
                let mut removed = BTreeSet::new();
                for (_, p) in &found {
                    if p.len() > i && p[..=i] == *root {
                        removed.insert((p[i], p[i + 1]));
                    }
                }
                let mut blocked = vec![false; n];
                for &r in &root[..i] {
                    blocked[r] = true;
                }
                if let Some(spur) = self.best_path(root[i], t, &blocked, &removed) {
                    let mut path = root[..i].to_vec();
                    path.extend(spur);
                    let w = self.path_weight(&path);
                    if !found.iter().any(|(_, p)| *p == path) {
                        candidates.insert((Key(w), path));
                    }
                }
            }
            match candidates.pop_first() {
                Some((Key(w), p)) => found.push((w, p)),
                None => break,
            }
        }
        found
    }

    /// All simple s-t paths, failing once more than `limit` exist.
    pub fn enumerate(
        &self,
        s: usize,
        t: usize,
        limit: usize,
    ) -> Result<Vec<Vec<usize>>, PathError> {
        let mut out = Vec::new();
        let mut on_path = vec![false; self.len()];
        let mut path = vec![s];
        on_path[s] = true;
        self.dfs(s, t, &mut on_path, &mut path, &mut out, limit)?;
        Ok(out)
    }

    fn dfs(
        &self,
        u: usize,
        t: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<(), PathError> {
        if u == t {
            if out.len() == limit {
                return Err(PathError::Guard(limit));
            }
            out.push(path.clone());
            return Ok(());
        }
        let mut last = None;
        for &(v, _) in &self.adj[u] {
            if on_path[v] || last == Some(v) {
                continue;
            }
            last = Some(v);
            on_path[v] = true;
            path.push(v);
            self.dfs(v, t, on_path, path, out, limit)?;
            path.pop();
            on_path[v] = false;
        }
        Ok(())
    }
}

/// Up to `k` loopless physical paths in nondecreasing weight.
pub fn k_shortest_candidate_paths(
    network: &PhysicalNetwork,
    s: NodeId,
    t: NodeId,
    k: usize,
) -> Vec<(f64, Vec<NodeId>)> {
    let (g, ids) = Digraph::from_network(network);
    let (Ok(a), Ok(b)) = (ids.binary_search(&s), ids.binary_search(&t)) else {
        return Vec::new();
    };
    g.k_shortest(a, b, k)
        .into_iter()
        .map(|(w, p)| (w, p.into_iter().map(|i| ids[i]).collect()))
        .collect()
}

/// Digraph over the aux nodes usable by an attached SFC demand, in
/// lexicographic node order; returns the aux index of each graph node.
pub fn demand_digraph(
    aux: &AuxNetwork,
    demand: &Demand,
) -> Result<(Digraph, Vec<usize>, usize, usize), PathError> {
    let view = View::new(aux, demand)?;
    let mut members: Vec<usize> = (0..aux.len()).filter(|&i| view.allowed[i]).collect();
    members.sort_by_key(|&i| view.rank[i]);
    let mut pos = vec![usize::MAX; aux.len()];
    for (p, &i) in members.iter().enumerate() {
        pos[i] = p;
    }
    let mut g = Digraph::new(members.len());
    for &i in &members {
        for &a in aux.out_arcs(i) {
            let arc = &aux.arcs()[a];
            if pos[arc.to] != usize::MAX {
                g.adj[pos[i]].push((pos[arc.to], arc.weight));
            }
        }
    }
    for list in &mut g.adj {
        list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    Ok((g, members.clone(), pos[view.s], pos[view.t]))
}

/// Up to `k` SFC service paths by nondecreasing weight.
pub fn k_shortest_service_paths(
    aux: &AuxNetwork,
    demand: &Demand,
    k: usize,
) -> Result<Vec<ServicePath>, PathError> {
    let (g, members, s, t) = demand_digraph(aux, demand)?;
    Ok(g.k_shortest(s, t, k)
        .into_iter()
        .map(|(_, p)| {
            let nodes: Vec<usize> = p.into_iter().map(|i| members[i]).collect();
            to_service_path(aux, &nodes)
        })
        .collect())
}

/// Every SFC service path of an attached demand (guarded).
pub fn enumerate_service_paths(
    aux: &AuxNetwork,
    demand: &Demand,
    limit: usize,
) -> Result<Vec<ServicePath>, PathError> {
    let (g, members, s, t) = demand_digraph(aux, demand)?;
    Ok(g.enumerate(s, t, limit)?
        .into_iter()
        .map(|p| {
            let nodes: Vec<usize> = p.into_iter().map(|i| members[i]).collect();
            to_service_path(aux, &nodes)
        })
        .collect())
}

/// Every simple physical s-t path (guarded), as node ids.
pub fn enumerate_paths_oracle(
    network: &PhysicalNetwork,
    s: NodeId,
    t: NodeId,
    limit: usize,
) -> Result<Vec<Vec<NodeId>>, PathError> {
    let (g, ids) = Digraph::from_network(network);
    let (Ok(a), Ok(b)) = (ids.binary_search(&s), ids.binary_search(&t)) else {
        return Ok(Vec::new());
    };
    Ok(g.enumerate(a, b, limit)?
        .into_iter()
        .map(|p| p.into_iter().map(|i| ids[i]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxnet::{attach_endpoints, AuxNetwork, Forwarding};
    use crate::netmodel::{Edge, NodeRecord};
    use std::collections::BTreeMap;

    fn net(nodes: &[(u32, f64)], edges: &[(u32, u32)]) -> PhysicalNetwork {
        PhysicalNetwork::new(
            nodes
                .iter()
                .map(|&(i, p)| NodeRecord::new(i, p, Vec::<String>::new()))
                .collect(),
            edges
                .iter()
                .map(|&(u, v)| Edge { u, v, weight: 1.0 })
                .collect(),
            false,
        )
        .unwrap()
    }

    fn pools(entries: &[(&str, &[u32])]) -> BTreeMap<String, BTreeSet<u32>> {
        entries
            .iter()
            .map(|(f, ns)| (f.to_string(), ns.iter().copied().collect()))
            .collect()
    }

    fn sfc(network: &PhysicalNetwork, p: &[(&str, &[u32])], d: &Demand) -> AuxNetwork {
        let aux = AuxNetwork::sfc(network, &pools(p), &Forwarding::Chain(d.nfs.clone())).unwrap();
        attach_endpoints(aux, d).unwrap()
    }

    #[test]
    fn single_level_unit_path() {
        let g = net(&[(1, 0.0), (2, 0.1), (3, 0.0)], &[(1, 2), (2, 3)]);
        let d = Demand::new(1, 3, true, ["f1"]);
        let p = sfc_shortest_path(&sfc(&g, &[("f1", &[2])], &d), &d).unwrap();
        assert_eq!(p.total_weight, 2.0);
        assert_eq!(p.physical, vec![1, 2, 3]);
        assert!((p.survivable_prob(&g) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn robust_prefers_reliable_copy() {
        // square 1-2-4-3-1: copies at 2 (rho .1) and 3 (rho .3)
        let g = net(
            &[(1, 0.0), (2, 0.1), (3, 0.3), (4, 0.0)],
            &[(1, 2), (2, 4), (1, 3), (3, 4)],
        );
        let d = Demand::new(1, 4, true, ["f1"]);
        let aux = sfc(&g, &[("f1", &[2, 3])], &d);
        let p = robust_sfc_path(&aux, &d).unwrap();
        assert_eq!(p.aux_nodes, vec![AuxNode::copy(2, "f1")]);
        assert!((p.bottleneck - 1.9f64.ln()).abs() < 1e-15);
        let g2 = g.with_failure_probs(|n| if n.id == 3 { 0.05 } else { n.failure_prob });
        let p2 = robust_sfc_path(&aux.with_failure_probs(&g2), &d).unwrap();
        assert_eq!(p2.aux_nodes, vec![AuxNode::copy(3, "f1")]);
    }

    #[test]
    fn canonical_order() {
        let d = Demand::new(1, 2, false, ["f2", "f1"]);
        let c = canonicalize_nonchained(&d);
        assert_eq!(
            (c.nfs.clone(), c.ordered, c.canonicalized),
            (vec!["f1".to_string(), "f2".into()], true, true)
        );
        assert_eq!(canonicalize_nonchained(&c), c);
    }

    #[test]
    fn yen_on_triangle_and_k4() {
        let tri = net(&[(1, 0.0), (2, 0.0), (3, 0.0)], &[(1, 2), (2, 3), (1, 3)]);
        let ps = k_shortest_candidate_paths(&tri, 1, 3, 2);
        assert_eq!(ps, vec![(1.0, vec![1, 3]), (2.0, vec![1, 2, 3])]);
        let k4 = net(
            &[(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)],
            &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
        );
        assert_eq!(
            enumerate_paths_oracle(&k4, 1, 4, ORACLE_LIMIT)
                .unwrap()
                .len(),
            5
        );
        let all = k_shortest_candidate_paths(&k4, 1, 4, 10);
        assert_eq!(all.len(), 5);
        assert_eq!(all[1], (2.0, vec![1, 2, 4]));
        assert_eq!(all[4], (3.0, vec![1, 3, 2, 4]));
        let path = net(&[(1, 0.0), (2, 0.0), (3, 0.0)], &[(1, 2), (2, 3)]);
        assert_eq!(
            enumerate_paths_oracle(&path, 1, 3, ORACLE_LIMIT).unwrap(),
            vec![vec![1, 2, 3]]
        );
        assert_eq!(
            enumerate_paths_oracle(&k4, 1, 4, 3),
            Err(PathError::Guard(3))
        );
    }

    #[test]
    fn fig3_twelve_paths() {
        let g = net(
            &[
                (1, 0.0),
                (2, 0.0),
                (3, 0.0),
                (4, 0.0),
                (5, 0.0),
                (6, 0.0),
                (7, 0.0),
                (8, 0.0),
                (9, 0.0),
            ],
            &[
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 8),
                (8, 9),
                (9, 1),
            ],
        );
        let d = Demand::new(1, 9, true, ["f1", "f2", "f3"]);
        let aux = sfc(
            &g,
            &[("f1", &[2, 3]), ("f2", &[4, 5, 6]), ("f3", &[7, 8])],
            &d,
        );
        let level_arcs = aux
            .arcs()
            .iter()
            .filter(|a| aux.node(a.from).nf().is_some() && aux.node(a.to).nf().is_some())
            .count();
        assert_eq!(level_arcs, 12);
        let all = enumerate_service_paths(&aux, &d, ORACLE_LIMIT).unwrap();
        assert_eq!(all.len(), 12);
        assert!(all.iter().all(|p| p.respects_order(&d.nfs)));
        let best = sfc_shortest_path(&aux, &d).unwrap();
        let min = all
            .iter()
            .map(|p| p.total_weight)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best.total_weight, min);
        assert_eq!(
            k_shortest_service_paths(&aux, &d, 3).unwrap()[0].total_weight,
            min
        );
    }
}

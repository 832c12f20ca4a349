use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::{NodeId, PhysicalNetwork};

/// Single-source shortest-path tree over internal node indices.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    pub fn distance(&self, target: usize) -> Option<f64> {
        let d = self.dist[target];
        d.is_finite().then_some(d)
    }

    /// Index path from the source to `target`, if reachable.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.pred[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PhysicalNetwork {
    /// Dijkstra from `source`. Ties keep the first predecessor found while
    /// settling nodes in (distance, index) order.
    pub fn shortest_paths_from(&self, source: usize) -> ShortestPaths {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((Key(0.0), source)));
        while let Some(Reverse((Key(d), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, w) in self.neighbors(u) {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some(u);
                    heap.push(Reverse((Key(nd), v)));
                }
            }
        }
        ShortestPaths { source, dist, pred }
    }

    /// Shortest `from`-`to` path as node ids with its weight.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Option<(f64, Vec<NodeId>)> {
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        let sp = self.shortest_paths_from(a);
        let path = sp.path_to(b)?;
        Some((
            sp.dist[b],
            path.into_iter().map(|i| self.nodes()[i].id).collect(),
        ))
    }

    /// Breadth-first reachability test.
    pub fn reachable(&self, from: NodeId, to: NodeId) -> bool {
        let (Some(a), Some(b)) = (self.index_of(from), self.index_of(to)) else {
            return false;
        };
        self.bfs_reach(a)[b]
    }

    fn bfs_reach(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([source]);
        seen[source] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Weak connectivity (edges taken as undirected).
    pub fn is_connected(&self) -> bool {
        if self.len() <= 1 {
            return true;
        }
        let adj = self.undirected_adjacency();
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Connected with at least three nodes and no articulation point.
    pub fn is_two_connected(&self) -> bool {
        self.len() >= 3 && self.is_connected() && self.articulation_points().is_empty()
    }

    /// Validation warnings that do not reject the network.
    pub fn warnings(&self) -> Vec<String> {
        let cuts = self.articulation_points();
        if self.len() >= 3 && !cuts.is_empty() {
            vec![format!(
                "substrate is not 2-connected (cut nodes: {cuts:?})"
            )]
        } else {
            Vec::new()
        }
    }

    /// Articulation points of the underlying undirected graph.
    pub fn articulation_points(&self) -> Vec<NodeId> {
        articulation_points(&self.undirected_adjacency())
            .into_iter()
            .map(|i| self.nodes()[i].id)
            .collect()
    }

    fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in self.edges() {
            let a = self.index_of(e.u).expect("validated");
            let b = self.index_of(e.v).expect("validated");
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

/// Cut vertices of an undirected graph given as sorted adjacency lists.
pub(crate) fn articulation_points(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut is_cut = vec![false; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // iterative DFS: (node, parent, next neighbour position)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        let mut root_children = 0;
        while let Some(&mut (u, parent, ref mut pos)) = stack.last_mut() {
            if *pos < adj[u].len() {
                let v = adj[u][*pos];
                *pos += 1;
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    if u == root {
                        root_children += 1;
                    }
                    stack.push((v, u, 0));
                } else if v != parent {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[u]);
                    if parent != root && low[u] >= disc[parent] {
                        is_cut[parent] = true;
                    }
                }
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    (0..n).filter(|&i| is_cut[i]).collect()
}

/// Connected (ignoring direction) with at least three nodes and no cut vertex.
pub(crate) fn undirected_two_connected(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    if n < 3 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s) && articulation_points(adj).is_empty()
}

#[cfg(test)]
mod tests {
    use crate::netmodel::{Edge, NodeRecord, PhysicalNetwork};

    fn net(n: u32, edges: &[(u32, u32, f64)]) -> PhysicalNetwork {
        PhysicalNetwork::new(
            (1..=n)
                .map(|i| NodeRecord::new(i, 0.0, Vec::<String>::new()))
                .collect(),
            edges
                .iter()
                .map(|&(u, v, weight)| Edge { u, v, weight })
                .collect(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn ring_shortest_path() {
        let ring = net(
            5,
            &[
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 1, 1.0),
            ],
        );
        let (w, p) = ring.shortest_path(1, 3).unwrap();
        assert_eq!(w, 2.0);
        assert_eq!(p, vec![1, 2, 3]);
        assert_eq!(ring.shortest_path(1, 4).unwrap().0, 2.0);
        assert!(ring.is_two_connected());
    }

    #[test]
    fn cut_vertices() {
        let path = net(4, &[(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
        assert_eq!(path.articulation_points(), vec![2, 3]);
        assert!(!path.is_two_connected());
        let bowtie = net(
            5,
            &[
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 1, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 3, 1.0),
            ],
        );
        assert_eq!(bowtie.articulation_points(), vec![3]);
    }
}

//! Auxiliary NF-enabled network.
//!
//! Every physical node `i` able to host NF `f` gets a copy `i@f`. Arcs join
//! copies of logically adjacent NFs and carry the shortest physical distance
//! between their hosts together with one realizing physical path. Demand
//! endpoints are added as `s@s` / `t@t` nodes with failure probability 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::netmodel::graph::undirected_two_connected;
use crate::netmodel::{Demand, ForkSpec, NfId, NodeId, PhysicalNetwork, Scenario, ShortestPaths};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuxError {
    #[error("no host of `{from}` can reach a host of `{to}`")]
    UnreachableLevel { from: NfId, to: NfId },
    #[error("node {node} cannot reach any host of `{nf}`")]
    UnreachableEndpoint { node: NodeId, nf: NfId },
    #[error("NF `{0}` has no candidate host")]
    EmptyPool(NfId),
    #[error("node {0} is not in the substrate")]
    UnknownNode(NodeId),
    #[error("demand {0} is ordered; use the SFC construction")]
    Ordered(String),
    #[error("demand {demand} does not follow the forwarding graph")]
    NotInForwarding { demand: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AuxTag {
    Source,
    Nf(NfId),
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuxNode {
    pub phys: NodeId,
    pub tag: AuxTag,
}

impl AuxNode {
    pub fn copy(phys: NodeId, nf: impl Into<NfId>) -> Self {
        Self {
            phys,
            tag: AuxTag::Nf(nf.into()),
        }
    }

    pub fn nf(&self) -> Option<&NfId> {
        match &self.tag {
            AuxTag::Nf(f) => Some(f),
            _ => None,
        }
    }
}

impl fmt::Display for AuxNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tag {
            AuxTag::Source => write!(f, "{}@s", self.phys),
            AuxTag::Target => write!(f, "{}@t", self.phys),
            AuxTag::Nf(nf) => write!(f, "{}@{nf}", self.phys),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxArc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    /// Physical node sequence from `from.phys` to `to.phys`.
    pub realization: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    Sfc,
    NonChained,
}

/// NF forwarding graph: a chain, or an SFC-Fork (shared prefix plus branches).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Forwarding {
    Chain(Vec<NfId>),
    Fork(ForkSpec),
}

impl Forwarding {
    pub fn chain<I: IntoIterator<Item = S>, S: Into<NfId>>(nfs: I) -> Self {
        Self::Chain(nfs.into_iter().map(Into::into).collect())
    }

    /// Root-to-leaf NF sequences.
    pub fn chains(&self) -> Vec<Vec<NfId>> {
        match self {
            Self::Chain(c) => vec![c.clone()],
            Self::Fork(f) if f.branches.is_empty() => vec![f.shared.clone()],
            Self::Fork(f) => (0..f.branches.len()).map(|b| f.chain(b)).collect(),
        }
    }

    /// Distinct logical edges `(f_i, f_j)` in first-seen order.
    pub fn logical_edges(&self) -> Vec<(NfId, NfId)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for chain in self.chains() {
            for w in chain.windows(2) {
                let e = (w[0].clone(), w[1].clone());
                if seen.insert(e.clone()) {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn nfs(&self) -> BTreeSet<NfId> {
        self.chains().into_iter().flatten().collect()
    }
}

#[derive(Debug, Clone)]
pub struct AuxNetwork {
    kind: AuxKind,
    nodes: Vec<AuxNode>,
    probs: Vec<f64>,
    arcs: Vec<AuxArc>,
    out: Vec<Vec<usize>>,
    index: HashMap<AuxNode, usize>,
    /// Logical edges the arcs were built from (both directions when non-chained).
    logical: BTreeSet<(NfId, NfId)>,
    /// Copies of each NF in this network.
    pools: BTreeMap<NfId, BTreeSet<NodeId>>,
    network: PhysicalNetwork,
    trees: HashMap<usize, ShortestPaths>,
}

/// One copy per (physical node, supported NF) pair.
pub fn build_aux_nodes(scenario: &Scenario) -> Vec<AuxNode> {
    let mut out: Vec<AuxNode> = scenario
        .network
        .nodes()
        .iter()
        .flat_map(|n| {
            n.capabilities
                .iter()
                .map(move |f| AuxNode::copy(n.id, f.clone()))
        })
        .collect();
    out.sort();
    out
}

/// Level arcs of a forwarding graph over the scenario's candidate pools.
pub fn build_sfc_arcs(
    scenario: &Scenario,
    forwarding: &Forwarding,
) -> Result<AuxNetwork, AuxError> {
    AuxNetwork::sfc(&scenario.network, &scenario.catalog.pools, forwarding)
}

/// Arcs between every pair of required-NF copies, both directions, plus
/// the demand's endpoints.
pub fn build_nonchained_arcs(scenario: &Scenario, demand: &Demand) -> Result<AuxNetwork, AuxError> {
    if demand.ordered {
        return Err(AuxError::Ordered(demand.label()));
    }
    let mut aux = AuxNetwork::nonchained(&scenario.network, &scenario.catalog.pools, &demand.nfs)?;
    aux.attach(demand)?;
    Ok(aux)
}

/// Adds the demand's source and target nodes to an SFC or non-chained network.
pub fn attach_endpoints(mut aux: AuxNetwork, demand: &Demand) -> Result<AuxNetwork, AuxError> {
    aux.attach(demand)?;
    Ok(aux)
}

impl AuxNetwork {
    fn empty(kind: AuxKind, network: &PhysicalNetwork) -> Self {
        Self {
            kind,
            nodes: Vec::new(),
            probs: Vec::new(),
            arcs: Vec::new(),
            out: Vec::new(),
            index: HashMap::new(),
            logical: BTreeSet::new(),
            pools: BTreeMap::new(),
            network: network.clone(),
            trees: HashMap::new(),
        }
    }

    fn add_copies(
        &mut self,
        pools: &BTreeMap<NfId, BTreeSet<NodeId>>,
        nfs: &BTreeSet<NfId>,
    ) -> Result<(), AuxError> {
        let mut copies = Vec::new();
        for f in nfs {
            let pool = pools
                .get(f)
                .filter(|p| !p.is_empty())
                .ok_or_else(|| AuxError::EmptyPool(f.clone()))?;
            for &i in pool {
                if !self.network.contains(i) {
                    return Err(AuxError::UnknownNode(i));
                }
                copies.push(AuxNode::copy(i, f.clone()));
            }
            self.pools.insert(f.clone(), pool.clone());
        }
        copies.sort();
        for c in copies {
            self.add_node(c);
        }
        Ok(())
    }

    fn add_node(&mut self, node: AuxNode) -> usize {
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        let prob = match node.tag {
            AuxTag::Nf(_) => self.network.failure_prob(node.phys),
            _ => 0.0,
        };
        let i = self.nodes.len();
        self.index.insert(node.clone(), i);
        self.nodes.push(node);
        self.probs.push(prob);
        self.out.push(Vec::new());
        i
    }

    fn tree(&mut self, phys: NodeId) -> &ShortestPaths {
        let idx = self.network.index_of(phys).expect("host checked");
        let net = &self.network;
        self.trees
            .entry(idx)
            .or_insert_with(|| net.shortest_paths_from(idx))
    }

    /// Adds arc `from -> to` when the hosts are connected; returns whether it was added.
    fn connect(&mut self, from: usize, to: usize) -> bool {
        let a = self.nodes[from].phys;
        let b = self.nodes[to].phys;
        let b_idx = self.network.index_of(b).expect("host checked");
        let tree = self.tree(a);
        let Some(path) = tree.path_to(b_idx) else {
            return false;
        };
        let weight = tree.dist[b_idx];
        let realization = path
            .into_iter()
            .map(|i| self.network.nodes()[i].id)
            .collect();
        self.out[from].push(self.arcs.len());
        self.arcs.push(AuxArc {
            from,
            to,
            weight,
            realization,
        });
        true
    }

    fn copies_of(&self, nf: &str) -> Vec<usize> {
        self.pools
            .get(nf)
            .map(|pool| {
                pool.iter()
                    .map(|&i| self.index[&AuxNode::copy(i, nf)])
                    .collect()
            })
            .unwrap_or_default()
    }

    fn link_levels(&mut self, from: &NfId, to: &NfId) -> Result<(), AuxError> {
        let mut any = false;
        for a in self.copies_of(from) {
            for b in self.copies_of(to) {
                any |= self.connect(a, b);
            }
        }
        self.logical.insert((from.clone(), to.clone()));
        if any {
            Ok(())
        } else {
            Err(AuxError::UnreachableLevel {
                from: from.clone(),
                to: to.clone(),
            })
        }
    }

    /// SFC construction over explicit pools (e.g. a deployment).
    pub fn sfc(
        network: &PhysicalNetwork,
        pools: &BTreeMap<NfId, BTreeSet<NodeId>>,
        forwarding: &Forwarding,
    ) -> Result<Self, AuxError> {
        let mut aux = Self::empty(AuxKind::Sfc, network);
        aux.add_copies(pools, &forwarding.nfs())?;
        for (a, b) in forwarding.logical_edges() {
            aux.link_levels(&a, &b)?;
        }
        Ok(aux)
    }

    /// Non-chained construction over explicit pools, without endpoints.
    pub fn nonchained(
        network: &PhysicalNetwork,
        pools: &BTreeMap<NfId, BTreeSet<NodeId>>,
        nfs: &[NfId],
    ) -> Result<Self, AuxError> {
        let mut aux = Self::empty(AuxKind::NonChained, network);
        let set: BTreeSet<NfId> = nfs.iter().cloned().collect();
        aux.add_copies(pools, &set)?;
        for a in &set {
            for b in &set {
                if a != b {
                    aux.link_levels(a, b)?;
                }
            }
        }
        Ok(aux)
    }

    fn attach(&mut self, demand: &Demand) -> Result<(), AuxError> {
        for end in [demand.source, demand.target] {
            if !self.network.contains(end) {
                return Err(AuxError::UnknownNode(end));
            }
        }
        let (firsts, lasts): (Vec<NfId>, Vec<NfId>) = match self.kind {
            AuxKind::Sfc => {
                let (Some(first), Some(last)) = (demand.nfs.first(), demand.nfs.last()) else {
                    return Err(AuxError::NotInForwarding {
                        demand: demand.label(),
                    });
                };
                let follows = demand.nfs.iter().all(|f| self.pools.contains_key(f))
                    && demand
                        .nfs
                        .windows(2)
                        .all(|w| self.logical.contains(&(w[0].clone(), w[1].clone())));
                if !follows {
                    return Err(AuxError::NotInForwarding {
                        demand: demand.label(),
                    });
                }
                (vec![first.clone()], vec![last.clone()])
            }
            AuxKind::NonChained => {
                if !demand.nfs.iter().all(|f| self.pools.contains_key(f)) {
                    return Err(AuxError::NotInForwarding {
                        demand: demand.label(),
                    });
                }
                (demand.nfs.clone(), demand.nfs.clone())
            }
        };
        let s = self.add_node(AuxNode {
            phys: demand.source,
            tag: AuxTag::Source,
        });
        let t = self.add_node(AuxNode {
            phys: demand.target,
            tag: AuxTag::Target,
        });
        for f in &firsts {
            let mut any = false;
            for c in self.copies_of(f) {
                any |= self.has_arc(s, c) || self.connect(s, c);
            }
            if !any {
                return Err(AuxError::UnreachableEndpoint {
                    node: demand.source,
                    nf: f.clone(),
                });
            }
        }
        for f in &lasts {
            let mut any = false;
            for c in self.copies_of(f) {
                any |= self.has_arc(c, t) || self.connect(c, t);
            }
            if !any {
                return Err(AuxError::UnreachableEndpoint {
                    node: demand.target,
                    nf: f.clone(),
                });
            }
        }
        Ok(())
    }

    fn has_arc(&self, from: usize, to: usize) -> bool {
        self.out[from].iter().any(|&a| self.arcs[a].to == to)
    }

    pub fn kind(&self) -> AuxKind {
        self.kind
    }

    pub fn nodes(&self) -> &[AuxNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &AuxNode {
        &self.nodes[idx]
    }

    pub fn arcs(&self) -> &[AuxArc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, node: &AuxNode) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn source(&self, phys: NodeId) -> Option<usize> {
        self.index_of(&AuxNode {
            phys,
            tag: AuxTag::Source,
        })
    }

    pub fn target(&self, phys: NodeId) -> Option<usize> {
        self.index_of(&AuxNode {
            phys,
            tag: AuxTag::Target,
        })
    }

    /// Outgoing arc indices of an aux node.
    pub fn out_arcs(&self, idx: usize) -> &[usize] {
        &self.out[idx]
    }

    /// Failure probability of an aux node (0 for endpoints).
    pub fn failure_prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn network(&self) -> &PhysicalNetwork {
        &self.network
    }

    pub fn logical_edges(&self) -> &BTreeSet<(NfId, NfId)> {
        &self.logical
    }

    /// Same arcs with failure probabilities taken from `network`, which must
    /// have the same nodes and edges.
    pub fn with_failure_probs(&self, network: &PhysicalNetwork) -> Self {
        let mut out = self.clone();
        for (i, node) in out.nodes.iter().enumerate() {
            if node.nf().is_some() {
                out.probs[i] = network.failure_prob(node.phys);
            }
        }
        out.network = network.clone();
        out
    }

    /// Every arc joins copies of a recorded logical edge, or is an endpoint arc.
    pub fn respects_levels(&self) -> bool {
        self.arcs
            .iter()
            .all(|a| match (&self.nodes[a.from].tag, &self.nodes[a.to].tag) {
                (AuxTag::Nf(x), AuxTag::Nf(y)) => self.logical.contains(&(x.clone(), y.clone())),
                (AuxTag::Source, AuxTag::Nf(_)) | (AuxTag::Nf(_), AuxTag::Target) => true,
                _ => false,
            })
    }

    /// 2-connectivity of the underlying undirected aux graph.
    pub fn is_two_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.len()];
        for a in &self.arcs {
            if a.from != a.to {
                adj[a.from].push(a.to);
                adj[a.to].push(a.from);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        undirected_two_connected(&adj)
    }

    /// Text edge list, one `from to weight realization` line per arc.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .arcs
            .iter()
            .map(|a| {
                let path: Vec<String> = a.realization.iter().map(|n| n.to_string()).collect();
                format!(
                    "{} {} {} {}",
                    self.nodes[a.from],
                    self.nodes[a.to],
                    a.weight,
                    path.join("-")
                )
            })
            .collect();
        lines.sort();
        lines.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Edge, NodeRecord, Sampling};

    fn ring(n: u32, caps: &[(u32, &[&str])]) -> PhysicalNetwork {
        let nodes = (1..=n)
            .map(|i| {
                let c = caps
                    .iter()
                    .find(|(id, _)| *id == i)
                    .map(|(_, c)| c.to_vec())
                    .unwrap_or_default();
                NodeRecord::new(i, 0.1, c)
            })
            .collect();
        let edges = (1..=n)
            .map(|i| Edge {
                u: i,
                v: i % n + 1,
                weight: 1.0,
            })
            .collect();
        PhysicalNetwork::new(nodes, edges, false).unwrap()
    }

    fn scenario(net: PhysicalNetwork, nfs: &[&str], demands: Vec<Demand>) -> Scenario {
        let limits = nfs.iter().map(|f| (f.to_string(), 10)).collect();
        Scenario::new(net, demands, limits, Sampling::default()).unwrap()
    }

    #[test]
    fn copies_per_capability() {
        let net = ring(4, &[(3, &["f1", "f2"]), (1, &["f1"])]);
        let sc = scenario(net, &["f1", "f2"], vec![]);
        let nodes = build_aux_nodes(&sc);
        assert_eq!(
            nodes,
            vec![
                AuxNode::copy(1, "f1"),
                AuxNode::copy(3, "f1"),
                AuxNode::copy(3, "f2")
            ]
        );
        let bare = scenario(ring(3, &[]), &["f1"], vec![]);
        assert!(build_aux_nodes(&bare).is_empty());
    }

    #[test]
    fn ring_arc_weight() {
        let net = ring(5, &[(1, &["f1"]), (3, &["f2"])]);
        let sc = scenario(net, &["f1", "f2"], vec![]);
        let aux = build_sfc_arcs(&sc, &Forwarding::chain(["f1", "f2"])).unwrap();
        assert_eq!(aux.arcs().len(), 1);
        assert_eq!(aux.arcs()[0].weight, 2.0);
        assert_eq!(aux.arcs()[0].realization, vec![1, 2, 3]);
        let single = build_sfc_arcs(&sc, &Forwarding::chain(["f1"])).unwrap();
        assert!(single.arcs().is_empty());
    }

    #[test]
    fn endpoints_and_self_arc() {
        let net = ring(5, &[(1, &["f1"]), (3, &["f2"]), (4, &["f2"])]);
        let d = Demand::new(1, 5, true, ["f1", "f2"]);
        let sc = scenario(net, &["f1", "f2"], vec![d.clone()]);
        let aux = attach_endpoints(
            build_sfc_arcs(&sc, &Forwarding::chain(["f1", "f2"])).unwrap(),
            &d,
        )
        .unwrap();
        let s = aux.source(1).unwrap();
        let arc = &aux.arcs()[aux.out_arcs(s)[0]];
        assert_eq!(
            (arc.weight, aux.node(arc.to).clone()),
            (0.0, AuxNode::copy(1, "f1"))
        );
        assert_eq!(aux.out_arcs(s).len(), 1);
        let t = aux.target(5).unwrap();
        assert_eq!(aux.arcs().iter().filter(|a| a.to == t).count(), 2);
        assert!(aux.respects_levels());
        assert_eq!(aux.failure_prob(s), 0.0);
    }

    #[test]
    fn unreachable_target() {
        let nodes = vec![
            NodeRecord::new(1, 0.1, ["f1"]),
            NodeRecord::new(2, 0.1, Vec::<String>::new()),
            NodeRecord::new(3, 0.1, Vec::<String>::new()),
        ];
        let edges = vec![
            Edge {
                u: 1,
                v: 2,
                weight: 1.0,
            },
            Edge {
                u: 3,
                v: 2,
                weight: 1.0,
            },
        ];
        let net = PhysicalNetwork::new(nodes, edges, true).unwrap();
        let d = Demand::new(1, 3, true, ["f1"]);
        let sc = scenario(net, &["f1"], vec![d.clone()]);
        let aux = build_sfc_arcs(&sc, &Forwarding::chain(["f1"])).unwrap();
        assert_eq!(
            attach_endpoints(aux, &d).unwrap_err(),
            AuxError::UnreachableEndpoint {
                node: 3,
                nf: "f1".into()
            }
        );
    }

    #[test]
    fn nonchained_pairs_both_directions() {
        let net = ring(6, &[(1, &["f1"]), (2, &["f2"]), (4, &["f1", "f2"])]);
        let d = Demand::new(3, 6, false, ["f1", "f2"]);
        let sc = scenario(net, &["f1", "f2"], vec![d.clone()]);
        let aux = build_nonchained_arcs(&sc, &d).unwrap();
        let between = aux
            .arcs()
            .iter()
            .filter(|a| aux.node(a.from).nf().is_some() && aux.node(a.to).nf().is_some())
            .count();
        assert_eq!(between, 2 * 2 * 2);
        // s attaches to all four copies and all four copies reach t
        assert_eq!(aux.out_arcs(aux.source(3).unwrap()).len(), 4);
        assert_eq!(
            aux.arcs()
                .iter()
                .filter(|a| a.to == aux.target(6).unwrap())
                .count(),
            4
        );
        assert!(aux.respects_levels());
    }

    #[test]
    fn fork_shares_prefix_arcs() {
        let net = ring(6, &[(1, &["a"]), (2, &["b"]), (3, &["c"]), (4, &["d"])]);
        let sc = scenario(net, &["a", "b", "c", "d"], vec![]);
        let fork = ForkSpec {
            shared: vec!["a".into(), "b".into()],
            branches: vec![vec!["c".into()], vec!["d".into()]],
        };
        let aux = build_sfc_arcs(&sc, &Forwarding::Fork(fork)).unwrap();
        assert_eq!(aux.arcs().len(), 3);
        assert!(aux.dump().contains("2@b 4@d 2 2-3-4"));
    }
}

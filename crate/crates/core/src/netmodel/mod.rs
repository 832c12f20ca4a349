//! Physical substrate networks, NF catalogs, demands and scenarios.
//!
//! A [`Scenario`] bundles everything an experiment needs: the substrate
//! graph with per-node failure probabilities and NF capabilities, the NF
//! catalog (pools and deployment limits), the demand list and the sampling
//! parameters used to redraw failure probabilities. Scenarios are read from
//! and written to the line-oriented `.scn` format handled by [`parse`].

pub(crate) mod graph;
pub mod parse;
pub mod sampling;
pub mod topology;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::ShortestPaths;
pub use parse::{parse_scenario, write_scenario};
pub use sampling::{failure_quantile, sample_failure_probs};
pub use topology::{builtin_scenario, builtin_topology};

/// Physical node identifier.
pub type NodeId = u32;

/// Network function identifier (`f1`, `fw`, ...).
pub type NfId = String;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown node {node}")]
    UnknownNode { line: usize, node: NodeId },
    #[error("line {line}: undeclared network function `{nf}`")]
    UnknownNf { line: usize, nf: NfId },
    #[error("invalid scenario: {0}")]
    Invariant(String),
    #[error("unknown topology `{0}` (expected `nsf` or `coronet`)")]
    UnknownTopology(String),
    #[error("sampling mean {0} is outside (0, 1)")]
    InvalidMean(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub failure_prob: f64,
    pub capabilities: BTreeSet<NfId>,
}

impl NodeRecord {
    pub fn new<I, S>(id: NodeId, failure_prob: f64, capabilities: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<NfId>,
    {
        Self {
            id,
            failure_prob,
            capabilities: capabilities.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_nf_enabled(&self) -> bool {
        !self.capabilities.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

/// Substrate graph. Undirected unless `directed` is set.
#[derive(Debug, Clone)]
pub struct PhysicalNetwork {
    nodes: Vec<NodeRecord>,
    edges: Vec<Edge>,
    directed: bool,
    index: HashMap<NodeId, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for PhysicalNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && self.directed == other.directed
    }
}

impl PhysicalNetwork {
    /// Builds and validates a network: unique ids, known endpoints,
    /// nonnegative weights, probabilities in `[0, 1]` and connectivity.
    pub fn new(nodes: Vec<NodeRecord>, edges: Vec<Edge>, directed: bool) -> Result<Self, NetError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (pos, node) in nodes.iter().enumerate() {
            if index.insert(node.id, pos).is_some() {
                return Err(NetError::Invariant(format!(
                    "duplicate node id {}",
                    node.id
                )));
            }
            if !(0.0..=1.0).contains(&node.failure_prob) {
                return Err(NetError::Invariant(format!(
                    "node {} failure probability {} outside [0, 1]",
                    node.id, node.failure_prob
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            let (Some(&a), Some(&b)) = (index.get(&e.u), index.get(&e.v)) else {
                return Err(NetError::Invariant(format!(
                    "edge {}-{} has an unknown endpoint",
                    e.u, e.v
                )));
            };
            if !(e.weight >= 0.0) || !e.weight.is_finite() {
                return Err(NetError::Invariant(format!(
                    "edge {}-{} has invalid weight {}",
                    e.u, e.v, e.weight
                )));
            }
            adjacency[a].push((b, e.weight));
            if !directed {
                adjacency[b].push((a, e.weight));
            }
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        }
        let net = Self {
            nodes,
            edges,
            directed,
            index,
            adjacency,
        };
        if !net.is_connected() {
            return Err(NetError::Invariant(
                "substrate network is not connected".into(),
            ));
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeRecord> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn failure_prob(&self, id: NodeId) -> f64 {
        self.node(id).map_or(0.0, |n| n.failure_prob)
    }

    /// Outgoing neighbours by internal index, sorted by index.
    pub fn neighbors(&self, idx: usize) -> &[(usize, f64)] {
        &self.adjacency[idx]
    }

    pub fn mean_degree(&self) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let factor = if self.directed { 1.0 } else { 2.0 };
        factor * self.edges.len() as f64 / self.nodes.len() as f64
    }

    /// Copy of the network with failure probabilities replaced through `f`.
    pub fn with_failure_probs(&self, mut f: impl FnMut(&NodeRecord) -> f64) -> Self {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.failure_prob = f(node).clamp(0.0, 1.0);
        }
        out
    }

    /// Copy of the network with NF capabilities replaced through `f`.
    pub fn with_capabilities(&self, mut f: impl FnMut(&NodeRecord) -> BTreeSet<NfId>) -> Self {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.capabilities = f(node);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub source: NodeId,
    pub target: NodeId,
    /// `true` for an SFC request whose NFs must be visited in list order.
    pub ordered: bool,
    pub nfs: Vec<NfId>,
    /// Set when an unordered request was given an imposed order.
    #[serde(default)]
    pub canonicalized: bool,
}

impl Demand {
    pub fn new<I, S>(source: NodeId, target: NodeId, ordered: bool, nfs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<NfId>,
    {
        Self {
            source,
            target,
            ordered,
            nfs: nfs.into_iter().map(Into::into).collect(),
            canonicalized: false,
        }
    }

    pub fn requires(&self, nf: &str) -> bool {
        self.nfs.iter().any(|f| f == nf)
    }

    /// `|F_st|!`, the number of orderings of the requested NFs.
    pub fn factorial(&self) -> f64 {
        (1..=self.nfs.len()).map(|k| k as f64).product()
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.source, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NfCatalog {
    /// Deployment limit `N_f` per NF; the key set is the catalog `F`.
    pub limits: BTreeMap<NfId, u32>,
    /// Candidate pool `V^f_P` per NF, derived from node capabilities.
    pub pools: BTreeMap<NfId, BTreeSet<NodeId>>,
}

impl NfCatalog {
    pub fn from_network(network: &PhysicalNetwork, limits: BTreeMap<NfId, u32>) -> Self {
        let mut pools: BTreeMap<NfId, BTreeSet<NodeId>> = limits
            .keys()
            .map(|f| (f.clone(), BTreeSet::new()))
            .collect();
        for node in network.nodes() {
            for f in &node.capabilities {
                pools.entry(f.clone()).or_default().insert(node.id);
            }
        }
        Self { limits, pools }
    }

    pub fn nfs(&self) -> impl Iterator<Item = &NfId> {
        self.limits.keys()
    }

    pub fn pool(&self, nf: &str) -> Option<&BTreeSet<NodeId>> {
        self.pools.get(nf)
    }

    pub fn limit(&self, nf: &str) -> u32 {
        self.limits.get(nf).copied().unwrap_or(0)
    }

    /// `V^F_P`: every node able to host at least one catalog NF.
    pub fn enabled_nodes(&self) -> BTreeSet<NodeId> {
        self.pools.values().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub mean: f64,
    pub variance: f64,
    pub samples: u32,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            mean: 0.25,
            variance: 0.001,
            samples: 25,
            seed: 0,
        }
    }
}

/// SFC-Fork description: a shared prefix followed by one tail per branch.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ForkSpec {
    pub shared: Vec<NfId>,
    pub branches: Vec<Vec<NfId>>,
}

impl ForkSpec {
    pub fn chain(&self, branch: usize) -> Vec<NfId> {
        let mut out = self.shared.clone();
        if let Some(tail) = self.branches.get(branch) {
            out.extend(tail.iter().cloned());
        }
        out
    }

    /// Branch whose full chain equals `nfs`.
    pub fn branch_of(&self, nfs: &[NfId]) -> Option<usize> {
        if self.branches.is_empty() {
            return (self.shared.as_slice() == nfs).then_some(0);
        }
        (0..self.branches.len()).find(|&b| self.chain(b).as_slice() == nfs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: PhysicalNetwork,
    pub demands: Vec<Demand>,
    pub catalog: NfCatalog,
    pub sampling: Sampling,
    /// Per (node, NF) deployment cost overrides; missing entries cost 1.
    pub costs: BTreeMap<(NodeId, NfId), f64>,
    pub fork: Option<ForkSpec>,
    /// Explicit deployment `NF -> nodes`, when the file provides one.
    pub deployment: Option<BTreeMap<NfId, BTreeSet<NodeId>>>,
}

impl Scenario {
    /// Assembles a scenario and checks every cross-reference.
    pub fn new(
        network: PhysicalNetwork,
        demands: Vec<Demand>,
        limits: BTreeMap<NfId, u32>,
        sampling: Sampling,
    ) -> Result<Self, NetError> {
        let catalog = NfCatalog::from_network(&network, limits);
        let scenario = Self {
            network,
            demands,
            catalog,
            sampling,
            costs: BTreeMap::new(),
            fork: None,
            deployment: None,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        for node in self.network.nodes() {
            for f in &node.capabilities {
                if !self.catalog.limits.contains_key(f) {
                    return Err(NetError::Invariant(format!(
                        "node {} lists undeclared NF `{f}`",
                        node.id
                    )));
                }
            }
        }
        for (f, &limit) in &self.catalog.limits {
            if limit < 1 {
                return Err(NetError::Invariant(format!("NF `{f}` has limit 0")));
            }
        }
        for (i, d) in self.demands.iter().enumerate() {
            if d.source == d.target {
                return Err(NetError::Invariant(format!(
                    "demand {i} has source equal to target"
                )));
            }
            for end in [d.source, d.target] {
                if !self.network.contains(end) {
                    return Err(NetError::Invariant(format!(
                        "demand {i} references unknown node {end}"
                    )));
                }
            }
            if d.nfs.is_empty() {
                return Err(NetError::Invariant(format!("demand {i} requests no NF")));
            }
            let distinct: BTreeSet<&NfId> = d.nfs.iter().collect();
            if distinct.len() != d.nfs.len() {
                return Err(NetError::Invariant(format!("demand {i} repeats an NF")));
            }
            for f in &d.nfs {
                match self.catalog.pool(f) {
                    None => {
                        return Err(NetError::Invariant(format!(
                            "demand {i} requests undeclared NF `{f}`"
                        )))
                    }
                    Some(pool) if pool.is_empty() => {
                        return Err(NetError::Invariant(format!(
                            "NF `{f}` requested by demand {i} has an empty pool"
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        let s = &self.sampling;
        if !(s.mean > 0.0 && s.mean < 1.0) {
            return Err(NetError::Invariant(format!(
                "sampling mean {} outside (0, 1)",
                s.mean
            )));
        }
        if !(s.variance > 0.0) {
            return Err(NetError::Invariant(format!(
                "sampling variance {} must be positive",
                s.variance
            )));
        }
        if s.samples < 1 {
            return Err(NetError::Invariant(
                "sampling needs at least one sample".into(),
            ));
        }
        for ((node, f), cost) in &self.costs {
            if !self.network.contains(*node)
                || !self.catalog.limits.contains_key(f)
                || !(*cost >= 0.0)
            {
                return Err(NetError::Invariant(format!(
                    "invalid cost entry {node} {f} {cost}"
                )));
            }
        }
        if let Some(fork) = &self.fork {
            let mut seen = BTreeSet::new();
            for f in fork.shared.iter().chain(fork.branches.iter().flatten()) {
                if !self.catalog.limits.contains_key(f) {
                    return Err(NetError::Invariant(format!(
                        "fork uses undeclared NF `{f}`"
                    )));
                }
                if !seen.insert(f) {
                    return Err(NetError::Invariant(format!("fork repeats NF `{f}`")));
                }
            }
            if fork.shared.is_empty() {
                return Err(NetError::Invariant(
                    "fork needs a nonempty shared prefix".into(),
                ));
            }
        }
        if let Some(dep) = &self.deployment {
            for (f, nodes) in dep {
                let pool = self.catalog.pool(f).ok_or_else(|| {
                    NetError::Invariant(format!("deployment of undeclared NF `{f}`"))
                })?;
                if !nodes.is_subset(pool) {
                    return Err(NetError::Invariant(format!(
                        "deployment of `{f}` leaves its pool"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Deployment cost `O(i_f)`; defaults to 1.
    pub fn deploy_cost(&self, node: NodeId, nf: &str) -> f64 {
        self.costs
            .get(&(node, nf.to_string()))
            .copied()
            .unwrap_or(1.0)
    }

    /// Same scenario on a network with redrawn failure probabilities.
    pub fn with_network(&self, network: PhysicalNetwork) -> Self {
        let mut out = self.clone();
        out.catalog = NfCatalog::from_network(&network, self.catalog.limits.clone());
        out.network = network;
        out
    }
}

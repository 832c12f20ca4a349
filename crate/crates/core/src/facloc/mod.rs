//! SFC-Fork provisioning through a reduction to 1-level facility location.
//!
//! A fork is a shared NF prefix followed by branches. Each request picks a
//! host for every NF of its root-to-leaf chain. A solution costs
//!
//! * one deployment cost per opened `(node, NF)` copy,
//! * `d(s, first host) + d(last host, t)` per request,
//! * one physical distance per distinct forest arc between consecutive hosts.
//!
//! Shared subpaths become facilities, bundles of requests that share a
//! disjoint subpath become clients, and a facility-location solution is
//! lifted back by opening every copy on the chosen subpaths.

mod greedy;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::metrics::Deployment;
use crate::netmodel::{NfId, NodeId, PhysicalNetwork, Scenario};

pub use greedy::{
    bifactor, brute_force_1fl, greedy_1fl, greedy_step1, FacLocInstance, FlSolution, GAMMA_C,
    GAMMA_F,
};

pub const DEFAULT_DELTA: f64 = 8.67;
pub const BRUTE_FORCE_LIMIT: u128 = 5_000_000;

const TIE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FacError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("NF `{0}` has no candidate host")]
    EmptyPool(NfId),
    #[error("request {request} cannot be served")]
    Unreachable { request: usize },
    #[error("enumeration guard exceeded: {0}")]
    Guard(String),
}

/// Position in the forwarding tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Shared(usize),
    Branch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForkRequest {
    pub source: NodeId,
    pub target: NodeId,
    /// Branch index; 0 for a plain chain.
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForkInstance {
    pub shared: Vec<NfId>,
    /// Empty for a plain chain.
    pub branches: Vec<Vec<NfId>>,
    pub pools: BTreeMap<NfId, Vec<NodeId>>,
    pub open_costs: BTreeMap<(NodeId, NfId), f64>,
    pub requests: Vec<ForkRequest>,
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    dist: Vec<Vec<f64>>,
}

impl ForkInstance {
    /// Builds an instance; a single branch is folded into the shared prefix.
    /// Missing open costs default to 1.
    pub fn new(
        network: &PhysicalNetwork,
        shared: Vec<NfId>,
        mut branches: Vec<Vec<NfId>>,
        pools: BTreeMap<NfId, Vec<NodeId>>,
        open_costs: BTreeMap<(NodeId, NfId), f64>,
        mut requests: Vec<ForkRequest>,
    ) -> Result<Self, FacError> {
        let mut shared = shared;
        if branches.len() == 1 {
            shared.extend(branches.pop().expect("one branch"));
            for r in &mut requests {
                r.branch = 0;
            }
        }
        if shared.is_empty() {
            return Err(FacError::Invalid("the fork needs a root NF".into()));
        }
        let chains: Vec<Vec<NfId>> = if branches.is_empty() {
            vec![shared.clone()]
        } else {
            branches
                .iter()
                .map(|b| shared.iter().chain(b).cloned().collect())
                .collect()
        };
        for chain in &chains {
            let distinct: BTreeSet<&NfId> = chain.iter().collect();
            if distinct.len() != chain.len() {
                return Err(FacError::Invalid("an NF repeats along a chain".into()));
            }
        }
        if branches.iter().any(Vec::is_empty) {
            return Err(FacError::Invalid("empty branch".into()));
        }
        let mut kept = BTreeMap::new();
        for f in chains.iter().flatten() {
            let mut pool = pools.get(f).cloned().unwrap_or_default();
            pool.sort_unstable();
            pool.dedup();
            if pool.is_empty() {
                return Err(FacError::EmptyPool(f.clone()));
            }
            if let Some(&bad) = pool.iter().find(|&&i| !network.contains(i)) {
                return Err(FacError::Invalid(format!(
                    "host {bad} is not in the network"
                )));
            }
            kept.insert(f.clone(), pool);
        }
        let branch_count = branches.len().max(1);
        for (k, r) in requests.iter().enumerate() {
            if r.branch >= branch_count
                || !network.contains(r.source)
                || !network.contains(r.target)
            {
                return Err(FacError::Invalid(format!("request {k} is malformed")));
            }
        }
        if open_costs.values().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(FacError::Invalid(
                "open costs must be finite and nonnegative".into(),
            ));
        }
        let nodes: Vec<NodeId> = network.nodes().iter().map(|n| n.id).collect();
        let index = nodes.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let dist = (0..nodes.len())
            .map(|k| network.shortest_paths_from(k).dist)
            .collect();
        Ok(Self {
            shared,
            branches,
            pools: kept,
            open_costs,
            requests,
            nodes,
            index,
            dist,
        })
    }

    /// Fork (or single chain) and ordered demands of a scenario.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, FacError> {
        let (shared, branches) = match &scenario.fork {
            Some(f) => (f.shared.clone(), f.branches.clone()),
            None => {
                let first = scenario
                    .demands
                    .first()
                    .ok_or_else(|| FacError::Invalid("no demands".into()))?;
                (first.nfs.clone(), Vec::new())
            }
        };
        let spec = crate::netmodel::ForkSpec {
            shared: shared.clone(),
            branches: branches.clone(),
        };
        let requests = scenario
            .demands
            .iter()
            .map(|d| {
                let branch = spec.branch_of(&d.nfs).filter(|_| d.ordered);
                branch
                    .map(|branch| ForkRequest {
                        source: d.source,
                        target: d.target,
                        branch,
                    })
                    .ok_or_else(|| {
                        FacError::Invalid(format!("demand {} does not follow the fork", d.label()))
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let nfs: BTreeSet<NfId> = shared
            .iter()
            .chain(branches.iter().flatten())
            .cloned()
            .collect();
        let mut pools = BTreeMap::new();
        let mut costs = BTreeMap::new();
        for f in &nfs {
            let pool: Vec<NodeId> = scenario
                .catalog
                .pool(f)
                .map(|p| p.iter().copied().collect())
                .unwrap_or_default();
            for &i in &pool {
                costs.insert((i, f.clone()), scenario.deploy_cost(i, f));
            }
            pools.insert(f.clone(), pool);
        }
        Self::new(&scenario.network, shared, branches, pools, costs, requests)
    }

    pub fn is_chain(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn dist(&self, a: NodeId, b: NodeId) -> f64 {
        self.dist[self.index[&a]][self.index[&b]]
    }

    pub fn open_cost(&self, node: NodeId, nf: &str) -> f64 {
        self.open_costs
            .get(&(node, nf.to_string()))
            .copied()
            .unwrap_or(1.0)
    }

    pub fn pool(&self, nf: &str) -> &[NodeId] {
        self.pools.get(nf).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Tree positions and NFs of a branch's root-to-leaf chain.
    pub fn chain(&self, branch: usize) -> Vec<(Level, &NfId)> {
        let mut out: Vec<(Level, &NfId)> = self
            .shared
            .iter()
            .enumerate()
            .map(|(k, f)| (Level::Shared(k), f))
            .collect();
        if let Some(tail) = self.branches.get(branch) {
            out.extend(
                tail.iter()
                    .enumerate()
                    .map(|(k, f)| (Level::Branch(branch, k), f)),
            );
        }
        out
    }

    fn branch_nfs(&self, branch: usize) -> &[NfId] {
        &self.branches[branch]
    }

    /// Deployment and forest costs of one host sequence per request.
    pub fn evaluate(&self, paths: Vec<Vec<NodeId>>) -> Result<ForkSolution, FacError> {
        if paths.len() != self.requests.len() {
            return Err(FacError::Invalid("one path per request".into()));
        }
        let mut copies: BTreeSet<(NodeId, NfId)> = BTreeSet::new();
        let mut arcs: BTreeSet<(Level, NodeId, NodeId)> = BTreeSet::new();
        let mut attach = 0.0;
        let mut exit = 0.0;
        let mut arc_cost = 0.0;
        for (k, (r, path)) in self.requests.iter().zip(&paths).enumerate() {
            let chain = self.chain(r.branch);
            if path.len() != chain.len() {
                return Err(FacError::Invalid(format!(
                    "request {k} path has the wrong length"
                )));
            }
            for (&i, (_, f)) in path.iter().zip(&chain) {
                if !self.pool(f).contains(&i) {
                    return Err(FacError::Invalid(format!("node {i} cannot host `{f}`")));
                }
                copies.insert((i, (*f).clone()));
            }
            for (w, lv) in path.windows(2).zip(&chain) {
                if arcs.insert((lv.0, w[0], w[1])) {
                    arc_cost += self.dist(w[0], w[1]);
                }
            }
            attach += self.dist(r.source, path[0]);
            exit += self.dist(*path.last().expect("nonempty chain"), r.target);
        }
        let open_cost = copies.iter().map(|(i, f)| self.open_cost(*i, f)).sum();
        let mut deployment = Deployment::default();
        for (i, f) in copies {
            deployment.placement.entry(f).or_default().insert(i);
        }
        Ok(ForkSolution {
            paths,
            deployment,
            open_cost,
            attach_cost: attach,
            arc_cost,
            exit_cost: exit,
        })
    }

    /// Cheapest host sequences over `nfs` from `start`, one per end host,
    /// minimizing `a * O + c * C`; ties go to the lexicographically
    /// smallest sequence.
    fn layered_from(&self, nfs: &[NfId], start: NodeId, a: f64, c: f64) -> Vec<Seq> {
        let first = &nfs[0];
        let mut layer = vec![Seq {
            open: self.open_cost(start, first),
            conn: 0.0,
            path: vec![start],
        }];
        for f in &nfs[1..] {
            let rows: Vec<&[f64]> = layer
                .iter()
                .map(|s| self.dist[self.index[s.path.last().expect("nonempty")]].as_slice())
                .collect();
            let mut next = Vec::new();
            for &y in self.pool(f) {
                let yi = self.index[&y];
                let oy = self.open_cost(y, f);
                let mut best: Option<(usize, f64, f64)> = None;
                for (k, s) in layer.iter().enumerate() {
                    let d = rows[k][yi];
                    if !d.is_finite() {
                        continue;
                    }
                    let (open, conn) = (s.open + oy, s.conn + d);
                    let better = match best {
                        None => true,
                        Some((b, bo, bc)) => {
                            let (x, z) = (a * open + c * conn, a * bo + c * bc);
                            if (x - z).abs() > TIE * x.abs().max(z.abs()).max(1.0) {
                                x < z
                            } else {
                                s.path < layer[b].path
                            }
                        }
                    };
                    if better {
                        best = Some((k, open, conn));
                    }
                }
                if let Some((k, open, conn)) = best {
                    let mut path = Vec::with_capacity(layer[k].path.len() + 1);
                    path.extend_from_slice(&layer[k].path);
                    path.push(y);
                    next.push(Seq { open, conn, path });
                }
            }
            layer = next;
        }
        layer
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Seq {
    open: f64,
    conn: f64,
    path: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForkSolution {
    /// Host of every chain position, per request.
    pub paths: Vec<Vec<NodeId>>,
    pub deployment: Deployment,
    pub open_cost: f64,
    /// Source-to-first-host distances.
    pub attach_cost: f64,
    /// Distinct forest arcs.
    pub arc_cost: f64,
    /// Last-host-to-target distances.
    pub exit_cost: f64,
}

impl ForkSolution {
    pub fn connection_cost(&self) -> f64 {
        self.attach_cost + self.arc_cost + self.exit_cost
    }

    pub fn cost(&self) -> f64 {
        self.open_cost + self.connection_cost()
    }

    /// Distinct shared subpaths.
    pub fn shared_paths(&self, fork: &ForkInstance) -> Vec<Vec<NodeId>> {
        let b = fork.shared.len();
        let set: BTreeSet<Vec<NodeId>> = self.paths.iter().map(|p| p[..b].to_vec()).collect();
        set.into_iter().collect()
    }

    /// Distinct `(branch, disjoint subpath)` pairs; empty for a plain chain.
    pub fn disjoint_paths(&self, fork: &ForkInstance) -> Vec<(usize, Vec<NodeId>)> {
        let b = fork.shared.len();
        let set: BTreeSet<(usize, Vec<NodeId>)> = fork
            .requests
            .iter()
            .zip(&self.paths)
            .filter(|(_, p)| p.len() > b)
            .map(|(r, p)| (r.branch, p[b..].to_vec()))
            .collect();
        set.into_iter().collect()
    }

    /// Request to (disjoint subpath, shared subpath) indices.
    pub fn assignment(&self, fork: &ForkInstance) -> Vec<(Option<usize>, usize)> {
        let b = fork.shared.len();
        let shared = self.shared_paths(fork);
        let disjoint = self.disjoint_paths(fork);
        fork.requests
            .iter()
            .zip(&self.paths)
            .map(|(r, p)| {
                let s = shared
                    .iter()
                    .position(|x| x.as_slice() == &p[..b])
                    .expect("listed");
                let d = disjoint
                    .iter()
                    .position(|(br, x)| *br == r.branch && x.as_slice() == &p[b..]);
                (d, s)
            })
            .collect()
    }
}

/// `d(s, i_first) + d(i_last, t)` for every request and host pair of its chain ends.
pub fn convert_requests(
    fork: &ForkInstance,
) -> Result<BTreeMap<(usize, NodeId, NodeId), f64>, FacError> {
    let mut out = BTreeMap::new();
    for (k, r) in fork.requests.iter().enumerate() {
        let chain = fork.chain(r.branch);
        let first = chain[0].1;
        let last = chain[chain.len() - 1].1;
        let mut any = false;
        for &a in fork.pool(first) {
            for &z in fork.pool(last) {
                let c = fork.dist(r.source, a) + fork.dist(z, r.target);
                any |= c.is_finite();
                out.insert((k, a, z), c);
            }
        }
        if !any {
            return Err(FacError::Unreachable { request: k });
        }
    }
    Ok(out)
}

/// Reduced 1-level instance plus what is needed to lift its solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub instance: FacLocInstance,
    pub alpha: f64,
    pub beta: f64,
    /// Shared subpath behind each facility.
    pub facility_paths: Vec<Vec<NodeId>>,
    /// Facility chosen for each `(start, end, multiplier)`.
    pub facility_keys: BTreeMap<(NodeId, NodeId, usize), usize>,
    /// Requests aggregated into each client.
    pub clients: Vec<Vec<usize>>,
    /// Disjoint subpath of each client; empty for chains.
    pub tails: Vec<Vec<NodeId>>,
    /// Largest multiplier of the shared-path step.
    pub multipliers: usize,
}

impl Reduction {
    /// Facility produced for `(start, end, j)`, with `j` clamped to the multiplier range.
    pub fn facility_for(&self, start: NodeId, end: NodeId, j: usize) -> Option<usize> {
        self.facility_keys
            .get(&(start, end, j.clamp(1, self.multipliers)))
            .copied()
    }

    /// Client holding request `k`.
    pub fn client_of(&self, k: usize) -> Option<usize> {
        self.clients.iter().position(|c| c.contains(&k))
    }
}

/// Two-step parameterized path reduction.
///
/// Step 1 picks, per branch and pair of end hosts of its disjoint part, the
/// subpath minimizing `t * beta * (O + C)`, then fixes one such subpath per
/// request; requests of one branch sharing a subpath form one client, which
/// pays for the subpath once. Step 2 picks, per pair of end hosts of the
/// shared prefix and `j = 1..M`, the subpath minimizing `alpha * O + j * beta * C`;
/// every distinct such subpath is a facility with open cost `O + C`. A client
/// connects to a facility at cost `sum d(s, start) + junction + O + C + sum d(end, t)`,
/// or `d(s, start) + d(end, t)` for a plain chain, where every request is a client.
pub fn two_step_reduction(
    fork: &ForkInstance,
    alpha: f64,
    beta: f64,
) -> Result<Reduction, FacError> {
    if !(alpha >= 1.0 && beta >= 1.0) {
        return Err(FacError::Invalid(
            "alpha and beta must be at least 1".into(),
        ));
    }
    convert_requests(fork)?;
    // step 1: disjoint subpaths per branch, keyed by (start, end)
    let mut step1: Vec<Vec<(NodeId, NodeId, f64, Vec<NodeId>)>> = Vec::new();
    for br in 0..fork.branches.len() {
        let nfs = fork.branch_nfs(br);
        let t = fork
            .requests
            .iter()
            .filter(|r| r.branch == br)
            .count()
            .max(1) as f64;
        let mut table = Vec::new();
        for &mu in fork.pool(&nfs[0]) {
            for seq in fork.layered_from(nfs, mu, t * beta, t * beta) {
                let end = *seq.path.last().expect("nonempty");
                table.push((mu, end, seq.open + seq.conn, seq.path));
            }
        }
        if table.is_empty() {
            return Err(FacError::Invalid(format!(
                "branch {br} has no service subpath"
            )));
        }
        step1.push(table);
    }
    // bundle requests by branch and disjoint subpath
    let mut clients: Vec<Vec<usize>> = Vec::new();
    let mut tails: Vec<Vec<NodeId>> = Vec::new();
    let mut tail_cost: Vec<f64> = Vec::new();
    if fork.is_chain() {
        clients = (0..fork.requests.len()).map(|k| vec![k]).collect();
        tails = vec![Vec::new(); fork.requests.len()];
        tail_cost = vec![0.0; fork.requests.len()];
    } else {
        let last_shared = fork.pool(&fork.shared[fork.shared.len() - 1]);
        let mut junction: HashMap<NodeId, f64> = HashMap::new();
        for table in &step1 {
            for (mu, ..) in table {
                junction.entry(*mu).or_insert_with(|| {
                    last_shared
                        .iter()
                        .map(|&z| fork.dist(z, *mu))
                        .fold(f64::INFINITY, f64::min)
                });
            }
        }
        let mut bundle: BTreeMap<(usize, Vec<NodeId>), usize> = BTreeMap::new();
        for (k, r) in fork.requests.iter().enumerate() {
            let mut best: Option<(f64, usize)> = None;
            for (q, (mu, e, w, _)) in step1[r.branch].iter().enumerate() {
                let v = junction[mu] + w + fork.dist(*e, r.target);
                if v.is_finite() && best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, q));
                }
            }
            let (_, q) = best.ok_or(FacError::Unreachable { request: k })?;
            let (_, _, w, path) = &step1[r.branch][q];
            let c = *bundle.entry((r.branch, path.clone())).or_insert_with(|| {
                clients.push(Vec::new());
                tails.push(path.clone());
                tail_cost.push(*w);
                clients.len() - 1
            });
            clients[c].push(k);
        }
    }
    // step 2: shared subpaths
    let multipliers = if fork.is_chain() {
        fork.requests.len().max(1)
    } else {
        let firsts: BTreeSet<NodeId> = fork
            .branches
            .iter()
            .flat_map(|b| fork.pool(&b[0]).iter().copied())
            .collect();
        firsts.len().max(1)
    };
    let uniform = fork.shared.iter().all(|f| {
        let costs: Vec<f64> = fork.pool(f).iter().map(|&i| fork.open_cost(i, f)).collect();
        costs.windows(2).all(|w| w[0] == w[1])
    });
    let mut facility_paths: Vec<Vec<NodeId>> = Vec::new();
    let mut facility_open = Vec::new();
    let mut seen: HashMap<Vec<NodeId>, usize> = HashMap::new();
    let mut facility_keys = BTreeMap::new();
    for &nu in fork.pool(&fork.shared[0]) {
        let mut per_j: Vec<Vec<Seq>> = Vec::new();
        for j in 1..=multipliers {
            if uniform && j > 1 {
                per_j.push(per_j[0].clone());
            } else {
                per_j.push(fork.layered_from(&fork.shared, nu, alpha, j as f64 * beta));
            }
        }
        for (jm1, seqs) in per_j.into_iter().enumerate() {
            for seq in seqs {
                let end = *seq.path.last().expect("nonempty");
                let idx = *seen.entry(seq.path.clone()).or_insert_with(|| {
                    facility_paths.push(seq.path.clone());
                    facility_open.push(seq.open + seq.conn);
                    facility_paths.len() - 1
                });
                facility_keys.insert((nu, end, jm1 + 1), idx);
            }
        }
    }
    // client costs
    let mut conn = vec![vec![f64::INFINITY; clients.len()]; facility_paths.len()];
    for (fi, p) in facility_paths.iter().enumerate() {
        let start = p[0];
        let end = *p.last().expect("nonempty");
        for (c, members) in clients.iter().enumerate() {
            let head: f64 = members
                .iter()
                .map(|&k| fork.dist(fork.requests[k].source, start))
                .sum();
            let rest = match tails[c].first() {
                None => members
                    .iter()
                    .map(|&k| fork.dist(end, fork.requests[k].target))
                    .sum::<f64>(),
                Some(&mu) => {
                    let e = *tails[c].last().expect("nonempty");
                    let exit: f64 = members
                        .iter()
                        .map(|&k| fork.dist(e, fork.requests[k].target))
                        .sum();
                    fork.dist(end, mu) + tail_cost[c] + exit
                }
            };
            conn[fi][c] = head + rest;
        }
    }
    let names = clients
        .iter()
        .map(|m| {
            m.iter()
                .map(|k| format!("r{k}"))
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    let facilities = facility_paths
        .iter()
        .zip(&facility_open)
        .map(|(p, &o)| {
            (
                p.iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join("-"),
                o,
            )
        })
        .collect();
    let instance = FacLocInstance::new(names, facilities, conn).map_err(|e| match e {
        FacError::Invalid(m) if m.starts_with("client r") => {
            let k = m[8..]
                .split(|ch: char| !ch.is_ascii_digit())
                .next()
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            FacError::Unreachable { request: k }
        }
        other => other,
    })?;
    Ok(Reduction {
        instance,
        alpha,
        beta,
        facility_paths,
        facility_keys,
        clients,
        tails,
        multipliers,
    })
}

/// Opens every copy on the chosen shared and disjoint subpaths and routes
/// each request through the facility of its client.
pub fn lift_solution(
    reduction: &Reduction,
    solution: &FlSolution,
    fork: &ForkInstance,
) -> Result<ForkSolution, FacError> {
    let mut paths = vec![Vec::new(); fork.requests.len()];
    for (c, members) in reduction.clients.iter().enumerate() {
        let fi = *solution
            .assign
            .get(c)
            .ok_or_else(|| FacError::Invalid("solution misses a client".into()))?;
        for &k in members {
            paths[k] = [
                reduction.facility_paths[fi].clone(),
                reduction.tails[c].clone(),
            ]
            .concat();
        }
    }
    fork.evaluate(paths)
}

/// Pairs of requests whose hosts agree at some tree position but differ
/// earlier: `(first, second, position)`.
pub fn forest_violations(fork: &ForkInstance, sol: &ForkSolution) -> Vec<(usize, usize, Level)> {
    let mut out = Vec::new();
    for a in 0..sol.paths.len() {
        for b in a + 1..sol.paths.len() {
            let ca = fork.chain(fork.requests[a].branch);
            let cb = fork.chain(fork.requests[b].branch);
            let common = ca.iter().zip(&cb).take_while(|(x, y)| x.0 == y.0).count();
            for l in 0..common {
                if sol.paths[a][l] == sol.paths[b][l] && sol.paths[a][..l] != sol.paths[b][..l] {
                    out.push((a, b, ca[l].0));
                    break;
                }
            }
        }
    }
    out
}

/// Forest normalization: each request, in order, adopts the prefix of the
/// first earlier request it meets at its deepest shared tree position.
pub fn reroot(fork: &ForkInstance, sol: &ForkSolution) -> Result<ForkSolution, FacError> {
    let mut paths = sol.paths.clone();
    for r in 1..paths.len() {
        let cr = fork.chain(fork.requests[r].branch);
        let mut adopt: Option<(usize, usize)> = None;
        for l in (0..cr.len()).rev() {
            let hit = (0..r).find(|&e| {
                let ce = fork.chain(fork.requests[e].branch);
                ce.len() > l
                    && ce[..=l].iter().zip(&cr[..=l]).all(|(x, y)| x.0 == y.0)
                    && paths[e][l] == paths[r][l]
            });
            if let Some(e) = hit {
                adopt = Some((e, l));
                break;
            }
        }
        if let Some((e, l)) = adopt {
            let prefix = paths[e][..l].to_vec();
            paths[r][..l].copy_from_slice(&prefix);
        }
    }
    fork.evaluate(paths)
}

/// Full pipeline output.
#[derive(Debug, Clone, PartialEq)]
pub struct SforkRun {
    pub reduction: Reduction,
    pub facility_solution: FlSolution,
    /// Direct lift of the facility-location solution.
    pub lifted: ForkSolution,
    /// Forest-normalized solution.
    pub solution: ForkSolution,
}

/// Reduction with the greedy's bi-factor, greedy, lift and forest normalization.
pub fn solve_sfork(fork: &ForkInstance, delta: f64) -> Result<SforkRun, FacError> {
    if !(delta >= 1.0) {
        return Err(FacError::Invalid("delta must be at least 1".into()));
    }
    let (alpha, beta) = bifactor(delta);
    let reduction = two_step_reduction(fork, alpha, beta)?;
    let facility_solution = greedy_1fl(&reduction.instance, delta);
    let lifted = lift_solution(&reduction, &facility_solution, fork)?;
    let solution = reroot(fork, &lifted)?;
    Ok(SforkRun {
        reduction,
        facility_solution,
        lifted,
        solution,
    })
}

/// Exact optimum by depth-first search over host sequences per request,
/// pruned by the partial cost.
pub fn brute_force_sfork(fork: &ForkInstance, limit: u128) -> Result<ForkSolution, FacError> {
    convert_requests(fork)?;
    let options: Vec<Vec<Vec<NodeId>>> = fork
        .requests
        .iter()
        .map(|r| {
            let mut seqs: Vec<Vec<NodeId>> = vec![vec![]];
            for (_, f) in fork.chain(r.branch) {
                seqs = seqs
                    .into_iter()
                    .flat_map(|s| {
                        fork.pool(f)
                            .iter()
                            .map(move |&i| [s.clone(), vec![i]].concat())
                    })
                    .collect();
            }
            seqs
        })
        .collect();
    let combos = options
        .iter()
        .fold(1u128, |a, o| a.saturating_mul(o.len() as u128));
    if combos > limit {
        return Err(FacError::Guard(format!(
            "{combos} combinations exceed {limit}"
        )));
    }
    // intern copies and arcs
    let mut copy_ids: HashMap<(NodeId, NfId), usize> = HashMap::new();
    let mut copy_cost = Vec::new();
    let mut arc_ids: HashMap<(Level, NodeId, NodeId), usize> = HashMap::new();
    let mut arc_cost = Vec::new();
    let mut items: Vec<Vec<Item>> = Vec::new();
    for (r, opts) in fork.requests.iter().zip(&options) {
        let chain = fork.chain(r.branch);
        let mut list = Vec::new();
        for path in opts {
            let fixed =
                fork.dist(r.source, path[0]) + fork.dist(*path.last().expect("nonempty"), r.target);
            if !fixed.is_finite() {
                continue;
            }
            let mut copies = Vec::new();
            for (&i, (_, f)) in path.iter().zip(&chain) {
                let id = *copy_ids.entry((i, (*f).clone())).or_insert_with(|| {
                    copy_cost.push(fork.open_cost(i, f));
                    copy_cost.len() - 1
                });
                copies.push(id);
            }
            let mut arcs = Vec::new();
            let mut ok = true;
            for (w, lv) in path.windows(2).zip(&chain) {
                let d = fork.dist(w[0], w[1]);
                ok &= d.is_finite();
                let id = *arc_ids.entry((lv.0, w[0], w[1])).or_insert_with(|| {
                    arc_cost.push(d);
                    arc_cost.len() - 1
                });
                arcs.push(id);
            }
            if ok {
                list.push(Item {
                    path: path.clone(),
                    fixed,
                    copies,
                    arcs,
                });
            }
        }
        if list.is_empty() {
            return Err(FacError::Unreachable {
                request: items.len(),
            });
        }
        items.push(list);
    }
    let mut search = Brute {
        items: &items,
        copy_cost: &copy_cost,
        arc_cost: &arc_cost,
        copy_use: vec![0; copy_cost.len()],
        arc_use: vec![0; arc_cost.len()],
        chosen: Vec::new(),
        best: None,
    };
    search.run(0, 0.0);
    let (_, choice) = search.best.expect("every request has an option");
    let paths = choice
        .iter()
        .enumerate()
        .map(|(r, &k)| items[r][k].path.clone())
        .collect();
    fork.evaluate(paths)
}

struct Item {
    path: Vec<NodeId>,
    fixed: f64,
    copies: Vec<usize>,
    arcs: Vec<usize>,
}

struct Brute<'a> {
    items: &'a [Vec<Item>],
    copy_cost: &'a [f64],
    arc_cost: &'a [f64],
    copy_use: Vec<u32>,
    arc_use: Vec<u32>,
    chosen: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Brute<'_> {
    fn run(&mut self, r: usize, cost: f64) {
        if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return;
        }
        if r == self.items.len() {
            self.best = Some((cost, self.chosen.clone()));
            return;
        }
        for k in 0..self.items[r].len() {
            let item = &self.items[r][k];
            let mut add = item.fixed;
            for &c in &item.copies {
                if self.copy_use[c] == 0 {
                    add += self.copy_cost[c];
                }
                self.copy_use[c] += 1;
            }
            for &a in &item.arcs {
                if self.arc_use[a] == 0 {
                    add += self.arc_cost[a];
                }
                self.arc_use[a] += 1;
            }
            self.chosen.push(k);
            self.run(r + 1, cost + add);
            self.chosen.pop();
            for &c in &item.copies {
                self.copy_use[c] -= 1;
            }
            for &a in &item.arcs {
                self.arc_use[a] -= 1;
            }
        }
    }
}

/// Outcome of the lemma checks on one solution pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LemmaReport {
    pub violations: Vec<String>,
    /// Composed bound `alpha F + beta C <= alpha O + 3 beta C`; reported, not enforced.
    pub composed_bound: Option<(f64, f64)>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the lift inequality for `(facility solution, lift)` and the
/// re-rooting inequalities for `(chi, reroot(chi))`, and evaluates the
/// composed bound for the re-rooted solution.
pub fn check_lemma_inequalities(
    fork: &ForkInstance,
    reduction: &Reduction,
    facility_solution: &FlSolution,
    chi: &ForkSolution,
) -> Result<LemmaReport, FacError> {
    let mut report = LemmaReport::default();
    let lifted = lift_solution(reduction, facility_solution, fork)?;
    let fl_cost = facility_solution.cost(&reduction.instance);
    if lifted.cost() > fl_cost + TIE * fl_cost.max(1.0) {
        report.violations.push(format!(
            "lift costs {} but the facility solution costs {fl_cost}",
            lifted.cost()
        ));
    }
    let psi = reroot(fork, chi)?;
    if !forest_violations(fork, &psi).is_empty() {
        report
            .violations
            .push("re-rooted solution is not a forest".into());
    }
    let tol = TIE * chi.cost().max(1.0);
    if psi.open_cost > chi.open_cost + tol {
        report.violations.push(format!(
            "re-rooting raised deployment cost {} -> {}",
            chi.open_cost, psi.open_cost
        ));
    }
    if (psi.exit_cost - chi.exit_cost).abs() > tol {
        report.violations.push(format!(
            "re-rooting changed last-level cost {} -> {}",
            chi.exit_cost, psi.exit_cost
        ));
    }
    if psi.arc_cost > chi.arc_cost + tol {
        report.violations.push(format!(
            "re-rooting raised arc cost {} -> {}",
            chi.arc_cost, psi.arc_cost
        ));
    }
    report.composed_bound = composed_bound(fork, reduction, &psi);
    Ok(report)
}

/// `(alpha F + beta C of the induced facility solution, alpha O + 3 beta C of psi)`.
fn composed_bound(
    fork: &ForkInstance,
    reduction: &Reduction,
    psi: &ForkSolution,
) -> Option<(f64, f64)> {
    let b = fork.shared.len();
    let mut groups: BTreeMap<Vec<NodeId>, BTreeSet<NodeId>> = BTreeMap::new();
    for (k, p) in psi.paths.iter().enumerate() {
        let entry = groups.entry(p[..b].to_vec()).or_default();
        if fork.is_chain() {
            entry.insert(k as NodeId);
        } else {
            entry.insert(p[b]);
        }
    }
    let mut assign = Vec::new();
    for members in &reduction.clients {
        let prefix = &psi.paths[members[0]][..b];
        let j = groups[prefix].len();
        assign.push(reduction.facility_for(prefix[0], prefix[b - 1], j)?);
    }
    let open: BTreeSet<usize> = assign.iter().copied().collect();
    let sol = FlSolution {
        open: open.into_iter().collect(),
        assign,
    };
    let inst = &reduction.instance;
    let lhs =
        reduction.alpha * sol.facility_cost(inst) + reduction.beta * sol.connection_cost(inst);
    let rhs = reduction.alpha * psi.open_cost + 3.0 * reduction.beta * psi.connection_cost();
    Some((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Edge, NodeRecord};

    fn path_graph(n: u32) -> PhysicalNetwork {
        let nodes = (1..=n)
            .map(|i| NodeRecord::new(i, 0.1, Vec::<String>::new()))
            .collect();
        let edges = (1..n)
            .map(|u| Edge {
                u,
                v: u + 1,
                weight: 1.0,
            })
            .collect();
        PhysicalNetwork::new(nodes, edges, false).unwrap()
    }

    fn pools(entries: &[(&str, &[NodeId])]) -> BTreeMap<NfId, Vec<NodeId>> {
        entries
            .iter()
            .map(|(f, p)| (f.to_string(), p.to_vec()))
            .collect()
    }

    #[test]
    fn conversion_costs() {
        // s=1 - 2 - 3(a) ; 4(b) - 5=t
        let net = path_graph(5);
        let fork = ForkInstance::new(
            &net,
            vec!["a".into(), "b".into()],
            vec![],
            pools(&[("a", &[3]), ("b", &[4])]),
            BTreeMap::new(),
            vec![
                ForkRequest {
                    source: 1,
                    target: 5,
                    branch: 0,
                },
                ForkRequest {
                    source: 3,
                    target: 4,
                    branch: 0,
                },
            ],
        )
        .unwrap();
        let table = convert_requests(&fork).unwrap();
        assert_eq!(table[&(0, 3, 4)], 3.0);
        assert_eq!(table[&(1, 3, 4)], 0.0);
    }

    #[test]
    fn single_candidate_instance() {
        let net = path_graph(5);
        let fork = ForkInstance::new(
            &net,
            vec!["a".into(), "b".into()],
            vec![],
            pools(&[("a", &[2]), ("b", &[4])]),
            BTreeMap::new(),
            vec![ForkRequest {
                source: 1,
                target: 5,
                branch: 0,
            }],
        )
        .unwrap();
        let run = solve_sfork(&fork, DEFAULT_DELTA).unwrap();
        assert_eq!(
            run.reduction.instance.facilities,
            vec![("2-4".to_string(), 4.0)]
        );
        assert_eq!(run.reduction.instance.conn, vec![vec![2.0]]);
        assert_eq!(run.solution.paths, vec![vec![2, 4]]);
        assert_eq!(run.solution.cost(), 6.0);
        assert_eq!(
            run.lifted.cost(),
            run.facility_solution.cost(&run.reduction.instance)
        );
        assert_eq!(
            brute_force_sfork(&fork, BRUTE_FORCE_LIMIT).unwrap().cost(),
            6.0
        );
    }

    #[test]
    fn single_branch_folds_into_chain() {
        let net = path_graph(6);
        let p = pools(&[("a", &[2, 3]), ("b", &[3, 4]), ("c", &[5])]);
        let reqs = vec![
            ForkRequest {
                source: 1,
                target: 6,
                branch: 0,
            },
            ForkRequest {
                source: 2,
                target: 6,
                branch: 0,
            },
        ];
        let fork = ForkInstance::new(
            &net,
            vec!["a".into()],
            vec![vec!["b".into(), "c".into()]],
            p.clone(),
            BTreeMap::new(),
            reqs.clone(),
        )
        .unwrap();
        let chain = ForkInstance::new(
            &net,
            vec!["a".into(), "b".into(), "c".into()],
            vec![],
            p,
            BTreeMap::new(),
            reqs,
        )
        .unwrap();
        assert_eq!(fork, chain);
        let (a, b) = bifactor(DEFAULT_DELTA);
        assert_eq!(
            two_step_reduction(&fork, a, b).unwrap(),
            two_step_reduction(&chain, a, b).unwrap()
        );
    }

    #[test]
    fn merge_at_shared_node_lowers_cost() {
        // both requests pass node 3 for `b` but start `a` at different hosts
        let net = path_graph(5);
        let fork = ForkInstance::new(
            &net,
            vec!["a".into(), "b".into()],
            vec![],
            pools(&[("a", &[1, 2]), ("b", &[3])]),
            BTreeMap::new(),
            vec![
                ForkRequest {
                    source: 2,
                    target: 5,
                    branch: 0,
                },
                ForkRequest {
                    source: 2,
                    target: 5,
                    branch: 0,
                },
            ],
        )
        .unwrap();
        let chi = fork.evaluate(vec![vec![2, 3], vec![1, 3]]).unwrap();
        assert_eq!(
            forest_violations(&fork, &chi),
            vec![(0, 1, Level::Shared(1))]
        );
        let psi = reroot(&fork, &chi).unwrap();
        assert_eq!(psi.paths, vec![vec![2, 3], vec![2, 3]]);
        assert!(forest_violations(&fork, &psi).is_empty());
        assert!(psi.cost() < chi.cost());
        assert!(psi.open_cost <= chi.open_cost);
        assert_eq!(psi.exit_cost, chi.exit_cost);
    }

    #[test]
    fn overlap_counted_once() {
        let net = path_graph(4);
        let fork = ForkInstance::new(
            &net,
            vec!["a".into()],
            vec![vec!["b".into()], vec!["c".into()]],
            pools(&[("a", &[2]), ("b", &[3]), ("c", &[3])]),
            BTreeMap::new(),
            vec![
                ForkRequest {
                    source: 1,
                    target: 4,
                    branch: 0,
                },
                ForkRequest {
                    source: 1,
                    target: 4,
                    branch: 1,
                },
            ],
        )
        .unwrap();
        let run = solve_sfork(&fork, DEFAULT_DELTA).unwrap();
        let fl_cost = run.facility_solution.cost(&run.reduction.instance);
        assert!(run.lifted.cost() < fl_cost);
        // copy 2@a shared; arcs 2->3 on two branches are distinct positions
        assert_eq!(run.lifted.open_cost, 3.0);
        assert_eq!(run.lifted.shared_paths(&fork), vec![vec![2]]);
        assert_eq!(run.lifted.disjoint_paths(&fork).len(), 2);
    }
}

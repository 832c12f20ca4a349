//! Robust NF-service metrics (RP/FP), duality checks and exact reliability.
//!
//! For a demand `d` and NF `f`, a path `p` scores `1 - prod(rho_i)` over the
//! deployed copies of `f` lying on `p`. The demand's RP is the worst NF of
//! its best paths, divided by `|F_st|!` when the demand is ordered; FP is
//! the failure-side dual `max_f min_p prod(rho_i)`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::netmodel::{Demand, NfId, NodeId, PhysicalNetwork, Scenario};
use crate::pathfind::{enumerate_paths_oracle, PathError, ORACLE_LIMIT};

/// Largest number of independent failure events [`exact_reliability`] enumerates.
pub const RELIABILITY_GUARD_BITS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("deployment of `{nf}` uses node {node} outside its pool")]
    OutsidePool { nf: NfId, node: NodeId },
    #[error("deployment of `{nf}` uses {count} nodes, limit is {limit}")]
    OverLimit { nf: NfId, count: usize, limit: u32 },
    #[error("routing has {0} failure-prone nodes; enumeration is capped at 2^20 subsets")]
    Guard(usize),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// NF placement `f -> nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Default, PartialOrd, Ord)]
pub struct Deployment {
    pub placement: BTreeMap<NfId, BTreeSet<NodeId>>,
}

impl Deployment {
    pub fn new<I, S, N>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, N)>,
        S: Into<NfId>,
        N: IntoIterator<Item = NodeId>,
    {
        Self {
            placement: entries
                .into_iter()
                .map(|(f, ns)| (f.into(), ns.into_iter().collect()))
                .collect(),
        }
    }

    /// Every candidate host of every NF.
    pub fn full(scenario: &Scenario) -> Self {
        Self {
            placement: scenario.catalog.pools.clone(),
        }
    }

    pub fn hosts(&self, nf: &str) -> Option<&BTreeSet<NodeId>> {
        self.placement.get(nf)
    }

    pub fn hosts_nf(&self, node: NodeId, nf: &str) -> bool {
        self.placement.get(nf).is_some_and(|s| s.contains(&node))
    }

    pub fn node_count(&self) -> usize {
        self.placement
            .values()
            .flatten()
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Checks pools and limits.
    pub fn validate(&self, scenario: &Scenario) -> Result<(), MetricError> {
        for (f, nodes) in &self.placement {
            let pool = scenario.catalog.pool(f);
            if let Some(&node) = nodes.iter().find(|n| !pool.is_some_and(|p| p.contains(n))) {
                return Err(MetricError::OutsidePool {
                    nf: f.clone(),
                    node,
                });
            }
            let limit = scenario.catalog.limit(f);
            if nodes.len() > limit as usize {
                return Err(MetricError::OverLimit {
                    nf: f.clone(),
                    count: nodes.len(),
                    limit,
                });
            }
        }
        Ok(())
    }

    /// All deployments within pools and limits (including empty placements).
    pub fn enumerate(scenario: &Scenario, nfs: &BTreeSet<NfId>) -> Vec<Deployment> {
        let mut out = vec![Deployment::default()];
        for f in nfs {
            let pool: Vec<NodeId> = scenario
                .catalog
                .pool(f)
                .map(|p| p.iter().copied().collect())
                .unwrap_or_default();
            let limit = scenario.catalog.limit(f) as usize;
            let mut subsets = Vec::new();
            for mask in 0u64..(1u64 << pool.len()) {
                if mask.count_ones() as usize <= limit {
                    subsets.push(
                        (0..pool.len())
                            .filter(|b| mask >> b & 1 == 1)
                            .map(|b| pool[b])
                            .collect::<BTreeSet<_>>(),
                    );
                }
            }
            out = out
                .into_iter()
                .flat_map(|d| {
                    subsets.iter().map(move |s| {
                        let mut next = d.clone();
                        next.placement.insert(f.clone(), s.clone());
                        next
                    })
                })
                .collect();
        }
        out
    }
}

/// Paths over which the inner max/min of the metrics range.
#[derive(Debug, Clone, PartialEq)]
pub enum PathSet {
    /// Every simple physical path of each demand.
    AllSimple,
    /// Explicit physical paths, one list per demand (scenario order).
    Given(Vec<Vec<Vec<NodeId>>>),
}

impl PathSet {
    /// Materializes the physical paths of each demand.
    pub fn resolve(&self, scenario: &Scenario) -> Result<Vec<Vec<Vec<NodeId>>>, MetricError> {
        match self {
            Self::AllSimple => scenario
                .demands
                .iter()
                .map(|d| {
                    Ok(enumerate_paths_oracle(
                        &scenario.network,
                        d.source,
                        d.target,
                        ORACLE_LIMIT,
                    )?)
                })
                .collect(),
            Self::Given(p) => Ok(p.clone()),
        }
    }
}

/// Demand can be served on `path`: each NF has a deployed copy on it, in
/// order for ordered demands. A node may serve consecutive NFs.
pub fn path_feasible(deployment: &Deployment, demand: &Demand, path: &[NodeId]) -> bool {
    if demand.ordered {
        let mut level = 0;
        for &node in path {
            while level < demand.nfs.len() && deployment.hosts_nf(node, &demand.nfs[level]) {
                level += 1;
            }
        }
        level == demand.nfs.len()
    } else {
        demand
            .nfs
            .iter()
            .all(|f| path.iter().any(|&n| deployment.hosts_nf(n, f)))
    }
}

/// Product of failure probabilities of the deployed copies of `nf` on `path`
/// (each node counted once); 1 when there are none.
pub fn failure_product(
    network: &PhysicalNetwork,
    deployment: &Deployment,
    nf: &str,
    path: &[NodeId],
) -> f64 {
    let nodes: BTreeSet<NodeId> = path
        .iter()
        .copied()
        .filter(|&n| deployment.hosts_nf(n, nf))
        .collect();
    nodes.iter().map(|&n| network.failure_prob(n)).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandMetric {
    pub label: String,
    pub rp: f64,
    pub fp: f64,
    /// `|F_st|!` for ordered demands, 1 otherwise.
    pub divisor: f64,
    /// Some path can serve the demand.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub demands: Vec<DemandMetric>,
    pub system_rp: f64,
    pub system_fp: f64,
}

impl MetricReport {
    pub fn diagnostics(&self) -> Vec<String> {
        self.demands
            .iter()
            .filter(|d| !d.feasible)
            .map(|d| format!("demand {} has no feasible path; rp set to 0", d.label))
            .collect()
    }
}

/// RP and FP of one demand over the given physical paths.
pub fn demand_metric(
    network: &PhysicalNetwork,
    deployment: &Deployment,
    demand: &Demand,
    paths: &[Vec<NodeId>],
) -> DemandMetric {
    let divisor = if demand.ordered {
        demand.factorial()
    } else {
        1.0
    };
    let feasible: Vec<&Vec<NodeId>> = paths
        .iter()
        .filter(|p| path_feasible(deployment, demand, p))
        .collect();
    if feasible.is_empty() {
        return DemandMetric {
            label: demand.label(),
            rp: 0.0,
            fp: 1.0,
            divisor,
            feasible: false,
        };
    }
    let mut raw_rp = f64::INFINITY;
    let mut fp = f64::NEG_INFINITY;
    for f in &demand.nfs {
        let best = feasible
            .iter()
            .map(|p| failure_product(network, deployment, f, p))
            .fold(f64::INFINITY, f64::min);
        raw_rp = raw_rp.min(1.0 - best);
        fp = fp.max(best);
    }
    DemandMetric {
        label: demand.label(),
        rp: raw_rp / divisor,
        fp,
        divisor,
        feasible: true,
    }
}

/// RP of a single demand, with every simple path admissible.
pub fn rp_demand(
    scenario: &Scenario,
    deployment: &Deployment,
    demand: &Demand,
) -> Result<f64, MetricError> {
    let paths = enumerate_paths_oracle(
        &scenario.network,
        demand.source,
        demand.target,
        ORACLE_LIMIT,
    )?;
    Ok(demand_metric(&scenario.network, deployment, demand, &paths).rp)
}

/// Per-demand and system RP/FP.
pub fn system_metrics(
    scenario: &Scenario,
    deployment: &Deployment,
    paths: &PathSet,
) -> Result<MetricReport, MetricError> {
    deployment.validate(scenario)?;
    let resolved = paths.resolve(scenario)?;
    Ok(report_from_paths(scenario, deployment, &resolved))
}

/// Same as [`system_metrics`] with pre-resolved paths and no validation.
pub fn report_from_paths(
    scenario: &Scenario,
    deployment: &Deployment,
    paths: &[Vec<Vec<NodeId>>],
) -> MetricReport {
    let demands: Vec<DemandMetric> = scenario
        .demands
        .iter()
        .zip(paths)
        .map(|(d, p)| demand_metric(&scenario.network, deployment, d, p))
        .collect();
    let system_rp = demands.iter().map(|d| d.rp).fold(f64::INFINITY, f64::min);
    let system_fp = demands
        .iter()
        .map(|d| d.fp)
        .fold(f64::NEG_INFINITY, f64::max);
    MetricReport {
        demands,
        system_rp,
        system_fp,
    }
}

/// `rp * divisor + fp == 1` for every demand.
pub fn prop1_holds(report: &MetricReport, tol: f64) -> bool {
    report
        .demands
        .iter()
        .filter(|d| d.feasible)
        .all(|d| (d.rp * d.divisor + d.fp - 1.0).abs() <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityCheck {
    pub deployments: usize,
    pub best_rp: f64,
    pub best_fp: f64,
    pub rp_optimizers: BTreeSet<usize>,
    pub fp_optimizers: BTreeSet<usize>,
    /// Prop. 1 identity held on every (deployment, demand) pair.
    pub prop1: bool,
}

impl DualityCheck {
    pub fn holds(&self) -> bool {
        self.prop1 && self.rp_optimizers == self.fp_optimizers
    }
}

/// Enumerates every deployment of the demanded NFs and compares the
/// RP-maximizing and FP-minimizing sets.
pub fn check_duality(
    scenario: &Scenario,
    paths: &PathSet,
    tol: f64,
) -> Result<DualityCheck, MetricError> {
    let resolved = paths.resolve(scenario)?;
    let nfs: BTreeSet<NfId> = scenario
        .demands
        .iter()
        .flat_map(|d| d.nfs.iter().cloned())
        .collect();
    let all = Deployment::enumerate(scenario, &nfs);
    let reports: Vec<MetricReport> = all
        .iter()
        .map(|d| report_from_paths(scenario, d, &resolved))
        .collect();
    let prop1 = reports.iter().all(|r| prop1_holds(r, tol));
    let best_rp = reports
        .iter()
        .map(|r| r.system_rp)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_fp = reports
        .iter()
        .map(|r| r.system_fp)
        .fold(f64::INFINITY, f64::min);
    let rp_optimizers = (0..reports.len())
        .filter(|&i| reports[i].system_rp >= best_rp - tol)
        .collect();
    let fp_optimizers = (0..reports.len())
        .filter(|&i| reports[i].system_fp <= best_fp + tol)
        .collect();
    Ok(DualityCheck {
        deployments: all.len(),
        best_rp,
        best_fp,
        rp_optimizers,
        fp_optimizers,
        prop1,
    })
}

/// Prop. 1 for the given deployment and agreement of optimizer sets over
/// all deployments.
pub fn verify_duality(
    scenario: &Scenario,
    deployment: &Deployment,
    paths: &PathSet,
) -> Result<bool, MetricError> {
    let report = system_metrics(scenario, deployment, paths)?;
    Ok(prop1_holds(&report, 1e-12) && check_duality(scenario, paths, 1e-12)?.holds())
}

/// Nodes on `path` hosting a deployed copy of some NF of `demand`.
fn relevant_nodes(deployment: &Deployment, demand: &Demand, path: &[NodeId]) -> Vec<NodeId> {
    let set: BTreeSet<NodeId> = path
        .iter()
        .copied()
        .filter(|&n| demand.nfs.iter().any(|f| deployment.hosts_nf(n, f)))
        .collect();
    set.into_iter().collect()
}

/// Probability that the demand is served on a fixed routing when nodes fail
/// independently, by enumeration over failure subsets of its NF hosts.
pub fn exact_reliability(
    network: &PhysicalNetwork,
    deployment: &Deployment,
    demand: &Demand,
    path: &[NodeId],
) -> Result<f64, MetricError> {
    let nodes = relevant_nodes(deployment, demand, path);
    if nodes.len() > RELIABILITY_GUARD_BITS {
        return Err(MetricError::Guard(nodes.len()));
    }
    let probs: Vec<f64> = nodes.iter().map(|&n| network.failure_prob(n)).collect();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << nodes.len()) {
        let mut p = 1.0;
        let mut alive = Deployment::default();
        for (b, &n) in nodes.iter().enumerate() {
            if mask >> b & 1 == 1 {
                p *= probs[b];
            } else {
                p *= 1.0 - probs[b];
                for f in &demand.nfs {
                    if deployment.hosts_nf(n, f) {
                        alive.placement.entry(f.clone()).or_default().insert(n);
                    }
                }
            }
        }
        if p > 0.0 && path_feasible(&alive, demand, path) {
            total += p;
        }
    }
    Ok(total)
}

/// Best survival probability of a single assignment of one deployed copy
/// per NF along the routing (in order when the demand is ordered).
pub fn single_copy_bound(
    network: &PhysicalNetwork,
    deployment: &Deployment,
    demand: &Demand,
    path: &[NodeId],
) -> f64 {
    let surv = |n: NodeId| 1.0 - network.failure_prob(n);
    if !demand.ordered {
        return demand
            .nfs
            .iter()
            .map(|f| {
                path.iter()
                    .filter(|&&n| deployment.hosts_nf(n, f))
                    .map(|&n| surv(n))
                    .fold(0.0, f64::max)
            })
            .product();
    }
    // best[j]: best product serving the first j NFs using positions seen so far
    let k = demand.nfs.len();
    let mut best = vec![0.0; k + 1];
    best[0] = 1.0;
    for &n in path {
        for j in 0..k {
            if deployment.hosts_nf(n, &demand.nfs[j]) {
                best[j + 1] = f64::max(best[j + 1], best[j] * surv(n));
            }
        }
    }
    best[k]
}

/// Log-space weighting of a failure probability used by the linearized
/// objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogMode {
    /// `ln(1 + rho)`.
    #[default]
    OnePlus,
    /// `ln(rho)` with `rho` floored at `floor`.
    Faithful,
}

impl LogMode {
    pub const FLOOR: f64 = 1e-12;

    pub fn weight(self, rho: f64) -> f64 {
        match self {
            Self::OnePlus => rho.ln_1p(),
            Self::Faithful => rho.max(Self::FLOOR).ln(),
        }
    }
}

/// Linearized FP of one demand on a fixed routing: the largest per-NF sum of
/// log weights of deployed copies on the path, minus `ln |F_st|!` when
/// ordered.
pub fn routed_log_fp(
    network: &PhysicalNetwork,
    deployment: &Deployment,
    demand: &Demand,
    path: &[NodeId],
    mode: LogMode,
) -> f64 {
    let offset = if demand.ordered {
        demand.factorial().ln()
    } else {
        0.0
    };
    demand
        .nfs
        .iter()
        .map(|f| {
            let nodes: BTreeSet<NodeId> = path
                .iter()
                .copied()
                .filter(|&n| deployment.hosts_nf(n, f))
                .collect();
            nodes
                .iter()
                .map(|&n| mode.weight(network.failure_prob(n)))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
        - offset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Edge, NodeRecord, Sampling};

    /// Path 1-5-2-3-6-4 with V1 = {1,3,4,5}, V2 = {2,3,5,6}.
    fn two_demand() -> Scenario {
        let caps: [(u32, f64, &[&str]); 6] = [
            (1, 0.1, &["f1"]),
            (2, 0.1, &["f2"]),
            (3, 0.2, &["f1", "f2"]),
            (4, 0.1, &["f1"]),
            (5, 0.2, &["f1", "f2"]),
            (6, 0.1, &["f2"]),
        ];
        let nodes = caps
            .iter()
            .map(|&(i, p, c)| NodeRecord::new(i, p, c.to_vec()))
            .collect();
        let edges = [(1, 5), (5, 2), (2, 3), (3, 6), (6, 4)]
            .iter()
            .map(|&(u, v)| Edge { u, v, weight: 1.0 })
            .collect();
        let net = PhysicalNetwork::new(nodes, edges, false).unwrap();
        let demands = vec![
            Demand::new(1, 2, true, ["f1", "f2"]),
            Demand::new(3, 4, false, ["f1", "f2"]),
        ];
        Scenario::new(
            net,
            demands,
            [("f1".into(), 4), ("f2".into(), 4)].into(),
            Sampling::default(),
        )
        .unwrap()
    }

    #[test]
    fn two_demand_rp_and_reliability() {
        let sc = two_demand();
        let dep = Deployment::full(&sc);
        let report = system_metrics(&sc, &dep, &PathSet::AllSimple).unwrap();
        assert!((report.system_rp - 0.49).abs() < 1e-12);
        assert!(prop1_holds(&report, 1e-12));
        let r12 = exact_reliability(&sc.network, &dep, &sc.demands[0], &[1, 5, 2]).unwrap();
        let r34 = exact_reliability(&sc.network, &dep, &sc.demands[1], &[4, 6, 3]).unwrap();
        assert!((r12 - 0.962).abs() < 1e-12, "{r12}");
        assert!((r34 - 0.962).abs() < 1e-12, "{r34}");
        assert!(r12 >= single_copy_bound(&sc.network, &dep, &sc.demands[0], &[1, 5, 2]));
    }

    #[test]
    fn trivial_values() {
        let sc = two_demand();
        let dep = Deployment::full(&sc);
        let zero = sc.network.with_failure_probs(|_| 0.0);
        let paths = vec![vec![1, 5, 2]];
        assert_eq!(demand_metric(&zero, &dep, &sc.demands[0], &paths).rp, 0.5);
        assert_eq!(
            demand_metric(&zero, &dep, &sc.demands[1], &[vec![3, 6, 4]]).rp,
            1.0
        );
        let single = Deployment::new([("f1", [3])]);
        let d = Demand::new(2, 6, false, ["f1"]);
        let m = demand_metric(&sc.network, &single, &d, &[vec![2, 3, 6]]);
        assert!((m.rp - 0.8).abs() < 1e-15);
        let none = demand_metric(&sc.network, &Deployment::default(), &d, &[vec![2, 3, 6]]);
        assert_eq!((none.rp, none.feasible), (0.0, false));
    }

    #[test]
    fn limits_and_pools_checked() {
        let sc = two_demand();
        assert!(matches!(
            Deployment::new([("f1", [2])]).validate(&sc),
            Err(MetricError::OutsidePool { .. })
        ));
        let tight = Scenario::new(
            sc.network.clone(),
            vec![],
            [("f1".into(), 1), ("f2".into(), 1)].into(),
            Sampling::default(),
        )
        .unwrap();
        assert!(matches!(
            Deployment::new([("f1", [1, 3])]).validate(&tight),
            Err(MetricError::OverLimit { .. })
        ));
        let count = Deployment::enumerate(&tight, &["f1".to_string()].into()).len();
        assert_eq!(count, 5);
    }

    #[test]
    fn ordered_feasibility_is_non_strict() {
        let dep = Deployment::new([("a", vec![2]), ("b", vec![2, 1])]);
        let d = Demand::new(1, 3, true, ["a", "b"]);
        assert!(path_feasible(&dep, &d, &[1, 2, 3]));
        let only_b_first = Deployment::new([("a", vec![3]), ("b", vec![1])]);
        assert!(!path_feasible(&only_b_first, &d, &[1, 2, 3]));
    }

    #[test]
    fn mixed_kinds_break_optimizer_agreement() {
        // one ordered and one unordered demand on the path 1-2-3-4
        let nodes = vec![
            NodeRecord::new(1, 0.4, ["a", "b"]),
            NodeRecord::new(2, 0.6, ["a", "b"]),
            NodeRecord::new(3, 0.2, ["a"]),
            NodeRecord::new(4, 0.3, ["b"]),
        ];
        let edges = (1..4)
            .map(|u| Edge {
                u,
                v: u + 1,
                weight: 1.0,
            })
            .collect();
        let net = PhysicalNetwork::new(nodes, edges, false).unwrap();
        let demands = vec![
            Demand::new(1, 4, true, ["a", "b"]),
            Demand::new(3, 4, false, ["b"]),
        ];
        let sc = Scenario::new(
            net,
            demands,
            [("a".into(), 2), ("b".into(), 2)].into(),
            Sampling::default(),
        )
        .unwrap();
        let check = check_duality(&sc, &PathSet::AllSimple, 1e-12).unwrap();
        assert!(check.prop1);
        assert!(!check.holds());
    }

    #[test]
    fn two_demand_duality() {
        let sc = two_demand();
        let dep = Deployment::full(&sc);
        // mixed demand kinds: Prop. 1 holds, optimizer sets need not agree
        let check = check_duality(&sc, &PathSet::AllSimple, 1e-12).unwrap();
        assert!(check.prop1);
        let mut homogeneous = sc.clone();
        homogeneous.demands[1] = Demand::new(3, 4, true, ["f1", "f2"]);
        assert!(verify_duality(&homogeneous, &dep, &PathSet::AllSimple).unwrap());
    }

    #[test]
    fn log_modes() {
        assert!((LogMode::OnePlus.weight(0.1) - 1.1f64.ln()).abs() < 1e-15);
        assert_eq!(LogMode::Faithful.weight(0.0), 1e-12f64.ln());
        let sc = two_demand();
        let dep = Deployment::full(&sc);
        let v = routed_log_fp(
            &sc.network,
            &dep,
            &sc.demands[0],
            &[1, 5, 2],
            LogMode::Faithful,
        );
        assert!((v - (0.02f64.ln() - 2f64.ln())).abs() < 1e-12);
    }
}

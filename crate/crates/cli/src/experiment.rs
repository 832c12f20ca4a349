//! Failure-probability sweeps over the shipped topologies.

use std::collections::{BTreeMap, BTreeSet};

use nfv_core::facloc::{solve_sfork, ForkInstance, ForkRequest, DEFAULT_DELTA};
use nfv_core::metrics::{demand_metric, report_from_paths, Deployment};
use nfv_core::netmodel::{
    builtin_scenario, sample_failure_probs, Demand, NfId, NodeId, PhysicalNetwork, Scenario,
};
use nfv_core::pathfind::{enumerate_paths_oracle, k_shortest_candidate_paths, ORACLE_LIMIT};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Largest pool searched exhaustively by the deployment variant.
pub const SUBSET_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Net(#[from] nfv_core::netmodel::NetError),
    #[error(transparent)]
    Path(#[from] nfv_core::pathfind::PathError),
    #[error(transparent)]
    Fork(#[from] nfv_core::facloc::FacError),
    #[error("pool of {0} nodes is too large for exhaustive search")]
    Guard(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NonchainedReliability,
    NonchainedDeployment,
    SfcSurvivability,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::NonchainedReliability => "nonchained-reliability",
            Self::NonchainedDeployment => "nonchained-deployment",
            Self::SfcSurvivability => "sfc-survivability",
        }
    }
}

/// Mean failure probabilities `start, start + step, ...` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// Forwarding graphs of the SFC experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Shape {
    /// One chain.
    #[serde(rename = "1SFC")]
    Single,
    /// One root NF followed by two chains.
    #[serde(rename = "rFork")]
    Rooted,
    /// Two NFs followed by two chains.
    #[serde(rename = "bFork")]
    Branched,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Single, Shape::Rooted, Shape::Branched];

    pub fn label(self) -> &'static str {
        match self {
            Self::Single => "1SFC",
            Self::Rooted => "rFork",
            Self::Branched => "bFork",
        }
    }

    /// `(shared prefix, branches)` with chains of `len` NFs.
    pub fn forwarding(self, len: usize) -> (Vec<NfId>, Vec<Vec<NfId>>) {
        let chain = |tag: &str| (1..=len).map(|k| format!("{tag}{k}")).collect::<Vec<_>>();
        match self {
            Self::Single => (chain("f"), Vec::new()),
            Self::Rooted => (vec!["r1".into()], vec![chain("a"), chain("b")]),
            Self::Branched => (vec!["r1".into(), "r2".into()], vec![chain("a"), chain("b")]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub topology: String,
    pub sweep: Sweep,
    pub variance: f64,
    /// Fractions of the physical nodes allowed to host NFs (non-chained).
    pub pool_fractions: Vec<f64>,
    /// Required system reliability (deployment variant).
    pub target_reliability: f64,
    /// Demand counts of the SFC experiment.
    pub demand_counts: Vec<usize>,
    pub shapes: Vec<Shape>,
    /// NFs per chain of a forwarding graph.
    pub chain_len: usize,
    /// Candidate paths per demand; every simple path when absent.
    pub k: Option<usize>,
    pub samples: u32,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn preset(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            topology: "nsf".into(),
            sweep: Sweep {
                start: 0.01,
                stop: 0.49,
                step: 0.01,
            },
            variance: 0.001,
            pool_fractions: vec![0.4, 0.5, 0.6],
            target_reliability: 0.9,
            demand_counts: vec![6, 10],
            shapes: Shape::ALL.to_vec(),
            chain_len: 3,
            k: Some(10),
            samples: 25,
            seed: 1,
        };
        match kind {
            ExperimentKind::SfcSurvivability => Self {
                topology: "coronet".into(),
                sweep: Sweep {
                    start: 0.05,
                    stop: 0.5,
                    step: 0.05,
                },
                ..base
            },
            _ => base,
        }
    }

    /// Five sweep points over 1-50% and five samples.
    pub fn desk(kind: ExperimentKind) -> Self {
        Self {
            sweep: Sweep {
                start: 0.01,
                stop: 0.5,
                step: 0.1225,
            },
            samples: 5,
            ..Self::preset(kind)
        }
    }

    pub fn validate(&self) -> Result<(), ExpError> {
        let pts = self.sweep.points();
        if !(self.sweep.step > 0.0)
            || pts.is_empty()
            || pts.iter().any(|&p| !(0.0..1.0).contains(&p))
        {
            return Err(ExpError::Invalid(
                "sweep must lie in [0, 1) with a positive step".into(),
            ));
        }
        if self.k == Some(0) {
            return Err(ExpError::Invalid("k must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(ExpError::Invalid("samples must be at least 1".into()));
        }
        if !(self.variance >= 0.0) {
            return Err(ExpError::Invalid("variance must be nonnegative".into()));
        }
        if self.pool_fractions.is_empty()
            || self.pool_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0))
        {
            return Err(ExpError::Invalid(
                "pool fractions must lie in (0, 1]".into(),
            ));
        }
        if !(self.target_reliability > 0.0 && self.target_reliability <= 1.0) {
            return Err(ExpError::Invalid(
                "target reliability must lie in (0, 1]".into(),
            ));
        }
        if self.kind == ExperimentKind::SfcSurvivability
            && (self.chain_len == 0
                || self.shapes.is_empty()
                || self.demand_counts.iter().any(|&c| c == 0))
        {
            return Err(ExpError::Invalid(
                "SFC experiment needs shapes, chains and demands".into(),
            ));
        }
        Ok(())
    }

    /// Hex SHA-256 prefix of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub build_id: String,
    pub spec_hash: String,
}

impl Provenance {
    pub fn of(spec: &ExperimentSpec) -> Self {
        Self {
            seed: spec.seed,
            build_id: build_id(),
            spec_hash: spec.hash(),
        }
    }
}

pub fn build_id() -> String {
    option_env!("NFV_BUILD_ID")
        .map(str::to_string)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub x: f64,
    pub series: String,
    pub statistic: String,
    /// Mean over the samples where the value exists.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub samples: u32,
    pub infeasible: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub kind: ExperimentKind,
    pub provenance: Provenance,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, x: f64, series: &str, statistic: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.x == x && r.series == series && r.statistic == statistic)
    }

    pub fn series(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.series) {
                out.push(r.series.clone());
            }
        }
        out
    }
}

/// Value of one series at one sweep point for one sample; `None` when infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleValue {
    pub point: usize,
    pub sample: u32,
    pub series: String,
    pub statistic: &'static str,
    pub value: Option<f64>,
}

/// Seed of one sample, shared by every sweep point so draws are coupled.
pub fn sample_seed(seed: u64, sample: u32) -> u64 {
    let mut z = seed ^ (u64::from(sample) + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Redraws NF-enabled failure probabilities; a zero mean makes every such node perfect.
fn draw(
    network: &PhysicalNetwork,
    mean: f64,
    variance: f64,
    seed: u64,
) -> Result<PhysicalNetwork, ExpError> {
    if mean == 0.0 {
        return Ok(network.with_failure_probs(|n| {
            if n.is_nf_enabled() {
                0.0
            } else {
                n.failure_prob
            }
        }));
    }
    Ok(sample_failure_probs(network, mean, variance, seed)?)
}

fn pool_size(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) - 1e-9).ceil().max(1.0) as usize
}

fn fraction_label(f: f64) -> String {
    format!("{}%", (f * 100.0).round())
}

fn full_on(nodes: &[NodeId], nfs: &BTreeSet<NfId>) -> Deployment {
    Deployment {
        placement: nfs
            .iter()
            .map(|f| (f.clone(), nodes.iter().copied().collect()))
            .collect(),
    }
}

struct NonchainedSetup {
    scenario: Scenario,
    paths: Vec<Vec<Vec<NodeId>>>,
    nfs: BTreeSet<NfId>,
}

fn nonchained_setup(spec: &ExperimentSpec) -> Result<NonchainedSetup, ExpError> {
    let base = builtin_scenario(&spec.topology)?;
    let all: BTreeSet<NfId> = base.catalog.nfs().cloned().collect();
    let network = base.network.with_capabilities(|_| all.clone());
    let mut scenario = base.with_network(network);
    for d in &mut scenario.demands {
        d.ordered = false;
    }
    let paths = scenario
        .demands
        .iter()
        .map(|d| match spec.k {
            Some(k) => Ok(
                k_shortest_candidate_paths(&scenario.network, d.source, d.target, k)
                    .into_iter()
                    .map(|(_, p)| p)
                    .collect(),
            ),
            None => enumerate_paths_oracle(&scenario.network, d.source, d.target, ORACLE_LIMIT),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let nfs = scenario
        .demands
        .iter()
        .flat_map(|d| d.nfs.iter().cloned())
        .collect();
    Ok(NonchainedSetup {
        scenario,
        paths,
        nfs,
    })
}

/// Per-sample values of a non-chained experiment.
///
/// Each sample draws a node permutation; the pool of fraction `q` is its
/// first `ceil(q n)` nodes, so pools are nested. Deploying every requested
/// NF on the whole pool maximizes the reliability because adding copies
/// never lowers it. The deployment variant uses the largest pool and finds
/// the fewest nodes reaching the target, for one-NF and three-NF demands.
pub fn nonchained_samples(spec: &ExperimentSpec) -> Result<Vec<SampleValue>, ExpError> {
    spec.validate()?;
    if spec.kind == ExperimentKind::SfcSurvivability {
        return Err(ExpError::Invalid("not a non-chained experiment".into()));
    }
    let setup = nonchained_setup(spec)?;
    let points = spec.sweep.points();
    let ids: Vec<NodeId> = setup
        .scenario
        .network
        .nodes()
        .iter()
        .map(|n| n.id)
        .collect();
    let jobs: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|p| (0..spec.samples).map(move |s| (p, s)))
        .collect();
    let out: Vec<Result<Vec<SampleValue>, ExpError>> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let seed = sample_seed(spec.seed, s);
            let mut order = ids.clone();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let net = draw(&setup.scenario.network, points[p], spec.variance, seed)?;
            let scenario = setup.scenario.with_network(net);
            let mut vals = Vec::new();
            match spec.kind {
                ExperimentKind::NonchainedReliability => {
                    for &q in &spec.pool_fractions {
                        let pool = &order[..pool_size(q, ids.len())];
                        let report =
                            report_from_paths(&scenario, &full_on(pool, &setup.nfs), &setup.paths);
                        let value = report
                            .demands
                            .iter()
                            .all(|d| d.feasible)
                            .then_some(report.system_rp);
                        vals.push(SampleValue {
                            point: p,
                            sample: s,
                            series: fraction_label(q),
                            statistic: "system_rp",
                            value,
                        });
                    }
                }
                _ => {
                    let q = spec.pool_fractions.iter().copied().fold(0.0, f64::max);
                    let pool = &order[..pool_size(q, ids.len())];
                    for (label, nfs) in [("1 NF", 1usize), ("3 NFs", 3)] {
                        let mut sc = scenario.clone();
                        let chosen: Vec<NfId> = setup.nfs.iter().take(nfs).cloned().collect();
                        for d in &mut sc.demands {
                            d.nfs = chosen.clone();
                        }
                        let value =
                            min_nodes_for(&sc, &setup.paths, pool, spec.target_reliability)?
                                .map(|m| m as f64);
                        vals.push(SampleValue {
                            point: p,
                            sample: s,
                            series: label.into(),
                            statistic: "min_nodes",
                            value,
                        });
                    }
                }
            }
            Ok(vals)
        })
        .collect();
    let mut all = Vec::new();
    for r in out {
        all.extend(r?);
    }
    Ok(all)
}

/// Fewest pool nodes whose full deployment reaches `target`.
fn min_nodes_for(
    sc: &Scenario,
    paths: &[Vec<Vec<NodeId>>],
    pool: &[NodeId],
    target: f64,
) -> Result<Option<usize>, ExpError> {
    if pool.len() > SUBSET_LIMIT {
        return Err(ExpError::Guard(pool.len()));
    }
    let nfs: BTreeSet<NfId> = sc
        .demands
        .iter()
        .flat_map(|d| d.nfs.iter().cloned())
        .collect();
    let mut masks: Vec<u32> = (1u32..(1 << pool.len())).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for m in masks {
        let nodes: Vec<NodeId> = (0..pool.len())
            .filter(|b| m >> b & 1 == 1)
            .map(|b| pool[b])
            .collect();
        let report = report_from_paths(sc, &full_on(&nodes, &nfs), paths);
        if report.demands.iter().all(|d| d.feasible) && report.system_rp >= target - 1e-12 {
            return Ok(Some(nodes.len()));
        }
    }
    Ok(None)
}

pub fn run_nonchained_experiment(spec: &ExperimentSpec) -> Result<ResultTable, ExpError> {
    let values = nonchained_samples(spec)?;
    Ok(aggregate(spec, &values))
}

/// Random SFC requests: distinct endpoints, half on each branch of a fork.
pub fn sfc_requests(
    network: &PhysicalNetwork,
    count: usize,
    branches: usize,
    seed: u64,
) -> Vec<ForkRequest> {
    let ids: Vec<NodeId> = network.nodes().iter().map(|n| n.id).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ count as u64);
    let mut out: Vec<ForkRequest> = (0..count)
        .map(|_| {
            let s = ids[rng.random_range(0..ids.len())];
            let mut t = s;
            while t == s {
                t = ids[rng.random_range(0..ids.len())];
            }
            ForkRequest {
                source: s,
                target: t,
                branch: 0,
            }
        })
        .collect();
    if branches > 1 {
        let mut which: Vec<usize> = (0..count).map(|k| k * branches / count).collect();
        which.shuffle(&mut rng);
        for (r, b) in out.iter_mut().zip(which) {
            r.branch = b;
        }
    }
    out
}

/// Provisioned routes of one forwarding graph: per request its demand and
/// physical path, plus the deployment.
struct Provisioned {
    demands: Vec<Demand>,
    routes: Vec<Vec<NodeId>>,
    deployment: Deployment,
}

fn provision(
    network: &PhysicalNetwork,
    shape: Shape,
    spec: &ExperimentSpec,
    count: usize,
    seed: u64,
) -> Result<Provisioned, ExpError> {
    let (shared, branches) = shape.forwarding(spec.chain_len);
    let nfs: Vec<NfId> = shared
        .iter()
        .chain(branches.iter().flatten())
        .cloned()
        .collect();
    let ids: Vec<NodeId> = network.nodes().iter().map(|n| n.id).collect();
    let pools: BTreeMap<NfId, Vec<NodeId>> = nfs.iter().map(|f| (f.clone(), ids.clone())).collect();
    let requests = sfc_requests(network, count, branches.len(), seed);
    let fork = ForkInstance::new(network, shared, branches, pools, BTreeMap::new(), requests)?;
    let run = solve_sfork(&fork, DEFAULT_DELTA)?;
    let mut demands = Vec::new();
    let mut routes = Vec::new();
    for (r, hosts) in fork.requests.iter().zip(&run.solution.paths) {
        let chain: Vec<NfId> = fork
            .chain(r.branch)
            .into_iter()
            .map(|(_, f)| f.clone())
            .collect();
        let mut route = vec![r.source];
        for &h in hosts.iter().chain(std::iter::once(&r.target)) {
            let last = *route.last().expect("nonempty");
            let (_, leg) = network
                .shortest_path(last, h)
                .ok_or_else(|| ExpError::Invalid(format!("node {h} is unreachable from {last}")))?;
            route.extend(leg.into_iter().skip(1));
        }
        demands.push(Demand::new(r.source, r.target, true, chain));
        routes.push(route);
    }
    Ok(Provisioned {
        demands,
        routes,
        deployment: run.solution.deployment,
    })
}

/// Per-sample values of the SFC experiment.
///
/// Each sample draws requests, provisions every forwarding graph with the
/// fork approximation at unit deployment cost, and evaluates the smallest
/// survivable probability over the requests on their routes at every sweep
/// point, together with the number of nodes hosting NFs.
pub fn sfc_samples(spec: &ExperimentSpec) -> Result<Vec<SampleValue>, ExpError> {
    spec.validate()?;
    if spec.kind != ExperimentKind::SfcSurvivability {
        return Err(ExpError::Invalid("not an SFC experiment".into()));
    }
    let base = builtin_scenario(&spec.topology)?;
    let marker: BTreeSet<NfId> = BTreeSet::from(["any".to_string()]);
    let network = base.network.with_capabilities(|_| marker.clone());
    let points = spec.sweep.points();
    let mut jobs = Vec::new();
    for s in 0..spec.samples {
        for &count in &spec.demand_counts {
            for &shape in &spec.shapes {
                jobs.push((s, count, shape));
            }
        }
    }
    let out: Vec<Result<Vec<SampleValue>, ExpError>> = jobs
        .par_iter()
        .map(|&(s, count, shape)| {
            let seed = sample_seed(spec.seed, s);
            let prov = provision(&network, shape, spec, count, seed)?;
            let series = format!("{count}D-{}", shape.label());
            let nodes = prov.deployment.node_count() as f64;
            let mut vals = Vec::new();
            for (p, &mean) in points.iter().enumerate() {
                let net = draw(&network, mean, spec.variance, seed)?;
                let rp = prov
                    .demands
                    .iter()
                    .zip(&prov.routes)
                    .map(|(d, route)| {
                        demand_metric(&net, &prov.deployment, d, std::slice::from_ref(route)).rp
                    })
                    .fold(f64::INFINITY, f64::min);
                vals.push(SampleValue {
                    point: p,
                    sample: s,
                    series: series.clone(),
                    statistic: "survivable",
                    value: Some(rp),
                });
                vals.push(SampleValue {
                    point: p,
                    sample: s,
                    series: series.clone(),
                    statistic: "min_nodes",
                    value: Some(nodes),
                });
            }
            Ok(vals)
        })
        .collect();
    let mut all = Vec::new();
    for r in out {
        all.extend(r?);
    }
    Ok(all)
}

pub fn run_sfc_experiment(spec: &ExperimentSpec) -> Result<ResultTable, ExpError> {
    let values = sfc_samples(spec)?;
    Ok(aggregate(spec, &values))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable, ExpError> {
    match spec.kind {
        ExperimentKind::SfcSurvivability => run_sfc_experiment(spec),
        _ => run_nonchained_experiment(spec),
    }
}

/// One row per (sweep point, series, statistic), in first-seen series order.
fn aggregate(spec: &ExperimentSpec, values: &[SampleValue]) -> ResultTable {
    let points = spec.sweep.points();
    let mut keys: Vec<(String, &'static str)> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<Option<f64>>> = BTreeMap::new();
    let mut sorted: Vec<&SampleValue> = values.iter().collect();
    sorted.sort_by_key(|v| (v.point, v.sample));
    for v in sorted {
        let key = (v.series.clone(), v.statistic);
        let k = keys.iter().position(|x| *x == key).unwrap_or_else(|| {
            keys.push(key);
            keys.len() - 1
        });
        groups.entry((v.point, k)).or_default().push(v.value);
    }
    let mut rows = Vec::new();
    for (&(p, k), vals) in &groups {
        let ok: Vec<f64> = vals.iter().flatten().copied().collect();
        let (mean, std) = if ok.is_empty() {
            (None, None)
        } else {
            let n = ok.len() as f64;
            let m = ok.iter().sum::<f64>() / n;
            let var = ok.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
            (Some(m), Some(var.sqrt()))
        };
        rows.push(ResultRow {
            x: points[p],
            series: keys[k].0.clone(),
            statistic: keys[k].1.into(),
            mean,
            std,
            samples: ok.len() as u32,
            infeasible: (vals.len() - ok.len()) as u32,
        });
    }
    ResultTable {
        kind: spec.kind,
        provenance: Provenance::of(spec),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_points_are_clean() {
        let s = Sweep {
            start: 0.01,
            stop: 0.5,
            step: 0.1225,
        };
        assert_eq!(s.points(), vec![0.01, 0.1325, 0.255, 0.3775, 0.5]);
        assert_eq!(
            Sweep {
                start: 0.05,
                stop: 0.5,
                step: 0.05
            }
            .points()
            .len(),
            10
        );
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentSpec::desk(ExperimentKind::NonchainedReliability);
        assert_eq!(a.hash(), a.clone().hash());
        assert_eq!(a.hash().len(), 16);
        let b = ExperimentSpec {
            seed: 2,
            ..a.clone()
        };
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn requests_split_between_branches() {
        let net = builtin_scenario("coronet").unwrap().network;
        let reqs = sfc_requests(&net, 6, 2, 3);
        assert_eq!(reqs.iter().filter(|r| r.branch == 0).count(), 3);
        assert!(reqs.iter().all(|r| r.source != r.target));
    }

    #[test]
    fn validation() {
        let mut s = ExperimentSpec::desk(ExperimentKind::SfcSurvivability);
        assert!(s.validate().is_ok());
        s.samples = 0;
        assert!(s.validate().is_err());
        s.samples = 1;
        s.sweep = Sweep {
            start: 0.5,
            stop: 1.2,
            step: 0.5,
        };
        assert!(s.validate().is_err());
    }
}

//! Robust NF provisioning MILPs, LP export and an exact desk-scale solver.
//!
//! Variable families: `lambda`, `xi_<f>_<d>`, `x_<d>_<p>`, `y_<i>_<f>_<d>`,
//! `h_<i>`, `z_<i>_<f>` and, for SFC models, `omega_<d>`, `beta_<d>`.
//! Demands and candidate paths are referred to by index.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::auxnet::{attach_endpoints, AuxError, AuxNetwork, Forwarding};
use crate::metrics::{report_from_paths, routed_log_fp, Deployment, LogMode, MetricReport};
use crate::netmodel::{NfId, NodeId, Scenario};
use crate::pathfind::{k_shortest_candidate_paths, k_shortest_service_paths, PathError};

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("demand {0} has no candidate path")]
    EmptyCandidates(String),
    #[error("demand {0} has no order-respecting candidate path")]
    NoOrderedCandidate(String),
    #[error("demand {0} does not match the model kind")]
    WrongKind(String),
    #[error("model has no solver metadata")]
    NoMetadata,
    #[error("solution is inconsistent: {0}")]
    Inconsistent(String),
    #[error("solve status is {0:?}, not optimal")]
    NotOptimal(Status),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NonChained,
    Sfc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A candidate routing: a physical walk and, for SFC demands, the hosts
/// designated to serve each NF in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub physical: Vec<NodeId>,
    pub designated: Vec<NodeId>,
}

impl Candidate {
    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.physical.iter().copied().collect()
    }

    /// Designated hosts appear along the walk in order.
    pub fn respects_order(&self, len: usize) -> bool {
        if self.designated.len() != len {
            return false;
        }
        let mut pos = 0;
        for &d in &self.designated {
            match self.physical[pos..].iter().position(|&n| n == d) {
                Some(p) => pos += p,
                None => return false,
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandMeta {
    pub label: String,
    pub nfs: Vec<NfId>,
    pub log_factorial: f64,
    pub candidates: Vec<Candidate>,
}

/// Structure the exact solver enumerates over.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub kind: ModelKind,
    pub mode: LogMode,
    pub big_m: f64,
    pub nodes: Vec<NodeId>,
    pub nfs: Vec<NfId>,
    pub pools: BTreeMap<NfId, BTreeSet<NodeId>>,
    pub limits: BTreeMap<NfId, u32>,
    pub weights: BTreeMap<NodeId, f64>,
    pub demands: Vec<DemandMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Minimized linear objective.
    pub objective: Vec<(usize, f64)>,
    pub meta: Option<ModelMeta>,
    index: HashMap<String, usize>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            meta: None,
            index: HashMap::new(),
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> usize {
        let name = name.into();
        let i = self.variables.len();
        assert!(
            self.index.insert(name.clone(), i).is_none(),
            "duplicate variable {name}"
        );
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integer,
        });
        i
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    /// Number of rows whose name starts with `prefix`.
    pub fn count_rows(&self, prefix: &str) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .count()
    }

    /// First violated bound or row under `values`, if any.
    pub fn violation(&self, values: &[f64], tol: f64) -> Option<String> {
        for (v, &x) in self.variables.iter().zip(values) {
            if x < v.lower - tol || x > v.upper + tol {
                return Some(format!(
                    "{} = {x} outside [{}, {}]",
                    v.name, v.lower, v.upper
                ));
            }
            if v.integer && (x - x.round()).abs() > tol {
                return Some(format!("{} = {x} not integral", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(i, a)| a * values[i]).sum();
            let slack = tol * c.rhs.abs().max(1.0);
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs + slack,
                Sense::Ge => lhs >= c.rhs - slack,
                Sense::Eq => (lhs - c.rhs).abs() <= slack,
            };
            if !ok {
                return Some(format!("row {} violated: {lhs} vs {}", c.name, c.rhs));
            }
        }
        None
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(i, a)| a * values[i]).sum()
    }
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}

/// Candidate routings for every demand: `k` shortest physical paths for
/// non-chained models, `k` shortest auxiliary service paths for SFC models.
pub fn candidate_paths(
    scenario: &Scenario,
    kind: ModelKind,
    k: usize,
) -> Result<Vec<Vec<Candidate>>, MilpError> {
    scenario
        .demands
        .iter()
        .map(|d| {
            let cands: Vec<Candidate> = match kind {
                ModelKind::NonChained => {
                    k_shortest_candidate_paths(&scenario.network, d.source, d.target, k)
                        .into_iter()
                        .map(|(_, physical)| Candidate {
                            physical,
                            designated: Vec::new(),
                        })
                        .collect()
                }
                ModelKind::Sfc => {
                    if !d.ordered {
                        return Err(MilpError::WrongKind(d.label()));
                    }
                    let aux = AuxNetwork::sfc(
                        &scenario.network,
                        &scenario.catalog.pools,
                        &Forwarding::Chain(d.nfs.clone()),
                    )?;
                    let aux = attach_endpoints(aux, d)?;
                    k_shortest_service_paths(&aux, d, k)?
                        .into_iter()
                        .map(|p| Candidate {
                            designated: p.aux_nodes.iter().map(|n| n.phys).collect(),
                            physical: p.physical,
                        })
                        .collect()
                }
            };
            if cands.is_empty() {
                return Err(MilpError::EmptyCandidates(d.label()));
            }
            Ok(cands)
        })
        .collect()
}

struct Vars {
    lambda: usize,
    xi: BTreeMap<(NfId, usize), usize>,
    x: Vec<Vec<usize>>,
    y: BTreeMap<(NodeId, NfId, usize), usize>,
    h: BTreeMap<NodeId, usize>,
    z: BTreeMap<(NodeId, NfId), usize>,
}

fn meta_for(
    scenario: &Scenario,
    candidates: &[Vec<Candidate>],
    kind: ModelKind,
    mode: LogMode,
) -> Result<ModelMeta, MilpError> {
    let nodes: Vec<NodeId> = {
        let mut v: Vec<NodeId> = scenario.network.nodes().iter().map(|n| n.id).collect();
        v.sort_unstable();
        v
    };
    let weights: BTreeMap<NodeId, f64> = nodes
        .iter()
        .map(|&i| (i, mode.weight(scenario.network.failure_prob(i))))
        .collect();
    let big_m = 1.0 + weights.values().map(|w| w.abs()).sum::<f64>();
    let mut demands = Vec::new();
    for (d, cands) in scenario.demands.iter().zip(candidates) {
        let wrong = match kind {
            ModelKind::NonChained => d.ordered,
            ModelKind::Sfc => !d.ordered,
        };
        if wrong {
            return Err(MilpError::WrongKind(d.label()));
        }
        let kept: Vec<Candidate> = match kind {
            ModelKind::NonChained => cands.clone(),
            ModelKind::Sfc => cands
                .iter()
                .filter(|c| c.respects_order(d.nfs.len()))
                .cloned()
                .collect(),
        };
        if cands.is_empty() {
            return Err(MilpError::EmptyCandidates(d.label()));
        }
        if kept.is_empty() {
            return Err(MilpError::NoOrderedCandidate(d.label()));
        }
        let log_factorial = if kind == ModelKind::Sfc {
            d.factorial().ln()
        } else {
            0.0
        };
        demands.push(DemandMeta {
            label: d.label(),
            nfs: d.nfs.clone(),
            log_factorial,
            candidates: kept,
        });
    }
    Ok(ModelMeta {
        kind,
        mode,
        big_m,
        nodes,
        nfs: scenario.catalog.limits.keys().cloned().collect(),
        pools: scenario.catalog.pools.clone(),
        limits: scenario.catalog.limits.clone(),
        weights,
        demands,
    })
}

/// Shared families: node limits, per-NF failure sums, service indicators,
/// node usage and path selection.
fn common_rows(model: &mut MilpModel, meta: &ModelMeta) -> Vars {
    let one_plus = meta.mode == LogMode::OnePlus;
    let inf = f64::INFINITY;
    let cont_lo = if one_plus { 0.0 } else { -inf };
    let lambda = model.add_var("lambda", cont_lo, inf, false);
    let mut z = BTreeMap::new();
    for &i in &meta.nodes {
        for f in &meta.nfs {
            let ub = if meta.pools.get(f).is_some_and(|p| p.contains(&i)) {
                1.0
            } else {
                0.0
            };
            z.insert(
                (i, f.clone()),
                model.add_var(format!("z_{i}_{f}"), 0.0, ub, true),
            );
        }
    }
    let h: BTreeMap<NodeId, usize> = meta
        .nodes
        .iter()
        .map(|&i| (i, model.add_var(format!("h_{i}"), 0.0, 1.0, true)))
        .collect();
    let mut x = Vec::new();
    for (d, dm) in meta.demands.iter().enumerate() {
        x.push(
            (0..dm.candidates.len())
                .map(|p| model.add_var(format!("x_{d}_{p}"), 0.0, 1.0, true))
                .collect::<Vec<_>>(),
        );
    }
    let mut y = BTreeMap::new();
    let mut xi = BTreeMap::new();
    for (d, _) in meta.demands.iter().enumerate() {
        for f in &meta.nfs {
            xi.insert(
                (f.clone(), d),
                model.add_var(format!("xi_{f}_{d}"), cont_lo, inf, false),
            );
            for &i in &meta.nodes {
                y.insert(
                    (i, f.clone(), d),
                    model.add_var(format!("y_{i}_{f}_{d}"), 0.0, 1.0, true),
                );
            }
        }
    }
    let vars = Vars {
        lambda,
        xi,
        x,
        y,
        h,
        z,
    };

    for f in &meta.nfs {
        let terms = meta.nodes.iter().map(|i| (vars.h[i], 1.0)).collect();
        model.add_row(
            format!("node_limit_{f}"),
            terms,
            Sense::Le,
            meta.limits[f] as f64,
        );
    }
    for (d, dm) in meta.demands.iter().enumerate() {
        for f in &meta.nfs {
            let required = dm.nfs.contains(f);
            let gamma = if required { 1.0 } else { 0.0 };
            let xi_v = vars.xi[&(f.clone(), d)];
            if required && meta.kind == ModelKind::NonChained {
                model.add_row(
                    format!("lambda_xi_{f}_{d}"),
                    vec![(lambda, 1.0), (xi_v, -1.0)],
                    Sense::Ge,
                    0.0,
                );
            }
            let mut def = vec![(xi_v, 1.0)];
            for &i in &meta.nodes {
                def.push((vars.y[&(i, f.clone(), d)], -meta.weights[&i]));
            }
            model.add_row(format!("xi_def_{f}_{d}"), def, Sense::Eq, 0.0);
            for (p, cand) in dm.candidates.iter().enumerate() {
                let on = cand.nodes();
                for &i in &meta.nodes {
                    // y >= z + delta*x + gamma - 2
                    let y_v = vars.y[&(i, f.clone(), d)];
                    let mut terms = vec![(y_v, 1.0), (vars.z[&(i, f.clone())], -1.0)];
                    if on.contains(&i) {
                        terms.push((vars.x[d][p], -1.0));
                    }
                    model.add_row(
                        format!("y_lb_{i}_{f}_{d}_{p}"),
                        terms,
                        Sense::Ge,
                        gamma - 2.0,
                    );
                }
            }
            for &i in &meta.nodes {
                let y_v = vars.y[&(i, f.clone(), d)];
                model.add_row(
                    format!("y_z_{i}_{f}_{d}"),
                    vec![(y_v, 1.0), (vars.z[&(i, f.clone())], -1.0)],
                    Sense::Le,
                    0.0,
                );
                let mut terms = vec![(y_v, 1.0)];
                for (p, cand) in dm.candidates.iter().enumerate() {
                    if cand.physical.contains(&i) {
                        terms.push((vars.x[d][p], -1.0));
                    }
                }
                model.add_row(format!("y_path_{i}_{f}_{d}"), terms, Sense::Le, 0.0);
                model.add_row(
                    format!("y_req_{i}_{f}_{d}"),
                    vec![(y_v, 1.0)],
                    Sense::Le,
                    gamma,
                );
            }
            if required && meta.kind == ModelKind::NonChained {
                let terms = meta
                    .nodes
                    .iter()
                    .map(|&i| (vars.y[&(i, f.clone(), d)], 1.0))
                    .collect();
                model.add_row(format!("serve_{f}_{d}"), terms, Sense::Ge, 1.0);
            }
        }
    }
    for &i in &meta.nodes {
        for f in &meta.nfs {
            model.add_row(
                format!("h_z_{i}_{f}"),
                vec![(vars.h[&i], 1.0), (vars.z[&(i, f.clone())], -1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }
    for (d, xs) in vars.x.iter().enumerate() {
        model.add_row(
            format!("one_path_{d}"),
            xs.iter().map(|&v| (v, 1.0)).collect(),
            Sense::Eq,
            1.0,
        );
    }
    if meta.kind == ModelKind::Sfc {
        for (d, dm) in meta.demands.iter().enumerate() {
            for (p, cand) in dm.candidates.iter().enumerate() {
                for (j, (&i, f)) in cand.designated.iter().zip(&dm.nfs).enumerate() {
                    let terms = vec![(vars.x[d][p], 1.0), (vars.z[&(i, f.clone())], -1.0)];
                    model.add_row(format!("designated_{d}_{p}_{j}"), terms, Sense::Le, 0.0);
                }
            }
        }
    }
    model.objective = vec![(lambda, 1.0)];
    vars
}

/// Model for unordered demands over the given candidate paths.
pub fn build_nonchained_model(
    scenario: &Scenario,
    candidates: &[Vec<Candidate>],
    mode: LogMode,
) -> Result<MilpModel, MilpError> {
    let meta = meta_for(scenario, candidates, ModelKind::NonChained, mode)?;
    let mut model = MilpModel::new();
    common_rows(&mut model, &meta);
    model.meta = Some(meta);
    Ok(model)
}

/// Model for ordered demands; adds the demand-selection families.
pub fn build_sfc_model(
    scenario: &Scenario,
    candidates: &[Vec<Candidate>],
    mode: LogMode,
) -> Result<MilpModel, MilpError> {
    let meta = meta_for(scenario, candidates, ModelKind::Sfc, mode)?;
    let mut model = MilpModel::new();
    let vars = common_rows(&mut model, &meta);
    let lo = if mode == LogMode::OnePlus {
        0.0
    } else {
        f64::NEG_INFINITY
    };
    let big_m = meta.big_m;
    let mut betas = Vec::new();
    for (d, dm) in meta.demands.iter().enumerate() {
        let omega = model.add_var(format!("omega_{d}"), lo, f64::INFINITY, false);
        let beta = model.add_var(format!("beta_{d}"), 0.0, 1.0, true);
        betas.push(beta);
        model.add_row(
            format!("lambda_omega_{d}"),
            vec![(vars.lambda, 1.0), (omega, -1.0)],
            Sense::Ge,
            0.0,
        );
        for f in &dm.nfs {
            let xi_v = vars.xi[&(f.clone(), d)];
            model.add_row(
                format!("omega_xi_{f}_{d}"),
                vec![(omega, 1.0), (xi_v, -1.0)],
                Sense::Ge,
                -dm.log_factorial,
            );
        }
        // lambda <= omega + M(1 - beta), lambda >= omega + M(beta - 1)
        model.add_row(
            format!("select_up_{d}"),
            vec![(vars.lambda, 1.0), (omega, -1.0), (beta, big_m)],
            Sense::Le,
            big_m,
        );
        model.add_row(
            format!("select_lo_{d}"),
            vec![(vars.lambda, 1.0), (omega, -1.0), (beta, -big_m)],
            Sense::Ge,
            -big_m,
        );
    }
    model.add_row(
        "one_demand",
        betas.iter().map(|&b| (b, 1.0)).collect(),
        Sense::Eq,
        1.0,
    );
    model.meta = Some(meta);
    Ok(model)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_terms(model: &MilpModel, terms: &[(usize, f64)]) -> String {
    if terms.is_empty() {
        return "0 lambda".to_string();
    }
    let mut out = String::new();
    for (k, &(i, a)) in terms.iter().enumerate() {
        let sign = if a < 0.0 { "-" } else { "+" };
        if k == 0 {
            if a < 0.0 {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        let _ = write!(out, "{} {}", fmt_num(a.abs()), model.variables[i].name);
    }
    out
}

/// CPLEX LP text of the model.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::from("\\ robust NF provisioning model\nMinimize\n");
    if model.objective.is_empty() && model.variables.is_empty() {
        out.push_str(" obj:\n");
    } else {
        let _ = writeln!(out, " obj: {}", fmt_terms(model, &model.objective));
    }
    out.push_str("Subject To\n");
    for c in &model.constraints {
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(
            out,
            " {}: {} {sense} {}",
            c.name,
            fmt_terms(model, &c.terms),
            fmt_num(c.rhs)
        );
    }
    out.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| !v.integer) {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {} free", v.name);
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", v.name, fmt_num(v.lower));
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", v.name, fmt_num(v.upper));
            }
            (true, true) => {
                let _ = writeln!(
                    out,
                    " {} <= {} <= {}",
                    fmt_num(v.lower),
                    v.name,
                    fmt_num(v.upper)
                );
            }
        }
    }
    for v in model
        .variables
        .iter()
        .filter(|v| v.integer && v.upper < 1.0)
    {
        let _ = writeln!(
            out,
            " {} <= {} <= {}",
            fmt_num(v.lower),
            v.name,
            fmt_num(v.upper)
        );
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.integer)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for b in binaries {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    GuardExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    /// Largest number of free deployment binaries enumerated.
    pub max_binaries: usize,
    /// Largest number of deployment assignments enumerated.
    pub max_leaves: u128,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_binaries: 40,
            max_leaves: 1 << 22,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub objective: Option<f64>,
    /// Value of every model variable, by index.
    pub values: Vec<f64>,
    pub deployment: Deployment,
    /// Selected candidate index per demand.
    pub routing: Vec<usize>,
    pub leaves: u128,
}

impl SolveResult {
    fn without_solution(status: Status, leaves: u128) -> Self {
        Self {
            status,
            objective: None,
            values: Vec::new(),
            deployment: Deployment::default(),
            routing: Vec::new(),
            leaves,
        }
    }
}

struct Search<'a> {
    meta: &'a ModelMeta,
    /// (node, NF) decision order; only NFs some demand requests.
    order: Vec<(NodeId, NfId)>,
    /// Index in `order` after which each NF is fully decided.
    nf_done_at: BTreeMap<usize, Vec<NfId>>,
    node_limit: usize,
    chosen: BTreeSet<(NodeId, NfId)>,
    used: BTreeMap<NodeId, usize>,
    decided: BTreeSet<NfId>,
    best: Option<(f64, BTreeSet<(NodeId, NfId)>, Vec<usize>)>,
}

impl<'a> Search<'a> {
    /// Linearized failure sum of NF `f` on a candidate.
    fn xi(&self, f: &NfId, cand: &Candidate) -> f64 {
        cand.nodes()
            .iter()
            .filter(|&&i| self.chosen.contains(&(i, f.clone())))
            .map(|i| self.meta.weights[i])
            .sum()
    }

    fn serves(&self, dm: &DemandMeta, cand: &Candidate, f: &NfId) -> bool {
        match self.meta.kind {
            ModelKind::NonChained => cand
                .physical
                .iter()
                .any(|&i| self.chosen.contains(&(i, f.clone()))),
            ModelKind::Sfc => dm
                .nfs
                .iter()
                .zip(&cand.designated)
                .filter(|(g, _)| *g == f)
                .all(|(g, &i)| self.chosen.contains(&(i, g.clone()))),
        }
    }

    /// Best value and candidate of a demand counting only decided NFs.
    fn demand_value(&self, dm: &DemandMeta) -> Option<(f64, usize)> {
        let relevant: Vec<&NfId> = dm
            .nfs
            .iter()
            .filter(|f| self.decided.contains(*f))
            .collect();
        let mut best: Option<(f64, usize)> = None;
        for (p, cand) in dm.candidates.iter().enumerate() {
            if !relevant.iter().all(|f| self.serves(dm, cand, f)) {
                continue;
            }
            let mut v = relevant
                .iter()
                .map(|f| self.xi(f, cand))
                .fold(f64::NEG_INFINITY, f64::max)
                - dm.log_factorial;
            if self.meta.kind == ModelKind::Sfc && self.meta.mode == LogMode::OnePlus {
                v = v.max(0.0);
            }
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, p));
            }
        }
        best
    }

    /// Objective with decided NFs only; `None` when some demand has no usable path.
    fn bound(&self) -> Option<(f64, Vec<usize>)> {
        let mut value = f64::NEG_INFINITY;
        let mut routing = Vec::new();
        for dm in &self.meta.demands {
            let (v, p) = self.demand_value(dm)?;
            value = value.max(v);
            routing.push(p);
        }
        if self.meta.mode == LogMode::OnePlus {
            value = value.max(0.0);
        }
        Some((value, routing))
    }

    fn run(&mut self, pos: usize) {
        if let Some(fs) = self.nf_done_at.get(&pos).cloned() {
            self.decided.extend(fs.iter().cloned());
            let outcome = self.bound();
            let prune = match (&outcome, &self.best) {
                (None, _) => true,
                (Some((lb, _)), Some((best, _, _))) => lb >= best,
                _ => false,
            };
            if prune || pos == self.order.len() {
                if !prune {
                    if let Some((v, routing)) = outcome {
                        self.best = Some((v, self.chosen.clone(), routing));
                    }
                }
                for f in &fs {
                    self.decided.remove(f);
                }
                return;
            }
            self.descend(pos);
            for f in &fs {
                self.decided.remove(f);
            }
            return;
        }
        if pos == self.order.len() {
            if let Some((v, routing)) = self.bound() {
                if self.best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                    self.best = Some((v, self.chosen.clone(), routing));
                }
            }
            return;
        }
        self.descend(pos);
    }

    fn descend(&mut self, pos: usize) {
        let (i, f) = self.order[pos].clone();
        let fresh = !self.used.contains_key(&i);
        if !fresh || self.used.len() < self.node_limit {
            self.chosen.insert((i, f.clone()));
            *self.used.entry(i).or_insert(0) += 1;
            self.run(pos + 1);
            let count = self.used.get_mut(&i).expect("just inserted");
            *count -= 1;
            if *count == 0 {
                self.used.remove(&i);
            }
            self.chosen.remove(&(i, f));
        }
        self.run(pos + 1);
    }
}

/// Number of deployment assignments using at most `limit` distinct nodes,
/// where node `i` can host `caps[i]` NFs.
fn count_leaves(caps: &[usize], limit: usize) -> u128 {
    let mut dp = vec![0u128; limit + 1];
    dp[0] = 1;
    for &c in caps {
        let ways = (1u128 << c.min(100)) - 1;
        for used in (1..=limit).rev() {
            dp[used] = dp[used].saturating_add(dp[used - 1].saturating_mul(ways));
        }
    }
    dp.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Exact optimum by depth-first enumeration of deployments with bound
/// pruning; routing and continuous variables follow in closed form. The
/// returned assignment is checked against every row.
pub fn solve_exact(model: &MilpModel, guards: Guards) -> Result<SolveResult, MilpError> {
    let meta = model.meta.as_ref().ok_or(MilpError::NoMetadata)?;
    let requested: BTreeSet<&NfId> = meta.demands.iter().flat_map(|d| d.nfs.iter()).collect();
    let node_limit = meta
        .nfs
        .iter()
        .map(|f| meta.limits[f] as usize)
        .min()
        .unwrap_or(usize::MAX)
        .min(meta.nodes.len());
    let mut order = Vec::new();
    let mut nf_done_at = BTreeMap::new();
    let mut caps: BTreeMap<NodeId, usize> = BTreeMap::new();
    for f in meta.nfs.iter().filter(|f| requested.contains(f)) {
        for &i in meta.pools.get(f).into_iter().flatten() {
            order.push((i, f.clone()));
            *caps.entry(i).or_insert(0) += 1;
        }
        nf_done_at
            .entry(order.len())
            .or_insert_with(Vec::new)
            .push(f.clone());
    }
    let leaves = count_leaves(&caps.values().copied().collect::<Vec<_>>(), node_limit);
    if order.len() > guards.max_binaries || leaves > guards.max_leaves {
        return Ok(SolveResult::without_solution(Status::GuardExceeded, leaves));
    }
    let mut search = Search {
        meta,
        order,
        nf_done_at,
        node_limit,
        chosen: BTreeSet::new(),
        used: BTreeMap::new(),
        decided: BTreeSet::new(),
        best: None,
    };
    search.run(0);
    let Some((_, mut chosen, routing)) = search.best.take() else {
        return Ok(SolveResult::without_solution(Status::Infeasible, leaves));
    };
    // copies off every selected route change nothing; drop them
    chosen.retain(|(i, f)| {
        meta.demands
            .iter()
            .zip(&routing)
            .any(|(dm, &p)| dm.nfs.contains(f) && dm.candidates[p].physical.contains(i))
    });
    let mut deployment = Deployment::default();
    for (i, f) in &chosen {
        deployment
            .placement
            .entry(f.clone())
            .or_default()
            .insert(*i);
    }
    let values = assignment(model, meta, &chosen, &routing)?;
    if let Some(v) = model.violation(&values, 1e-9) {
        return Err(MilpError::Inconsistent(v));
    }
    let objective = model.objective_value(&values);
    Ok(SolveResult {
        status: Status::Optimal,
        objective: Some(objective),
        values,
        deployment,
        routing,
        leaves,
    })
}

fn assignment(
    model: &MilpModel,
    meta: &ModelMeta,
    chosen: &BTreeSet<(NodeId, NfId)>,
    routing: &[usize],
) -> Result<Vec<f64>, MilpError> {
    let mut values = vec![0.0; model.variables.len()];
    let mut set = |name: String, v: f64| -> Result<(), MilpError> {
        let i = model
            .var(&name)
            .ok_or_else(|| MilpError::Inconsistent(format!("missing variable {name}")))?;
        values[i] = v;
        Ok(())
    };
    let used: BTreeSet<NodeId> = chosen.iter().map(|(i, _)| *i).collect();
    for &i in &meta.nodes {
        set(format!("h_{i}"), if used.contains(&i) { 1.0 } else { 0.0 })?;
        for f in &meta.nfs {
            set(
                format!("z_{i}_{f}"),
                if chosen.contains(&(i, f.clone())) {
                    1.0
                } else {
                    0.0
                },
            )?;
        }
    }
    let one_plus = meta.mode == LogMode::OnePlus;
    let mut omegas = Vec::new();
    let mut lambda = f64::NEG_INFINITY;
    for (d, dm) in meta.demands.iter().enumerate() {
        let cand = &dm.candidates[routing[d]];
        for p in 0..dm.candidates.len() {
            set(
                format!("x_{d}_{p}"),
                if p == routing[d] { 1.0 } else { 0.0 },
            )?;
        }
        let on = cand.nodes();
        let mut worst = f64::NEG_INFINITY;
        for f in &meta.nfs {
            let required = dm.nfs.contains(f);
            let mut xi = 0.0;
            for &i in &meta.nodes {
                let y = required && on.contains(&i) && chosen.contains(&(i, f.clone()));
                set(format!("y_{i}_{f}_{d}"), if y { 1.0 } else { 0.0 })?;
                if y {
                    xi += meta.weights[&i];
                }
            }
            set(format!("xi_{f}_{d}"), xi)?;
            if required {
                worst = worst.max(xi);
            }
        }
        let mut omega = worst - dm.log_factorial;
        if one_plus && meta.kind == ModelKind::Sfc {
            omega = omega.max(0.0);
        }
        omegas.push(omega);
        lambda = lambda.max(omega);
    }
    if one_plus {
        lambda = lambda.max(0.0);
    }
    set("lambda".into(), lambda)?;
    if meta.kind == ModelKind::Sfc {
        let star = omegas.iter().position(|&w| w == lambda).unwrap_or(0);
        for d in 0..omegas.len() {
            let selected = d == star;
            set(format!("beta_{d}"), if selected { 1.0 } else { 0.0 })?;
            set(
                format!("omega_{d}"),
                if selected { omegas[d] } else { lambda },
            )?;
        }
    }
    Ok(values)
}

/// Deployment, routed physical paths and metrics of an optimal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub deployment: Deployment,
    pub routes: Vec<Vec<NodeId>>,
    pub report: MetricReport,
    /// Linearized objective recomputed from the deployment and routes.
    pub recomputed: f64,
}

/// Reads the deployment and routing off a solution and recomputes the
/// objective through the metrics module.
pub fn extract_solution(
    result: &SolveResult,
    model: &MilpModel,
    scenario: &Scenario,
) -> Result<Extracted, MilpError> {
    if result.status != Status::Optimal {
        return Err(MilpError::NotOptimal(result.status));
    }
    let meta = model.meta.as_ref().ok_or(MilpError::NoMetadata)?;
    let mut deployment = Deployment::default();
    for (v, &x) in model.variables.iter().zip(&result.values) {
        if let Some(rest) = v.name.strip_prefix("z_") {
            if x > 0.5 {
                let (node, nf) = rest
                    .split_once('_')
                    .ok_or_else(|| MilpError::Inconsistent(v.name.clone()))?;
                let node: NodeId = node
                    .parse()
                    .map_err(|_| MilpError::Inconsistent(v.name.clone()))?;
                deployment
                    .placement
                    .entry(nf.to_string())
                    .or_default()
                    .insert(node);
            }
        }
    }
    let routes: Vec<Vec<NodeId>> = (0..meta.demands.len())
        .map(|d| {
            let dm = &meta.demands[d];
            let p = (0..dm.candidates.len())
                .find(|&p| {
                    model
                        .var(&format!("x_{d}_{p}"))
                        .is_some_and(|i| result.values[i] > 0.5)
                })
                .ok_or_else(|| {
                    MilpError::Inconsistent(format!("demand {d} has no selected path"))
                })?;
            Ok(dm.candidates[p].physical.clone())
        })
        .collect::<Result<_, MilpError>>()?;
    let clamp = meta.mode == LogMode::OnePlus;
    let recomputed = scenario
        .demands
        .iter()
        .zip(&routes)
        .map(|(d, r)| {
            let v = routed_log_fp(&scenario.network, &deployment, d, r, meta.mode);
            if clamp {
                v.max(0.0)
            } else {
                v
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let objective = result.objective.unwrap_or(f64::NAN);
    if (recomputed - objective).abs() > 1e-9 {
        return Err(MilpError::Inconsistent(format!(
            "objective {objective} but metrics give {recomputed}"
        )));
    }
    let paths: Vec<Vec<Vec<NodeId>>> = meta
        .demands
        .iter()
        .map(|dm| dm.candidates.iter().map(|c| c.physical.clone()).collect())
        .collect();
    let report = report_from_paths(scenario, &deployment, &paths);
    Ok(Extracted {
        deployment,
        routes,
        report,
        recomputed,
    })
}

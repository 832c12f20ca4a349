//! Command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nfv_core::auxnet::{attach_endpoints, build_sfc_arcs, AuxError, Forwarding};
use nfv_core::facloc::{
    brute_force_sfork, solve_sfork, FacError, ForkInstance, BRUTE_FORCE_LIMIT, DEFAULT_DELTA,
};
use nfv_core::metrics::{
    exact_reliability, report_from_paths, Deployment, LogMode, MetricError, PathSet,
};
use nfv_core::milp::{
    build_nonchained_model, build_sfc_model, candidate_paths, export_lp, extract_solution,
    solve_exact, Guards, MilpError, ModelKind, Status,
};
use nfv_core::netmodel::{
    builtin_scenario, parse_scenario, sample_failure_probs, NetError, NodeId, Scenario,
};
use nfv_core::pathfind::{
    canonicalize_nonchained, k_shortest_candidate_paths, robust_sfc_path, sfc_shortest_path,
    PathError,
};
use thiserror::Error;

use crate::experiment::{run_experiment, ExpError, ExperimentKind, ExperimentSpec};
use crate::output::{emit_outputs, OutputError};

#[derive(Debug, Parser)]
#[command(
    name = "nfv",
    version,
    about = "Robust NF provisioning under random node failures"
)]
pub struct Cli {
    /// Scenario file, or a built-in topology name (`nsf`, `coronet`).
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Redraws failure probabilities (or seeds an experiment).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shortest or robust service path per demand.
    Path {
        /// Only this demand (0-based).
        #[arg(long)]
        demand: Option<usize>,
        /// Maximize the bottleneck capacity first.
        #[arg(long)]
        robust: bool,
    },
    /// Reliability and failure metrics of the scenario deployment.
    Metrics {
        /// Use the k shortest paths instead of every simple path.
        #[arg(long)]
        k: Option<usize>,
        /// Fixed routing `DEMAND:NODE,NODE,...` for the exact reliability.
        #[arg(long = "route", value_name = "DEMAND:NODES")]
        routes: Vec<String>,
    },
    /// Fork provisioning through facility location.
    Sfork {
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Also compute the exact optimum and the ratio.
        #[arg(long)]
        oracle: bool,
    },
    /// Build, export and solve the deployment model.
    Milp {
        #[arg(long, value_enum, default_value = "nonchained")]
        mode: MilpMode,
        #[arg(long, value_enum, default_value = "one-plus")]
        log: LogArg,
        /// Candidate paths per demand.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Write the model in LP format.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long)]
        solve: bool,
    },
    /// Failure-probability sweep.
    Experiment {
        #[arg(long, value_enum)]
        kind: ExperimentKind,
        /// JSON experiment description replacing the preset.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Five sweep points and five samples.
        #[arg(long)]
        desk: bool,
        #[arg(long)]
        samples: Option<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MilpMode {
    Nonchained,
    Sfc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogArg {
    OnePlus,
    Faithful,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Infeasible(_) => 1,
            Self::Input(_) => 2,
            Self::Guard(_) => 3,
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<AuxError> for CliError {
    fn from(e: AuxError) -> Self {
        match e {
            AuxError::UnreachableLevel { .. }
            | AuxError::UnreachableEndpoint { .. }
            | AuxError::EmptyPool(_) => Self::Infeasible(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> Self {
        match e {
            PathError::NoPath(_) => Self::Infeasible(e.to_string()),
            PathError::Guard(_) => Self::Guard(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Guard(_) => Self::Guard(e.to_string()),
            MetricError::Path(p) => p.into(),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<FacError> for CliError {
    fn from(e: FacError) -> Self {
        match e {
            FacError::Unreachable { .. } => Self::Infeasible(e.to_string()),
            FacError::Guard(_) => Self::Guard(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<MilpError> for CliError {
    fn from(e: MilpError) -> Self {
        match e {
            MilpError::EmptyCandidates(_) | MilpError::NoOrderedCandidate(_) => {
                Self::Infeasible(e.to_string())
            }
            MilpError::NotOptimal(Status::GuardExceeded) => Self::Guard(e.to_string()),
            MilpError::NotOptimal(_) => Self::Infeasible(e.to_string()),
            MilpError::Aux(a) => a.into(),
            MilpError::Path(p) => p.into(),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<ExpError> for CliError {
    fn from(e: ExpError) -> Self {
        match e {
            ExpError::Guard(_) => Self::Guard(e.to_string()),
            ExpError::Net(n) => n.into(),
            ExpError::Path(p) => p.into(),
            ExpError::Fork(f) => f.into(),
            ExpError::Invalid(_) => Self::Input(e.to_string()),
        }
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        Self::Input(e.to_string())
    }
}

/// Runs a parsed command; returns the text for standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Input("--jobs must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Input(e.to_string()))?;
        return pool.install(|| dispatch(cli));
    }
    dispatch(cli)
}

fn dispatch(cli: &Cli) -> Result<String, CliError> {
    let (name, text) = match &cli.command {
        Command::Experiment {
            kind,
            spec,
            desk,
            samples,
        } => return experiment(cli, *kind, spec.as_deref(), *desk, *samples),
        Command::Path { demand, robust } => ("path.txt", path_cmd(&load(cli)?, *demand, *robust)?),
        Command::Metrics { k, routes } => ("metrics.csv", metrics_cmd(&load(cli)?, *k, routes)?),
        Command::Sfork { delta, oracle } => ("sfork.csv", sfork_cmd(&load(cli)?, *delta, *oracle)?),
        Command::Milp {
            mode,
            log,
            k,
            export,
            solve,
        } => {
            let sc = load(cli)?;
            let (text, status) = milp_cmd(&sc, *mode, *log, *k, export.as_deref(), *solve)?;
            write_out(cli, "milp.csv", &text)?;
            return match status {
                Some(Status::Infeasible) => Err(CliError::Infeasible(text)),
                Some(Status::GuardExceeded) => Err(CliError::Guard(text)),
                _ => Ok(text),
            };
        }
    };
    write_out(cli, name, &text)?;
    Ok(text)
}

fn write_out(cli: &Cli, name: &str, text: &str) -> Result<(), CliError> {
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Scenario from `--scenario`, with failure probabilities redrawn when `--seed` is set.
pub fn load(cli: &Cli) -> Result<Scenario, CliError> {
    let name = cli
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Input("--scenario is required".into()))?;
    let path = Path::new(name);
    let sc = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
        parse_scenario(&text)?
    } else {
        builtin_scenario(name)
            .map_err(|_| CliError::Input(format!("{name}: no such file or built-in topology")))?
    };
    match cli.seed {
        Some(seed) => {
            let net =
                sample_failure_probs(&sc.network, sc.sampling.mean, sc.sampling.variance, seed)?;
            Ok(sc.with_network(net))
        }
        None => Ok(sc),
    }
}

fn join(nodes: &[NodeId]) -> String {
    nodes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

/// `phys-seq | weight | bottleneck | survivable-prob` per demand.
pub fn path_cmd(sc: &Scenario, only: Option<usize>, robust: bool) -> Result<String, CliError> {
    if let Some(d) = only {
        if d >= sc.demands.len() {
            return Err(CliError::Input(format!("demand {d} does not exist")));
        }
    }
    let mut out = String::new();
    for (k, demand) in sc.demands.iter().enumerate() {
        if only.is_some_and(|d| d != k) {
            continue;
        }
        let demand = canonicalize_nonchained(demand);
        let aux = attach_endpoints(
            build_sfc_arcs(sc, &Forwarding::chain(demand.nfs.clone()))?,
            &demand,
        )?;
        let sp = if robust {
            robust_sfc_path(&aux, &demand)?
        } else {
            sfc_shortest_path(&aux, &demand)?
        };
        writeln!(
            out,
            "{} | {} | {} | {}",
            join(&sp.physical),
            sp.total_weight,
            sp.bottleneck,
            sp.survivable_prob(&sc.network)
        )
        .expect("string write");
    }
    Ok(out)
}

fn parse_route(text: &str, demands: usize) -> Result<(usize, Vec<NodeId>), CliError> {
    let bad = || CliError::Input(format!("route `{text}` is not DEMAND:NODE,NODE,..."));
    let (d, nodes) = text.split_once(':').ok_or_else(bad)?;
    let d: usize = d.trim().parse().map_err(|_| bad())?;
    if d >= demands {
        return Err(CliError::Input(format!("route names missing demand {d}")));
    }
    let nodes = nodes
        .split(',')
        .map(|n| n.trim().parse().map_err(|_| bad()))
        .collect::<Result<Vec<NodeId>, _>>()?;
    Ok((d, nodes))
}

/// CSV `demand,rp,fp,exact_reliability`, then a `system` row.
pub fn metrics_cmd(sc: &Scenario, k: Option<usize>, routes: &[String]) -> Result<String, CliError> {
    let deployment = match &sc.deployment {
        Some(p) => Deployment {
            placement: p.clone(),
        },
        None => Deployment::full(sc),
    };
    deployment.validate(sc)?;
    let paths = match k {
        Some(k) => sc
            .demands
            .iter()
            .map(|d| {
                k_shortest_candidate_paths(&sc.network, d.source, d.target, k)
                    .into_iter()
                    .map(|(_, p)| p)
                    .collect()
            })
            .collect(),
        None => PathSet::AllSimple.resolve(sc)?,
    };
    let mut routing: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for r in routes {
        let (d, nodes) = parse_route(r, sc.demands.len())?;
        routing.insert(d, nodes);
    }
    let report = report_from_paths(sc, &deployment, &paths);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["demand", "rp", "fp", "exact_reliability"])
        .map_err(csv_err)?;
    for (i, (d, m)) in sc.demands.iter().zip(&report.demands).enumerate() {
        let exact = match routing.get(&i) {
            Some(route) => exact_reliability(&sc.network, &deployment, d, route)?.to_string(),
            None => String::new(),
        };
        w.write_record([d.label(), m.rp.to_string(), m.fp.to_string(), exact])
            .map_err(csv_err)?;
    }
    w.write_record([
        "system".to_string(),
        report.system_rp.to_string(),
        report.system_fp.to_string(),
        String::new(),
    ])
    .map_err(csv_err)?;
    finish(w)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// CSV of the cost split, with the exact optimum and ratio when requested.
pub fn sfork_cmd(sc: &Scenario, delta: f64, oracle: bool) -> Result<String, CliError> {
    let fork = ForkInstance::from_scenario(sc)?;
    let run = solve_sfork(&fork, delta)?;
    let s = &run.solution;
    let (opt, ratio) = if oracle {
        let best = brute_force_sfork(&fork, BRUTE_FORCE_LIMIT)?;
        (
            best.cost().to_string(),
            (s.cost() / best.cost()).to_string(),
        )
    } else {
        (String::new(), String::new())
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "cost",
        "open_cost",
        "attach_cost",
        "arc_cost",
        "exit_cost",
        "nodes",
        "opt",
        "ratio",
    ])
    .map_err(csv_err)?;
    w.write_record([
        s.cost().to_string(),
        s.open_cost.to_string(),
        s.attach_cost.to_string(),
        s.arc_cost.to_string(),
        s.exit_cost.to_string(),
        s.deployment.node_count().to_string(),
        opt,
        ratio,
    ])
    .map_err(csv_err)?;
    finish(w)
}

/// Model summary, or the solve outcome with `--solve`.
pub fn milp_cmd(
    sc: &Scenario,
    mode: MilpMode,
    log: LogArg,
    k: usize,
    export: Option<&Path>,
    solve: bool,
) -> Result<(String, Option<Status>), CliError> {
    let kind = match mode {
        MilpMode::Nonchained => ModelKind::NonChained,
        MilpMode::Sfc => ModelKind::Sfc,
    };
    let log = match log {
        LogArg::OnePlus => LogMode::OnePlus,
        LogArg::Faithful => LogMode::Faithful,
    };
    let cands = candidate_paths(sc, kind, k)?;
    let model = match kind {
        ModelKind::NonChained => build_nonchained_model(sc, &cands, log)?,
        ModelKind::Sfc => build_sfc_model(sc, &cands, log)?,
    };
    if let Some(path) = export {
        fs::write(path, export_lp(&model))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    if !solve {
        w.write_record(["variables", "binaries", "constraints"])
            .map_err(csv_err)?;
        w.write_record([
            model.variables.len().to_string(),
            model.binary_count().to_string(),
            model.constraints.len().to_string(),
        ])
        .map_err(csv_err)?;
        return Ok((finish(w)?, None));
    }
    let res = solve_exact(&model, Guards::default())?;
    w.write_record([
        "status",
        "objective",
        "system_rp",
        "system_fp",
        "deployment",
    ])
    .map_err(csv_err)?;
    if res.status == Status::Optimal {
        let ex = extract_solution(&res, &model, sc)?;
        let placement = ex
            .deployment
            .placement
            .iter()
            .map(|(f, nodes)| format!("{f}:{}", join(&nodes.iter().copied().collect::<Vec<_>>())))
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([
            "optimal".to_string(),
            res.objective.unwrap_or(f64::NAN).to_string(),
            ex.report.system_rp.to_string(),
            ex.report.system_fp.to_string(),
            placement,
        ])
        .map_err(csv_err)?;
    } else {
        let status = if res.status == Status::Infeasible {
            "infeasible"
        } else {
            "guard_exceeded"
        };
        w.write_record([status, "", "", "", ""]).map_err(csv_err)?;
    }
    Ok((finish(w)?, Some(res.status)))
}

fn experiment(
    cli: &Cli,
    kind: ExperimentKind,
    spec: Option<&Path>,
    desk: bool,
    samples: Option<u32>,
) -> Result<String, CliError> {
    let mut es = match spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentSpec>(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None if desk => ExperimentSpec::desk(kind),
        None => ExperimentSpec::preset(kind),
    };
    es.kind = kind;
    if let Some(seed) = cli.seed {
        es.seed = seed;
    }
    if let Some(n) = samples {
        es.samples = n;
    }
    if let Some(name) = &cli.scenario {
        es.topology = name.clone();
    }
    let table = run_experiment(&es)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let files = emit_outputs(&table, &dir)?;
    Ok(files.iter().map(|p| format!("{}\n", p.display())).collect())
}

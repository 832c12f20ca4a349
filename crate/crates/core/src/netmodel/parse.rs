//! Line-oriented `.scn` scenario format.
//!
//! ```text
//! # comment (also allowed after any entry)
//! [nodes]
//! <id> <failure_prob> <nf>,<nf>,...|-
//! [edges]
//! <u> <v> [<weight>]            # weight defaults to 1
//! [nfs]
//! <nf> <limit>
//! [demands]
//! <s> <t> <ordered: 0|1|true|false> <nf>,<nf>,...
//! [sampling]
//! mean <real> | variance <real> | samples <n> | seed <n>
//! [fork]
//! shared <nf>,...               # once
//! branch <nf>,...               # zero or more
//! [costs]
//! <node> <nf> <cost>
//! [deployment]
//! <nf> <node>,<node>,...|-
//! [options]
//! directed <true|false>
//! ```
//!
//! Every entry has a fixed token count; extra tokens are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use super::{
    Demand, Edge, ForkSpec, NetError, NfCatalog, NfId, NodeId, NodeRecord, PhysicalNetwork,
    Sampling, Scenario,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Nodes,
    Edges,
    Nfs,
    Demands,
    Sampling,
    Fork,
    Costs,
    Deployment,
    Options,
}

impl Section {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "nodes" => Self::Nodes,
            "edges" => Self::Edges,
            "nfs" => Self::Nfs,
            "demands" => Self::Demands,
            "sampling" => Self::Sampling,
            "fork" => Self::Fork,
            "costs" => Self::Costs,
            "deployment" => Self::Deployment,
            "options" => Self::Options,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> Line<'a> {
    fn syntax(&self, column: usize, message: impl Into<String>) -> NetError {
        NetError::Syntax {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    /// Checks the token count, reporting missing fields or trailing garbage.
    fn expect(&self, min: usize, max: usize, what: &str) -> Result<(), NetError> {
        if self.tokens.len() < min {
            return Err(self.syntax(self.end_column, format!("expected {what}")));
        }
        if self.tokens.len() > max {
            let extra = self.tokens[max];
            return Err(self.syntax(extra.column, format!("trailing garbage `{}`", extra.text)));
        }
        Ok(())
    }

    fn num<T: FromStr>(&self, idx: usize, what: &str) -> Result<T, NetError> {
        let tok = self.tokens[idx];
        tok.text
            .parse()
            .map_err(|_| self.syntax(tok.column, format!("invalid {what} `{}`", tok.text)))
    }

    fn real(&self, idx: usize, what: &str) -> Result<f64, NetError> {
        let v: f64 = self.num(idx, what)?;
        if !v.is_finite() {
            let tok = self.tokens[idx];
            return Err(self.syntax(tok.column, format!("invalid {what} `{}`", tok.text)));
        }
        Ok(v)
    }

    fn flag(&self, idx: usize) -> Result<bool, NetError> {
        let tok = self.tokens[idx];
        match tok.text {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            other => Err(self.syntax(
                tok.column,
                format!("expected 0, 1, true or false, found `{other}`"),
            )),
        }
    }

    /// Comma-separated list; a lone `-` is the empty list.
    fn list(&self, idx: usize) -> Result<Vec<&'a str>, NetError> {
        let tok = self.tokens[idx];
        if tok.text == "-" {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut offset = 0;
        for item in tok.text.split(',') {
            if item.is_empty() {
                return Err(self.syntax(tok.column + offset, "empty list item"));
            }
            out.push(item);
            offset += item.len() + 1;
        }
        Ok(out)
    }
}

fn tokenize(number: usize, raw: &str) -> Line<'_> {
    let body = raw.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start = None;
    for (pos, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &body[s..pos],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &body[s..],
            column: s + 1,
        });
    }
    Line {
        number,
        tokens,
        end_column: body.trim_end().len() + 1,
    }
}

/// Parses and fully validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, NetError> {
    let mut section = None;
    let mut nodes: Vec<(usize, NodeRecord)> = Vec::new();
    let mut edges: Vec<(usize, Edge)> = Vec::new();
    let mut limits: BTreeMap<NfId, u32> = BTreeMap::new();
    let mut demands: Vec<(usize, Demand)> = Vec::new();
    let mut sampling = Sampling::default();
    let mut fork: Option<ForkSpec> = None;
    let mut costs: Vec<(usize, NodeId, NfId, f64)> = Vec::new();
    let mut deployment: Option<BTreeMap<NfId, BTreeSet<NodeId>>> = None;
    let mut deployment_lines: Vec<(usize, NfId, Vec<NodeId>)> = Vec::new();
    let mut directed = false;

    for (i, raw) in text.lines().enumerate() {
        let line = tokenize(i + 1, raw);
        let Some(first) = line.tokens.first().copied() else {
            continue;
        };
        if let Some(rest) = first.text.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(line.syntax(first.column, "unterminated section header"));
            };
            line.expect(1, 1, "section header")?;
            section =
                Some(Section::from_name(name).ok_or_else(|| {
                    line.syntax(first.column, format!("unknown section `{name}`"))
                })?);
            continue;
        }
        let Some(sec) = section else {
            return Err(line.syntax(first.column, "entry before any section header"));
        };
        match sec {
            Section::Nodes => {
                line.expect(3, 3, "`id failure_prob capabilities`")?;
                let id = line.num(0, "node id")?;
                let prob = line.real(1, "failure probability")?;
                let caps = line.list(2)?;
                nodes.push((line.number, NodeRecord::new(id, prob, caps)));
            }
            Section::Edges => {
                line.expect(2, 3, "`u v [weight]`")?;
                let u = line.num(0, "node id")?;
                let v = line.num(1, "node id")?;
                let weight = if line.tokens.len() == 3 {
                    line.real(2, "edge weight")?
                } else {
                    1.0
                };
                edges.push((line.number, Edge { u, v, weight }));
            }
            Section::Nfs => {
                line.expect(2, 2, "`nf limit`")?;
                let limit = line.num(1, "limit")?;
                if limits.insert(first.text.to_string(), limit).is_some() {
                    return Err(
                        line.syntax(first.column, format!("NF `{}` declared twice", first.text))
                    );
                }
            }
            Section::Demands => {
                line.expect(4, 4, "`s t ordered nfs`")?;
                let s = line.num(0, "node id")?;
                let t = line.num(1, "node id")?;
                let ordered = line.flag(2)?;
                let nfs = line.list(3)?;
                demands.push((line.number, Demand::new(s, t, ordered, nfs)));
            }
            Section::Sampling => {
                line.expect(2, 2, "`key value`")?;
                match first.text {
                    "mean" => sampling.mean = line.real(1, "mean")?,
                    "variance" => sampling.variance = line.real(1, "variance")?,
                    "samples" => sampling.samples = line.num(1, "sample count")?,
                    "seed" => sampling.seed = line.num(1, "seed")?,
                    other => {
                        return Err(
                            line.syntax(first.column, format!("unknown sampling key `{other}`"))
                        )
                    }
                }
            }
            Section::Fork => {
                line.expect(2, 2, "`shared|branch nfs`")?;
                let list: Vec<NfId> = line.list(1)?.into_iter().map(String::from).collect();
                let spec = fork.get_or_insert_with(ForkSpec::default);
                match first.text {
                    "shared" if spec.shared.is_empty() => spec.shared = list,
                    "shared" => return Err(line.syntax(first.column, "shared prefix given twice")),
                    "branch" => spec.branches.push(list),
                    other => {
                        return Err(line.syntax(first.column, format!("unknown fork key `{other}`")))
                    }
                }
            }
            Section::Costs => {
                line.expect(3, 3, "`node nf cost`")?;
                let node = line.num(0, "node id")?;
                let cost = line.real(2, "cost")?;
                costs.push((line.number, node, line.tokens[1].text.to_string(), cost));
            }
            Section::Deployment => {
                line.expect(2, 2, "`nf nodes`")?;
                let mut ids = Vec::new();
                for item in line.list(1)? {
                    ids.push(item.parse().map_err(|_| {
                        line.syntax(line.tokens[1].column, format!("invalid node id `{item}`"))
                    })?);
                }
                deployment_lines.push((line.number, first.text.to_string(), ids));
            }
            Section::Options => {
                line.expect(2, 2, "`key value`")?;
                match first.text {
                    "directed" => directed = line.flag(1)?,
                    other => {
                        return Err(line.syntax(first.column, format!("unknown option `{other}`")))
                    }
                }
            }
        }
    }

    // reference checks, reported against the offending line
    let known: BTreeSet<NodeId> = nodes.iter().map(|(_, n)| n.id).collect();
    let check_node = |line: usize, node: NodeId| {
        if known.contains(&node) {
            Ok(())
        } else {
            Err(NetError::UnknownNode { line, node })
        }
    };
    let check_nf = |line: usize, nf: &str| {
        if limits.contains_key(nf) {
            Ok(())
        } else {
            Err(NetError::UnknownNf {
                line,
                nf: nf.to_string(),
            })
        }
    };
    for (line, n) in &nodes {
        for f in &n.capabilities {
            check_nf(*line, f)?;
        }
    }
    for (line, e) in &edges {
        check_node(*line, e.u)?;
        check_node(*line, e.v)?;
    }
    for (line, d) in &demands {
        check_node(*line, d.source)?;
        check_node(*line, d.target)?;
        for f in &d.nfs {
            check_nf(*line, f)?;
        }
    }
    for (line, node, nf, _) in &costs {
        check_node(*line, *node)?;
        check_nf(*line, nf)?;
    }
    for (line, nf, ids) in &deployment_lines {
        check_nf(*line, nf)?;
        for &id in ids {
            check_node(*line, id)?;
        }
        let dep = deployment.get_or_insert_with(BTreeMap::new);
        if dep
            .insert(nf.clone(), ids.iter().copied().collect())
            .is_some()
        {
            return Err(NetError::Invariant(format!(
                "line {line}: deployment of `{nf}` given twice"
            )));
        }
    }

    let network = PhysicalNetwork::new(
        nodes.into_iter().map(|(_, n)| n).collect(),
        edges.into_iter().map(|(_, e)| e).collect(),
        directed,
    )?;
    let catalog = NfCatalog::from_network(&network, limits);
    let scenario = Scenario {
        network,
        demands: demands.into_iter().map(|(_, d)| d).collect(),
        catalog,
        sampling,
        costs: costs.into_iter().map(|(_, n, f, c)| ((n, f), c)).collect(),
        fork,
        deployment,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(",")
    }
}

/// Serializes a scenario. Output is deterministic and parses back to an
/// equal scenario.
pub fn write_scenario(scenario: &Scenario) -> String {
    let mut out = String::new();
    let net = &scenario.network;
    if net.is_directed() {
        out.push_str("[options]\ndirected true\n\n");
    }
    out.push_str("[nodes]\n");
    for n in net.nodes() {
        let _ = writeln!(out, "{} {} {}", n.id, n.failure_prob, join(&n.capabilities));
    }
    out.push_str("\n[edges]\n");
    for e in net.edges() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
    }
    out.push_str("\n[nfs]\n");
    for (f, limit) in &scenario.catalog.limits {
        let _ = writeln!(out, "{f} {limit}");
    }
    if !scenario.demands.is_empty() {
        out.push_str("\n[demands]\n");
        for d in &scenario.demands {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                d.source,
                d.target,
                u8::from(d.ordered),
                join(&d.nfs)
            );
        }
    }
    let s = &scenario.sampling;
    let _ = write!(
        out,
        "\n[sampling]\nmean {}\nvariance {}\nsamples {}\nseed {}\n",
        s.mean, s.variance, s.samples, s.seed
    );
    if let Some(fork) = &scenario.fork {
        let _ = writeln!(out, "\n[fork]\nshared {}", join(&fork.shared));
        for b in &fork.branches {
            let _ = writeln!(out, "branch {}", join(b));
        }
    }
    if !scenario.costs.is_empty() {
        out.push_str("\n[costs]\n");
        for ((node, f), c) in &scenario.costs {
            let _ = writeln!(out, "{node} {f} {c}");
        }
    }
    if let Some(dep) = &scenario.deployment {
        out.push_str("\n[deployment]\n");
        for (f, nodes) in dep {
            let _ = writeln!(out, "{f} {}", join(nodes));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SMALL: &str = "\
# three nodes
[nodes]
1 0.1 f1
2 0.2 f1,f2   # inline comment
3 0 -
[edges]
1 2
2 3 2.5
[nfs]
f1 2
f2 1
[demands]
1 3 1 f1,f2
";

    #[test]
    fn parses_small_file() {
        let sc = parse_scenario(SMALL).unwrap();
        assert_eq!(sc.network.len(), 3);
        assert_eq!(sc.network.edges()[0].weight, 1.0);
        assert_eq!(sc.network.edges()[1].weight, 2.5);
        assert_eq!(sc.catalog.pool("f1").unwrap().len(), 2);
        assert!(sc.demands[0].ordered);
        assert_eq!(sc.sampling, Sampling::default());
    }

    #[test]
    fn reports_unknown_nf_with_line() {
        let text = SMALL.replace("1 3 1 f1,f2", "1 3 1 f1,f9");
        assert_eq!(
            parse_scenario(&text),
            Err(NetError::UnknownNf {
                line: 13,
                nf: "f9".into()
            })
        );
        let text = SMALL.replace("2 3 2.5", "2 7 2.5");
        assert_eq!(
            parse_scenario(&text),
            Err(NetError::UnknownNode { line: 8, node: 7 })
        );
    }

    #[test]
    fn rejects_trailing_garbage() {
        let text = SMALL.replace("1 2\n", "1 2 1 extra\n");
        match parse_scenario(&text) {
            Err(NetError::Syntax { line, column, .. }) => assert_eq!((line, column), (7, 7)),
            other => panic!("unexpected {other:?}"),
        }
        let text = SMALL.replace("f2 1", "f2 1x");
        assert!(matches!(
            parse_scenario(&text),
            Err(NetError::Syntax {
                line: 11,
                column: 4,
                ..
            })
        ));
        assert!(matches!(
            parse_scenario("1 0.1 f1\n"),
            Err(NetError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_scenario("[bogus]\n"),
            Err(NetError::Syntax { .. })
        ));
    }

    #[test]
    fn optional_sections_round_trip() {
        let text = format!(
            "{SMALL}[fork]\nshared f1\nbranch f2\n[costs]\n2 f2 3.5\n[deployment]\nf1 1,2\nf2 -\n[options]\ndirected false\n"
        );
        let sc = parse_scenario(&text).unwrap();
        assert_eq!(sc.fork.as_ref().unwrap().chain(0), vec!["f1", "f2"]);
        assert_eq!(sc.deploy_cost(2, "f2"), 3.5);
        assert_eq!(sc.deploy_cost(1, "f1"), 1.0);
        assert!(sc.deployment.as_ref().unwrap()["f2"].is_empty());
        assert_eq!(parse_scenario(&write_scenario(&sc)).unwrap(), sc);
    }

    fn arb_scenario() -> impl Strategy<Value = Scenario> {
        (2usize..7, 1usize..4, any::<u64>()).prop_flat_map(|(n, nf_count, seed)| {
            let probs = prop::collection::vec(0.0f64..=1.0, n);
            let caps =
                prop::collection::vec(prop::collection::btree_set(0..nf_count, 0..=nf_count), n);
            let extra = prop::collection::vec((0..n, 0..n, 0.0f64..10.0), 0..6);
            let demands = prop::collection::vec((0..n, 1..n, any::<bool>(), 0..nf_count), 0..4);
            let sampling = (0.01f64..0.99, 1e-6f64..0.1, 1u32..50);
            let directed = any::<bool>();
            (probs, caps, extra, demands, sampling, directed).prop_map(
                move |(probs, caps, extra, demands, (mean, variance, samples), directed)| {
                    let nf = |k: usize| format!("f{k}");
                    let mut nodes: Vec<NodeRecord> = (0..n)
                        .map(|i| {
                            NodeRecord::new(
                                i as NodeId + 10,
                                probs[i],
                                caps[i].iter().map(|&k| nf(k)),
                            )
                        })
                        .collect();
                    // every NF gets a host so demands stay valid
                    for k in 0..nf_count {
                        nodes[k % n].capabilities.insert(nf(k));
                    }
                    let mut edges: Vec<Edge> = (1..n)
                        .map(|i| Edge {
                            u: i as NodeId + 9,
                            v: i as NodeId + 10,
                            weight: 1.0,
                        })
                        .collect();
                    edges.extend(extra.into_iter().map(|(u, v, weight)| Edge {
                        u: u as NodeId + 10,
                        v: v as NodeId + 10,
                        weight,
                    }));
                    let network = PhysicalNetwork::new(nodes, edges, directed).unwrap();
                    let demands = demands
                        .into_iter()
                        .map(|(s, off, ordered, k)| {
                            let t = (s + off) % n;
                            Demand::new(s as NodeId + 10, t as NodeId + 10, ordered, [nf(k)])
                        })
                        .collect();
                    let limits = (0..nf_count).map(|k| (nf(k), 1 + k as u32)).collect();
                    Scenario::new(
                        network,
                        demands,
                        limits,
                        Sampling {
                            mean,
                            variance,
                            samples,
                            seed,
                        },
                    )
                    .unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn round_trip(sc in arb_scenario()) {
            let text = write_scenario(&sc);
            let back = parse_scenario(&text).unwrap();
            prop_assert_eq!(&back, &sc);
            prop_assert_eq!(write_scenario(&back), text);
        }
    }
}

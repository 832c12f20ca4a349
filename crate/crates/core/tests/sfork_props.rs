use std::collections::BTreeMap;

use nfv_core::facloc::{
    bifactor, brute_force_1fl, brute_force_sfork, check_lemma_inequalities, forest_violations,
    greedy_1fl, solve_sfork, two_step_reduction, FacLocInstance, FlSolution, ForkInstance,
    ForkRequest, BRUTE_FORCE_LIMIT, DEFAULT_DELTA,
};
use nfv_core::netmodel::{Edge, NodeId, NodeRecord, PhysicalNetwork};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_fork(rng: &mut ChaCha8Rng) -> ForkInstance {
    let n: u32 = rng.random_range(5..=8);
    let nodes = (1..=n)
        .map(|i| NodeRecord::new(i, 0.1, Vec::<String>::new()))
        .collect();
    let mut edges: Vec<Edge> = (1..=n)
        .map(|i| Edge {
            u: i,
            v: i % n + 1,
            weight: rng.random_range(1..=3) as f64,
        })
        .collect();
    for _ in 0..3 {
        let u = rng.random_range(1..=n);
        let v = rng.random_range(1..=n);
        if u != v
            && !edges
                .iter()
                .any(|e| (e.u, e.v) == (u, v) || (e.u, e.v) == (v, u))
        {
            edges.push(Edge {
                u,
                v,
                weight: rng.random_range(1..=3) as f64,
            });
        }
    }
    let net = PhysicalNetwork::new(nodes, edges, false).unwrap();
    let shared_len = rng.random_range(1..=2);
    let shared: Vec<String> = (0..shared_len).map(|k| format!("s{k}")).collect();
    let branches: Vec<Vec<String>> = if rng.random_bool(0.3) {
        Vec::new()
    } else {
        (0..2)
            .map(|b| {
                (0..rng.random_range(1..=2))
                    .map(|k| format!("b{b}_{k}"))
                    .collect()
            })
            .collect()
    };
    let all: Vec<NodeId> = (1..=n).collect();
    let mut pools = BTreeMap::new();
    let mut costs = BTreeMap::new();
    for f in shared.iter().chain(branches.iter().flatten()) {
        let mut pick = all.clone();
        pick.shuffle(rng);
        let pool: Vec<NodeId> = pick[..rng.random_range(1..=2)].to_vec();
        for &i in &pool {
            costs.insert((i, f.clone()), rng.random_range(1..=6) as f64 * 0.5);
        }
        pools.insert(f.clone(), pool);
    }
    let requests = (0..rng.random_range(2..=4))
        .map(|_| ForkRequest {
            source: rng.random_range(1..=n),
            target: rng.random_range(1..=n),
            branch: if branches.is_empty() {
                0
            } else {
                rng.random_range(0..branches.len())
            },
        })
        .collect();
    ForkInstance::new(&net, shared, branches, pools, costs, requests).unwrap()
}

fn random_chi(fork: &ForkInstance, rng: &mut ChaCha8Rng) -> nfv_core::facloc::ForkSolution {
    let paths = fork
        .requests
        .iter()
        .map(|r| {
            fork.chain(r.branch)
                .iter()
                .map(|(_, f)| *fork.pool(f).choose(rng).unwrap())
                .collect()
        })
        .collect();
    fork.evaluate(paths).unwrap()
}

fn random_fl(inst: &FacLocInstance, rng: &mut ChaCha8Rng) -> FlSolution {
    let nf = inst.facilities.len();
    let mut open: Vec<usize> = (0..nf).filter(|_| rng.random_bool(0.4)).collect();
    if open.is_empty() {
        open.push(rng.random_range(0..nf));
    }
    let assign = (0..inst.clients.len())
        .map(|j| {
            *open
                .iter()
                .min_by(|&&a, &&b| inst.conn[a][j].total_cmp(&inst.conn[b][j]))
                .unwrap()
        })
        .collect();
    FlSolution { open, assign }
}

#[test]
fn ratio_against_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..60 {
        let fork = random_fork(&mut rng);
        let run = solve_sfork(&fork, DEFAULT_DELTA).unwrap();
        let opt = brute_force_sfork(&fork, BRUTE_FORCE_LIMIT).unwrap();
        let ratio = run.solution.cost() / opt.cost();
        assert!(ratio <= 3.27, "ratio {ratio}");
        assert!(ratio >= 1.0 - 1e-12);
        assert!(forest_violations(&fork, &run.solution).is_empty());
        worst = worst.max(ratio);
    }
    println!("max ratio {worst:.4}");
}

#[test]
fn lemma_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (alpha, beta) = bifactor(DEFAULT_DELTA);
    let mut composed_ok = 0;
    for k in 0..100 {
        let fork = random_fork(&mut rng);
        let red = two_step_reduction(&fork, alpha, beta).unwrap();
        let fl = if k % 2 == 0 {
            greedy_1fl(&red.instance, DEFAULT_DELTA)
        } else {
            random_fl(&red.instance, &mut rng)
        };
        let chi = random_chi(&fork, &mut rng);
        let report = check_lemma_inequalities(&fork, &red, &fl, &chi).unwrap();
        assert!(report.holds(), "{:?}", report.violations);
        if let Some((l, r)) = report.composed_bound {
            composed_ok += usize::from(l <= r + 1e-9);
        }
    }
    println!("composed bound held on {composed_ok}/100");
}

#[test]
fn greedy_within_bound_on_metric_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let nf = rng.random_range(1..=6);
        let nc = rng.random_range(1..=10);
        let points: Vec<(f64, f64)> = (0..nf + nc)
            .map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
            .collect();
        let d = |a: usize, b: usize| {
            ((points[a].0 - points[b].0).powi(2) + (points[a].1 - points[b].1).powi(2)).sqrt()
        };
        let conn = (0..nf)
            .map(|i| (0..nc).map(|j| d(i, nf + j)).collect())
            .collect();
        let facilities = (0..nf)
            .map(|i| (format!("f{i}"), rng.random_range(0.0..8.0)))
            .collect();
        let inst =
            FacLocInstance::new((0..nc).map(|j| format!("c{j}")).collect(), facilities, conn)
                .unwrap();
        let opt = brute_force_1fl(&inst, 12).unwrap().cost(&inst);
        let got = greedy_1fl(&inst, DEFAULT_DELTA).cost(&inst);
        assert!(got <= 3.27 * opt + 1e-9, "{got} vs {opt}");
    }
}

#[test]
fn reduced_optimum_on_two_branch_forks() {
    use nfv_core::facloc::lift_solution;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (alpha, beta) = bifactor(DEFAULT_DELTA);
    let mut equal = 0;
    for _ in 0..20 {
        let n = 7;
        let nodes = (1..=n)
            .map(|i| NodeRecord::new(i, 0.1, Vec::<String>::new()))
            .collect();
        let edges = (1..=n)
            .map(|i| Edge {
                u: i,
                v: i % n + 1,
                weight: rng.random_range(1..=3) as f64,
            })
            .collect();
        let net = PhysicalNetwork::new(nodes, edges, false).unwrap();
        let nfs = ["r", "x", "y"];
        let mut pools = BTreeMap::new();
        for f in nfs {
            let mut all: Vec<NodeId> = (1..=n).collect();
            all.shuffle(&mut rng);
            pools.insert(f.to_string(), all[..2].to_vec());
        }
        let requests = (0..4)
            .map(|k| ForkRequest {
                source: rng.random_range(1..=n),
                target: rng.random_range(1..=n),
                branch: k % 2,
            })
            .collect();
        let fork = ForkInstance::new(
            &net,
            vec!["r".into()],
            vec![vec!["x".into()], vec!["y".into()]],
            pools,
            BTreeMap::new(),
            requests,
        )
        .unwrap();
        let red = two_step_reduction(&fork, alpha, beta).unwrap();
        let best = brute_force_1fl(&red.instance, 20).unwrap();
        let lifted = lift_solution(&red, &best, &fork).unwrap();
        let opt = brute_force_sfork(&fork, BRUTE_FORCE_LIMIT).unwrap();
        assert!(lifted.cost() >= opt.cost() - 1e-9);
        equal += usize::from((lifted.cost() - opt.cost()).abs() < 1e-9);
    }
    println!("reduced optimum equals the direct optimum on {equal}/20");
}

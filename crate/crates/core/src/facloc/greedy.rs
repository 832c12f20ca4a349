//! 1-level uncapacitated facility location: instance, scaled greedy and
//! an exhaustive oracle.

use super::FacError;

/// Facility-opening cost factor of the greedy before scaling.
pub const GAMMA_F: f64 = 1.11;
/// Connection cost factor of the greedy before scaling.
pub const GAMMA_C: f64 = 1.78;

/// Bi-factor `(gamma_f + ln delta, 1 + (gamma_c - 1) / delta)`.
pub fn bifactor(delta: f64) -> (f64, f64) {
    (GAMMA_F + delta.ln(), 1.0 + (GAMMA_C - 1.0) / delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacLocInstance {
    pub clients: Vec<String>,
    /// `(id, open cost)`.
    pub facilities: Vec<(String, f64)>,
    /// `conn[facility][client]`; infinite when the pair cannot connect.
    pub conn: Vec<Vec<f64>>,
}

impl FacLocInstance {
    pub fn new(
        clients: Vec<String>,
        facilities: Vec<(String, f64)>,
        conn: Vec<Vec<f64>>,
    ) -> Result<Self, FacError> {
        if conn.len() != facilities.len() || conn.iter().any(|row| row.len() != clients.len()) {
            return Err(FacError::Invalid("connection table shape".into()));
        }
        if facilities
            .iter()
            .any(|(_, f)| !(f.is_finite() && *f >= 0.0))
        {
            return Err(FacError::Invalid(
                "open costs must be finite and nonnegative".into(),
            ));
        }
        if conn.iter().flatten().any(|c| c.is_nan() || *c < 0.0) {
            return Err(FacError::Invalid(
                "connection costs must be nonnegative".into(),
            ));
        }
        for (j, id) in clients.iter().enumerate() {
            if !conn.iter().any(|row| row[j].is_finite()) {
                return Err(FacError::Invalid(format!(
                    "client {id} cannot reach any facility"
                )));
            }
        }
        Ok(Self {
            clients,
            facilities,
            conn,
        })
    }

    pub fn open_cost(&self, i: usize) -> f64 {
        self.facilities[i].1
    }

    /// Cheapest open facility of a client; lowest index on ties.
    fn nearest(&self, open: &[bool], j: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in (0..self.facilities.len()).filter(|&i| open[i]) {
            if best.is_none_or(|b| self.conn[i][j] < self.conn[b][j]) {
                best = Some(i);
            }
        }
        best.filter(|&i| self.conn[i][j].is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlSolution {
    /// Opened facility indices, ascending.
    pub open: Vec<usize>,
    /// Facility serving each client.
    pub assign: Vec<usize>,
}

impl FlSolution {
    pub fn facility_cost(&self, inst: &FacLocInstance) -> f64 {
        self.open.iter().map(|&i| inst.open_cost(i)).sum()
    }

    pub fn connection_cost(&self, inst: &FacLocInstance) -> f64 {
        self.assign
            .iter()
            .enumerate()
            .map(|(j, &i)| inst.conn[i][j])
            .sum()
    }

    pub fn cost(&self, inst: &FacLocInstance) -> f64 {
        self.facility_cost(inst) + self.connection_cost(inst)
    }

    fn from_open(inst: &FacLocInstance, open: &[bool]) -> Option<Self> {
        let assign = (0..inst.clients.len())
            .map(|j| inst.nearest(open, j))
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            open: (0..open.len()).filter(|&i| open[i]).collect(),
            assign,
        })
    }
}

enum Event {
    Connect(usize, usize),
    Open(usize),
}

/// Earliest time >= `now` at which offers to facility `i` reach `cost`.
fn opening_time(
    inst: &FacLocInstance,
    cost: f64,
    i: usize,
    conn: &[Option<usize>],
    now: f64,
) -> f64 {
    let mut switch = 0.0;
    let mut waiting = Vec::new();
    for (j, c) in conn.iter().enumerate() {
        let cij = inst.conn[i][j];
        match c {
            Some(cur) => switch += (inst.conn[*cur][j] - cij).max(0.0),
            None if cij.is_finite() => waiting.push(cij),
            None => {}
        }
    }
    let need = cost - switch;
    if need <= 0.0 {
        return now;
    }
    waiting.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    for (m, &a) in waiting.iter().enumerate() {
        sum += a;
        let t = (need + sum) / (m + 1) as f64;
        if waiting.get(m + 1).is_none_or(|&next| t <= next) {
            return t.max(now);
        }
    }
    f64::INFINITY
}

/// First phase with open costs multiplied by `delta`: budgets of unconnected
/// clients grow together, a facility opens once the offers cover its
/// scaled cost, and clients switch whenever an opened facility is cheaper.
pub fn greedy_step1(inst: &FacLocInstance, delta: f64) -> FlSolution {
    let nf = inst.facilities.len();
    let nc = inst.clients.len();
    let scaled: Vec<f64> = inst.facilities.iter().map(|(_, f)| f * delta).collect();
    let mut open = vec![false; nf];
    let mut conn: Vec<Option<usize>> = vec![None; nc];
    let mut now = 0.0f64;
    while conn.iter().any(Option::is_none) {
        let mut best: Option<(f64, Event)> = None;
        for i in 0..nf {
            let (t, ev) = if open[i] {
                let Some((t, j)) = (0..nc)
                    .filter(|&j| conn[j].is_none())
                    .map(|j| (inst.conn[i][j].max(now), j))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                else {
                    continue;
                };
                (t, Event::Connect(i, j))
            } else {
                (opening_time(inst, scaled[i], i, &conn, now), Event::Open(i))
            };
            if t.is_finite() && best.as_ref().is_none_or(|(b, _)| t < *b) {
                best = Some((t, ev));
            }
        }
        let Some((t, ev)) = best else { break };
        now = t;
        match ev {
            Event::Connect(i, j) => conn[j] = Some(i),
            Event::Open(i) => {
                open[i] = true;
                for j in 0..nc {
                    let cij = inst.conn[i][j];
                    match conn[j] {
                        None if cij <= now + 1e-12 * now.abs().max(1.0) => conn[j] = Some(i),
                        Some(cur) if cij < inst.conn[cur][j] => conn[j] = Some(i),
                        _ => {}
                    }
                }
            }
        }
    }
    let assign = conn
        .into_iter()
        .map(|c| c.expect("every client reaches a facility"))
        .collect();
    FlSolution {
        open: (0..nf).filter(|&i| open[i]).collect(),
        assign,
    }
}

/// Scaled greedy followed by the cost-reducing second phase at the original
/// open costs; facilities left without clients are closed.
pub fn greedy_1fl(inst: &FacLocInstance, delta: f64) -> FlSolution {
    let first = greedy_step1(inst, delta);
    let nf = inst.facilities.len();
    let mut open = vec![false; nf];
    for &i in &first.open {
        open[i] = true;
    }
    let mut sol = FlSolution::from_open(inst, &open).expect("step one serves every client");
    loop {
        let mut best: Option<(f64, usize)> = None;
        for i in (0..nf).filter(|&i| !open[i]) {
            let saving: f64 = sol
                .assign
                .iter()
                .enumerate()
                .map(|(j, &cur)| (inst.conn[cur][j] - inst.conn[i][j]).max(0.0))
                .sum();
            let gain = saving - inst.open_cost(i);
            if gain > 1e-12 && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, i));
            }
        }
        let Some((_, i)) = best else { break };
        open[i] = true;
        sol = FlSolution::from_open(inst, &open).expect("still served");
    }
    let used: std::collections::BTreeSet<usize> = sol.assign.iter().copied().collect();
    sol.open.retain(|i| used.contains(i));
    sol
}

/// Exact optimum over every nonempty facility subset.
pub fn brute_force_1fl(
    inst: &FacLocInstance,
    max_facilities: usize,
) -> Result<FlSolution, FacError> {
    let nf = inst.facilities.len();
    if nf > max_facilities {
        return Err(FacError::Guard(format!(
            "{nf} facilities exceed the limit of {max_facilities}"
        )));
    }
    let mut best: Option<(f64, FlSolution)> = None;
    for mask in 1u64..(1u64 << nf) {
        let open: Vec<bool> = (0..nf).map(|i| mask >> i & 1 == 1).collect();
        let Some(sol) = FlSolution::from_open(inst, &open) else {
            continue;
        };
        let cost = sol.cost(inst);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, sol));
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| FacError::Invalid("no facility subset serves every client".into()))
}

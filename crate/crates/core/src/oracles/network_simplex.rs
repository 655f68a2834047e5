//! Primal network simplex for the balanced transportation problem.
//!
//! Supply nodes connect to every demand node through an uncapacitated arc.
//! The initial basis hangs every node from an extra root through an
//! artificial arc; entering arcs are chosen by block search and the leaving
//! arc by the strongly feasible tree rule, which rules out cycling.

use crate::error::{Error, Result};

/// Optimal flow of a transportation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    /// `sum flow * cost` over the real arcs.
    pub cost: f64,
    /// Nonzero flows as `(supply index, demand index, mass)`.
    pub flows: Vec<(usize, usize, f64)>,
    /// Reduced-cost tolerance the optimum was certified to. The returned
    /// cost exceeds the true optimum by at most this times the total mass.
    pub optimality_tol: f64,
    pub pivots: usize,
}

const MASS_TOL: f64 = 1e-9;

struct Simplex<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
    art_out: Vec<bool>,
    art_cost: Vec<f64>,
    flow: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    up: Vec<bool>,
    pi: Vec<f64>,
    depth: Vec<usize>,
    stamp: Vec<usize>,
    epoch: usize,
    stack: Vec<usize>,
}

impl Simplex<'_> {
    fn root(&self) -> usize {
        self.m + self.n
    }

    fn real_arcs(&self) -> usize {
        self.m * self.n
    }

    fn src(&self, a: usize) -> usize {
        match a.checked_sub(self.real_arcs()) {
            None => a / self.n,
            Some(v) if self.art_out[v] => v,
            Some(_) => self.root(),
        }
    }

    fn arc_cost(&self, a: usize) -> f64 {
        match a.checked_sub(self.real_arcs()) {
            None => self.cost[a],
            Some(v) => self.art_cost[v],
        }
    }

    /// Potentials and depths from the parent pointers.
    fn refresh(&mut self) {
        self.epoch += 1;
        let root = self.root();
        self.stamp[root] = self.epoch;
        for v in 0..root {
            let mut w = v;
            while self.stamp[w] != self.epoch {
                self.stack.push(w);
                w = self.parent[w];
            }
            while let Some(w) = self.stack.pop() {
                let p = self.parent[w];
                let c = self.arc_cost(self.pred[w]);
                self.pi[w] = if self.up[w] { self.pi[p] - c } else { self.pi[p] + c };
                self.depth[w] = self.depth[p] + 1;
                self.stamp[w] = self.epoch;
            }
        }
    }

    fn reduced_cost(&self, a: usize) -> f64 {
        let (i, j) = (a / self.n, a % self.n);
        self.cost[a] + self.pi[i] - self.pi[self.m + j]
    }

    fn pivot(&mut self, entering: usize) -> Result<()> {
        let (u, v) = (entering / self.n, self.m + entering % self.n);
        let (mut a, mut b) = (u, v);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
        }
        let join = a;

        let mut delta = f64::INFINITY;
        let mut out: Option<(usize, bool)> = None;
        let mut w = u;
        while w != join {
            if self.up[w] && self.flow[self.pred[w]] < delta {
                delta = self.flow[self.pred[w]];
                out = Some((w, true));
            }
            w = self.parent[w];
        }
        w = v;
        while w != join {
            if !self.up[w] && self.flow[self.pred[w]] <= delta {
                delta = self.flow[self.pred[w]];
                out = Some((w, false));
            }
            w = self.parent[w];
        }
        let (u_out, first_side) = out.ok_or_else(|| Error::InvalidMarginals("unbounded transport cycle".into()))?;

        if delta > 0.0 {
            self.flow[entering] += delta;
            for (start, sign) in [(u, -1.0), (v, 1.0)] {
                let mut w = start;
                while w != join {
                    let e = self.pred[w];
                    // arcs pointing up decrease on the source side
                    self.flow[e] += if self.up[w] { sign * delta } else { -sign * delta };
                    w = self.parent[w];
                }
            }
            let leaving = self.pred[u_out];
            self.flow[leaving] = 0.0;
        }

        let (mut w, mut new_parent) = if first_side { (u, v) } else { (v, u) };
        let mut arc = entering;
        loop {
            let (old_parent, old_arc) = (self.parent[w], self.pred[w]);
            self.parent[w] = new_parent;
            self.pred[w] = arc;
            self.up[w] = self.src(arc) == w;
            if w == u_out {
                break;
            }
            new_parent = w;
            arc = old_arc;
            w = old_parent;
        }
        self.refresh();
        Ok(())
    }
}

/// Minimum-cost transport from `supply` to `demand` with row-major
/// `cost[i * demand.len() + j]`. Masses must be nonnegative with equal
/// totals.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if cost.len() != m * n {
        return Err(Error::DimensionMismatch { expected: m * n, found: cost.len() });
    }
    if let Some(x) = supply.iter().chain(demand).find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidMarginals(format!("mass {x} is not a nonnegative number")));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("transport cost".into()));
    }
    let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ts - td).abs() > MASS_TOL * ts.max(td).max(1.0) {
        return Err(Error::InvalidMarginals(format!("supply {ts} differs from demand {td}")));
    }
    if m == 0 || n == 0 {
        return Ok(TransportSolution { cost: 0.0, flows: Vec::new(), optimality_tol: 0.0, pivots: 0 });
    }

    let nodes = m + n;
    let cmax = cost.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    let art = (cmax + 1.0) * (nodes + 1) as f64;
    let tol = 1e-9 * (cmax + 1.0);
    let mut s = Simplex {
        m,
        n,
        cost,
        art_out: vec![true; nodes],
        art_cost: vec![0.0; nodes],
        flow: vec![0.0; m * n + nodes],
        parent: vec![nodes; nodes + 1],
        pred: (0..nodes).map(|v| m * n + v).chain([usize::MAX]).collect(),
        up: vec![true; nodes + 1],
        pi: vec![0.0; nodes + 1],
        depth: vec![0; nodes + 1],
        stamp: vec![0; nodes + 1],
        epoch: 0,
        stack: Vec::new(),
    };
    for (i, &x) in supply.iter().enumerate() {
        s.flow[m * n + i] = x;
    }
    for (j, &x) in demand.iter().enumerate() {
        let v = m + j;
        if x > 0.0 {
            s.art_out[v] = false;
            s.art_cost[v] = art;
            s.up[v] = false;
            s.flow[m * n + v] = x;
        }
    }
    s.refresh();

    let arcs = m * n;
    let block = ((arcs as f64).sqrt().ceil() as usize).max(10);
    let max_pivots = 200 * (nodes + 1) + 20 * arcs;
    let mut next = 0;
    let mut pivots = 0;
    loop {
        let mut best = (-tol, usize::MAX);
        let mut scanned = 0;
        while scanned < arcs {
            let a = next;
            next = if next + 1 == arcs { 0 } else { next + 1 };
            scanned += 1;
            let rc = s.reduced_cost(a);
            if rc < best.0 {
                best = (rc, a);
            }
            if scanned % block == 0 && best.1 != usize::MAX {
                break;
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        if pivots == max_pivots {
            return Err(Error::TransportStalled(pivots));
        }
        s.pivot(best.1)?;
        pivots += 1;
    }

    let mut flows = Vec::new();
    let mut total = 0.0;
    for a in 0..arcs {
        if s.flow[a] > 0.0 {
            total += s.flow[a] * cost[a];
            flows.push((a / n, a % n, s.flow[a]));
        }
    }
    Ok(TransportSolution { cost: total, flows, optimality_tol: tol, pivots })
}

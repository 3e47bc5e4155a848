//! Guided local search over open routes.
//!
//! The descent minimizes the augmented cost `g = f + lambda * sum(p_e)` over
//! the arcs `e` a solution uses. At each local optimum the arcs with the
//! highest utility `d_e / (1 + p_e)` get their penalty incremented, which
//! pushes the next descent away from long, frequently kept arcs. The best
//! solution by true length `f` is tracked throughout and returned.
//!
//! Neighbourhoods, all evaluated on `g` with best-improvement:
//! - 2-opt inside each route,
//! - relocate one customer into another route (or an unused vehicle),
//! - swap two customers between routes,
//! - exchange the tails of two routes (2-opt*), which for open routes needs no
//!   reversal.

use std::time::Instant;

use crate::localsearch::{best_move_by, IMPROVEMENT_EPS};
use crate::model::{open_path_length, Instance, Solution, SolutionMeta, LOAD_EPS};
use crate::trace::TraceRow;

use super::{BaselineParams, StopRule};

/// Utility of penalizing an arc of length `d` that already carries `penalty`.
#[inline]
pub fn arc_utility(d: f64, penalty: u32) -> f64 {
    d / (1.0 + penalty as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    TwoOpt {
        route: usize,
        i: usize,
        k: usize,
    },
    Relocate {
        from: usize,
        pos: usize,
        to: usize,
        at: usize,
    },
    Swap {
        r1: usize,
        p1: usize,
        r2: usize,
        p2: usize,
    },
    /// Route `r1` keeps `stops[..a]`, route `r2` keeps `stops[..b]`; tails trade places.
    TailExchange {
        r1: usize,
        a: usize,
        r2: usize,
        b: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    /// 1-based.
    pub round: usize,
    /// True length of the local optimum reached this round.
    pub local_optimum_km: f64,
    pub best_km: f64,
    pub improved: bool,
    pub moves: usize,
    /// The descent was cut short by the stop rule.
    pub interrupted: bool,
}

/// Search state: one stop list per vehicle (possibly empty) plus arc penalties.
pub struct GuidedLocalSearch<'a> {
    instance: &'a Instance,
    lambda_factor: f64,
    lambda: f64,
    penalties: Vec<u32>,
    routes: Vec<Vec<usize>>,
    loads: Vec<f64>,
    best_routes: Vec<Vec<usize>>,
    best_km: f64,
    initial: Solution,
    round: usize,
}

impl<'a> GuidedLocalSearch<'a> {
    pub fn new(instance: &'a Instance, initial: &Solution, lambda_factor: f64) -> Self {
        let mut routes = vec![Vec::new(); instance.vehicles().len()];
        for r in &initial.routes {
            routes[r.vehicle] = r.stops.clone();
        }
        let loads = routes.iter().map(|r| load_of(instance, r)).collect();
        let best_km = true_cost(instance, &routes);
        Self {
            instance,
            lambda_factor,
            lambda: 0.0,
            penalties: vec![0; instance.n() * instance.n()],
            best_routes: routes.clone(),
            routes,
            loads,
            best_km,
            initial: initial.clone(),
            round: 0,
        }
    }

    pub fn penalties(&self) -> &[u32] {
        &self.penalties
    }

    pub fn penalty(&self, from: usize, to: usize) -> u32 {
        self.penalties[from * self.instance.n() + to]
    }

    /// Zero until the first local optimum has been reached.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn best_km(&self) -> f64 {
        self.best_km
    }

    pub fn current_km(&self) -> f64 {
        true_cost(self.instance, &self.routes)
    }

    #[inline]
    fn aug(&self, i: usize, j: usize) -> f64 {
        self.instance.dist(i, j) + self.lambda * self.penalties[i * self.instance.n() + j] as f64
    }

    /// One descent to a local optimum of `g` followed by one penalty update.
    /// `stop` is polled before every move; when it fires the round ends early
    /// without penalizing.
    pub fn round(&mut self, mut stop: impl FnMut(usize) -> bool) -> RoundOutcome {
        self.round += 1;
        let mut moves = 0;
        let mut interrupted = false;
        loop {
            if stop(moves) {
                interrupted = true;
                break;
            }
            let Some(mv) = self.best_move() else { break };
            self.apply(mv);
            moves += 1;
        }
        let local = self.current_km();
        let improved = local < self.best_km - IMPROVEMENT_EPS;
        if improved {
            self.best_km = local;
            self.best_routes = self.routes.clone();
        }
        if !interrupted {
            if self.lambda == 0.0 {
                let arcs: usize = self.routes.iter().map(Vec::len).sum();
                if arcs > 0 {
                    self.lambda = self.lambda_factor * local / arcs as f64;
                }
            }
            self.penalize();
        }
        RoundOutcome { round: self.round, local_optimum_km: local, best_km: self.best_km, improved, moves, interrupted }
    }

    /// Increments the penalty of every used arc with maximal utility.
    fn penalize(&mut self) {
        let n = self.instance.n();
        let mut arcs = Vec::new();
        let mut max_util = f64::NEG_INFINITY;
        for r in &self.routes {
            let mut prev = 0;
            for &s in r {
                let u = arc_utility(self.instance.dist(prev, s), self.penalties[prev * n + s]);
                if u > max_util + 1e-12 {
                    max_util = u;
                    arcs.clear();
                }
                if (u - max_util).abs() <= 1e-12 {
                    arcs.push((prev, s));
                }
                prev = s;
            }
        }
        let symmetric = self.instance.matrix().is_symmetric();
        for (i, j) in arcs {
            self.penalties[i * n + j] = self.penalties[i * n + j].saturating_add(1);
            if symmetric {
                self.penalties[j * n + i] = self.penalties[j * n + i].saturating_add(1);
            }
        }
    }

    fn best_move(&self) -> Option<Move> {
        let mut best: Option<(f64, Move)> = None;
        let mut consider = |delta: f64, mv: Move| {
            if delta < -IMPROVEMENT_EPS && best.is_none_or(|(d, _)| delta < d) {
                best = Some((delta, mv));
            }
        };

        for (route, stops) in self.routes.iter().enumerate() {
            if let Some(m) = best_move_by(stops, |a, b| self.aug(a, b)) {
                consider(m.delta, Move::TwoOpt { route, i: m.i, k: m.k });
            }
        }

        let nv = self.routes.len();
        let cap = |v: usize| self.instance.capacity(v);
        for from in 0..nv {
            let src = &self.routes[from];
            for (pos, &x) in src.iter().enumerate() {
                let prev = if pos == 0 { 0 } else { src[pos - 1] };
                let removal = match src.get(pos + 1) {
                    Some(&next) => self.aug(prev, next) - self.aug(prev, x) - self.aug(x, next),
                    None => -self.aug(prev, x),
                };
                let demand = self.instance.demand(x);
                let mut empty_offered = src.len() == 1;
                for to in 0..nv {
                    if to == from || self.loads[to] + demand > cap(to) + LOAD_EPS {
                        continue;
                    }
                    let dst = &self.routes[to];
                    if dst.is_empty() {
                        if empty_offered {
                            continue;
                        }
                        empty_offered = true;
                    }
                    for at in 0..=dst.len() {
                        let u = if at == 0 { 0 } else { dst[at - 1] };
                        let insertion = match dst.get(at) {
                            Some(&v) => self.aug(u, x) + self.aug(x, v) - self.aug(u, v),
                            None => self.aug(u, x),
                        };
                        consider(removal + insertion, Move::Relocate { from, pos, to, at });
                    }
                }
            }
        }

        for r1 in 0..nv {
            for r2 in r1 + 1..nv {
                let (s1, s2) = (&self.routes[r1], &self.routes[r2]);
                for (p1, &x) in s1.iter().enumerate() {
                    for (p2, &y) in s2.iter().enumerate() {
                        let dx = self.instance.demand(x);
                        let dy = self.instance.demand(y);
                        if self.loads[r1] - dx + dy > cap(r1) + LOAD_EPS
                            || self.loads[r2] - dy + dx > cap(r2) + LOAD_EPS
                        {
                            continue;
                        }
                        let delta = self.replace_delta(s1, p1, y) + self.replace_delta(s2, p2, x);
                        consider(delta, Move::Swap { r1, p1, r2, p2 });
                    }
                }
            }
        }

        for r1 in 0..nv {
            for r2 in r1 + 1..nv {
                let (s1, s2) = (&self.routes[r1], &self.routes[r2]);
                if s1.is_empty() && s2.is_empty() {
                    continue;
                }
                let head1 = prefix_loads(self.instance, s1);
                let head2 = prefix_loads(self.instance, s2);
                for a in 0..=s1.len() {
                    for b in 0..=s2.len() {
                        if (a == s1.len() && b == s2.len()) || (a == 0 && b == 0) {
                            continue;
                        }
                        let new1 = head1[a] + (self.loads[r2] - head2[b]);
                        let new2 = head2[b] + (self.loads[r1] - head1[a]);
                        if new1 > cap(r1) + LOAD_EPS || new2 > cap(r2) + LOAD_EPS {
                            continue;
                        }
                        let u1 = if a == 0 { 0 } else { s1[a - 1] };
                        let u2 = if b == 0 { 0 } else { s2[b - 1] };
                        let mut delta = 0.0;
                        if let Some(&t1) = s1.get(a) {
                            delta += self.aug(u2, t1) - self.aug(u1, t1);
                        }
                        if let Some(&t2) = s2.get(b) {
                            delta += self.aug(u1, t2) - self.aug(u2, t2);
                        }
                        consider(delta, Move::TailExchange { r1, a, r2, b });
                    }
                }
            }
        }

        best.map(|(_, m)| m)
    }

    /// Change in `g` when the stop at `pos` is replaced by `y`.
    fn replace_delta(&self, stops: &[usize], pos: usize, y: usize) -> f64 {
        let x = stops[pos];
        let prev = if pos == 0 { 0 } else { stops[pos - 1] };
        let mut delta = self.aug(prev, y) - self.aug(prev, x);
        if let Some(&next) = stops.get(pos + 1) {
            delta += self.aug(y, next) - self.aug(x, next);
        }
        delta
    }

    fn apply(&mut self, mv: Move) {
        match mv {
            Move::TwoOpt { route, i, k } => self.routes[route][i..=k].reverse(),
            Move::Relocate { from, pos, to, at } => {
                let x = self.routes[from].remove(pos);
                self.routes[to].insert(at, x);
                let d = self.instance.demand(x);
                self.loads[from] -= d;
                self.loads[to] += d;
            }
            Move::Swap { r1, p1, r2, p2 } => {
                let (x, y) = (self.routes[r1][p1], self.routes[r2][p2]);
                self.routes[r1][p1] = y;
                self.routes[r2][p2] = x;
                self.loads[r1] = load_of(self.instance, &self.routes[r1]);
                self.loads[r2] = load_of(self.instance, &self.routes[r2]);
            }
            Move::TailExchange { r1, a, r2, b } => {
                let t1 = self.routes[r1].split_off(a);
                let t2 = self.routes[r2].split_off(b);
                self.routes[r1].extend(t2);
                self.routes[r2].extend(t1);
                self.loads[r1] = load_of(self.instance, &self.routes[r1]);
                self.loads[r2] = load_of(self.instance, &self.routes[r2]);
            }
        }
    }

    /// Best solution by true length; empty routes are dropped. Returns the
    /// initial solution unchanged when nothing better was found.
    pub fn into_best(self, meta: SolutionMeta) -> Solution {
        if self.best_km < self.initial.total_distance - IMPROVEMENT_EPS {
            let routes = self.best_routes.into_iter().enumerate();
            Solution::from_stops(self.instance, routes, meta).expect("search keeps stops in range")
        } else {
            let mut s = self.initial;
            s.routes.retain(|r| !r.stops.is_empty());
            s.recompute(self.instance);
            s.meta = meta;
            s
        }
    }
}

fn load_of(instance: &Instance, stops: &[usize]) -> f64 {
    stops.iter().map(|&s| instance.demand(s)).sum()
}

fn prefix_loads(instance: &Instance, stops: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(stops.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for &s in stops {
        acc += instance.demand(s);
        out.push(acc);
    }
    out
}

fn true_cost(instance: &Instance, routes: &[Vec<usize>]) -> f64 {
    routes.iter().map(|r| open_path_length(instance, r)).sum()
}

/// Anytime GLS from `initial` until the stop rule fires. The returned solution
/// is never longer than `initial`.
pub fn guided_local_search(
    instance: &Instance,
    initial: &Solution,
    params: &BaselineParams,
    mut trace: impl FnMut(TraceRow),
) -> Solution {
    let started = Instant::now();
    let meta = SolutionMeta { solver: "baseline".into(), seed: params.seed, wall_time_s: 0.0 };
    let mut gls = GuidedLocalSearch::new(instance, initial, params.lambda_factor);
    let mut spent: u64 = 0;
    let mut stalled: u64 = 0;
    let out_of_budget = |spent: u64| match params.stop {
        StopRule::TimeLimit(limit) => started.elapsed() >= limit,
        StopRule::Moves(budget) => spent >= budget,
    };
    while !out_of_budget(spent) {
        let before = spent;
        let outcome = gls.round(|m| out_of_budget(before + m as u64));
        spent += outcome.moves as u64;
        trace(TraceRow {
            iteration: outcome.round,
            iteration_best_km: outcome.local_optimum_km,
            global_best_km: outcome.best_km,
        });
        if outcome.interrupted {
            break;
        }
        // the penalty update counts as one unit of budget
        spent += 1;
        stalled = if outcome.improved { 0 } else { stalled + 1 };
        if params.stall_rounds.is_some_and(|limit| stalled >= limit) || gls.lambda() == 0.0 {
            break;
        }
    }
    gls.into_best(meta)
}

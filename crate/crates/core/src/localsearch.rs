//! 2-opt for open routes.
//!
//! A move reverses `stops[i..=k]`. Because the route is an open path starting at
//! the depot, the arc into position `i` comes from the depot when `i == 0`, and
//! when `k` is the last position there is no outgoing arc to reconnect. Deltas
//! are exact for asymmetric matrices: the reversed segment's internal arcs are
//! re-priced in the opposite direction via prefix sums.

use crate::model::{open_path_length, Instance, Solution};

/// Minimum gain for a move to count as improving.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoOptMove {
    pub i: usize,
    pub k: usize,
    pub delta: f64,
}

impl TwoOptMove {
    pub fn apply(&self, stops: &mut [usize]) {
        stops[self.i..=self.k].reverse();
    }
}

/// Delta of reversing `stops[i..=k]`, evaluated directly from the arc costs.
pub fn move_delta(instance: &Instance, stops: &[usize], i: usize, k: usize) -> TwoOptMove {
    assert!(i <= k && k < stops.len(), "invalid 2-opt positions ({i}, {k}) for length {}", stops.len());
    let d = |a: usize, b: usize| instance.dist(a, b);
    let prev = if i == 0 { 0 } else { stops[i - 1] };
    let mut old = d(prev, stops[i]);
    let mut new = d(prev, stops[k]);
    for t in i..k {
        old += d(stops[t], stops[t + 1]);
        new += d(stops[t + 1], stops[t]);
    }
    if let Some(&next) = stops.get(k + 1) {
        old += d(stops[k], next);
        new += d(stops[i], next);
    }
    TwoOptMove { i, k, delta: new - old }
}

/// Prefix sums of forward and backward arc costs along a stop sequence.
struct ArcPrefix {
    fwd: Vec<f64>,
    bwd: Vec<f64>,
}

impl ArcPrefix {
    fn new(stops: &[usize], cost: &impl Fn(usize, usize) -> f64) -> Self {
        let mut fwd = Vec::with_capacity(stops.len());
        let mut bwd = Vec::with_capacity(stops.len());
        let (mut f, mut b) = (0.0, 0.0);
        fwd.push(0.0);
        bwd.push(0.0);
        for w in stops.windows(2) {
            f += cost(w[0], w[1]);
            b += cost(w[1], w[0]);
            fwd.push(f);
            bwd.push(b);
        }
        Self { fwd, bwd }
    }
}

/// Best-improving reversal under an arbitrary arc cost, or `None` at a local optimum.
/// Ties keep the first move in `(i, k)` scan order.
pub(crate) fn best_move_by(stops: &[usize], cost: impl Fn(usize, usize) -> f64) -> Option<TwoOptMove> {
    let len = stops.len();
    if len < 2 {
        return None;
    }
    let prefix = ArcPrefix::new(stops, &cost);
    let mut best: Option<TwoOptMove> = None;
    for i in 0..len - 1 {
        let prev = if i == 0 { 0 } else { stops[i - 1] };
        let in_old = cost(prev, stops[i]);
        for k in i + 1..len {
            let mut old = in_old + prefix.fwd[k] - prefix.fwd[i];
            let mut new = cost(prev, stops[k]) + prefix.bwd[k] - prefix.bwd[i];
            if k + 1 < len {
                let next = stops[k + 1];
                old += cost(stops[k], next);
                new += cost(stops[i], next);
            }
            let delta = new - old;
            if delta < -IMPROVEMENT_EPS && best.is_none_or(|b| delta < b.delta) {
                best = Some(TwoOptMove { i, k, delta });
            }
        }
    }
    best
}

/// Applies best-improving reversals under `cost` until none gains more than
/// [`IMPROVEMENT_EPS`]. Returns the number of moves applied.
pub(crate) fn descend_by(stops: &mut [usize], cost: impl Fn(usize, usize) -> f64) -> usize {
    let mut moves = 0;
    while let Some(mv) = best_move_by(stops, &cost) {
        mv.apply(stops);
        moves += 1;
    }
    moves
}

/// 2-opt to a local optimum of the open-route length.
pub fn two_opt_route(instance: &Instance, stops: &[usize]) -> Vec<usize> {
    let mut out = stops.to_vec();
    descend_by(&mut out, |a, b| instance.dist(a, b));
    out
}

/// Runs [`two_opt_route`] on every route independently. Loads never change.
pub fn improve_solution(instance: &Instance, solution: &Solution) -> Solution {
    let mut improved = solution.clone();
    improve_in_place(instance, &mut improved);
    improved
}

pub(crate) fn improve_in_place(instance: &Instance, solution: &mut Solution) {
    let mut total = 0.0;
    for route in &mut solution.routes {
        if descend_by(&mut route.stops, |a, b| instance.dist(a, b)) > 0 {
            route.distance = open_path_length(instance, &route.stops);
        }
        total += route.distance;
    }
    solution.total_distance = total;
}

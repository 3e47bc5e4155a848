//! First-solution heuristics for open routes.

use std::fmt;
use std::str::FromStr;

use crate::model::{Instance, Solution, SolutionMeta, LOAD_EPS};

use super::BaselineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FirstSolutionStrategy {
    PathCheapestArc,
    ParallelCheapestInsertion,
    Savings,
    Automatic,
}

impl FirstSolutionStrategy {
    pub const ALL: [FirstSolutionStrategy; 4] = [
        FirstSolutionStrategy::PathCheapestArc,
        FirstSolutionStrategy::ParallelCheapestInsertion,
        FirstSolutionStrategy::Savings,
        FirstSolutionStrategy::Automatic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FirstSolutionStrategy::PathCheapestArc => "PATH_CHEAPEST_ARC",
            FirstSolutionStrategy::ParallelCheapestInsertion => "PARALLEL_CHEAPEST_INSERTION",
            FirstSolutionStrategy::Savings => "SAVINGS",
            FirstSolutionStrategy::Automatic => "AUTOMATIC",
        }
    }
}

impl fmt::Display for FirstSolutionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FirstSolutionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pca" | "path_cheapest_arc" => Ok(Self::PathCheapestArc),
            "pci" | "parallel_cheapest_insertion" => Ok(Self::ParallelCheapestInsertion),
            "savings" => Ok(Self::Savings),
            "auto" | "automatic" => Ok(Self::Automatic),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

fn meta(name: &str) -> SolutionMeta {
    SolutionMeta { solver: name.to_string(), ..SolutionMeta::default() }
}

fn fits(load: f64, extra: f64, capacity: f64) -> bool {
    load + extra <= capacity + LOAD_EPS
}

/// Each vehicle in fleet order leaves the depot and keeps appending the nearest
/// unvisited customer that still fits; ties go to the lowest index.
pub fn path_cheapest_arc(instance: &Instance) -> Result<Solution, BaselineError> {
    let mut unvisited = vec![true; instance.n()];
    unvisited[0] = false;
    let mut remaining = instance.num_customers();
    let mut routes = Vec::new();
    for (vehicle, v) in instance.vehicles().iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let (mut current, mut load, mut stops) = (0, 0.0, Vec::new());
        loop {
            let next = instance
                .customers()
                .filter(|&c| unvisited[c] && fits(load, instance.demand(c), v.capacity))
                .min_by(|&a, &b| instance.dist(current, a).total_cmp(&instance.dist(current, b)));
            let Some(c) = next else { break };
            unvisited[c] = false;
            remaining -= 1;
            load += instance.demand(c);
            stops.push(c);
            current = c;
        }
        routes.push((vehicle, stops));
    }
    if remaining > 0 {
        return Err(BaselineError::Infeasible(format!("{remaining} customers left after every vehicle was filled")));
    }
    Ok(Solution::from_stops(instance, routes, meta("path_cheapest_arc"))?)
}

/// Cost of inserting `c` at position `pos` of an open route.
fn insertion_cost(instance: &Instance, stops: &[usize], pos: usize, c: usize) -> f64 {
    let prev = if pos == 0 { 0 } else { stops[pos - 1] };
    match stops.get(pos) {
        Some(&next) => instance.dist(prev, c) + instance.dist(c, next) - instance.dist(prev, next),
        None => instance.dist(prev, c),
    }
}

/// Cheapest feasible `(customer, vehicle, position)` over all routes at once.
/// Ties prefer the lowest customer index, then vehicle, then position. Only the
/// first empty vehicle that fits a customer is offered, since all empty
/// vehicles price identically.
fn cheapest_insertion(
    instance: &Instance,
    routes: &[Vec<usize>],
    loads: &[f64],
    capacities: &[f64],
    pending: &[usize],
) -> Option<(usize, usize, usize)> {
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for (pi, &c) in pending.iter().enumerate() {
        let demand = instance.demand(c);
        let mut empty_offered = false;
        for (k, stops) in routes.iter().enumerate() {
            if !fits(loads[k], demand, capacities[k]) {
                continue;
            }
            if stops.is_empty() {
                if empty_offered {
                    continue;
                }
                empty_offered = true;
            }
            for pos in 0..=stops.len() {
                let cost = insertion_cost(instance, stops, pos, c);
                if best.is_none_or(|b| cost < b.0) {
                    best = Some((cost, pi, k, pos));
                }
            }
        }
    }
    best.map(|(_, pi, k, pos)| (pi, k, pos))
}

fn insert_all(
    instance: &Instance,
    routes: &mut [Vec<usize>],
    loads: &mut [f64],
    capacities: &[f64],
    mut pending: Vec<usize>,
) -> Result<(), BaselineError> {
    while !pending.is_empty() {
        let Some((pi, k, pos)) = cheapest_insertion(instance, routes, loads, capacities, &pending) else {
            return Err(BaselineError::Infeasible(format!(
                "no vehicle can take any of the {} remaining customers",
                pending.len()
            )));
        };
        let c = pending.remove(pi);
        routes[k].insert(pos, c);
        loads[k] += instance.demand(c);
    }
    Ok(())
}

/// Grows all routes simultaneously, always committing the globally cheapest
/// feasible insertion.
pub fn parallel_cheapest_insertion(instance: &Instance) -> Result<Solution, BaselineError> {
    let capacities: Vec<f64> = instance.vehicles().iter().map(|v| v.capacity).collect();
    let mut routes = vec![Vec::new(); capacities.len()];
    let mut loads = vec![0.0; capacities.len()];
    insert_all(instance, &mut routes, &mut loads, &capacities, instance.customers().collect())?;
    Ok(Solution::from_stops(instance, routes.into_iter().enumerate(), meta("parallel_cheapest_insertion"))?)
}

/// Clarke & Wright savings adapted to open routes.
///
/// Starting from one route per customer, the route starting at `j` may be
/// appended to the route ending at `i` for a saving of `d(0, j) - d(i, j)`.
/// Positive savings are merged in decreasing order, end-to-start only, as long
/// as the merged load fits the largest vehicle. Routes are then matched to
/// vehicles largest-load first, each taking the smallest free vehicle it fits.
/// Routes left without a vehicle are dissolved and their customers re-inserted
/// by cheapest feasible insertion.
pub fn savings_open(instance: &Instance) -> Result<Solution, BaselineError> {
    let n = instance.n();
    let max_capacity = instance.vehicles().iter().map(|v| v.capacity).fold(0.0, f64::max);
    if let Some(c) = instance.customers().find(|&c| instance.demand(c) > max_capacity + LOAD_EPS) {
        return Err(BaselineError::Infeasible(format!("customer {c} exceeds every vehicle")));
    }

    // route id per customer, and the stops of each route keyed by id
    let mut route_of: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|c| if c == 0 { Vec::new() } else { vec![c] }).collect();
    let mut loads: Vec<f64> = (0..n).map(|c| instance.demand(c)).collect();

    let mut savings = Vec::new();
    for i in instance.customers() {
        for j in instance.customers() {
            if i != j {
                let s = instance.dist(0, j) - instance.dist(i, j);
                if s > 0.0 {
                    savings.push((s, i, j));
                }
            }
        }
    }
    savings.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    for (_, i, j) in savings {
        let (ri, rj) = (route_of[i], route_of[j]);
        if ri == rj {
            continue;
        }
        if members[ri].last() != Some(&i) || members[rj].first() != Some(&j) {
            continue;
        }
        if !fits(loads[ri], loads[rj], max_capacity) {
            continue;
        }
        let tail = std::mem::take(&mut members[rj]);
        for &c in &tail {
            route_of[c] = ri;
        }
        members[ri].extend(tail);
        loads[ri] += loads[rj];
        loads[rj] = 0.0;
    }

    let mut built: Vec<(f64, Vec<usize>)> =
        members.into_iter().zip(loads).filter(|(m, _)| !m.is_empty()).map(|(m, l)| (l, m)).collect();
    // largest load first, then by first stop for determinism
    built.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1[0].cmp(&b.1[0])));

    let mut fleet: Vec<usize> = (0..instance.vehicles().len()).collect();
    fleet.sort_by(|&a, &b| instance.capacity(b).total_cmp(&instance.capacity(a)).then(a.cmp(&b)));

    let capacities: Vec<f64> = fleet.iter().map(|&v| instance.capacity(v)).collect();
    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); fleet.len()];
    let mut route_loads = vec![0.0; fleet.len()];
    let mut taken = vec![false; fleet.len()];
    let mut leftovers = Vec::new();
    for (load, stops) in built {
        // smallest free vehicle that still fits; the fleet is sorted largest first
        match (0..fleet.len()).rev().find(|&slot| !taken[slot] && fits(0.0, load, capacities[slot])) {
            Some(slot) => {
                taken[slot] = true;
                routes[slot] = stops;
                route_loads[slot] = load;
            }
            None => leftovers.extend(stops),
        }
    }
    if !leftovers.is_empty() {
        let mut pending = leftovers;
        pending.sort_unstable();
        insert_all(instance, &mut routes, &mut route_loads, &capacities, pending)?;
    }

    let mut assigned: Vec<(usize, Vec<usize>)> = fleet.into_iter().zip(routes).collect();
    assigned.sort_by_key(|(v, _)| *v);
    Ok(Solution::from_stops(instance, assigned, meta("savings"))?)
}

/// Runs a single constructor. `Automatic` runs all three and keeps the shortest.
pub fn construct(instance: &Instance, strategy: FirstSolutionStrategy) -> Result<Solution, BaselineError> {
    match strategy {
        FirstSolutionStrategy::PathCheapestArc => path_cheapest_arc(instance),
        FirstSolutionStrategy::ParallelCheapestInsertion => parallel_cheapest_insertion(instance),
        FirstSolutionStrategy::Savings => savings_open(instance),
        FirstSolutionStrategy::Automatic => automatic(instance).map(|(_, s)| s),
    }
}

fn automatic(instance: &Instance) -> Result<(FirstSolutionStrategy, Solution), BaselineError> {
    let mut best: Option<(FirstSolutionStrategy, Solution)> = None;
    let mut last_err = None;
    for strategy in &FirstSolutionStrategy::ALL[..3] {
        match construct(instance, *strategy) {
            Ok(s) => {
                if best.as_ref().is_none_or(|(_, b)| s.total_distance < b.total_distance) {
                    best = Some((*strategy, s));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("three constructors ran"))
}

/// The constructor whose solution is shortest; ties go to declaration order.
pub fn automatic_select(instance: &Instance) -> Result<FirstSolutionStrategy, BaselineError> {
    automatic(instance).map(|(s, _)| s)
}

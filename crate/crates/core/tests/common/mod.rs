//! Brute-force reference solutions and random instance builders shared by the
//! integration tests.
#![allow(dead_code)]

use ocvrp::matrix::{build_matrix, DistanceMode};
use ocvrp::model::{Instance, Location, Vehicle};
use rand::Rng;

/// Shortest open path from the depot through every customer in `mask`,
/// found by trying every ordering.
pub fn best_open_path(instance: &Instance, mask: u32) -> f64 {
    let mut items: Vec<usize> = (1..instance.n()).filter(|&c| mask & (1 << c) != 0).collect();
    let mut best = f64::INFINITY;
    permute(&mut items, 0, &mut |order| {
        let mut prev = 0;
        let mut len = 0.0;
        for &c in order {
            len += instance.dist(prev, c);
            prev = c;
        }
        best = best.min(len);
    });
    if items.is_empty() {
        0.0
    } else {
        best
    }
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Optimal total distance over every assignment of customers to vehicles.
/// `None` if no assignment respects capacity. Intended for at most 8 customers.
pub fn brute_force_optimum(instance: &Instance) -> Option<f64> {
    let customers = instance.n() - 1;
    let vehicles = instance.vehicles().len();
    let full: u32 = (1..=customers).fold(0, |m, c| m | (1 << c));
    let mut path_cache = std::collections::HashMap::new();
    let mut best: Option<f64> = None;
    let mut assignment = vec![0usize; customers];
    let total = vehicles.pow(customers as u32);
    for code in 0..total {
        let mut x = code;
        for a in assignment.iter_mut() {
            *a = x % vehicles;
            x /= vehicles;
        }
        let mut masks = vec![0u32; vehicles];
        let mut loads = vec![0.0; vehicles];
        for (i, &v) in assignment.iter().enumerate() {
            masks[v] |= 1 << (i + 1);
            loads[v] += instance.demand(i + 1);
        }
        if (0..vehicles).any(|v| loads[v] > instance.capacity(v) + 1e-9) {
            continue;
        }
        debug_assert_eq!(masks.iter().fold(0, |a, m| a | m), full);
        let cost: f64 =
            masks.iter().map(|&m| *path_cache.entry(m).or_insert_with(|| best_open_path(instance, m))).sum();
        if best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
    }
    best
}

/// Unit-demand instance with customers scattered uniformly in a box of
/// roughly 40 x 50 km, haversine distances.
pub fn random_instance(rng: &mut impl Rng, customers: usize, capacities: &[f64]) -> Instance {
    let mut locations = vec![Location { id: 0, lat: 30.05, lon: 31.3, demand: 0.0, time_window: None }];
    for i in 1..=customers {
        locations.push(Location {
            id: i as u64,
            lat: rng.random_range(29.85..30.25),
            lon: rng.random_range(31.05..31.55),
            demand: 1.0,
            time_window: None,
        });
    }
    let vehicles = capacities
        .iter()
        .enumerate()
        .map(|(k, &capacity)| Vehicle { id: k as u64, capacity, fixed_cost: None, time_window: None })
        .collect();
    let matrix = build_matrix(&locations, DistanceMode::Haversine).unwrap();
    Instance::new("random", locations, vehicles, matrix).unwrap()
}

/// Capacities for the full-utilization regime: one vehicle carrying everything,
/// or two vehicles whose capacities add up to the number of customers.
pub fn full_utilization_fleet(rng: &mut impl Rng, customers: usize, max_vehicles: usize) -> Vec<f64> {
    if max_vehicles < 2 || customers < 2 || rng.random_bool(0.3) {
        return vec![customers as f64];
    }
    let a = rng.random_range(1..customers);
    vec![a as f64, (customers - a) as f64]
}

//! Problem and solution data model.
//!
//! Locations are addressed by their matrix position; index 0 is always the depot.
//! Routes are open: they start at the depot and end at their last customer, so
//! no closing arc is ever charged.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::matrix::DistanceMatrix;

/// Slack allowed when comparing summed loads against a capacity.
pub const LOAD_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("location index {index} out of range for a customer (order {n})")]
    InvalidIndex { index: usize, n: usize },
    #[error("route has no stops")]
    EmptyRoute,
    #[error("vehicle index {0} out of range")]
    InvalidVehicle(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: u64,
    pub lat: f64,
    pub lon: f64,
    pub demand: f64,
    /// Seconds from midnight. Carried through I/O, never optimized.
    pub time_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: u64,
    pub capacity: f64,
    /// Carried through I/O, contributes nothing to cost.
    pub fixed_cost: Option<f64>,
    pub time_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    locations: Vec<Location>,
    vehicles: Vec<Vehicle>,
    matrix: DistanceMatrix,
}

impl Instance {
    /// Validates structural invariants. Instances whose fleet cannot carry the
    /// total demand are still accepted; see [`Instance::is_capacity_feasible`].
    pub fn new(
        name: impl Into<String>,
        locations: Vec<Location>,
        vehicles: Vec<Vehicle>,
        matrix: DistanceMatrix,
    ) -> Result<Self, ModelError> {
        let n = locations.len();
        if n < 2 {
            return Err(ModelError::InvalidInstance(format!(
                "need a depot and at least one customer, found {n} locations"
            )));
        }
        if matrix.order() != n {
            return Err(ModelError::InvalidInstance(format!(
                "matrix order {} does not match {n} locations",
                matrix.order()
            )));
        }
        if locations[0].demand != 0.0 {
            return Err(ModelError::InvalidInstance(format!("depot demand must be 0, found {}", locations[0].demand)));
        }
        for (i, loc) in locations.iter().enumerate() {
            if !loc.demand.is_finite() || loc.demand < 0.0 {
                return Err(ModelError::InvalidInstance(format!("location {i} has demand {}", loc.demand)));
            }
            check_window(loc.time_window, || format!("location {i}"))?;
        }
        if vehicles.is_empty() {
            return Err(ModelError::InvalidInstance("fleet is empty".into()));
        }
        for (k, v) in vehicles.iter().enumerate() {
            if !v.capacity.is_finite() || v.capacity <= 0.0 {
                return Err(ModelError::InvalidInstance(format!("vehicle {k} has capacity {}", v.capacity)));
            }
            check_window(v.time_window, || format!("vehicle {k}"))?;
        }
        Ok(Self { name: name.into(), locations, vehicles, matrix })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }

    /// Number of locations including the depot.
    #[inline]
    pub fn n(&self) -> usize {
        self.locations.len()
    }

    pub fn num_customers(&self) -> usize {
        self.locations.len() - 1
    }

    /// Customer indices `1..n`.
    pub fn customers(&self) -> std::ops::Range<usize> {
        1..self.locations.len()
    }

    #[inline]
    pub fn dist(&self, from: usize, to: usize) -> f64 {
        self.matrix.get(from, to)
    }

    #[inline]
    pub fn demand(&self, i: usize) -> f64 {
        self.locations[i].demand
    }

    pub fn capacity(&self, vehicle: usize) -> f64 {
        self.vehicles[vehicle].capacity
    }

    pub fn total_demand(&self) -> f64 {
        self.locations.iter().map(|l| l.demand).sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.vehicles.iter().map(|v| v.capacity).sum()
    }

    /// Necessary condition for a solution to exist: the fleet can carry the total
    /// demand and no single customer exceeds the largest vehicle.
    pub fn is_capacity_feasible(&self) -> bool {
        let largest = self.vehicles.iter().map(|v| v.capacity).fold(0.0, f64::max);
        self.total_demand() <= self.total_capacity() + LOAD_EPS
            && self.customers().all(|c| self.demand(c) <= largest + LOAD_EPS)
    }
}

fn check_window(window: Option<(f64, f64)>, owner: impl Fn() -> String) -> Result<(), ModelError> {
    match window {
        Some((start, end)) if start > end || start.is_nan() || end.is_nan() => {
            Err(ModelError::InvalidInstance(format!("{} has time window start {start} after end {end}", owner())))
        }
        _ => Ok(()),
    }
}

/// Open-route length: depot to the first stop, then stop to stop.
pub fn route_distance(instance: &Instance, stops: &[usize]) -> Result<f64, ModelError> {
    let n = instance.n();
    if stops.is_empty() {
        return Err(ModelError::EmptyRoute);
    }
    if let Some(&bad) = stops.iter().find(|&&s| s == 0 || s >= n) {
        return Err(ModelError::InvalidIndex { index: bad, n });
    }
    Ok(open_path_length(instance, stops))
}

/// Unchecked variant of [`route_distance`] for hot loops; an empty slice has length 0.
#[inline]
pub(crate) fn open_path_length(instance: &Instance, stops: &[usize]) -> f64 {
    let Some(&first) = stops.first() else { return 0.0 };
    let m = instance.matrix();
    stops.windows(2).fold(m.get(0, first), |acc, w| acc + m.get(w[0], w[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Position of the vehicle in the instance fleet.
    pub vehicle: usize,
    pub stops: Vec<usize>,
    pub load: f64,
    pub distance: f64,
}

impl Route {
    /// Builds a route, computing load and distance. Capacity is not checked here.
    pub fn new(instance: &Instance, vehicle: usize, stops: Vec<usize>) -> Result<Self, ModelError> {
        if vehicle >= instance.vehicles().len() {
            return Err(ModelError::InvalidVehicle(vehicle));
        }
        let distance = route_distance(instance, &stops)?;
        let load = stops.iter().map(|&s| instance.demand(s)).sum();
        Ok(Self { vehicle, stops, load, distance })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolutionMeta {
    pub solver: String,
    pub seed: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub total_distance: f64,
    pub meta: SolutionMeta,
}

impl Solution {
    pub fn new(routes: Vec<Route>, meta: SolutionMeta) -> Self {
        let total_distance = routes.iter().map(|r| r.distance).sum();
        Self { routes, total_distance, meta }
    }

    /// Builds routes from `(vehicle, stops)` pairs, silently dropping empty ones.
    pub fn from_stops(
        instance: &Instance,
        routes: impl IntoIterator<Item = (usize, Vec<usize>)>,
        meta: SolutionMeta,
    ) -> Result<Self, ModelError> {
        let routes = routes
            .into_iter()
            .filter(|(_, stops)| !stops.is_empty())
            .map(|(vehicle, stops)| Route::new(instance, vehicle, stops))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(routes, meta))
    }

    /// Recomputes every route's load and distance and the total from the instance.
    pub fn recompute(&mut self, instance: &Instance) {
        for r in &mut self.routes {
            r.distance = open_path_length(instance, &r.stops);
            r.load = r.stops.iter().map(|&s| instance.demand(s)).sum();
        }
        self.total_distance = self.routes.iter().map(|r| r.distance).sum();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyRoute {
        route: usize,
    },
    InvalidStop {
        route: usize,
        index: usize,
    },
    InvalidVehicle {
        route: usize,
        vehicle: usize,
    },
    DuplicateVehicle {
        vehicle: usize,
    },
    CustomerUnserved {
        customer: usize,
    },
    CustomerRepeated {
        customer: usize,
        times: usize,
    },
    CapacityExceeded {
        route: usize,
        load: f64,
        capacity: f64,
    },
    LoadMismatch {
        route: usize,
        stored: f64,
        actual: f64,
    },
    DistanceMismatch {
        route: usize,
        stored: f64,
        actual: f64,
    },
    TotalMismatch {
        stored: f64,
        actual: f64,
    },
    /// Only reported as a violation in strict mode.
    Underutilized {
        vehicle: usize,
        load: f64,
        capacity: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyRoute { route } => write!(f, "route {route} is empty"),
            Violation::InvalidStop { route, index } => {
                write!(f, "route {route} visits invalid location {index}")
            }
            Violation::InvalidVehicle { route, vehicle } => {
                write!(f, "route {route} uses unknown vehicle {vehicle}")
            }
            Violation::DuplicateVehicle { vehicle } => {
                write!(f, "vehicle {vehicle} used by more than one route")
            }
            Violation::CustomerUnserved { customer } => write!(f, "customer {customer} unserved"),
            Violation::CustomerRepeated { customer, times } => {
                write!(f, "customer {customer} served {times} times")
            }
            Violation::CapacityExceeded { route, load, capacity } => {
                write!(f, "route {route}: capacity exceeded ({load} > {capacity})")
            }
            Violation::LoadMismatch { route, stored, actual } => {
                write!(f, "route {route}: stored load {stored} but stops sum to {actual}")
            }
            Violation::DistanceMismatch { route, stored, actual } => {
                write!(f, "route {route}: stored distance {stored} km but recomputed {actual} km")
            }
            Violation::TotalMismatch { stored, actual } => {
                write!(f, "stored total {stored} km but routes sum to {actual} km")
            }
            Violation::Underutilized { vehicle, load, capacity } => {
                write!(f, "vehicle {vehicle} carries {load} of {capacity}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// Treat any vehicle below full capacity as a violation instead of a warning.
    pub strict_utilization: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn close(stored: f64, actual: f64) -> bool {
    (stored - actual).abs() <= 1e-9 * stored.abs().max(actual.abs()).max(1.0)
}

pub fn validate_solution(instance: &Instance, solution: &Solution) -> ValidationReport {
    validate_solution_with(instance, solution, ValidationOptions::default())
}

pub fn validate_solution_with(
    instance: &Instance,
    solution: &Solution,
    options: ValidationOptions,
) -> ValidationReport {
    let n = instance.n();
    let mut report = ValidationReport::default();
    let mut served = vec![0usize; n];
    let mut used_vehicles = HashSet::new();
    let mut actual_total = 0.0;

    for (ri, route) in solution.routes.iter().enumerate() {
        let v = &mut report.violations;
        if route.stops.is_empty() {
            v.push(Violation::EmptyRoute { route: ri });
        }
        let vehicle_ok = route.vehicle < instance.vehicles().len();
        if !vehicle_ok {
            v.push(Violation::InvalidVehicle { route: ri, vehicle: route.vehicle });
        } else if !used_vehicles.insert(route.vehicle) {
            v.push(Violation::DuplicateVehicle { vehicle: route.vehicle });
        }
        let mut stops_ok = true;
        for &s in &route.stops {
            if s == 0 || s >= n {
                v.push(Violation::InvalidStop { route: ri, index: s });
                stops_ok = false;
            } else {
                served[s] += 1;
            }
        }
        if !stops_ok {
            continue;
        }
        let load: f64 = route.stops.iter().map(|&s| instance.demand(s)).sum();
        if !close(route.load, load) {
            v.push(Violation::LoadMismatch { route: ri, stored: route.load, actual: load });
        }
        if vehicle_ok {
            let capacity = instance.capacity(route.vehicle);
            if load > capacity + LOAD_EPS {
                v.push(Violation::CapacityExceeded { route: ri, load, capacity });
            }
        }
        let distance = open_path_length(instance, &route.stops);
        if !close(route.distance, distance) {
            v.push(Violation::DistanceMismatch { route: ri, stored: route.distance, actual: distance });
        }
        actual_total += distance;
    }

    for c in instance.customers() {
        match served[c] {
            1 => {}
            0 => report.violations.push(Violation::CustomerUnserved { customer: c }),
            times => report.violations.push(Violation::CustomerRepeated { customer: c, times }),
        }
    }
    if !close(solution.total_distance, actual_total) {
        report.violations.push(Violation::TotalMismatch { stored: solution.total_distance, actual: actual_total });
    }

    let mut loads = vec![0.0; instance.vehicles().len()];
    let fleet = loads.len();
    for r in solution.routes.iter().filter(|r| r.vehicle < fleet) {
        loads[r.vehicle] += r.stops.iter().filter(|&&s| s > 0 && s < n).map(|&s| instance.demand(s)).sum::<f64>();
    }
    for (vehicle, &load) in loads.iter().enumerate() {
        let capacity = instance.capacity(vehicle);
        if load + LOAD_EPS < capacity {
            let w = Violation::Underutilized { vehicle, load, capacity };
            if options.strict_utilization {
                report.violations.push(w);
            } else {
                report.warnings.push(w);
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utilization {
    /// `load / capacity` per route, in route order.
    pub per_route: Vec<f64>,
    /// Total load over total fleet capacity, unused vehicles included.
    pub fleet: f64,
}

pub fn utilization(instance: &Instance, solution: &Solution) -> Utilization {
    let per_route = solution.routes.iter().map(|r| (r.load / instance.capacity(r.vehicle)).clamp(0.0, 1.0)).collect();
    let load: f64 = solution.routes.iter().map(|r| r.load).sum();
    let fleet = (load / instance.total_capacity()).clamp(0.0, 1.0);
    Utilization { per_route, fleet }
}

use crate::matrix::{build_matrix, DistanceMode};
use crate::model::{Instance, Location, Vehicle};

/// Unit-demand instance on the plane; the first point is the depot.
pub(crate) fn plane_instance(points: &[(f64, f64)], capacities: &[f64]) -> Instance {
    let locations: Vec<Location> = points
        .iter()
        .enumerate()
        .map(|(i, &(lat, lon))| Location {
            id: i as u64,
            lat,
            lon,
            demand: if i == 0 { 0.0 } else { 1.0 },
            time_window: None,
        })
        .collect();
    let vehicles = capacities
        .iter()
        .enumerate()
        .map(|(k, &capacity)| Vehicle { id: k as u64, capacity, fixed_cost: None, time_window: None })
        .collect();
    let matrix = build_matrix(&locations, DistanceMode::EuclideanPlane).unwrap();
    Instance::new("plane", locations, vehicles, matrix).unwrap()
}

/// `customers` points on a circle of radius 10 around the depot, in scrambled order.
pub(crate) fn ring_instance(customers: usize, capacities: &[f64]) -> Instance {
    let mut pts = vec![(0.0, 0.0)];
    for i in 0..customers {
        let k = (i * 7) % customers;
        let a = std::f64::consts::TAU * k as f64 / customers as f64;
        pts.push((10.0 * a.cos(), 10.0 * a.sin()));
    }
    plane_instance(&pts, capacities)
}

//! Synthetic unit-demand instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::matrix::{build_matrix, DistanceMode, EARTH_RADIUS_KM};
use crate::model::{Instance, Location, Vehicle};

use super::HarnessError;

/// Latitude/longitude box; corners may be given in any order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lon_min: f64,
    pub lat_max: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    pub fn new(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Self {
        Self { lat_min: lat1.min(lat2), lon_min: lon1.min(lon2), lat_max: lat1.max(lat2), lon_max: lon1.max(lon2) }
    }

    /// Roughly the Greater Cairo area.
    pub fn cairo() -> Self {
        Self::new(29.85, 31.05, 30.25, 31.55)
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.lat_min + self.lat_max) / 2.0, (self.lon_min + self.lon_max) / 2.0)
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }

    fn is_valid(&self) -> bool {
        [self.lat_min, self.lat_max].iter().all(|l| (-90.0..=90.0).contains(l))
            && [self.lon_min, self.lon_max].iter().all(|l| (-180.0..=180.0).contains(l))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    Uniform,
    /// `clusters` centers drawn uniformly; members Gaussian around them with
    /// standard deviation `spread_km`.
    Clustered {
        clusters: usize,
        spread_km: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub customers: usize,
    pub vehicles: usize,
    pub capacity: f64,
    pub layout: Layout,
    pub bbox: BoundingBox,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Format(m));
        if self.customers == 0 {
            return fail("at least one customer is required".into());
        }
        if self.vehicles == 0 || !(self.capacity > 0.0 && self.capacity.is_finite()) {
            return fail("need at least one vehicle with positive capacity".into());
        }
        if self.vehicles as f64 * self.capacity < self.customers as f64 {
            return fail(format!(
                "{} vehicles of capacity {} cannot serve {} unit demands",
                self.vehicles, self.capacity, self.customers
            ));
        }
        if !self.bbox.is_valid() {
            return fail(format!("bounding box out of range: {:?}", self.bbox));
        }
        if let Layout::Clustered { clusters, spread_km } = self.layout {
            if clusters == 0 || !(spread_km >= 0.0 && spread_km.is_finite()) {
                return fail("clustered layout needs k >= 1 and a non-negative spread".into());
            }
        }
        Ok(())
    }
}

const KM_PER_DEGREE: f64 = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
const MAX_RESAMPLES: usize = 100;

/// Depot at the box center, unit demands, identical vehicles. Deterministic for a seed.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance, HarnessError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let b = spec.bbox;
    let uniform =
        |rng: &mut ChaCha8Rng| (rng.random_range(b.lat_min..=b.lat_max), rng.random_range(b.lon_min..=b.lon_max));

    let points: Vec<(f64, f64)> = match spec.layout {
        Layout::Uniform => (0..spec.customers).map(|_| uniform(&mut rng)).collect(),
        Layout::Clustered { clusters, spread_km } => {
            let centers: Vec<_> = (0..clusters).map(|_| uniform(&mut rng)).collect();
            let lat_sd = spread_km / KM_PER_DEGREE;
            let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
            (0..spec.customers)
                .map(|i| {
                    let (clat, clon) = centers[i % clusters];
                    let lon_sd = lat_sd / clat.to_radians().cos().max(1e-6);
                    let mut p = (clat, clon);
                    for _ in 0..MAX_RESAMPLES {
                        let lat = clat + lat_sd * std_normal.sample(&mut rng);
                        let lon = clon + lon_sd * std_normal.sample(&mut rng);
                        p = (lat, lon);
                        if b.contains(lat, lon) {
                            break;
                        }
                    }
                    (p.0.clamp(b.lat_min, b.lat_max), p.1.clamp(b.lon_min, b.lon_max))
                })
                .collect()
        }
    };

    let (dlat, dlon) = b.center();
    let mut locations = vec![Location { id: 0, lat: dlat, lon: dlon, demand: 0.0, time_window: None }];
    locations.extend(points.into_iter().enumerate().map(|(i, (lat, lon))| Location {
        id: i as u64 + 1,
        lat,
        lon,
        demand: 1.0,
        time_window: None,
    }));
    let vehicles = (0..spec.vehicles)
        .map(|k| Vehicle { id: k as u64, capacity: spec.capacity, fixed_cost: None, time_window: None })
        .collect();
    let matrix = build_matrix(&locations, DistanceMode::Haversine).map_err(|e| HarnessError::Format(e.to_string()))?;
    let name = format!("synthetic-n{}-v{}-s{}", spec.customers, spec.vehicles, spec.seed);
    Instance::new(name, locations, vehicles, matrix).map_err(|e| HarnessError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(customers: usize, layout: Layout) -> GeneratorSpec {
        GeneratorSpec { customers, vehicles: 5, capacity: 10.0, layout, bbox: BoundingBox::cairo(), seed: 9 }
    }

    #[test]
    fn full_utilization_regime() {
        let inst = generate_instance(&spec(50, Layout::Uniform)).unwrap();
        assert_eq!(inst.total_demand(), 50.0);
        assert_eq!(inst.total_capacity(), 50.0);
        assert_eq!(inst.n(), 51);
        assert_eq!((inst.locations()[0].lat, inst.locations()[0].lon), BoundingBox::cairo().center());
    }

    #[test]
    fn clustered_points_stay_in_box() {
        let mut s = spec(100, Layout::Clustered { clusters: 10, spread_km: 8.0 });
        s.vehicles = 10;
        let inst = generate_instance(&s).unwrap();
        assert_eq!(inst.num_customers(), 100);
        let b = s.bbox;
        assert!(inst.locations().iter().all(|l| b.contains(l.lat, l.lon)));
        assert!(inst.locations()[1..].iter().all(|l| l.demand == 1.0));
    }

    #[test]
    fn deterministic_for_seed() {
        let s = spec(30, Layout::Clustered { clusters: 3, spread_km: 2.0 });
        assert_eq!(generate_instance(&s).unwrap(), generate_instance(&s).unwrap());
        let mut other = s.clone();
        other.seed += 1;
        assert_ne!(generate_instance(&s).unwrap(), generate_instance(&other).unwrap());
    }

    #[test]
    fn rejects_undersized_fleet() {
        let mut s = spec(51, Layout::Uniform);
        assert!(generate_instance(&s).is_err());
        s.customers = 0;
        assert!(generate_instance(&s).is_err());
    }
}

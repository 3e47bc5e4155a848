//! Instance and solution JSON.
//!
//! Output is canonical: object keys sorted and every float rounded to six
//! decimals, so save, load and save again yields identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::matrix::{build_matrix, load_matrix, DistanceMode, MatrixError};
use crate::model::{Instance, Location, Route, Solution, SolutionMeta, Vehicle};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationRecord {
    pub id: u64,
    pub lat: f64,
    pub lon: f64,
    pub demand: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub id: u64,
    pub capacity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_window: Option<(f64, f64)>,
}

/// On-disk instance. The first location is the depot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub name: String,
    pub locations: Vec<LocationRecord>,
    pub vehicles: Vec<VehicleRecord>,
    /// `OCVRPDMX` file, resolved relative to the instance file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_file: Option<String>,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance, matrix_file: Option<String>) -> Self {
        Self {
            name: instance.name().to_string(),
            locations: instance
                .locations()
                .iter()
                .map(|l| LocationRecord {
                    id: l.id,
                    lat: l.lat,
                    lon: l.lon,
                    demand: l.demand,
                    time_window: l.time_window,
                })
                .collect(),
            vehicles: instance
                .vehicles()
                .iter()
                .map(|v| VehicleRecord {
                    id: v.id,
                    capacity: v.capacity,
                    fixed_cost: v.fixed_cost,
                    time_window: v.time_window,
                })
                .collect(),
            matrix_file,
        }
    }

    fn locations(&self) -> Vec<Location> {
        self.locations
            .iter()
            .map(|l| Location { id: l.id, lat: l.lat, lon: l.lon, demand: l.demand, time_window: l.time_window })
            .collect()
    }

    fn vehicles(&self) -> Vec<Vehicle> {
        self.vehicles
            .iter()
            .map(|v| Vehicle { id: v.id, capacity: v.capacity, fixed_cost: v.fixed_cost, time_window: v.time_window })
            .collect()
    }
}

/// Rounds every float in `value` to six decimals.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            let x = n.as_f64().expect("non-integer JSON number is a float");
            serde_json::Number::from_f64(round6(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Canonical pretty-printed JSON with a trailing newline.
pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String, HarnessError> {
    let v = serde_json::to_value(value).map_err(|e| HarnessError::Format(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&canonicalize(v)).map_err(|e| HarnessError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn read_file(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

fn matrix_error(path: &Path, e: MatrixError) -> HarnessError {
    match e {
        MatrixError::Io(source) => HarnessError::Io { path: path.to_path_buf(), source },
        other => HarnessError::Format(format!("{}: {other}", path.display())),
    }
}

pub fn parse_instance(text: &str, base_dir: &Path) -> Result<Instance, HarnessError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| HarnessError::Format(e.to_string()))?;
    let locations = file.locations();
    let matrix = match &file.matrix_file {
        Some(rel) => {
            let path = base_dir.join(rel);
            let m = load_matrix(&path).map_err(|e| matrix_error(&path, e))?;
            if m.order() != locations.len() {
                return Err(HarnessError::Consistency(format!(
                    "matrix {} has order {} but the instance has {} locations",
                    path.display(),
                    m.order(),
                    locations.len()
                )));
            }
            m
        }
        None => build_matrix(&locations, DistanceMode::Haversine).map_err(|e| HarnessError::Format(e.to_string()))?,
    };
    let vehicles = file.vehicles();
    Instance::new(file.name, locations, vehicles, matrix).map_err(|e| HarnessError::Format(e.to_string()))
}

/// Reads an instance; without `matrix_file` the matrix is built with haversine.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, HarnessError> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    parse_instance(&read_file(path)?, &base)
}

pub fn save_instance(
    instance: &Instance,
    path: impl AsRef<Path>,
    matrix_file: Option<&str>,
) -> Result<(), HarnessError> {
    let file = InstanceFile::from_instance(instance, matrix_file.map(str::to_string));
    write_file(path.as_ref(), to_canonical_string(&file)?)
}

/// Human-readable notes about an instance that loads but cannot be solved as is.
pub fn instance_warnings(instance: &Instance) -> Vec<String> {
    let mut out = Vec::new();
    if !instance.is_capacity_feasible() {
        out.push(format!(
            "fleet capacity {} cannot carry total demand {}",
            instance.total_capacity(),
            instance.total_demand()
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    /// Position of the vehicle in the instance fleet.
    pub vehicle: usize,
    /// Location indices; the depot (0) is implied at the start.
    pub stops: Vec<usize>,
    pub load: f64,
    pub distance_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub instance: String,
    pub solver: String,
    pub params: Value,
    pub seed: u64,
    pub routes: Vec<RouteRecord>,
    pub total_distance_km: f64,
    pub wall_time_s: f64,
}

impl SolutionRecord {
    pub fn new(instance_name: &str, solution: &Solution, params: Value) -> Self {
        Self {
            instance: instance_name.to_string(),
            solver: solution.meta.solver.clone(),
            params,
            seed: solution.meta.seed,
            routes: solution
                .routes
                .iter()
                .map(|r| RouteRecord {
                    vehicle: r.vehicle,
                    stops: r.stops.clone(),
                    load: r.load,
                    distance_km: r.distance,
                })
                .collect(),
            total_distance_km: solution.total_distance,
            wall_time_s: solution.meta.wall_time_s,
        }
    }

    /// Rebuilds the solution exactly as recorded, without recomputing anything.
    pub fn to_solution(&self) -> Solution {
        Solution {
            routes: self
                .routes
                .iter()
                .map(|r| Route { vehicle: r.vehicle, stops: r.stops.clone(), load: r.load, distance: r.distance_km })
                .collect(),
            total_distance: self.total_distance_km,
            meta: SolutionMeta { solver: self.solver.clone(), seed: self.seed, wall_time_s: self.wall_time_s },
        }
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        to_canonical_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Format(e.to_string()))
    }
}

pub fn export_solution(record: &SolutionRecord, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write_file(path.as_ref(), record.to_json()?)
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<SolutionRecord, HarnessError> {
    SolutionRecord::from_json(&read_file(path.as_ref())?)
}

//! Convergence CSV, GeoJSON routes and the comparison table.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::model::{Instance, Solution};
use crate::trace::TraceRow;

use super::experiment::{RunReport, Stats};
use super::io::{to_canonical_string, write_file};
use super::HarnessError;

pub const TRACE_HEADER: &str = "iteration,iteration_best_km,global_best_km";

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.iteration, r.iteration_best_km, r.global_best_km);
    }
    out
}

pub fn export_trace(rows: &[TraceRow], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write_file(path.as_ref(), trace_csv(rows))
}

fn coord(instance: &Instance, i: usize) -> Value {
    let l = &instance.locations()[i];
    json!([l.lon, l.lat])
}

/// One open LineString per route (depot first, last customer last) and a
/// Point per location.
pub fn geojson(instance: &Instance, solution: &Solution) -> Value {
    let mut features = Vec::new();
    for (r, route) in solution.routes.iter().enumerate() {
        let coords: Vec<Value> =
            std::iter::once(0).chain(route.stops.iter().copied()).map(|i| coord(instance, i)).collect();
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": {
                "route": r,
                "vehicle": route.vehicle,
                "stops": route.stops,
                "load": route.load,
                "distance_km": route.distance,
            },
        }));
    }
    for (i, l) in instance.locations().iter().enumerate() {
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": coord(instance, i) },
            "properties": { "index": i, "id": l.id, "demand": l.demand, "depot": i == 0 },
        }));
    }
    json!({ "type": "FeatureCollection", "features": features })
}

pub fn export_geojson(instance: &Instance, solution: &Solution, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write_file(path.as_ref(), to_canonical_string(&geojson(instance, solution))?)
}

pub fn format_mean_std(s: Stats) -> String {
    format!("{:.1} ± {:.1}", s.mean, s.std)
}

/// Plain-text table with one column per solver and rows `Dist. (km)` and `Time (s)`.
pub fn format_table(reports: &[RunReport]) -> String {
    let header: Vec<String> =
        std::iter::once("Metric".to_string()).chain(reports.iter().map(|r| r.label.clone())).collect();
    let dist: Vec<String> = std::iter::once("Dist. (km)".to_string())
        .chain(reports.iter().map(|r| format_mean_std(r.distance_km)))
        .collect();
    let time: Vec<String> =
        std::iter::once("Time (s)".to_string()).chain(reports.iter().map(|r| format_mean_std(r.wall_time_s))).collect();
    let rows = [header, dist, time];
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|c| rows.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&rule.join("-|-"));
            out.push('\n');
        }
    }
    let notes: Vec<String> = reports
        .iter()
        .filter(|r| r.single_run || !r.protocol_timing)
        .map(|r| {
            let mut flags = Vec::new();
            if r.single_run {
                flags.push("n=1, std not measured");
            }
            if !r.protocol_timing {
                flags.push("parallel runs, timings not comparable");
            }
            format!("{}: {}", r.label, flags.join("; "))
        })
        .collect();
    for n in notes {
        out.push_str(&n);
        out.push('\n');
    }
    out
}

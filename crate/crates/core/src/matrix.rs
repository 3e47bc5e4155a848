//! Dense distance matrices, great-circle distances and the `OCVRPDMX` binary format.
//!
//! Distances are kilometres stored as `f64`, row-major. Asymmetric matrices are
//! legal (road networks are directed) and the triangle inequality is never assumed.
//!
//! Binary layout (all integers little-endian):
//!
//! | offset | size   | content                                   |
//! |--------|--------|-------------------------------------------|
//! | 0      | 8      | ASCII magic `OCVRPDMX`                    |
//! | 8      | 1      | version, currently `1`                    |
//! | 9      | 1      | flags, bit 0 set when the matrix is symmetric |
//! | 10     | 4      | order `n` as `u32`                        |
//! | 14     | 8·n²   | IEEE-754 doubles, row-major, km           |

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::model::Location;

/// Mean Earth radius in kilometres (IUGG).
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

pub const MAGIC: &[u8; 8] = b"OCVRPDMX";
pub const FORMAT_VERSION: u8 = 1;
const FLAG_SYMMETRIC: u8 = 0b0000_0001;
const HEADER_LEN: usize = 8 + 1 + 1 + 4;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("invalid coordinate ({lat}, {lon})")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("corrupt matrix: {0}")]
    Corrupt(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// How to turn location coordinates into distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    /// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
    Haversine,
    /// Coordinates are planar kilometre offsets; straight-line distance.
    EuclideanPlane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    symmetric: bool,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major values, checking the zero diagonal and
    /// that every entry is finite and non-negative. Symmetry is detected exactly.
    pub fn from_row_major(n: usize, values: Vec<f64>) -> Result<Self, MatrixError> {
        if values.len() != n * n {
            return Err(MatrixError::Corrupt(format!(
                "expected {} entries for order {n}, found {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(MatrixError::Corrupt(format!("entry ({i}, {j}) is {v}")));
                }
                if i == j && v != 0.0 {
                    return Err(MatrixError::Corrupt(format!("diagonal entry {i} is {v}")));
                }
            }
        }
        let symmetric = (0..n).all(|i| (i + 1..n).all(|j| values[i * n + j] == values[j * n + i]));
        Ok(Self { n, values, symmetric })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(MatrixError::Corrupt(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        Self::from_row_major(n, rows.concat())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.values[from * self.n + to]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.push(if self.symmetric { FLAG_SYMMETRIC } else { 0 });
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MatrixError> {
        if bytes.len() < HEADER_LEN {
            return Err(MatrixError::Format(format!(
                "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        if &bytes[..8] != MAGIC {
            return Err(MatrixError::Format(format!("bad magic {:?}", String::from_utf8_lossy(&bytes[..8]))));
        }
        let version = bytes[8];
        if version != FORMAT_VERSION {
            return Err(MatrixError::Format(format!("unsupported version {version}")));
        }
        let flags = bytes[9];
        let n = u32::from_le_bytes(bytes[10..14].try_into().expect("4-byte slice")) as usize;
        let payload = &bytes[HEADER_LEN..];
        if !payload.len().is_multiple_of(8) {
            return Err(MatrixError::Corrupt(format!(
                "payload of {} bytes is not a whole number of doubles",
                payload.len()
            )));
        }
        let count = payload.len() / 8;
        if count != n.saturating_mul(n) {
            return Err(MatrixError::Corrupt(format!(
                "header declares n={n} ({} values) but file holds {count}",
                n.saturating_mul(n)
            )));
        }
        let values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        let matrix = Self::from_row_major(n, values)?;
        if flags & FLAG_SYMMETRIC != 0 && !matrix.symmetric {
            return Err(MatrixError::Corrupt("symmetric flag set but matrix is asymmetric".into()));
        }
        Ok(matrix)
    }
}

fn check_coordinate(lat: f64, lon: f64) -> Result<(), MatrixError> {
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(MatrixError::InvalidCoordinate { lat, lon });
    }
    Ok(())
}

/// Great-circle distance between two `(lat, lon)` points given in degrees.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> Result<f64, MatrixError> {
    check_coordinate(a.0, a.1)?;
    check_coordinate(b.0, b.1)?;
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((lat2 - lat1) / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    Ok(2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin())
}

pub fn build_matrix(locations: &[Location], mode: DistanceMode) -> Result<DistanceMatrix, MatrixError> {
    let n = locations.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&locations[i], &locations[j]);
            let d = match mode {
                DistanceMode::Haversine => haversine_km((a.lat, a.lon), (b.lat, b.lon))?,
                DistanceMode::EuclideanPlane => (a.lat - b.lat).hypot(a.lon - b.lon),
            };
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix::from_row_major(n, values)
}

pub fn save_matrix(matrix: &DistanceMatrix, path: impl AsRef<Path>) -> Result<(), MatrixError> {
    fs::write(path, matrix.to_bytes())?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix, MatrixError> {
    DistanceMatrix::from_bytes(&fs::read(path)?)
}

/// Reads `n` lines of `n` comma-separated decimals. Blank lines are ignored.
pub fn parse_csv_matrix(text: &str) -> Result<DistanceMatrix, MatrixError> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| MatrixError::Format(format!("line {}: {cell:?}: {e}", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    DistanceMatrix::from_rows(&rows)
}

pub fn load_csv_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix, MatrixError> {
    parse_csv_matrix(&fs::read_to_string(path)?)
}

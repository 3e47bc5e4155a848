use crate::model::Solution;

use super::AcoError;

/// Floor applied after every update so trails never underflow to zero.
pub const TAU_MIN: f64 = 1e-12;

/// Per-arc trail intensities. Arcs are directed; when the underlying distance
/// matrix is symmetric every update is mirrored onto the reverse arc.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
    tau_min: f64,
    symmetric: bool,
}

impl PheromoneMatrix {
    pub fn new(n: usize, tau0: f64, symmetric: bool) -> Self {
        Self { n, tau: vec![tau0.max(TAU_MIN); n * n], tau_min: TAU_MIN, symmetric }
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.tau[from * self.n + to]
    }

    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        self.tau[from * self.n + to] = value.max(self.tau_min);
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> &[f64] {
        &self.tau
    }

    /// `tau <- max(tau_min, (1 - rho) * tau)` on every arc.
    pub fn evaporate(&mut self, rho: f64) {
        let keep = 1.0 - rho;
        let floor = self.tau_min;
        for t in &mut self.tau {
            *t = (keep * *t).max(floor);
        }
    }

    /// Every ant adds `1 / cost` to each arc it traversed, depot legs included.
    /// All costs are checked before any trail is touched.
    pub fn deposit(&mut self, solutions: &[(&Solution, f64)]) -> Result<(), AcoError> {
        if let Some(&(_, cost)) = solutions.iter().find(|(_, c)| !(*c > 0.0 && c.is_finite())) {
            return Err(AcoError::InvalidCost(cost));
        }
        for &(solution, cost) in solutions {
            let amount = 1.0 / cost;
            for_each_arc(solution, |i, j| {
                self.tau[i * self.n + j] += amount;
                if self.symmetric {
                    self.tau[j * self.n + i] += amount;
                }
            });
        }
        Ok(())
    }

    /// Resets every arc to `tau0` except those used by `keep` (and their mirrors
    /// on symmetric matrices), which retain their current value.
    pub fn reset_except(&mut self, tau0: f64, keep: &Solution) {
        let mut protected = vec![false; self.tau.len()];
        for_each_arc(keep, |i, j| {
            protected[i * self.n + j] = true;
            if self.symmetric {
                protected[j * self.n + i] = true;
            }
        });
        let tau0 = tau0.max(self.tau_min);
        for (t, &p) in self.tau.iter_mut().zip(&protected) {
            if !p {
                *t = tau0;
            }
        }
    }
}

/// Visits every arc of the open routes: depot to first stop, then stop to stop.
pub(crate) fn for_each_arc(solution: &Solution, mut f: impl FnMut(usize, usize)) {
    for route in &solution.routes {
        let mut prev = 0;
        for &s in &route.stops {
            f(prev, s);
            prev = s;
        }
    }
}

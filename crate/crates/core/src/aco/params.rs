use std::fmt;
use std::str::FromStr;

use super::AcoError;

#[derive(Debug, Clone, PartialEq)]
pub struct AcoParams {
    /// Pheromone influence exponent.
    pub alpha: f64,
    /// Heuristic (inverse distance) influence exponent.
    pub beta: f64,
    /// Evaporation rate in `(0, 1]`.
    pub rho: f64,
    /// Probability of taking the argmax arc instead of sampling.
    pub q0: f64,
    pub ants: usize,
    pub iterations: usize,
    /// Iterations without a new global best before trails are reset.
    pub stagnation_limit: usize,
    /// Construction restarts per ant before giving up.
    pub max_attempts: usize,
    /// Initial trail. `None` derives it from a nearest-neighbour solution.
    pub tau0: Option<f64>,
    pub seed: u64,
}

impl AcoParams {
    pub fn validate(&self) -> Result<(), AcoError> {
        let bad = |msg: String| Err(AcoError::InvalidParams(msg));
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad(format!("rho must lie in (0, 1], got {}", self.rho));
        }
        if !(0.0..=1.0).contains(&self.q0) {
            return bad(format!("q0 must lie in [0, 1], got {}", self.q0));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return bad(format!("alpha and beta must be finite, got {} and {}", self.alpha, self.beta));
        }
        if self.ants == 0 || self.iterations == 0 {
            return bad("ants and iterations must be at least 1".into());
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1".into());
        }
        if let Some(tau0) = self.tau0 {
            if !(tau0 > 0.0 && tau0.is_finite()) {
                return bad(format!("tau0 must be positive, got {tau0}"));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for AcoParams {
    fn default() -> Self {
        Preset::Exploitation.params()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Strong trail following, mostly greedy choices, slow evaporation.
    Exploitation,
    /// Weak trail following, distance-driven sampling, fast evaporation.
    Exploration,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Exploitation, Preset::Exploration];

    pub fn params(self) -> AcoParams {
        let (alpha, beta, rho, q0) = match self {
            Preset::Exploitation => (2.5, 1.0, 0.1, 0.9),
            Preset::Exploration => (0.2, 3.0, 0.7, 0.1),
        };
        AcoParams {
            alpha,
            beta,
            rho,
            q0,
            ants: 40,
            iterations: 150,
            stagnation_limit: 20,
            max_attempts: 50,
            tau0: None,
            seed: 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Exploitation => "exploitation",
            Preset::Exploration => "exploration",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exploitation" | "exploit" => Ok(Preset::Exploitation),
            "exploration" | "explore" => Ok(Preset::Exploration),
            other => Err(format!("unknown preset {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        let p = Preset::Exploitation.params();
        assert_eq!((p.alpha, p.beta, p.rho, p.q0, p.iterations, p.ants), (2.5, 1.0, 0.1, 0.9, 150, 40));
        let p = Preset::Exploration.params();
        assert_eq!((p.alpha, p.beta, p.rho, p.q0, p.iterations, p.ants), (0.2, 3.0, 0.7, 0.1, 150, 40));
        assert_eq!(p.stagnation_limit, 20);
        assert_eq!(p.max_attempts, 50);
    }

    #[test]
    fn validation() {
        let ok = Preset::Exploration.params();
        assert!(ok.validate().is_ok());
        for bad in [
            AcoParams { rho: 0.0, ..ok.clone() },
            AcoParams { rho: 1.5, ..ok.clone() },
            AcoParams { q0: -0.1, ..ok.clone() },
            AcoParams { ants: 0, ..ok.clone() },
            AcoParams { iterations: 0, ..ok.clone() },
            AcoParams { tau0: Some(0.0), ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(AcoError::InvalidParams(_))), "{bad:?}");
        }
        assert!(AcoParams { rho: 1.0, ..ok }.validate().is_ok());
    }

    #[test]
    fn preset_parsing() {
        assert_eq!("Exploitation".parse::<Preset>(), Ok(Preset::Exploitation));
        assert_eq!("exploration".parse::<Preset>(), Ok(Preset::Exploration));
        assert!("greedy".parse::<Preset>().is_err());
    }
}

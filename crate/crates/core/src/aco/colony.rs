use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::path_cheapest_arc;
use crate::localsearch::improve_in_place;
use crate::model::{Instance, Solution, SolutionMeta, LOAD_EPS};
use crate::trace::TraceRow;

use super::{AcoError, AcoParams, PheromoneMatrix};

/// Floor on distances when computing the heuristic `1 / d`.
pub const MIN_HEURISTIC_DISTANCE: f64 = 1e-9;

/// Minimum gain for a colony solution to replace the global best.
const BEST_EPS: f64 = 1e-9;

/// Partial solution carried by one ant while it builds routes.
#[derive(Debug, Clone)]
pub struct AntState {
    current: usize,
    remaining_capacity: f64,
    unvisited: Vec<bool>,
    unvisited_count: usize,
    /// `(vehicle, stops)`; the last entry is the route being extended.
    routes: Vec<(usize, Vec<usize>)>,
}

impl AntState {
    /// Ant at the depot with the first vehicle of the fleet opened.
    pub fn new(instance: &Instance) -> Self {
        let mut unvisited = vec![true; instance.n()];
        unvisited[0] = false;
        Self {
            current: 0,
            remaining_capacity: instance.capacity(0),
            unvisited,
            unvisited_count: instance.num_customers(),
            routes: vec![(0, Vec::new())],
        }
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn remaining_capacity(&self) -> f64 {
        self.remaining_capacity
    }

    pub fn is_unvisited(&self, customer: usize) -> bool {
        self.unvisited[customer]
    }

    pub fn unvisited_count(&self) -> usize {
        self.unvisited_count
    }

    pub fn routes(&self) -> &[(usize, Vec<usize>)] {
        &self.routes
    }

    fn next_vehicle(&self) -> usize {
        self.routes.last().map_or(0, |(v, _)| v + 1)
    }

    pub fn has_spare_vehicle(&self, instance: &Instance) -> bool {
        self.next_vehicle() < instance.vehicles().len()
    }

    /// Unvisited customers whose demand fits the remaining capacity, ascending.
    pub fn feasible_candidates(&self, instance: &Instance) -> Vec<usize> {
        instance
            .customers()
            .filter(|&c| self.unvisited[c] && instance.demand(c) <= self.remaining_capacity + LOAD_EPS)
            .collect()
    }

    pub fn visit(&mut self, instance: &Instance, customer: usize) {
        debug_assert!(self.unvisited[customer]);
        self.unvisited[customer] = false;
        self.unvisited_count -= 1;
        self.remaining_capacity -= instance.demand(customer);
        self.current = customer;
        self.routes.last_mut().expect("a route is always open").1.push(customer);
    }

    /// Returns to the depot with the next vehicle in fleet order.
    pub fn open_route(&mut self, instance: &Instance) -> Result<(), AcoError> {
        let vehicle = self.next_vehicle();
        if vehicle >= instance.vehicles().len() {
            return Err(AcoError::InfeasibleConstruction { attempts: 1 });
        }
        self.routes.push((vehicle, Vec::new()));
        self.current = 0;
        self.remaining_capacity = instance.capacity(vehicle);
        Ok(())
    }

    fn into_solution(self, instance: &Instance, meta: SolutionMeta) -> Result<Solution, AcoError> {
        Ok(Solution::from_stops(instance, self.routes, meta)?)
    }
}

/// Outcome of one transition decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Visit(usize),
    /// No unvisited customer fits the current vehicle; open the next one.
    NewRoute,
    /// Every customer has been visited.
    Complete,
}

/// `tau^alpha * eta^beta` for the arc `from -> to`.
#[inline]
pub fn attractiveness(instance: &Instance, pher: &PheromoneMatrix, params: &AcoParams, from: usize, to: usize) -> f64 {
    let eta = 1.0 / instance.dist(from, to).max(MIN_HEURISTIC_DISTANCE);
    pher.get(from, to).powf(params.alpha) * eta.powf(params.beta)
}

/// Normalized sampling distribution over the feasible candidates, or `None`
/// when the ant has nowhere to go.
pub fn transition_probabilities(
    instance: &Instance,
    state: &AntState,
    pher: &PheromoneMatrix,
    params: &AcoParams,
) -> Option<Vec<(usize, f64)>> {
    let candidates = state.feasible_candidates(instance);
    if candidates.is_empty() {
        return None;
    }
    let weights = weights(instance, state, pher, params, &candidates);
    let total: f64 = weights.iter().sum();
    Some(candidates.into_iter().zip(weights).map(|(c, w)| (c, w / total)).collect())
}

fn weights(
    instance: &Instance,
    state: &AntState,
    pher: &PheromoneMatrix,
    params: &AcoParams,
    candidates: &[usize],
) -> Vec<f64> {
    let mut w: Vec<f64> =
        candidates.iter().map(|&c| attractiveness(instance, pher, params, state.current, c)).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        // every weight underflowed or one overflowed: fall back to uniform
        w.iter_mut().for_each(|x| *x = 1.0);
    }
    w
}

/// Picks the next customer: with probability `q0` the most attractive feasible
/// arc (ties to the lowest index), otherwise a draw proportional to attractiveness.
pub fn choose_next<R: Rng + ?Sized>(
    instance: &Instance,
    state: &AntState,
    pher: &PheromoneMatrix,
    params: &AcoParams,
    rng: &mut R,
) -> Result<Step, AcoError> {
    if state.unvisited_count == 0 {
        return Ok(Step::Complete);
    }
    let candidates = state.feasible_candidates(instance);
    if candidates.is_empty() {
        return if state.has_spare_vehicle(instance) {
            Ok(Step::NewRoute)
        } else {
            Err(AcoError::InfeasibleConstruction { attempts: 1 })
        };
    }
    let greedy = rng.random::<f64>() < params.q0;
    let w = weights(instance, state, pher, params, &candidates);
    if greedy {
        let mut best = 0;
        for (idx, &x) in w.iter().enumerate().skip(1) {
            if x > w[best] {
                best = idx;
            }
        }
        return Ok(Step::Visit(candidates[best]));
    }
    let total: f64 = w.iter().sum();
    debug_assert!(
        (w.iter().map(|x| x / total).sum::<f64>() - 1.0).abs() < 1e-12,
        "transition probabilities do not sum to one"
    );
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (&c, &x) in candidates.iter().zip(&w) {
        acc += x;
        if target < acc {
            return Ok(Step::Visit(c));
        }
    }
    Ok(Step::Visit(*candidates.last().expect("nonempty candidates")))
}

/// One ant builds a complete solution, restarting from scratch (up to
/// `max_attempts` times) whenever it runs out of vehicles.
pub fn construct_solution<R: Rng + ?Sized>(
    instance: &Instance,
    pher: &PheromoneMatrix,
    params: &AcoParams,
    rng: &mut R,
) -> Result<Solution, AcoError> {
    if !instance.is_capacity_feasible() {
        return Err(AcoError::InfeasibleConstruction { attempts: 0 });
    }
    let meta = SolutionMeta { solver: "aco".into(), seed: params.seed, wall_time_s: 0.0 };
    'attempt: for _ in 0..params.max_attempts {
        let mut state = AntState::new(instance);
        loop {
            match choose_next(instance, &state, pher, params, rng) {
                Ok(Step::Visit(c)) => state.visit(instance, c),
                Ok(Step::NewRoute) => state.open_route(instance)?,
                Ok(Step::Complete) => return state.into_solution(instance, meta),
                Err(AcoError::InfeasibleConstruction { .. }) => continue 'attempt,
                Err(e) => return Err(e),
            }
        }
    }
    Err(AcoError::InfeasibleConstruction { attempts: params.max_attempts })
}

/// `1 / (n * L_nn)` where `L_nn` is the open nearest-neighbour solution length.
pub fn default_tau0(instance: &Instance) -> f64 {
    let l_nn = match path_cheapest_arc(instance) {
        Ok(s) => s.total_distance,
        Err(_) => instance.customers().map(|c| instance.dist(0, c)).sum(),
    };
    if l_nn > 0.0 {
        1.0 / (instance.n() as f64 * l_nn)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOutcome {
    /// 1-based.
    pub iteration: usize,
    pub iteration_best_km: f64,
    pub global_best_km: f64,
    pub improved: bool,
    /// Trails were reset at the end of this iteration.
    pub reset: bool,
}

impl From<IterationOutcome> for TraceRow {
    fn from(o: IterationOutcome) -> Self {
        TraceRow { iteration: o.iteration, iteration_best_km: o.iteration_best_km, global_best_km: o.global_best_km }
    }
}

/// A colony bound to one instance. Construction performs all set-up work
/// (parameter checks, initial trail, RNG seeding) so that [`Colony::run`] is
/// pure search.
pub struct Colony<'a> {
    instance: &'a Instance,
    params: AcoParams,
    tau0: f64,
    pher: PheromoneMatrix,
    rng: ChaCha8Rng,
    best: Option<Solution>,
    iteration: usize,
    stagnation: usize,
}

impl<'a> Colony<'a> {
    pub fn new(instance: &'a Instance, params: AcoParams) -> Result<Self, AcoError> {
        params.validate()?;
        if !instance.is_capacity_feasible() {
            return Err(AcoError::InfeasibleConstruction { attempts: 0 });
        }
        let tau0 = params.tau0.unwrap_or_else(|| default_tau0(instance));
        let pher = PheromoneMatrix::new(instance.n(), tau0, instance.matrix().is_symmetric());
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Ok(Self { instance, params, tau0, pher, rng, best: None, iteration: 0, stagnation: 0 })
    }

    pub fn params(&self) -> &AcoParams {
        &self.params
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn pheromones(&self) -> &PheromoneMatrix {
        &self.pher
    }

    pub fn best(&self) -> Option<&Solution> {
        self.best.as_ref()
    }

    /// Consecutive iterations without a new global best.
    pub fn stagnation(&self) -> usize {
        self.stagnation
    }

    /// Construct, improve, evaporate, deposit; then reset trails on stagnation.
    pub fn step(&mut self) -> Result<IterationOutcome, AcoError> {
        self.iteration += 1;
        let mut ants = Vec::with_capacity(self.params.ants);
        for _ in 0..self.params.ants {
            let mut s = construct_solution(self.instance, &self.pher, &self.params, &mut self.rng)?;
            improve_in_place(self.instance, &mut s);
            ants.push(s);
        }
        let iter_best = ants
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_distance.total_cmp(&b.1.total_distance))
            .map(|(i, _)| i)
            .expect("at least one ant");
        let iteration_best_km = ants[iter_best].total_distance;

        let improved = match &self.best {
            None => true,
            Some(b) => iteration_best_km < b.total_distance - BEST_EPS,
        };
        if improved {
            self.best = Some(ants[iter_best].clone());
            self.stagnation = 0;
        } else {
            self.stagnation += 1;
        }

        self.pher.evaporate(self.params.rho);
        // zero-length solutions only arise when every customer sits on the depot
        let deposits: Vec<(&Solution, f64)> =
            ants.iter().filter(|s| s.total_distance > 0.0).map(|s| (s, s.total_distance)).collect();
        self.pher.deposit(&deposits)?;

        let best = self.best.as_ref().expect("set above");
        let reset = self.stagnation >= self.params.stagnation_limit;
        if reset {
            self.pher.reset_except(self.tau0, best);
            self.stagnation = 0;
        }
        Ok(IterationOutcome {
            iteration: self.iteration,
            iteration_best_km,
            global_best_km: best.total_distance,
            improved,
            reset,
        })
    }

    /// Runs the full iteration budget and returns the global best.
    pub fn run(mut self, mut trace: impl FnMut(TraceRow)) -> Result<Solution, AcoError> {
        for _ in 0..self.params.iterations {
            let outcome = self.step()?;
            trace(outcome.into());
        }
        let mut best = self.best.expect("iterations >= 1");
        best.meta = SolutionMeta { solver: "aco".into(), seed: self.params.seed, wall_time_s: 0.0 };
        Ok(best)
    }
}

/// Runs a seeded colony to completion on the calling thread.
pub fn solve_aco(instance: &Instance, params: &AcoParams, trace: impl FnMut(TraceRow)) -> Result<Solution, AcoError> {
    Colony::new(instance, params.clone())?.run(trace)
}

/// One convergence sample: the best cost found in this iteration and the best so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// 1-based.
    pub iteration: usize,
    pub iteration_best_km: f64,
    pub global_best_km: f64,
}

/// Sink that discards every row.
pub fn discard(_: TraceRow) {}

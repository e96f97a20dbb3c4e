//! Monte Carlo check that `M_u(t) = E_{X_t}[e^{⟨u, X_{T−t}⟩}]` is a martingale.

use num_complex::Complex64;
use serde::Serialize;

use super::estimate::{estimate, Estimate};
use super::ssa::CompiledModel;
use super::SimulateError;
use crate::model::AffineModel;
use crate::transforms::{ModelTransform, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingalePoint {
    pub t: f64,
    pub estimate: Estimate,
    /// `|E[M_u(t)] − M_u(0)|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub initial: Complex64,
    pub points: Vec<MartingalePoint>,
    pub max_deviation: f64,
}

impl MartingaleReport {
    /// Every grid estimate within `k` standard errors of `M_u(0)`,
    /// componentwise.
    pub fn within(&self, k: f64) -> bool {
        self.points.iter().all(|p| p.estimate.within(self.initial, k))
    }
}

/// `M_u(t) = Φ(u, T−t) Π Ψ_j(u, T−t)^{X_j(t)}` (in counter coordinates) at
/// each `t` of `time_grid ⊆ [0, horizon]`, averaged over `n_paths` paths from
/// `x0`.
#[allow(clippy::too_many_arguments)]
pub fn martingale_check(
    model: &AffineModel,
    x0: &[i64],
    u: &[Complex64],
    horizon: f64,
    time_grid: &[f64],
    n_paths: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<MartingaleReport, SimulateError> {
    if n_paths == 0 {
        return Err(SimulateError::InvalidArgument("n_paths must be at least 1".into()));
    }
    if time_grid.iter().any(|&t| !(0.0..=horizon).contains(&t)) || time_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(SimulateError::InvalidArgument("time grid must be nondecreasing within [0, T]".into()));
    }
    let transform = ModelTransform::new(model)?;
    let compiled = CompiledModel::new(model)?;
    let start = compiled.index_of(x0)?;
    let initial = transform.evaluate(u, horizon, opts)?[start];
    let values: Vec<Vec<Complex64>> = time_grid
        .iter()
        .map(|&t| transform.evaluate(u, horizon - t, opts))
        .collect::<Result<_, _>>()?;
    let paths = compiled.sample_indices(start, time_grid, n_paths, seed);
    let points: Vec<MartingalePoint> = time_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let samples: Vec<Complex64> = paths.iter().map(|p| values[j][p[j]]).collect();
            let estimate = estimate(&samples);
            MartingalePoint { t, deviation: (estimate.mean - initial).norm(), estimate }
        })
        .collect();
    let max_deviation = points.iter().map(|p| p.deviation).fold(0.0, f64::max);
    Ok(MartingaleReport { initial, points, max_deviation })
}

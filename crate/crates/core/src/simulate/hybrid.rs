//! Piecewise-deterministic simulation of layered processes `(Y, Z)`.
//!
//! `Y` is a one-dimensional lattice model whose intensities depend on `Y`
//! alone. Between `Y`-jumps, `Z` follows `dZ = (β₀ + β₁Y + β₂Z) dt`, solved
//! exactly. At a jump of channel `c`, `Z` moves by a draw from that channel's
//! [`ZJumpLaw`]; `Z` never jumps on its own.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use super::rng::{exponential, path_rng, uniform, PathRng};
use super::SimulateError;
use crate::classify::make_birth_death;
use crate::model::AffineModel;
use crate::rational::int;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZJumpLaw {
    /// Deterministic jump of size `value`.
    Constant { value: f64 },
    /// Jump uniform on `[0, max]`.
    Uniform { max: f64 },
}

impl ZJumpLaw {
    fn sample(&self, rng: &mut PathRng) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Uniform { max } => max * uniform(rng),
        }
    }
}

/// `lower.0 + lower.1·y ≤ z ≤ upper.0 + upper.1·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZBounds {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
}

impl ZBounds {
    pub fn at(&self, y: i64) -> (f64, f64) {
        let y = y as f64;
        (self.lower.0 + self.lower.1 * y, self.upper.0 + self.upper.1 * y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pub layer_model: AffineModel,
    /// `(β₀, β₁, β₂)`.
    pub z_drift: [f64; 3],
    /// One law per channel of `layer_model`, in channel order.
    pub z_jumps: Vec<ZJumpLaw>,
    pub z_bounds: Option<ZBounds>,
}

impl HybridModel {
    pub fn new(
        layer_model: AffineModel,
        z_drift: [f64; 3],
        z_jumps: Vec<ZJumpLaw>,
        z_bounds: Option<ZBounds>,
    ) -> Result<Self, SimulateError> {
        if layer_model.dimension() != 1 {
            return Err(SimulateError::InvalidModel("layer model must be one-dimensional".into()));
        }
        layer_model.ensure_valid().map_err(|e| SimulateError::InvalidModel(e.to_string()))?;
        if z_jumps.len() != layer_model.channels().len() {
            return Err(SimulateError::InvalidModel(format!(
                "{} z-jump laws for {} layer channels",
                z_jumps.len(),
                layer_model.channels().len()
            )));
        }
        if z_drift.iter().any(|b| !b.is_finite()) {
            return Err(SimulateError::InvalidModel("drift coefficients must be finite".into()));
        }
        Ok(Self { layer_model, z_drift, z_jumps, z_bounds })
    }

    /// Pure death `Y` on `{0..n}` at rate `y`; `Z` decays as `dZ = −Z dt` and
    /// jumps up by a Uniform[0, 1] amount with each death; `Z ∈ [0, n − Y]`.
    pub fn uniform_jump_example(n: u32) -> Result<Self, SimulateError> {
        let layer = make_birth_death(n, int(1), int(0)).map_err(|e| SimulateError::InvalidModel(e.to_string()))?;
        let bounds = ZBounds { lower: (0.0, 0.0), upper: (f64::from(n), -1.0) };
        Self::new(layer, [0.0, 0.0, -1.0], vec![ZJumpLaw::Uniform { max: 1.0 }], Some(bounds))
    }

    /// Birth–death `Y` on `{0..n}` with unit rates; `Z` is continuous and
    /// relaxes towards `Y/n` via `dZ = (Y/n − Z) dt`; `Z ∈ [0, 1]`.
    pub fn drift_coupled_example(n: u32) -> Result<Self, SimulateError> {
        let layer = make_birth_death(n, int(1), int(1)).map_err(|e| SimulateError::InvalidModel(e.to_string()))?;
        let jumps = vec![ZJumpLaw::Constant { value: 0.0 }; layer.channels().len()];
        let bounds = ZBounds { lower: (0.0, 0.0), upper: (1.0, 0.0) };
        Self::new(layer, [0.0, 1.0 / f64::from(n), -1.0], jumps, Some(bounds))
    }

    fn flow(&self, y: i64) -> ZFlow {
        ZFlow { drive: self.z_drift[0] + self.z_drift[1] * y as f64, rate: self.z_drift[2] }
    }
}

/// Solution of `z' = drive + rate·z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZFlow {
    pub drive: f64,
    pub rate: f64,
}

impl ZFlow {
    pub fn at(&self, z0: f64, s: f64) -> f64 {
        if self.rate == 0.0 {
            z0 + self.drive * s
        } else {
            let fixed = -self.drive / self.rate;
            fixed + (z0 - fixed) * (self.rate * s).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridSegment {
    pub t_start: f64,
    pub y: i64,
    pub z_start: f64,
    pub flow: ZFlow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridTrajectory {
    pub segments: Vec<HybridSegment>,
    pub horizon: f64,
}

impl HybridTrajectory {
    fn segment_end(&self, i: usize) -> f64 {
        self.segments.get(i + 1).map_or(self.horizon, |s| s.t_start)
    }

    /// `Z` at the end of segment `i`, just before the next `Y`-jump.
    pub fn z_end(&self, i: usize) -> f64 {
        let s = &self.segments[i];
        s.flow.at(s.z_start, self.segment_end(i) - s.t_start)
    }

    pub fn z_at(&self, t: f64) -> f64 {
        let i = self.segments.partition_point(|s| s.t_start <= t).max(1) - 1;
        let s = &self.segments[i];
        s.flow.at(s.z_start, t - s.t_start)
    }

    pub fn y_at(&self, t: f64) -> i64 {
        let i = self.segments.partition_point(|s| s.t_start <= t).max(1) - 1;
        self.segments[i].y
    }

    pub fn y_jump_times(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.t_start).collect()
    }

    /// Times at which `Z` is discontinuous.
    pub fn z_jump_times(&self) -> Vec<f64> {
        (1..self.segments.len())
            .filter(|&i| self.segments[i].z_start != self.z_end(i - 1))
            .map(|i| self.segments[i].t_start)
            .collect()
    }

    /// Whether `Z` stays within `bounds` (plus `tol`) on every segment. The
    /// flow is monotone, so the extremes of a segment are its endpoints.
    pub fn within_bounds(&self, bounds: &ZBounds, tol: f64) -> bool {
        (0..self.segments.len()).all(|i| {
            let (lo, hi) = bounds.at(self.segments[i].y);
            [self.segments[i].z_start, self.z_end(i)]
                .iter()
                .all(|&z| z >= lo - tol && z <= hi + tol)
        })
    }
}

/// One path on `[0, horizon]` using stream 0 of `seed`.
pub fn simulate_hybrid(
    model: &HybridModel,
    start: (i64, f64),
    horizon: f64,
    seed: u64,
) -> Result<HybridTrajectory, SimulateError> {
    check_start(model, start, horizon)?;
    Ok(run(model, start, horizon, &mut path_rng(seed, 0)))
}

/// `n_paths` independent paths; path `i` uses stream `i` of `seed`.
pub fn simulate_hybrid_paths(
    model: &HybridModel,
    start: (i64, f64),
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<HybridTrajectory>, SimulateError> {
    check_start(model, start, horizon)?;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|p| run(model, start, horizon, &mut path_rng(seed, p as u64)))
        .collect())
}

fn check_start(model: &HybridModel, start: (i64, f64), horizon: f64) -> Result<(), SimulateError> {
    let (y0, z0) = start;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(SimulateError::InvalidArgument("horizon must be finite and nonnegative".into()));
    }
    if !model.layer_model.space.contains(&[y0]) {
        return Err(SimulateError::InvalidStart(format!("y0 = {y0} is not a layer")));
    }
    if let Some(b) = &model.z_bounds {
        let (lo, hi) = b.at(y0);
        if !(lo..=hi).contains(&z0) {
            return Err(SimulateError::InvalidStart(format!("z0 = {z0} outside [{lo}, {hi}] at y = {y0}")));
        }
    }
    Ok(())
}

fn run(model: &HybridModel, start: (i64, f64), horizon: f64, rng: &mut PathRng) -> HybridTrajectory {
    let (y0, z0) = start;
    let channels = model.layer_model.channels();
    let mut segments = vec![HybridSegment { t_start: 0.0, y: y0, z_start: z0, flow: model.flow(y0) }];
    let mut t = 0.0;
    loop {
        let current = segments.last().expect("nonempty");
        let y = current.y;
        let rates: Vec<f64> = channels.iter().map(|c| crate::rational::to_f64(&c.intensity.eval(&[y]))).collect();
        let total: f64 = rates.iter().filter(|r| **r > 0.0).sum();
        if total <= 0.0 {
            break;
        }
        let dt = exponential(rng, total);
        if t + dt > horizon {
            break;
        }
        let mut pick = uniform(rng) * total;
        let mut chosen = None;
        for (c, &r) in rates.iter().enumerate() {
            if r <= 0.0 {
                continue;
            }
            chosen = Some(c);
            if pick < r {
                break;
            }
            pick -= r;
        }
        let c = chosen.expect("positive total rate");
        t += dt;
        // Same expression as `HybridTrajectory::z_end`, so continuity is exact.
        let z_before = current.flow.at(current.z_start, t - current.t_start);
        let y_next = y + channels[c].jump[0];
        let z_next = z_before + model.z_jumps[c].sample(rng);
        segments.push(HybridSegment { t_start: t, y: y_next, z_start: z_next, flow: model.flow(y_next) });
    }
    HybridTrajectory { segments, horizon }
}

//! Exact event-driven simulation of lattice models.

use rayon::prelude::*;
use serde::Serialize;

use super::rng::{exponential, path_rng, uniform, PathRng};
use super::SimulateError;
use crate::counters::shift;
use crate::model::{AffineModel, Point};
use crate::rational::to_f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// `(time, state)` pairs; the first is `(0, x0)`.
    pub events: Vec<(f64, Point)>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> &Point {
        let i = self.events.partition_point(|(s, _)| *s <= t);
        &self.events[i.max(1) - 1].1
    }

    pub fn jump_count(&self) -> usize {
        self.events.len() - 1
    }
}

#[derive(Debug, Clone)]
struct Transition {
    target: usize,
    rate: f64,
}

/// Floating-point transition table of a model, for repeated simulation.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    states: Vec<Point>,
    transitions: Vec<Vec<Transition>>,
    exit: Vec<f64>,
}

impl CompiledModel {
    pub fn new(model: &AffineModel) -> Result<Self, SimulateError> {
        let space = &model.space;
        let mut transitions = Vec::with_capacity(space.len());
        let mut exit = Vec::with_capacity(space.len());
        for x in space.points() {
            let mut row = Vec::new();
            for ch in model.channels() {
                let rate = to_f64(&ch.intensity.eval(x));
                if rate < 0.0 {
                    return Err(SimulateError::InvalidModel(format!("negative rate at {x:?} for jump {:?}", ch.jump)));
                }
                if rate == 0.0 {
                    continue;
                }
                let target = space
                    .index_of(&shift(x, &ch.jump))
                    .ok_or_else(|| SimulateError::InvalidModel(format!("jump {:?} leaves E from {x:?}", ch.jump)))?;
                row.push(Transition { target, rate });
            }
            exit.push(row.iter().map(|t| t.rate).sum());
            transitions.push(row);
        }
        Ok(Self { states: space.points().to_vec(), transitions, exit })
    }

    pub fn states(&self) -> &[Point] {
        &self.states
    }

    pub fn index_of(&self, x: &[i64]) -> Result<usize, SimulateError> {
        self.states
            .iter()
            .position(|s| s[..] == *x)
            .ok_or_else(|| SimulateError::InvalidStart(format!("{x:?} is not a state of the model")))
    }

    /// Holding time and next state from `i`, or `None` when absorbing.
    fn step(&self, i: usize, rng: &mut PathRng) -> Option<(f64, usize)> {
        let total = self.exit[i];
        if total <= 0.0 {
            return None;
        }
        let dt = exponential(rng, total);
        let mut pick = uniform(rng) * total;
        let row = &self.transitions[i];
        for tr in row {
            if pick < tr.rate {
                return Some((dt, tr.target));
            }
            pick -= tr.rate;
        }
        Some((dt, row.last().expect("positive exit rate").target))
    }

    pub fn trajectory(&self, start: usize, horizon: f64, rng: &mut PathRng) -> Trajectory {
        let mut events = vec![(0.0, self.states[start].clone())];
        let mut t = 0.0;
        let mut i = start;
        while let Some((dt, next)) = self.step(i, rng) {
            t += dt;
            if t > horizon {
                break;
            }
            i = next;
            events.push((t, self.states[i].clone()));
        }
        Trajectory { events, horizon }
    }

    /// State indices at each of the nondecreasing `times` along one path.
    pub fn states_at(&self, start: usize, times: &[f64], rng: &mut PathRng) -> Vec<usize> {
        let mut out = Vec::with_capacity(times.len());
        let mut i = start;
        let mut t = 0.0;
        let mut pending = self.step(i, rng);
        for &target in times {
            while let Some((dt, next)) = pending {
                if t + dt > target {
                    break;
                }
                t += dt;
                i = next;
                pending = self.step(i, rng);
            }
            out.push(i);
        }
        out
    }

    /// `n_paths` independent paths sampled at `times`; `result[p][j]` is the
    /// state index of path `p` at `times[j]`.
    pub fn sample_indices(&self, start: usize, times: &[f64], n_paths: usize, seed: u64) -> Vec<Vec<usize>> {
        (0..n_paths)
            .into_par_iter()
            .map(|p| self.states_at(start, times, &mut path_rng(seed, p as u64)))
            .collect()
    }
}

fn check_times(times: &[f64]) -> Result<(), SimulateError> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(SimulateError::InvalidArgument("times must be finite, nonnegative and nondecreasing".into()));
    }
    Ok(())
}

/// One path on `[0, horizon]` using stream 0 of `seed`.
pub fn simulate_ssa(model: &AffineModel, x0: &[i64], horizon: f64, seed: u64) -> Result<Trajectory, SimulateError> {
    check_times(&[horizon])?;
    let compiled = CompiledModel::new(model)?;
    let start = compiled.index_of(x0)?;
    Ok(compiled.trajectory(start, horizon, &mut path_rng(seed, 0)))
}

/// `n_paths` independent samples of `X_t`; path `i` uses stream `i`.
pub fn sample_at(model: &AffineModel, x0: &[i64], t: f64, n_paths: usize, seed: u64) -> Result<Vec<Point>, SimulateError> {
    Ok(sample_at_times(model, x0, &[t], n_paths, seed)?.into_iter().next().expect("one time"))
}

/// Samples at several times from the same paths; `result[j]` holds the
/// samples at `times[j]`.
pub fn sample_at_times(
    model: &AffineModel,
    x0: &[i64],
    times: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<Vec<Point>>, SimulateError> {
    if n_paths == 0 {
        return Err(SimulateError::InvalidArgument("n_paths must be at least 1".into()));
    }
    check_times(times)?;
    let compiled = CompiledModel::new(model)?;
    let start = compiled.index_of(x0)?;
    let paths = compiled.sample_indices(start, times, n_paths, seed);
    Ok((0..times.len())
        .map(|j| paths.iter().map(|p| compiled.states[p[j]].clone()).collect())
        .collect())
}

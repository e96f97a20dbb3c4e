//! Normalized jump counters and the counter-coordinate transform.
//!
//! For a jump `u` on a finite lattice state space `E`, the normalized jump
//! counter `ψ_u` is the affine functional that vanishes exactly on the
//! boundary set `{x ∈ E : x + u ∉ E}` and drops by one along `u`. Its value
//! `ψ_u(x)` is the number of `u`-jumps that can be taken from `x` before
//! leaving `E`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::linalg;
use crate::model::{AffineFunctional, AffineMap, AffineModel, ModelError, Point, StateSpace};
use crate::rational::{as_integer, is_natural, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CounterError {
    #[error("jump {jump:?} admits no normalized jump counter: {reason}")]
    NoCounter { jump: Point, reason: NoCounterReason },
    #[error("jumps {u:?} and {v:?} violate the counter trichotomy (alpha = {alpha}, beta = {beta})")]
    TrichotomyViolation {
        u: Point,
        v: Point,
        alpha: String,
        beta: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NoCounterReason {
    #[error("zero jump")]
    ZeroJump,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("boundary set spans an affine space of dimension {found}, expected {expected}")]
    BoundaryDimension { found: usize, expected: usize },
    #[error("jump is parallel to the boundary hyperplane")]
    ParallelToBoundary,
    #[error("counter is negative at {0:?}")]
    Negative(Point),
    #[error("counter is not an integer at {0:?}")]
    NonInteger(Point),
    #[error("counter is positive at {0:?} but the jump leaves the state space")]
    Support(Point),
    #[error("counter never takes the value 1")]
    NoUnitLevel,
}

/// A jump together with its normalized counter `ψ_u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpCounter {
    pub jump: Point,
    pub functional: AffineFunctional,
}

impl JumpCounter {
    pub fn eval(&self, x: &[i64]) -> Rational {
        self.functional.eval(x)
    }
}

/// `{x ∈ E : x + u ∉ E}`, the points from which a `u`-jump exits `E`.
pub fn boundary_set(space: &StateSpace, u: &[i64]) -> Vec<Point> {
    space
        .points()
        .iter()
        .filter(|x| !space.contains(&shift(x, u)))
        .cloned()
        .collect()
}

pub(crate) fn shift(x: &[i64], u: &[i64]) -> Point {
    x.iter().zip(u).map(|(a, b)| a + b).collect()
}

/// The unique affine functional vanishing on the affine hull of `points`
/// (which must be a hyperplane) and satisfying `ψ(u) − ψ(0) = −1`.
pub(crate) fn hyperplane_functional(
    points: &[Point],
    u: &[i64],
    dim: usize,
) -> Result<AffineFunctional, NoCounterReason> {
    let found = linalg::affine_span_dim(points);
    if points.is_empty() || found + 1 != dim {
        return Err(NoCounterReason::BoundaryDimension {
            found,
            expected: dim.saturating_sub(1),
        });
    }
    // Unknowns (l_1..l_d, c): ⟨l, x⟩ + c = 0 on every boundary point.
    let rows: linalg::Matrix = points
        .iter()
        .map(|x| {
            let mut r = linalg::int_vector(x);
            r.push(Rational::one());
            r
        })
        .collect();
    let kernel = linalg::nullspace(&rows, dim + 1);
    debug_assert_eq!(kernel.len(), 1);
    let v = &kernel[0];
    let candidate = AffineFunctional::new(v[..dim].to_vec(), v[dim].clone());
    let slope = candidate.increment(u);
    if slope.is_zero() {
        return Err(NoCounterReason::ParallelToBoundary);
    }
    Ok(candidate.scaled(&(-Rational::one() / slope)))
}

/// Checks nonnegativity, integrality, the support implication and the
/// existence of a level-one point.
fn verify_counter(space: &StateSpace, u: &[i64], psi: &AffineFunctional) -> Result<(), NoCounterReason> {
    let mut hits_one = false;
    for x in space.points() {
        let value = psi.eval(x);
        if value.is_negative() {
            return Err(NoCounterReason::Negative(x.clone()));
        }
        if !is_natural(&value) {
            return Err(NoCounterReason::NonInteger(x.clone()));
        }
        if value.is_positive() && !space.contains(&shift(x, u)) {
            return Err(NoCounterReason::Support(x.clone()));
        }
        hits_one |= value.is_one();
    }
    if hits_one {
        Ok(())
    } else {
        Err(NoCounterReason::NoUnitLevel)
    }
}

/// Computes and verifies the normalized jump counter of `u` on `space`.
pub fn compute_jump_counter(space: &StateSpace, u: &[i64]) -> Result<JumpCounter, CounterError> {
    let fail = |reason| CounterError::NoCounter { jump: u.to_vec(), reason };
    if u.len() != space.dimension() {
        return Err(fail(NoCounterReason::DimensionMismatch));
    }
    if u.iter().all(|&c| c == 0) {
        return Err(fail(NoCounterReason::ZeroJump));
    }
    let boundary = boundary_set(space, u);
    let functional = hyperplane_functional(&boundary, u, space.dimension()).map_err(fail)?;
    verify_counter(space, u, &functional).map_err(fail)?;
    Ok(JumpCounter { jump: u.to_vec(), functional })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CounterRelation {
    /// `α = β = −1`, `ψ_u = ψ_v`.
    SameCounter,
    /// `α = β = 1`, `u = −v`.
    Opposite,
    /// `min(α, β) = 0`, both natural numbers.
    Orthogonal,
}

/// `α = ψ_u(v) − ψ_u(0)`, `β = ψ_v(u) − ψ_v(0)` and the resulting relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairwiseCase {
    pub alpha: i64,
    pub beta: i64,
    pub case: CounterRelation,
}

pub fn pairwise_case(cu: &JumpCounter, cv: &JumpCounter) -> Result<PairwiseCase, CounterError> {
    let alpha_q = cu.functional.increment(&cv.jump);
    let beta_q = cv.functional.increment(&cu.jump);
    let violation = || CounterError::TrichotomyViolation {
        u: cu.jump.clone(),
        v: cv.jump.clone(),
        alpha: crate::rational::format_rational(&alpha_q),
        beta: crate::rational::format_rational(&beta_q),
    };
    let (Some(alpha), Some(beta)) = (as_integer(&alpha_q), as_integer(&beta_q)) else {
        return Err(violation());
    };
    let opposite = cu.jump.iter().zip(&cv.jump).all(|(a, b)| a == &-b);
    let case = match (alpha, beta) {
        (-1, -1) if cu.functional == cv.functional => CounterRelation::SameCounter,
        (1, 1) if opposite => CounterRelation::Opposite,
        (a, b) if a >= 0 && b >= 0 && a.min(b) == 0 => CounterRelation::Orthogonal,
        _ => return Err(violation()),
    };
    Ok(PairwiseCase { alpha, beta, case })
}

/// Output of [`build_transform`]: `T` with `T(E) ⊆ N^k × Z^{d−k}` whose first
/// `k` components are the counters in `counter_basis`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformResult {
    pub map: AffineMap,
    pub k: usize,
    pub counter_basis: Vec<JumpCounter>,
    /// The counter of every jump in the model's jump set, in channel order.
    pub counters: Vec<JumpCounter>,
}

impl TransformResult {
    /// Coefficients `(c_0, c_1, …, c_k)` with `ψ = c_0 + Σ c_j ψ_{u_j}`, when
    /// `ψ` lies in the affine span of the basis.
    pub fn express(&self, psi: &AffineFunctional) -> Option<Vec<Rational>> {
        let d = psi.dim();
        let k = self.k;
        // Columns: 1, ψ_{u_1}, …, ψ_{u_k}; rows: the d linear coordinates and the offset.
        let mut rows: linalg::Matrix = (0..=d)
            .map(|r| {
                let mut row = Vec::with_capacity(k + 2);
                row.push(if r == d { Rational::one() } else { Rational::zero() });
                for b in &self.counter_basis {
                    row.push(if r == d { b.functional.offset.clone() } else { b.functional.linear[r].clone() });
                }
                row.push(if r == d { psi.offset.clone() } else { psi.linear[r].clone() });
                row
            })
            .collect();
        let pivots = linalg::reduce_row_echelon(&mut rows, k + 2);
        if pivots.contains(&(k + 1)) {
            return None;
        }
        let mut coeffs = vec![Rational::zero(); k + 1];
        for (row, &p) in rows.iter().zip(&pivots) {
            coeffs[p] = row[k + 1].clone();
        }
        Some(coeffs)
    }
}

/// Computes counters for every jump, selects a basis greedily in channel
/// order, and extends it with the lowest-index coordinate functionals to an
/// invertible map.
pub fn build_transform(model: &AffineModel) -> Result<TransformResult, CounterError> {
    model.ensure_valid()?;
    let d = model.dimension();
    let jumps = model.jump_set();
    let counters = jumps
        .iter()
        .map(|u| compute_jump_counter(&model.space, u))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, cu) in counters.iter().enumerate() {
        for cv in &counters[i + 1..] {
            pairwise_case(cu, cv)?;
        }
    }

    let mut basis: Vec<JumpCounter> = Vec::new();
    let mut linear_rows: linalg::Matrix = Vec::new();
    for c in &counters {
        let mut candidate = linear_rows.clone();
        candidate.push(c.functional.linear.clone());
        if linalg::rank(&candidate, d) == candidate.len() {
            linear_rows = candidate;
            basis.push(c.clone());
        }
    }
    let k = basis.len();

    let mut rows: Vec<AffineFunctional> = basis.iter().map(|c| c.functional.clone()).collect();
    for j in 0..d {
        if rows.len() == d {
            break;
        }
        let coord = AffineFunctional::coordinate(d, j);
        let mut candidate = linear_rows.clone();
        candidate.push(coord.linear.clone());
        if linalg::rank(&candidate, d) == candidate.len() {
            linear_rows = candidate;
            rows.push(coord);
        }
    }
    let map = AffineMap::from_rows(&rows);
    debug_assert!(map.is_invertible());
    Ok(TransformResult { map, k, counter_basis: basis, counters })
}

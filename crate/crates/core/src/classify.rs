//! Classification of one- and two-dimensional models, and constructors for
//! the canonical examples.
//!
//! In one dimension every non-deterministic model is, after an affine change
//! of coordinates, a birth–death process on `{0, …, N}` with rates `x·α` down
//! and `(N − x)·β` up.
//!
//! In two dimensions, once both coordinate projections are normalized jump
//! counters, a model falls into one of three families:
//!
//! * [`Case2D::Layered`]: no upward jumps in the second coordinate, jumps in
//!   `{(−1,0), (1,0)} ∪ {(K,−1) : K ∈ N}`;
//! * [`Case2D::IndependentProduct`]: two independent birth–death processes;
//! * [`Case2D::SimplexType`]: jumps among the six unit moves of the lattice
//!   simplex, counters among `π1`, `π2` and `N − π1 − π2`.
//!
//! [`classify_2d`] walks the same decision sequence as the classification
//! proof: large jumps first, then the two-counter case, then the `(1, 1)`
//! jump, and finally the remaining three-or-more-counter analysis.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::counters::{self, pairwise_case, CounterError, JumpCounter};
use crate::model::{AffineFunctional, AffineMap, AffineModel, JumpChannel, ModelError, Point, StateSpace};
use crate::rational::{as_integer, int, is_natural, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected a {expected}-dimensional model, got dimension {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("transformed kernel is not of birth-death form: {0}")]
    NotAffine1D(String),
    #[error("coordinate projection pi{0} is not a normalized jump counter; apply the counter transform first")]
    NotNormalized(usize),
    #[error("model fits no case of the two-dimensional classification (tried {attempted:?}): {detail}")]
    UnclassifiableModel { attempted: Case2D, detail: String },
    #[error("no classification is available in dimension {0}")]
    Unsupported(usize),
    #[error(transparent)]
    Counter(#[from] CounterError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind1D {
    Deterministic,
    BirthDeath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification1D {
    pub kind: Kind1D,
    /// Largest state after normalization (0 for a deterministic model).
    pub n: u32,
    pub alpha_rate: Rational,
    pub beta_rate: Rational,
    /// Sends `E` onto `{0, …, N}`.
    pub normalizing_map: AffineMap,
}

pub fn classify_1d(model: &AffineModel) -> Result<Classification1D, ClassifyError> {
    if model.dimension() != 1 {
        return Err(ClassifyError::WrongDimension { expected: 1, found: model.dimension() });
    }
    let transform = counters::build_transform(model)?;
    if transform.k == 0 {
        return Ok(Classification1D {
            kind: Kind1D::Deterministic,
            n: 0,
            alpha_rate: Rational::zero(),
            beta_rate: Rational::zero(),
            normalizing_map: AffineMap::identity(1),
        });
    }
    let image = model.transformed(&transform.map)?;
    let mut states: Vec<i64> = image.space.points().iter().map(|p| p[0]).collect();
    states.sort_unstable();
    let n = *states.last().expect("nonempty");
    if states.iter().copied().ne(0..=n) {
        return Err(ClassifyError::NotAffine1D(format!("state space {states:?} is not an interval")));
    }
    let n_rat = int(n);
    let mut alpha = None;
    let mut beta = Rational::zero();
    for ch in image.channels() {
        let slope = &ch.intensity.linear[0];
        let offset = &ch.intensity.offset;
        match ch.jump[0] {
            -1 if offset.is_zero() && slope.is_positive() => alpha = Some(slope.clone()),
            1 if slope.is_negative() && *offset == -slope * &n_rat => beta = -slope.clone(),
            _ => {
                return Err(ClassifyError::NotAffine1D(format!(
                    "channel {:?} with intensity {}",
                    ch.jump, ch.intensity
                )))
            }
        }
    }
    let alpha = alpha.ok_or_else(|| ClassifyError::NotAffine1D("no downward channel".into()))?;
    Ok(Classification1D {
        kind: Kind1D::BirthDeath,
        n: u32::try_from(n).map_err(|_| ClassifyError::NotAffine1D("state range too large".into()))?,
        alpha_rate: alpha,
        beta_rate: beta,
        normalizing_map: transform.map,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case2D {
    Layered,
    IndependentProduct,
    SimplexType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification2D {
    pub case: Case2D,
    /// Affine map taking the input model to the coordinates in which the
    /// case's structure holds.
    pub witness_map: AffineMap,
    /// Jump set in witness coordinates.
    pub jump_set: Vec<Point>,
    /// Counters of `jump_set`, in witness coordinates.
    pub counters: Vec<JumpCounter>,
}

fn pi(j: usize) -> AffineFunctional {
    AffineFunctional::coordinate(2, j)
}

fn is_remaining_mass(f: &AffineFunctional) -> bool {
    f.linear == [-Rational::one(), -Rational::one()] && is_natural(&f.offset)
}

fn counters_of(model: &AffineModel) -> Result<Vec<JumpCounter>, ClassifyError> {
    let counters = model
        .jump_set()
        .iter()
        .map(|u| counters::compute_jump_counter(&model.space, u))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, cu) in counters.iter().enumerate() {
        for cv in &counters[i + 1..] {
            pairwise_case(cu, cv)?;
        }
    }
    Ok(counters)
}

/// Classifies a two-dimensional model in which `π1` and `π2` are already
/// normalized jump counters (see [`counters::build_transform`]).
pub fn classify_2d(model: &AffineModel) -> Result<Classification2D, ClassifyError> {
    if model.dimension() != 2 {
        return Err(ClassifyError::WrongDimension { expected: 2, found: model.dimension() });
    }
    model.ensure_valid()?;
    let counters = counters_of(model)?;
    for j in 0..2 {
        if !counters.iter().any(|c| c.functional == pi(j)) {
            return Err(ClassifyError::NotNormalized(j + 1));
        }
    }
    let jumps: Vec<&Point> = counters.iter().map(|c| &c.jump).collect();

    if let Some(large) = counters.iter().find(|c| c.jump.iter().any(|v| v.abs() >= 2)) {
        let keep = if large.jump[0].abs() >= 2 { pi(0) } else { pi(1) };
        let map = AffineMap::from_rows(&[keep, large.functional.clone()]);
        return finish(model, Case2D::Layered, map);
    }

    if counters.iter().all(|c| c.functional == pi(0) || c.functional == pi(1)) {
        return finish(model, Case2D::SimplexType, AffineMap::identity(2));
    }

    if let Some(w) = counters.iter().find(|c| c.jump == [1, 1]) {
        // S = {(-1,1), (1,-1), (1,1)}; (π1, ψ_w) makes it layered.
        let map = AffineMap::from_rows(&[pi(0), w.functional.clone()]);
        return finish(model, Case2D::Layered, map);
    }

    if counters
        .iter()
        .all(|c| c.functional == pi(0) || c.functional == pi(1) || is_remaining_mass(&c.functional))
    {
        return finish(model, Case2D::SimplexType, AffineMap::identity(2));
    }

    if jumps.iter().all(|u| u[1] <= 0) {
        return finish(model, Case2D::Layered, AffineMap::identity(2));
    }
    if jumps.iter().all(|u| u[0] <= 0) {
        return finish(model, Case2D::Layered, AffineMap::from_rows(&[pi(1), pi(0)]));
    }
    finish(model, Case2D::IndependentProduct, AffineMap::identity(2))
}

fn finish(model: &AffineModel, case: Case2D, map: AffineMap) -> Result<Classification2D, ClassifyError> {
    let unclassifiable = |detail: String| ClassifyError::UnclassifiableModel { attempted: case, detail };
    if !map.is_invertible() {
        return Err(unclassifiable("witness map is singular".into()));
    }
    let image = model
        .transformed(&map)
        .map_err(|e| unclassifiable(format!("witness map does not act on the lattice: {e}")))?;
    let counters = counters_of(&image)?;
    let jump_set: Vec<Point> = counters.iter().map(|c| c.jump.clone()).collect();
    let has = |u: [i64; 2]| jump_set.iter().any(|v| v[..] == u);

    let jump_ok: &dyn Fn(&Point) -> bool = match case {
        Case2D::Layered => &|u: &Point| matches!(u[..], [-1, 0] | [1, 0]) || (u[1] == -1 && u[0] >= 0),
        Case2D::IndependentProduct => &|u: &Point| matches!(u[..], [-1, 0] | [0, -1] | [1, 0] | [0, 1]),
        Case2D::SimplexType => {
            &|u: &Point| matches!(u[..], [-1, 0] | [-1, 1] | [0, -1] | [0, 1] | [1, -1] | [1, 0])
        }
    };
    if let Some(bad) = jump_set.iter().find(|u| !jump_ok(u)) {
        return Err(unclassifiable(format!("jump {bad:?} is not allowed")));
    }
    let required: &[[i64; 2]] = match case {
        Case2D::Layered => &[[-1, 0]],
        Case2D::IndependentProduct => &[[-1, 0], [0, -1]],
        Case2D::SimplexType => &[],
    };
    if let Some(missing) = required.iter().find(|u| !has(**u)) {
        return Err(unclassifiable(format!("required jump {missing:?} is absent")));
    }
    let counter_ok = |f: &AffineFunctional| -> bool {
        match case {
            Case2D::Layered => true,
            Case2D::IndependentProduct => {
                *f == pi(0)
                    || *f == pi(1)
                    || (is_natural(&f.offset)
                        && (f.linear == [-Rational::one(), Rational::zero()]
                            || f.linear == [Rational::zero(), -Rational::one()]))
            }
            Case2D::SimplexType => *f == pi(0) || *f == pi(1) || is_remaining_mass(f),
        }
    };
    if let Some(bad) = counters.iter().find(|c| !counter_ok(&c.functional)) {
        return Err(unclassifiable(format!(
            "jump {:?} has counter {} which the case does not allow",
            bad.jump, bad.functional
        )));
    }
    Ok(Classification2D { case, witness_map: map, jump_set, counters })
}

/// Result of [`classify_model`], which normalizes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    OneD(Classification1D),
    TwoD {
        /// Counter transform applied before [`classify_2d`].
        normalizing_map: AffineMap,
        result: Classification2D,
    },
    /// Two-dimensional model with fewer than two independent counters.
    Reduced { k: usize, normalizing_map: AffineMap },
}

impl Classification {
    /// Composite map from the input coordinates to the witness coordinates.
    pub fn full_map(&self) -> AffineMap {
        match self {
            Self::OneD(c) => c.normalizing_map.clone(),
            Self::TwoD { normalizing_map, result } => result.witness_map.compose(normalizing_map),
            Self::Reduced { normalizing_map, .. } => normalizing_map.clone(),
        }
    }
}

/// Normalizes with the counter transform and dispatches on the dimension.
pub fn classify_model(model: &AffineModel) -> Result<Classification, ClassifyError> {
    match model.dimension() {
        1 => Ok(Classification::OneD(classify_1d(model)?)),
        2 => {
            let transform = counters::build_transform(model)?;
            if transform.k < 2 {
                return Ok(Classification::Reduced { k: transform.k, normalizing_map: transform.map });
            }
            let image = model.transformed(&transform.map)?;
            Ok(Classification::TwoD {
                normalizing_map: transform.map,
                result: classify_2d(&image)?,
            })
        }
        d => Err(ClassifyError::Unsupported(d)),
    }
}

/// Whether every state can reach every other state along positive-rate jumps.
pub fn is_irreducible(model: &AffineModel) -> bool {
    let space = &model.space;
    let n = space.len();
    let successors: Vec<Vec<usize>> = space
        .points()
        .iter()
        .map(|x| {
            model
                .channels()
                .iter()
                .filter(|ch| ch.intensity.eval(x).is_positive())
                .filter_map(|ch| space.index_of(&counters::shift(x, &ch.jump)))
                .collect()
        })
        .collect();
    (0..n).all(|start| {
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &j in &successors[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    })
}

/// Heuristic search for a one-dimensional autonomous component among the
/// jump counters and coordinate projections: returns a functional `φ` such
/// that, for every nonzero increment `δ`, the total rate of jumps changing
/// `φ` by `δ` depends on `x` only through `φ(x)`. `None` does not prove
/// absence.
pub fn find_autonomous_component(model: &AffineModel) -> Option<AffineFunctional> {
    let d = model.dimension();
    if d < 2 {
        return None;
    }
    let mut candidates: Vec<AffineFunctional> = (0..d).map(|j| AffineFunctional::coordinate(d, j)).collect();
    for u in model.jump_set() {
        if let Ok(c) = counters::compute_jump_counter(&model.space, &u) {
            if !candidates.contains(&c.functional) {
                candidates.push(c.functional);
            }
        }
    }
    candidates.into_iter().find(|phi| {
        let mut by_increment: BTreeMap<Rational, AffineFunctional> = BTreeMap::new();
        for ch in model.channels() {
            let delta = phi.increment(&ch.jump);
            if delta.is_zero() {
                continue;
            }
            let slot = by_increment.entry(delta).or_insert_with(|| AffineFunctional::zero(d));
            *slot = &*slot + &ch.intensity;
        }
        !by_increment.is_empty() && by_increment.values().all(|rate| proportional(&rate.linear, &phi.linear))
    })
}

fn proportional(v: &[Rational], w: &[Rational]) -> bool {
    // v = c·w for some c (w nonzero).
    let Some(p) = w.iter().position(|x| !x.is_zero()) else {
        return v.iter().all(Zero::is_zero);
    };
    let c = &v[p] / &w[p];
    v.iter().zip(w).all(|(a, b)| *a == &c * b)
}

fn check_rate(name: &str, value: &Rational) -> Result<(), ClassifyError> {
    if value.is_negative() {
        return Err(ClassifyError::InvalidParameter(format!("{name} must be nonnegative")));
    }
    Ok(())
}

/// Birth–death process on `{0, …, n}`: jump `−1` at rate `alpha·x`, jump `+1`
/// at rate `beta·(n − x)`.
pub fn make_birth_death(n: u32, alpha: Rational, beta: Rational) -> Result<AffineModel, ClassifyError> {
    if n < 1 {
        return Err(ClassifyError::InvalidParameter("N must be at least 1".into()));
    }
    if !alpha.is_positive() {
        return Err(ClassifyError::InvalidParameter("alpha must be positive".into()));
    }
    check_rate("beta", &beta)?;
    let nn = int(i64::from(n));
    let channels = vec![
        JumpChannel::new(vec![-1], AffineFunctional::new(vec![alpha], Rational::zero())),
        JumpChannel::new(vec![1], AffineFunctional::new(vec![-beta.clone()], beta * nn)),
    ];
    Ok(AffineModel::new(StateSpace::interval(n), channels)?)
}

/// Lattice simplex `{x ∈ N^d : Σ x_j ≤ n}` with, for every ordered pair
/// `(j, k)` of distinct indices in `0..=d`, the jump `e_j − e_k` (`e_0 = 0`)
/// at rate `rates[(j, k)] · π_k(x)`, where `π_0 = n − Σ x_j`. Missing pairs
/// have rate zero. Channels are ordered by `k = 1, …, d, 0`, so the
/// coordinate counters come first.
pub fn make_simplex(
    d: usize,
    n: u32,
    rates: &BTreeMap<(usize, usize), Rational>,
) -> Result<AffineModel, ClassifyError> {
    if d < 1 || n < 1 {
        return Err(ClassifyError::InvalidParameter("d and N must be at least 1".into()));
    }
    for (&(j, k), rate) in rates {
        if j == k || j > d || k > d {
            return Err(ClassifyError::InvalidParameter(format!("rate index ({j}, {k}) out of range")));
        }
        check_rate("rate", rate)?;
    }
    let unit = |j: usize| -> Point {
        let mut e = vec![0; d];
        if j > 0 {
            e[j - 1] = 1;
        }
        e
    };
    let counter = |k: usize| -> AffineFunctional {
        if k == 0 {
            AffineFunctional::new(vec![-Rational::one(); d], int(i64::from(n)))
        } else {
            AffineFunctional::coordinate(d, k - 1)
        }
    };
    let mut channels = Vec::new();
    for k in (1..=d).chain(std::iter::once(0)) {
        for j in 0..=d {
            if j == k {
                continue;
            }
            let Some(rate) = rates.get(&(j, k)) else { continue };
            let jump = unit(j).iter().zip(unit(k)).map(|(a, b)| a - b).collect();
            channels.push(JumpChannel::new(jump, counter(k).scaled(rate)));
        }
    }
    Ok(AffineModel::new(StateSpace::simplex(d, n), channels)?)
}

/// [`make_simplex`] with the same rate on every pair.
pub fn make_uniform_simplex(d: usize, n: u32, rate: Rational) -> Result<AffineModel, ClassifyError> {
    let rates = (0..=d)
        .flat_map(|j| (0..=d).filter(move |&k| k != j).map(move |k| (j, k)))
        .map(|pair| (pair, rate.clone()))
        .collect();
    make_simplex(d, n, &rates)
}

/// Rates for the planar simplex in the order `λ1..λ6` of the jumps
/// `(−1,0), (−1,1), (0,−1), (1,−1), (1,0), (0,1)`.
pub fn planar_simplex_rates(lambda: [Rational; 6]) -> BTreeMap<(usize, usize), Rational> {
    let pairs = [(0, 1), (2, 1), (0, 2), (1, 2), (1, 0), (2, 0)];
    pairs.into_iter().zip(lambda).collect()
}

/// The 13-state three-layer model with jumps `(−1,0), (0,−1), (2,−1), (3,−1)`,
/// each at rate equal to its own counter (`π1` for `(−1,0)`, `π2` otherwise).
pub fn make_layer_example() -> AffineModel {
    let states = [
        [0, 2], [0, 1], [1, 1], [2, 1], [3, 1],
        [0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [5, 0], [6, 0], [7, 0],
    ];
    let space = StateSpace::new(2, states.iter().map(|p| p.to_vec()).collect()).expect("distinct states");
    let channels = vec![
        JumpChannel::new(vec![-1, 0], pi(0)),
        JumpChannel::new(vec![0, -1], pi(1)),
        JumpChannel::new(vec![2, -1], pi(1)),
        JumpChannel::new(vec![3, -1], pi(1)),
    ];
    AffineModel::new(space, channels).expect("well-formed channels")
}

/// Two independent birth–death processes as one model on
/// `{0..n1} × {0..n2}`; each tuple is `(n, alpha, beta)`.
pub fn make_independent_product(
    first: (u32, Rational, Rational),
    second: (u32, Rational, Rational),
) -> Result<AffineModel, ClassifyError> {
    let a = make_birth_death(first.0, first.1, first.2)?;
    let b = make_birth_death(second.0, second.1, second.2)?;
    let mut points = Vec::new();
    for x in a.space.points() {
        for y in b.space.points() {
            points.push(vec![x[0], y[0]]);
        }
    }
    let lift = |ch: &JumpChannel, axis: usize| -> JumpChannel {
        let mut jump = vec![0; 2];
        jump[axis] = ch.jump[0];
        let mut linear = vec![Rational::zero(); 2];
        linear[axis] = ch.intensity.linear[0].clone();
        JumpChannel::new(jump, AffineFunctional::new(linear, ch.intensity.offset.clone()))
    };
    let channels = a
        .channels()
        .iter()
        .map(|c| lift(c, 0))
        .chain(b.channels().iter().map(|c| lift(c, 1)))
        .collect();
    Ok(AffineModel::new(StateSpace::new(2, points)?, channels)?)
}

/// Rates of a birth–death classification as a tuple `(n, alpha, beta)` with
/// integer-valued `n`.
pub fn birth_death_parameters(c: &Classification1D) -> Option<(u32, Rational, Rational)> {
    (c.kind == Kind1D::BirthDeath).then(|| (c.n, c.alpha_rate.clone(), c.beta_rate.clone()))
}

/// Convenience: the integer value of a rational known to be integral.
pub fn integral(value: &Rational) -> Option<i64> {
    as_integer(value)
}

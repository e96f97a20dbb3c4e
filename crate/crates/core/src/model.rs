//! Lattice state spaces, affine functionals and maps, and affine jump kernels.
//!
//! A model is a finite state space `E ⊂ Z^d` together with finitely many jump
//! channels `(u, λ_u)`: from `x ∈ E` the process jumps by `u` at rate
//! `λ_u(x)`, where `λ_u` is affine in `x`. There is no diffusion part; the
//! only continuous motion is the optional drift, which a pure lattice model
//! must leave at zero.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::linalg::{self, Matrix};
use crate::rational::{format_rational, int, Rational};

/// A point of the integer lattice `Z^d`.
pub type Point = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("state space must contain at least one point")]
    EmptyStateSpace,
    #[error("{context}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate state {0:?}")]
    DuplicateState(Point),
    #[error("jump vector must be nonzero")]
    ZeroJump,
    #[error("malformed rate matrix: {0}")]
    MalformedRateMatrix(String),
    #[error("affine map is not invertible")]
    SingularMap,
    #[error("map does not send the lattice model to a lattice model: {0}")]
    NonLatticeImage(String),
    #[error("invalid model: {}", describe_issues(.0))]
    Invalid(Vec<ValidationIssue>),
}

fn describe_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

/// `x ↦ ⟨linear, x⟩ + offset` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineFunctional {
    pub linear: Vec<Rational>,
    pub offset: Rational,
}

impl AffineFunctional {
    pub fn new(linear: Vec<Rational>, offset: Rational) -> Self {
        Self { linear, offset }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, Rational::zero())
    }

    pub fn constant(dim: usize, value: Rational) -> Self {
        Self::new(vec![Rational::zero(); dim], value)
    }

    /// The coordinate projection `x ↦ x_j` (0-based `j`).
    pub fn coordinate(dim: usize, j: usize) -> Self {
        let mut linear = vec![Rational::zero(); dim];
        linear[j] = Rational::one();
        Self::new(linear, Rational::zero())
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, x: &[i64]) -> Rational {
        self.linear
            .iter()
            .zip(x)
            .fold(self.offset.clone(), |acc, (c, &xi)| acc + c * int(xi))
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Rational {
        self.linear
            .iter()
            .zip(x)
            .fold(self.offset.clone(), |acc, (c, xi)| acc + c * xi)
    }

    /// `ψ(v) − ψ(0)`, the change of the functional along a jump `v`.
    pub fn increment(&self, v: &[i64]) -> Rational {
        self.linear
            .iter()
            .zip(v)
            .fold(Rational::zero(), |acc, (c, &vi)| acc + c * int(vi))
    }

    pub fn is_zero(&self) -> bool {
        self.offset.is_zero() && self.linear.iter().all(Zero::is_zero)
    }

    pub fn is_constant(&self) -> bool {
        self.linear.iter().all(Zero::is_zero)
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self::new(
            self.linear.iter().map(|c| c * factor).collect(),
            &self.offset * factor,
        )
    }

    /// `self ∘ map`, i.e. `x ↦ self(map(x))`.
    pub fn compose(&self, map: &AffineMap) -> Self {
        let d = map.dim();
        let linear = (0..d)
            .map(|j| {
                self.linear
                    .iter()
                    .zip(&map.matrix)
                    .fold(Rational::zero(), |acc, (c, row)| acc + c * &row[j])
            })
            .collect();
        let offset = self
            .linear
            .iter()
            .zip(&map.offset)
            .fold(self.offset.clone(), |acc, (c, o)| acc + c * o);
        Self::new(linear, offset)
    }
}

impl Add for &AffineFunctional {
    type Output = AffineFunctional;
    fn add(self, rhs: Self) -> AffineFunctional {
        AffineFunctional::new(
            self.linear.iter().zip(&rhs.linear).map(|(a, b)| a + b).collect(),
            &self.offset + &rhs.offset,
        )
    }
}

impl Sub for &AffineFunctional {
    type Output = AffineFunctional;
    fn sub(self, rhs: Self) -> AffineFunctional {
        self + &(-rhs)
    }
}

impl Neg for &AffineFunctional {
    type Output = AffineFunctional;
    fn neg(self) -> AffineFunctional {
        AffineFunctional::new(self.linear.iter().map(|c| -c).collect(), -&self.offset)
    }
}

impl fmt::Display for AffineFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (j, c) in self.linear.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let var = format!("x{}", j + 1);
            let mag = c.abs();
            let body = if mag.is_one() {
                var
            } else {
                format!("{}*{}", format_rational(&mag), var)
            };
            match (out.is_empty(), c.is_negative()) {
                (true, true) => out.push_str(&format!("-{body}")),
                (true, false) => out.push_str(&body),
                (false, true) => out.push_str(&format!(" - {body}")),
                (false, false) => out.push_str(&format!(" + {body}")),
            }
        }
        if out.is_empty() {
            return write!(f, "{}", format_rational(&self.offset));
        }
        if !self.offset.is_zero() {
            let mag = format_rational(&self.offset.abs());
            if self.offset.is_negative() {
                out.push_str(&format!(" - {mag}"));
            } else {
                out.push_str(&format!(" + {mag}"));
            }
        }
        write!(f, "{out}")
    }
}

/// `x ↦ matrix · x + offset` on `R^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub matrix: Matrix,
    pub offset: Vec<Rational>,
}

impl AffineMap {
    pub fn new(matrix: Matrix, offset: Vec<Rational>) -> Self {
        Self { matrix, offset }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(linalg::identity(dim), vec![Rational::zero(); dim])
    }

    /// The map whose component functions are `rows`.
    pub fn from_rows(rows: &[AffineFunctional]) -> Self {
        Self::new(
            rows.iter().map(|r| r.linear.clone()).collect(),
            rows.iter().map(|r| r.offset.clone()).collect(),
        )
    }

    pub fn rows(&self) -> Vec<AffineFunctional> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, o)| AffineFunctional::new(row.clone(), o.clone()))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &[i64]) -> Vec<Rational> {
        self.rows().iter().map(|r| r.eval(x)).collect()
    }

    pub fn apply_rational(&self, x: &[Rational]) -> Vec<Rational> {
        self.rows().iter().map(|r| r.eval_rational(x)).collect()
    }

    /// The linear part applied to `v`.
    pub fn apply_linear(&self, v: &[i64]) -> Vec<Rational> {
        linalg::mat_vec(&self.matrix, &linalg::int_vector(v))
    }

    pub fn determinant(&self) -> Rational {
        linalg::determinant(&self.matrix)
    }

    pub fn is_invertible(&self) -> bool {
        !self.determinant().is_zero()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim())
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        let inv = linalg::inverse(&self.matrix)?;
        let shift = linalg::mat_vec(&inv, &self.offset);
        Some(Self::new(inv, shift.into_iter().map(|v| -v).collect()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap::from_rows(&self.rows().iter().map(|r| r.compose(inner)).collect::<Vec<_>>())
    }
}

/// A finite, nonempty set of lattice points in `Z^d`. Point order is
/// preserved and used as the state index everywhere.
#[derive(Debug, Clone)]
pub struct StateSpace {
    dimension: usize,
    points: Vec<Point>,
    index: HashMap<Point, usize>,
    span_dim: usize,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.points == other.points
    }
}

impl Eq for StateSpace {}

impl StateSpace {
    pub fn new(dimension: usize, points: Vec<Point>) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::EmptyStateSpace);
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dimension {
                return Err(ModelError::DimensionMismatch {
                    context: format!("state {i}"),
                    expected: dimension,
                    found: p.len(),
                });
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(p.clone()));
            }
        }
        let span_dim = linalg::affine_span_dim(&points);
        Ok(Self { dimension, points, index, span_dim })
    }

    /// `{0, 1, …, n}` in one dimension.
    pub fn interval(n: u32) -> Self {
        Self::new(1, (0..=i64::from(n)).map(|x| vec![x]).collect()).expect("interval is well formed")
    }

    /// Lattice points of the solid simplex `{x ∈ N^d : Σ x_j ≤ n}`, in
    /// lexicographic order.
    pub fn simplex(dimension: usize, n: u32) -> Self {
        let mut points = Vec::new();
        let mut current = Vec::with_capacity(dimension);
        fill_simplex(dimension, i64::from(n), &mut current, &mut points);
        Self::new(dimension, points).expect("simplex is well formed")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.index.contains_key(x)
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn span_dim(&self) -> usize {
        self.span_dim
    }
}

fn fill_simplex(dim: usize, budget: i64, current: &mut Vec<i64>, out: &mut Vec<Point>) {
    if current.len() == dim {
        out.push(current.clone());
        return;
    }
    for v in 0..=budget {
        current.push(v);
        fill_simplex(dim, budget - v, current, out);
        current.pop();
    }
}

/// Jumps by `jump` at rate `intensity(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpChannel {
    pub jump: Point,
    pub intensity: AffineFunctional,
}

impl JumpChannel {
    pub fn new(jump: Point, intensity: AffineFunctional) -> Self {
        Self { jump, intensity }
    }
}

/// `F(x, ·) = Σ λ_u(x) δ_u` over finitely many channels with distinct jumps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JumpKernel {
    channels: Vec<JumpChannel>,
}

impl JumpKernel {
    /// Channels sharing a jump vector are merged by adding intensities, in
    /// first-occurrence order; channels whose intensity is identically zero
    /// are dropped.
    pub fn new(dimension: usize, channels: Vec<JumpChannel>) -> Result<Self, ModelError> {
        let mut merged: Vec<JumpChannel> = Vec::with_capacity(channels.len());
        for (i, ch) in channels.into_iter().enumerate() {
            if ch.jump.len() != dimension {
                return Err(ModelError::DimensionMismatch {
                    context: format!("jump of channel {i}"),
                    expected: dimension,
                    found: ch.jump.len(),
                });
            }
            if ch.intensity.dim() != dimension {
                return Err(ModelError::DimensionMismatch {
                    context: format!("intensity of channel {i}"),
                    expected: dimension,
                    found: ch.intensity.dim(),
                });
            }
            if ch.jump.iter().all(|&c| c == 0) {
                return Err(ModelError::ZeroJump);
            }
            match merged.iter_mut().find(|m| m.jump == ch.jump) {
                Some(existing) => existing.intensity = &existing.intensity + &ch.intensity,
                None => merged.push(ch),
            }
        }
        merged.retain(|c| !c.intensity.is_zero());
        Ok(Self { channels: merged })
    }

    pub fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }
}

/// The triplet `(b, 0, F)` on a finite lattice state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineModel {
    pub space: StateSpace,
    pub kernel: JumpKernel,
    pub drift: Option<AffineMap>,
}

impl AffineModel {
    pub fn new(space: StateSpace, channels: Vec<JumpChannel>) -> Result<Self, ModelError> {
        let kernel = JumpKernel::new(space.dimension(), channels)?;
        Ok(Self { space, kernel, drift: None })
    }

    pub fn with_drift(mut self, drift: AffineMap) -> Result<Self, ModelError> {
        if drift.dim() != self.dimension() || drift.matrix.iter().any(|r| r.len() != self.dimension()) {
            return Err(ModelError::DimensionMismatch {
                context: "drift".into(),
                expected: self.dimension(),
                found: drift.dim(),
            });
        }
        self.drift = Some(drift);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn channels(&self) -> &[JumpChannel] {
        self.kernel.channels()
    }

    /// `Λ(x) = Σ_u λ_u(x)`.
    pub fn total_intensity(&self, x: &[i64]) -> Rational {
        self.channels()
            .iter()
            .fold(Rational::zero(), |acc, ch| acc + ch.intensity.eval(x))
    }

    /// The jump sizes that actually occur: channels with `λ_u(x) > 0` for
    /// some `x ∈ E`.
    pub fn jump_set(&self) -> Vec<Point> {
        self.channels()
            .iter()
            .filter(|ch| self.space.points().iter().any(|x| ch.intensity.eval(x).is_positive()))
            .map(|ch| ch.jump.clone())
            .collect()
    }

    /// Validates and returns the report, or the list of issues as an error.
    pub fn ensure_valid(&self) -> Result<ValidationReport, ModelError> {
        let report = validate_model(self);
        if report.is_valid() {
            Ok(report)
        } else {
            Err(ModelError::Invalid(report.issues))
        }
    }

    /// The image of this model under an invertible affine map `T`: states
    /// `T(E)`, jumps `A u` (with `A` the linear part), intensities `λ_u ∘ T⁻¹`.
    /// Fails unless the image is again a lattice model.
    pub fn transformed(&self, map: &AffineMap) -> Result<AffineModel, ModelError> {
        let inverse = map.inverse().ok_or(ModelError::SingularMap)?;
        let to_lattice = |v: Vec<Rational>, what: &str| -> Result<Point, ModelError> {
            v.iter()
                .map(crate::rational::as_integer)
                .collect::<Option<Point>>()
                .ok_or_else(|| ModelError::NonLatticeImage(format!("{what} has non-integer image")))
        };
        let points = self
            .space
            .points()
            .iter()
            .map(|x| to_lattice(map.apply(x), "state"))
            .collect::<Result<Vec<_>, _>>()?;
        let channels = self
            .channels()
            .iter()
            .map(|ch| {
                Ok(JumpChannel::new(
                    to_lattice(map.apply_linear(&ch.jump), "jump")?,
                    ch.intensity.compose(&inverse),
                ))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let space = StateSpace::new(self.dimension(), points)?;
        let mut out = AffineModel::new(space, channels)?;
        if let Some(b) = &self.drift {
            // b transforms as a vector field: A · b(T⁻¹ y).
            let linear = AffineMap::new(map.matrix.clone(), vec![Rational::zero(); map.dim()]);
            out.drift = Some(linear.compose(&b.compose(&inverse)));
        }
        Ok(out)
    }
}

/// One failed check of [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ValidationIssue {
    NegativeIntensity { state: Point, jump: Point, value: String },
    SupportViolation { state: Point, jump: Point },
    DegenerateSpan { span: usize, dimension: usize },
    LatticeDrift { state: Point },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeIntensity { state, jump, value } => {
                write!(f, "intensity of jump {jump:?} is {value} < 0 at {state:?}")
            }
            Self::SupportViolation { state, jump } => {
                write!(f, "jump {jump:?} has positive intensity at {state:?} but leaves the state space")
            }
            Self::DegenerateSpan { span, dimension } => {
                write!(f, "affine span of the states has dimension {span} < {dimension}")
            }
            Self::LatticeDrift { state } => write!(f, "nonzero drift at lattice state {state:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub dimension: usize,
    pub states: usize,
    pub channels: usize,
    pub span_dim: usize,
    /// `∫ (|ξ|² ∧ 1) F(x, dξ) < ∞`; always true for finitely many atoms.
    pub levy_integrable: bool,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks, for every `x ∈ E` and channel `(u, λ_u)`: `λ_u(x) ≥ 0`, and
/// `λ_u(x) > 0 ⟹ x + u ∈ E`. Also checks that `E` affinely spans `R^d` and
/// that any drift vanishes on `E`.
pub fn validate_model(model: &AffineModel) -> ValidationReport {
    let mut issues = Vec::new();
    let space = &model.space;
    if space.span_dim() < space.dimension() {
        issues.push(ValidationIssue::DegenerateSpan {
            span: space.span_dim(),
            dimension: space.dimension(),
        });
    }
    for x in space.points() {
        for ch in model.channels() {
            let value = ch.intensity.eval(x);
            if value.is_negative() {
                issues.push(ValidationIssue::NegativeIntensity {
                    state: x.clone(),
                    jump: ch.jump.clone(),
                    value: format_rational(&value),
                });
            } else if value.is_positive() {
                let target: Point = x.iter().zip(&ch.jump).map(|(a, b)| a + b).collect();
                if !space.contains(&target) {
                    issues.push(ValidationIssue::SupportViolation {
                        state: x.clone(),
                        jump: ch.jump.clone(),
                    });
                }
            }
        }
        if let Some(b) = &model.drift {
            if b.apply(x).iter().any(|v| !v.is_zero()) {
                issues.push(ValidationIssue::LatticeDrift { state: x.clone() });
            }
        }
    }
    ValidationReport {
        dimension: space.dimension(),
        states: space.len(),
        channels: model.channels().len(),
        span_dim: space.span_dim(),
        levy_integrable: true,
        issues,
    }
}

/// Lattice point representing state `i` (0-based) of an `n`-state chain
/// embedded in `Z^{n-1}`: state 0 is the origin, state `i ≥ 1` is `e_i`.
pub fn markov_state_point(i: usize, n: usize) -> Point {
    let mut p = vec![0; n.saturating_sub(1)];
    if i > 0 {
        p[i - 1] = 1;
    }
    p
}

/// Views a finite-state Markov chain with rate matrix `q` as an affine jump
/// process.
///
/// The chain is embedded on the corners of the unit simplex in `Z^{n-1}`
/// (see [`markov_state_point`]): the occupation indicator of state `i ≥ 1`
/// is the coordinate `x_i` and that of state 0 is `1 − Σ x_j`. Each ordered
/// pair `(i, j)` with `q_ij > 0` becomes a channel with jump `p_j − p_i` and
/// intensity `q_ij · 1{state i}(x)`, which is affine in `x`.
pub fn embed_markov_chain(q: &[Vec<Rational>]) -> Result<AffineModel, ModelError> {
    let n = q.len();
    if n == 0 {
        return Err(ModelError::MalformedRateMatrix("empty matrix".into()));
    }
    for (i, row) in q.iter().enumerate() {
        if row.len() != n {
            return Err(ModelError::MalformedRateMatrix(format!("row {i} has length {}", row.len())));
        }
        for (j, v) in row.iter().enumerate() {
            if i != j && v.is_negative() {
                return Err(ModelError::MalformedRateMatrix(format!("negative rate q[{i}][{j}]")));
            }
        }
        let sum = row.iter().fold(Rational::zero(), |a, b| a + b);
        if !sum.is_zero() {
            return Err(ModelError::MalformedRateMatrix(format!("row {i} does not sum to zero")));
        }
    }
    let d = n - 1;
    let indicator = |i: usize| -> AffineFunctional {
        if i == 0 {
            AffineFunctional::new(vec![-Rational::one(); d], Rational::one())
        } else {
            AffineFunctional::coordinate(d, i - 1)
        }
    };
    let points: Vec<Point> = (0..n).map(|i| markov_state_point(i, n)).collect();
    let mut channels = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || q[i][j].is_zero() {
                continue;
            }
            let jump = points[j].iter().zip(&points[i]).map(|(a, b)| a - b).collect();
            channels.push(JumpChannel::new(jump, indicator(i).scaled(&q[i][j])));
        }
    }
    AffineModel::new(StateSpace::new(d, points)?, channels)
}

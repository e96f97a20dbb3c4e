//! Polynomial Riccati systems for `E_x[e^{⟨u, X_t⟩}] = Φ Π_j Ψ_j^{x_j}`.
//!
//! Writing each intensity as `λ_u(x) = ν₀(u) + Σ_j x_j ν_j(u)`, the pair
//! `(Φ, Ψ)` solves
//!
//! ```text
//! ∂tΦ   = Φ · Σ_u ν₀(u) (Ψ^u − 1)
//! ∂tΨ_j =     Σ_u ν_j(u) (Ψ^{u+e_j} − Ψ_j)
//! ```
//!
//! with `Φ(0) = 1`, `Ψ_j(0) = e^{u_j}`. The right-hand sides are polynomials
//! exactly when every atom of `ν₀` lies in `N^k` and every atom `u` of `ν_j`
//! has `u + e_j ∈ N^k`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use super::ode::{integrate, SolverOptions};
use super::polynomial::{CompiledPolynomial, SparsePolynomial};
use super::TransformError;
use crate::counters::build_transform;
use crate::linalg::{inverse, transpose};
use crate::model::{AffineMap, AffineModel, Point};
use crate::rational::{to_f64, Rational};

/// Signed atoms `jump → weight`, zero weights omitted.
pub type SignedMeasure = BTreeMap<Point, Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelDecomposition {
    pub nu0: SignedMeasure,
    pub nuj: Vec<SignedMeasure>,
}

impl KernelDecomposition {
    pub fn k(&self) -> usize {
        self.nuj.len()
    }

    /// `ν₀(u) + Σ_j x_j ν_j(u)`.
    pub fn intensity(&self, u: &[i64], x: &[i64]) -> Rational {
        let mut total = self.nu0.get(u).cloned().unwrap_or_else(Rational::zero);
        for (nu, &xj) in self.nuj.iter().zip(x) {
            if let Some(w) = nu.get(u) {
                total += w * Rational::from_integer(xj.into());
            }
        }
        total
    }
}

fn push_atom(measure: &mut SignedMeasure, jump: &Point, weight: &Rational) {
    if weight.is_zero() {
        return;
    }
    let slot = measure.entry(jump.clone()).or_insert_with(Rational::zero);
    *slot += weight;
    if slot.is_zero() {
        measure.remove(jump);
    }
}

/// Reads off the affine coefficients of every channel. The model must live in
/// counter coordinates: `E ⊆ N^d` and no drift.
pub fn decompose_kernel(model: &AffineModel) -> Result<KernelDecomposition, TransformError> {
    let d = model.dimension();
    if model.drift.is_some() {
        return Err(TransformError::NotCounterCoordinates("model has a drift".into()));
    }
    if let Some(x) = model.space.points().iter().find(|x| x.iter().any(|&v| v < 0)) {
        return Err(TransformError::NotCounterCoordinates(format!("state {x:?} is not in N^{d}")));
    }
    let mut nu0 = SignedMeasure::new();
    let mut nuj = vec![SignedMeasure::new(); d];
    for ch in model.channels() {
        push_atom(&mut nu0, &ch.jump, &ch.intensity.offset);
        for (nu, c) in nuj.iter_mut().zip(&ch.intensity.linear) {
            push_atom(nu, &ch.jump, c);
        }
    }
    Ok(KernelDecomposition { nu0, nuj })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiccatiSystem {
    pub k: usize,
    pub phi_rhs: SparsePolynomial,
    pub psi_rhs: Vec<SparsePolynomial>,
}

fn exponent(u: &[i64], shift: Option<usize>) -> Option<Vec<u32>> {
    u.iter()
        .enumerate()
        .map(|(i, &v)| {
            let v = v + i64::from(shift == Some(i));
            u32::try_from(v).ok()
        })
        .collect()
}

pub fn build_riccati(decomp: &KernelDecomposition) -> Result<RiccatiSystem, TransformError> {
    let k = decomp.k();
    let mut phi_rhs = SparsePolynomial::zero(k);
    for (u, w) in &decomp.nu0 {
        let e = exponent(u, None).ok_or_else(|| TransformError::NonPolynomialSystem { measure: 0, jump: u.clone() })?;
        phi_rhs.add_term(e, w.clone());
        phi_rhs.add_term(vec![0; k], -w.clone());
    }
    let mut psi_rhs = Vec::with_capacity(k);
    for (j, nu) in decomp.nuj.iter().enumerate() {
        let mut p = SparsePolynomial::zero(k);
        let mut ej = vec![0; k];
        ej[j] = 1;
        for (u, w) in nu {
            let e = exponent(u, Some(j))
                .ok_or_else(|| TransformError::NonPolynomialSystem { measure: j + 1, jump: u.clone() })?;
            p.add_term(e, w.clone());
            p.add_term(ej.clone(), -w.clone());
        }
        psi_rhs.push(p);
    }
    Ok(RiccatiSystem { k, phi_rhs, psi_rhs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformValue {
    pub phi: Complex64,
    pub psi: Vec<Complex64>,
}

impl TransformValue {
    pub fn initial(u: &[Complex64]) -> Self {
        Self { phi: Complex64::one(), psi: u.iter().map(|z| z.exp()).collect() }
    }

    /// `Φ Π_j Ψ_j^{x_j}` with `0⁰ = 1`.
    pub fn evaluate(&self, x: &[i64]) -> Complex64 {
        let mut value = self.phi;
        for (p, &xj) in self.psi.iter().zip(x) {
            if xj != 0 {
                value *= p.powi(xj as i32);
            }
        }
        value
    }
}

impl RiccatiSystem {
    pub fn compile(&self) -> CompiledRiccati {
        CompiledRiccati {
            phi: self.phi_rhs.compile(),
            psi: self.psi_rhs.iter().map(SparsePolynomial::compile).collect(),
        }
    }
}

/// Floating-point right-hand side of a [`RiccatiSystem`].
#[derive(Debug, Clone)]
pub struct CompiledRiccati {
    phi: CompiledPolynomial,
    psi: Vec<CompiledPolynomial>,
}

impl CompiledRiccati {
    /// Right-hand side on the state `(Φ, Ψ_1, …, Ψ_k)`.
    pub fn rhs(&self, state: &[Complex64], out: &mut [Complex64]) {
        let psi = &state[1..];
        out[0] = state[0] * self.phi.eval(psi);
        for (o, p) in out[1..].iter_mut().zip(&self.psi) {
            *o = p.eval(psi);
        }
    }

    pub fn solve(&self, u: &[Complex64], t: f64, opts: &SolverOptions) -> Result<TransformValue, TransformError> {
        if u.len() != self.psi.len() {
            return Err(TransformError::InvalidArgument(format!(
                "u has {} components, system has {}",
                u.len(),
                self.psi.len()
            )));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(TransformError::InvalidArgument(format!("t must be a finite nonnegative number, got {t}")));
        }
        let init = TransformValue::initial(u);
        let mut y0 = vec![init.phi];
        y0.extend(init.psi);
        let y = integrate(|y, dy| self.rhs(y, dy), &y0, t, opts)?;
        Ok(TransformValue { phi: y[0], psi: y[1..].to_vec() })
    }
}

pub fn solve_riccati(system: &RiccatiSystem, u: &[Complex64], t: f64) -> Result<TransformValue, TransformError> {
    system.compile().solve(u, t, &SolverOptions::default())
}

pub fn solve_riccati_with(
    system: &RiccatiSystem,
    u: &[Complex64],
    t: f64,
    opts: &SolverOptions,
) -> Result<TransformValue, TransformError> {
    system.compile().solve(u, t, opts)
}

/// Riccati machinery for a model in its original coordinates.
///
/// With `y = T(x) = A x + c` the counter coordinates,
/// `⟨u, x⟩ = ⟨w, y⟩ − ⟨w, c⟩` where `w = A^{-T} u`, so
/// `E_x[e^{⟨u, X_t⟩}] = e^{−⟨w, c⟩} Φ_w Π_j Ψ_{w,j}^{y_j}`.
#[derive(Debug, Clone)]
pub struct ModelTransform {
    pub counter_map: AffineMap,
    pub decomposition: KernelDecomposition,
    pub system: RiccatiSystem,
    compiled: CompiledRiccati,
    dual: Vec<Vec<f64>>,
    offset: Vec<f64>,
    coordinates: Vec<Point>,
}

impl ModelTransform {
    pub fn new(model: &AffineModel) -> Result<Self, TransformError> {
        let transform = build_transform(model)?;
        let d = model.dimension();
        if transform.k != d {
            return Err(TransformError::NotCounterCoordinates(format!(
                "only {} of {d} coordinates are jump counters",
                transform.k
            )));
        }
        let image = model.transformed(&transform.map)?;
        let decomposition = decompose_kernel(&image)?;
        let system = build_riccati(&decomposition)?;
        let a_inv = inverse(&transform.map.matrix).expect("counter map is invertible");
        let dual = transpose(&a_inv, d)
            .iter()
            .map(|row| row.iter().map(to_f64).collect())
            .collect();
        let coordinates = model
            .space
            .points()
            .iter()
            .map(|x| {
                transform
                    .map
                    .apply(x)
                    .iter()
                    .map(|v| crate::rational::as_integer(v).expect("counter coordinates are integers"))
                    .collect()
            })
            .collect();
        Ok(Self {
            offset: transform.map.offset.iter().map(to_f64).collect(),
            compiled: system.compile(),
            counter_map: transform.map,
            decomposition,
            system,
            dual,
            coordinates,
        })
    }

    /// `w = A^{-T} u`.
    pub fn dual_argument(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.dual
            .iter()
            .map(|row| row.iter().zip(u).map(|(a, z)| z * a).sum())
            .collect()
    }

    /// Solves in counter coordinates; returns the solution and the prefactor
    /// `e^{−⟨w, c⟩}`.
    pub fn solve(&self, u: &[Complex64], t: f64, opts: &SolverOptions) -> Result<(TransformValue, Complex64), TransformError> {
        let w = self.dual_argument(u);
        let value = self.compiled.solve(&w, t, opts)?;
        let shift: Complex64 = w.iter().zip(&self.offset).map(|(z, c)| z * c).sum();
        Ok((value, (-shift).exp()))
    }

    /// `E_x[e^{⟨u, X_t⟩}]` for every state, in state-space order.
    pub fn evaluate(&self, u: &[Complex64], t: f64, opts: &SolverOptions) -> Result<Vec<Complex64>, TransformError> {
        let (value, prefactor) = self.solve(u, t, opts)?;
        Ok(self.coordinates.iter().map(|y| prefactor * value.evaluate(y)).collect())
    }

    /// Counter coordinates `T(x)` of each state, in state-space order.
    pub fn coordinates(&self) -> &[Point] {
        &self.coordinates
    }

    pub fn compiled(&self) -> &CompiledRiccati {
        &self.compiled
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{make_birth_death, make_uniform_simplex};
    use crate::rational::int;

    #[test]
    fn birth_death_decomposition() {
        let d = decompose_kernel(&make_birth_death(3, int(2), int(1)).unwrap()).unwrap();
        assert_eq!(d.nu0, SignedMeasure::from([(vec![1], int(3))]));
        assert_eq!(d.nuj[0], SignedMeasure::from([(vec![-1], int(2)), (vec![1], int(-1))]));
    }

    #[test]
    fn zero_at_unit_argument() {
        let model = make_uniform_simplex(2, 3, int(1)).unwrap();
        let sys = build_riccati(&decompose_kernel(&model).unwrap()).unwrap();
        let ones = vec![int(1); 2];
        assert!(sys.phi_rhs.eval_rational(&ones).is_zero());
        assert!(sys.psi_rhs.iter().all(|p| p.eval_rational(&ones).is_zero()));
    }

    #[test]
    fn non_polynomial_jump_is_rejected() {
        let decomp = KernelDecomposition { nu0: SignedMeasure::from([(vec![-1], int(1))]), nuj: vec![SignedMeasure::new()] };
        assert!(matches!(build_riccati(&decomp), Err(TransformError::NonPolynomialSystem { measure: 0, .. })));
        let decomp = KernelDecomposition { nu0: SignedMeasure::new(), nuj: vec![SignedMeasure::from([(vec![-2], int(1))])] };
        assert!(matches!(build_riccati(&decomp), Err(TransformError::NonPolynomialSystem { measure: 1, .. })));
    }

    #[test]
    fn initial_value_at_time_zero() {
        let sys = build_riccati(&decompose_kernel(&make_birth_death(2, int(1), int(1)).unwrap()).unwrap()).unwrap();
        let u = [Complex64::new(0.1, 0.4)];
        let v = solve_riccati(&sys, &u, 0.0).unwrap();
        assert_eq!(v.phi, Complex64::one());
        assert_eq!(v.psi[0], u[0].exp());
    }
}

//! Explicit transform of the birth–death process.

use num_complex::Complex64;

use super::riccati::TransformValue;

/// `(Φ, Ψ)` for the birth–death process on `{0, …, n}` with rates `x·alpha`
/// down and `(n − x)·beta` up. With `s = alpha + beta` and `D = e^{−ts}`:
///
/// ```text
/// Φ = ((alpha + beta·(e^u + (1 − e^u)·D)) / s)^n
/// Ψ = 1 + s·(e^u − 1)·D / ((beta·e^u + alpha) − beta·(e^u − 1)·D)
/// ```
pub fn closed_form_1d(n: u32, alpha: f64, beta: f64, u: Complex64, t: f64) -> TransformValue {
    let s = alpha + beta;
    let eu = u.exp();
    let decay = (-t * s).exp();
    let base = (alpha + beta * (eu + (1.0 - eu) * decay)) / s;
    let psi = 1.0 + s * (eu - 1.0) * decay / ((beta * eu + alpha) - beta * (eu - 1.0) * decay);
    TransformValue { phi: base.powu(n), psi: vec![psi] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument_is_trivial() {
        let v = closed_form_1d(4, 2.0, 1.0, Complex64::new(0.0, 0.0), 0.7);
        assert_eq!(v.phi, Complex64::new(1.0, 0.0));
        assert_eq!(v.psi[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn pure_death_vanishes_at_log_two() {
        let u = Complex64::new(0.0, std::f64::consts::PI);
        let v = closed_form_1d(1, 1.0, 0.0, u, std::f64::consts::LN_2);
        assert!(v.psi[0].norm() < 1e-15);
    }

    #[test]
    fn initial_condition() {
        let u = Complex64::new(0.2, -0.9);
        let v = closed_form_1d(3, 2.0, 1.0, u, 0.0);
        assert!((v.phi - 1.0).norm() < 1e-15);
        assert!((v.psi[0] - u.exp()).norm() < 1e-15);
    }
}

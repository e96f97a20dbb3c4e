//! Riccati systems against the closed form and the uniformization oracle.

use std::f64::consts::{LN_2, PI};

use affine_core::classify::{make_birth_death, make_layer_example, make_uniform_simplex};
use affine_core::model::embed_markov_chain;
use affine_core::rational::{int, ratio};
use affine_core::transforms::{
    build_riccati, closed_form_1d, decompose_kernel, find_psi_zero, solve_riccati, transform_oracle,
    ModelTransform, SearchRectangle, SolverOptions, TransformError,
};
use affine_core::{AffineMap, AffineModel, Rational};
use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn chain(n: usize, rate: impl Fn(usize, usize) -> Rational) -> AffineModel {
    let q: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n).map(|j| if i == j { Rational::zero() } else { rate(i, j) }).collect();
            let total = row.iter().fold(Rational::zero(), |a, b| a + b);
            row[i] = -total;
            row
        })
        .collect();
    embed_markov_chain(&q).unwrap()
}

/// Birth–death N ≤ 3, planar simplex N ≤ 3 and fully connected chains with
/// up to four states.
fn fleet() -> Vec<(String, AffineModel)> {
    let mut out = Vec::new();
    for n in 1..=3u32 {
        out.push((format!("birth-death {n}"), make_birth_death(n, int(2), int(1)).unwrap()));
        out.push((format!("pure death {n}"), make_birth_death(n, ratio(3, 2), int(0)).unwrap()));
        out.push((format!("simplex {n}"), make_uniform_simplex(2, n, int(1)).unwrap()));
    }
    for n in 2..=4 {
        out.push((format!("chain {n}"), chain(n, |i, j| ratio((i + 2 * j + 1) as i64, 2))));
    }
    out
}

fn grid(d: usize) -> Vec<(Vec<Complex64>, f64)> {
    let points = [(0.3, 0.1), (0.7, 1.0), (1.2, 5.0), (-0.9, 0.4), (2.5, 2.0)];
    points
        .iter()
        .map(|&(s, t)| ((0..d).map(|j| c(0.0, s * (1.0 + 0.5 * j as f64))).collect(), t))
        .collect()
}

#[test]
fn birth_death_system_matches_formula() {
    for (n, a, b) in [(3u32, int(2), int(1)), (5, ratio(1, 3), ratio(7, 2)), (1, int(1), int(0))] {
        let sys = build_riccati(&decompose_kernel(&make_birth_death(n, a.clone(), b.clone()).unwrap()).unwrap()).unwrap();
        assert_eq!(sys.psi_rhs[0].coefficient(&[0]), a);
        assert_eq!(sys.psi_rhs[0].coefficient(&[1]), &b - &a);
        assert_eq!(sys.psi_rhs[0].coefficient(&[2]), -b.clone());
        assert_eq!(sys.phi_rhs.coefficient(&[1]), int(i64::from(n)) * &b);
    }
}

#[test]
fn empty_kernel_gives_zero_system() {
    let model = AffineModel::new(affine_core::StateSpace::simplex(2, 2), vec![]).unwrap();
    let decomp = decompose_kernel(&model).unwrap();
    assert!(decomp.nu0.is_empty() && decomp.nuj.iter().all(|m| m.is_empty()));
    let sys = build_riccati(&decomp).unwrap();
    assert!(sys.phi_rhs.is_zero() && sys.psi_rhs.iter().all(|p| p.is_zero()));
}

#[test]
fn decomposition_reconstructs_intensities() {
    for (_, model) in fleet() {
        let Ok(decomp) = decompose_kernel(&model) else { continue };
        for x in model.space.points() {
            for ch in model.channels() {
                assert_eq!(decomp.intensity(&ch.jump, x), ch.intensity.eval(x));
            }
        }
    }
}

#[test]
fn negative_coordinates_are_not_counter_coordinates() {
    let shifted = make_birth_death(2, int(1), int(1))
        .unwrap()
        .transformed(&AffineMap::new(vec![vec![int(1)]], vec![int(-1)]))
        .unwrap();
    assert!(matches!(decompose_kernel(&shifted), Err(TransformError::NotCounterCoordinates(_))));
    // The model-level wrapper normalizes first.
    assert!(ModelTransform::new(&shifted).is_ok());
}

#[test]
fn layer_example_system_is_polynomial() {
    let sys = build_riccati(&decompose_kernel(&make_layer_example()).unwrap()).unwrap();
    // Jumps (2,-1) and (3,-1) at rate x2 produce Psi1^2 and Psi1^3 in dPsi2.
    assert_eq!(sys.psi_rhs[1].coefficient(&[2, 0]), int(1));
    assert_eq!(sys.psi_rhs[1].coefficient(&[3, 0]), int(1));
    assert_eq!(sys.psi_rhs[1].coefficient(&[0, 1]), int(-3));
}

#[test]
fn closed_form_agrees_with_riccati() {
    let sys = build_riccati(&decompose_kernel(&make_birth_death(3, int(2), int(1)).unwrap()).unwrap()).unwrap();
    let u = c(0.0, 0.7);
    let r = solve_riccati(&sys, &[u], 1.0).unwrap();
    let cf = closed_form_1d(3, 2.0, 1.0, u, 1.0);
    assert!((r.phi - cf.phi).norm() < 1e-8);
    assert!((r.psi[0] - cf.psi[0]).norm() < 1e-8);
}

#[test]
fn closed_form_approaches_binomial_law() {
    let (n, a, b) = (3u32, 2.0, 1.0);
    let u = c(0.2, 0.9);
    let cf = closed_form_1d(n, a, b, u, 50.0);
    let p = b / (a + b);
    let binomial: Complex64 = (0..=n)
        .map(|k| {
            let choose = [1.0, 3.0, 3.0, 1.0][k as usize];
            (u * f64::from(k)).exp() * choose * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
        })
        .sum();
    for x in 0..=3 {
        assert!((cf.evaluate(&[x]) - binomial).norm() < 1e-12);
    }
}

#[test]
fn oracle_matches_two_state_transition_probability() {
    let model = chain(2, |i, _| if i == 0 { int(1) } else { int(2) });
    // From x = 0, E[e^{uX}] = 1 + (e^u − 1) P(X = 1).
    let u = c(0.0, 1.0);
    let v = transform_oracle(&model, &[u], 1.0);
    let p12 = (u.exp() - 1.0).inv() * (v[0] - 1.0);
    let exact = (1.0 - (-3.0f64).exp()) / 3.0;
    assert!((p12 - exact).norm() < 1e-12);
}

#[test]
fn closed_form_matches_oracle() {
    for (n, a, b) in [(1u32, 1.0, 0.0), (3, 2.0, 1.0), (2, 0.5, 3.0)] {
        let model = make_birth_death(n, Rational::from_float(a).unwrap(), Rational::from_float(b).unwrap()).unwrap();
        for (u, t) in grid(1) {
            let cf = closed_form_1d(n, a, b, u[0], t);
            let oracle = transform_oracle(&model, &u, t);
            for (x, o) in model.space.points().iter().zip(oracle) {
                assert!((cf.evaluate(x) - o).norm() < 1e-10, "n={n} x={x:?} u={u:?} t={t}");
            }
        }
    }
}

#[test]
fn riccati_matches_oracle_across_fleet() {
    let opts = SolverOptions::default();
    for (name, model) in fleet() {
        let transform = ModelTransform::new(&model).unwrap();
        for (u, t) in grid(model.dimension()) {
            let riccati = transform.evaluate(&u, t, &opts).unwrap();
            let oracle = transform_oracle(&model, &u, t);
            for (x, (r, o)) in model.space.points().iter().zip(riccati.iter().zip(&oracle)) {
                assert!((r - o).norm() < 1e-7, "{name}: x={x:?} t={t} riccati {r} oracle {o}");
                assert!(r.norm() <= 1.0 + 1e-9, "{name}: characteristic function exceeds 1");
            }
        }
    }
}

#[test]
fn planar_simplex_reference_point() {
    let model = make_uniform_simplex(2, 3, int(1)).unwrap();
    let transform = ModelTransform::new(&model).unwrap();
    let u = [c(0.0, 0.3), c(0.0, -0.5)];
    let riccati = transform.evaluate(&u, 0.8, &SolverOptions::default()).unwrap();
    let oracle = transform_oracle(&model, &u, 0.8);
    for (r, o) in riccati.iter().zip(&oracle) {
        assert!((r - o).norm() < 1e-8);
    }
}

#[test]
fn tighter_tolerance_never_hurts() {
    let model = make_uniform_simplex(2, 3, ratio(3, 2)).unwrap();
    let transform = ModelTransform::new(&model).unwrap();
    let u = [c(0.0, 1.1), c(0.0, -0.4)];
    let oracle = transform_oracle(&model, &u, 2.0);
    let discrepancy = |tol: f64| -> f64 {
        let r = transform.evaluate(&u, 2.0, &SolverOptions::with_tolerance(tol)).unwrap();
        r.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    };
    let mut tol = 1e-3;
    let mut previous = discrepancy(tol);
    while tol > 1e-11 {
        tol /= 2.0;
        let current = discrepancy(tol);
        // Below ~1e-12 both values are oracle/rounding noise.
        assert!(current <= previous.max(1e-12), "tol {tol:e}: {current:e} > {previous:e}");
        previous = current;
    }
}

#[test]
fn psi_zero_is_located() {
    let sys = build_riccati(&decompose_kernel(&make_birth_death(1, int(1), int(0)).unwrap()).unwrap()).unwrap();
    for t in [LN_2, 1.0] {
        let want = c((t.exp() - 1.0).ln(), PI);
        let found = find_psi_zero(&sys, t, SearchRectangle::around(want, 0.5), 21).unwrap().expect("zero");
        assert!((found - want).norm() < 1e-6, "t={t}: {found}");
    }
    let sym = build_riccati(&decompose_kernel(&make_birth_death(1, int(1), int(1)).unwrap()).unwrap()).unwrap();
    assert_eq!(find_psi_zero(&sym, 1.0, SearchRectangle::around(c(0.0, 0.0), 0.2), 11).unwrap(), None);
}

#[test]
fn zero_search_needs_one_counter() {
    let sys = build_riccati(&decompose_kernel(&make_uniform_simplex(2, 1, int(1)).unwrap()).unwrap()).unwrap();
    assert!(find_psi_zero(&sys, 1.0, SearchRectangle::around(c(0.0, 0.0), 1.0), 5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_argument_is_a_fixed_point(
        n in 1u32..=4,
        lambda in proptest::array::uniform6((0i64..5, 1i64..3).prop_map(|(a, b)| ratio(a, b))),
    ) {
        let model = affine_core::classify::make_simplex(
            2, n, &affine_core::classify::planar_simplex_rates(lambda)).unwrap();
        let sys = build_riccati(&decompose_kernel(&model).unwrap()).unwrap();
        let ones = vec![int(1); 2];
        prop_assert!(sys.phi_rhs.eval_rational(&ones).is_zero());
        for p in &sys.psi_rhs {
            prop_assert!(p.eval_rational(&ones).is_zero());
        }
        let v = solve_riccati(&sys, &[c(0.0, 0.0), c(0.0, 0.0)], 1.5).unwrap();
        prop_assert!((v.phi - 1.0).norm() < 1e-12);
        prop_assert!(v.psi.iter().all(|p| (p - 1.0).norm() < 1e-12));
    }

    #[test]
    fn characteristic_function_is_bounded(s1 in -3.0f64..3.0, s2 in -3.0f64..3.0, t in 0.0f64..4.0) {
        let model = make_uniform_simplex(2, 2, int(1)).unwrap();
        let transform = ModelTransform::new(&model).unwrap();
        let values = transform.evaluate(&[c(0.0, s1), c(0.0, s2)], t, &SolverOptions::default()).unwrap();
        prop_assert!(values.iter().all(|v| v.norm() <= 1.0 + 1e-9));
    }
}


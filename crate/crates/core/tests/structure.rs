//! Models, jump counters and classification.

use std::collections::BTreeMap;

use affine_core::classify::{
    classify_1d, classify_2d, classify_model, is_irreducible, make_birth_death, make_independent_product,
    make_layer_example, make_simplex, make_uniform_simplex, planar_simplex_rates, Case2D, Classification,
    ClassifyError, Kind1D,
};
use affine_core::counters::{
    boundary_set, build_transform, compute_jump_counter, pairwise_case, CounterError, CounterRelation,
    NoCounterReason,
};
use affine_core::model::{embed_markov_chain, markov_state_point, validate_model, ValidationIssue};
use affine_core::rational::{int, ratio};
use affine_core::{AffineFunctional, AffineMap, AffineModel, JumpChannel, Rational, StateSpace};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (0i64..6, 1i64..4).prop_map(|(n, d)| ratio(n, d))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..6, 1i64..4).prop_map(|(n, d)| ratio(n, d))
}

fn rate_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    proptest::collection::vec(rational(), n * n).prop_map(move |flat| {
        let mut q: Vec<Vec<Rational>> = flat.chunks(n).map(|r| r.to_vec()).collect();
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = Rational::zero();
            let total = row.iter().fold(Rational::zero(), |a, b| a + b);
            row[i] = -total;
        }
        q
    })
}

/// Unimodular integer matrices with small entries, plus an integer offset.
fn unimodular_map() -> impl Strategy<Value = AffineMap> {
    (-2i64..=2, -2i64..=2, any::<bool>(), any::<bool>(), -3i64..=3, -3i64..=3).prop_map(|(a, b, swap, flip, c1, c2)| {
        // [[1, a], [0, 1]] · [[1, 0], [b, 1]], optionally with a row swap and sign flip.
        let mut m = [vec![1 + a * b, a], vec![b, 1]];
        if swap {
            m.swap(0, 1);
        }
        if flip {
            m[0] = m[0].iter().map(|v| -v).collect();
        }
        AffineMap::new(m.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(), vec![int(c1), int(c2)])
    })
}

fn planar_models() -> Vec<AffineModel> {
    vec![
        make_uniform_simplex(2, 3, int(1)).unwrap(),
        make_layer_example(),
        make_independent_product((2, int(1), int(2)), (3, int(1), int(1))).unwrap(),
    ]
}

#[test]
fn two_state_chain_embeds_as_birth_death() {
    let q = vec![vec![int(-1), int(1)], vec![int(2), int(-2)]];
    let model = embed_markov_chain(&q).unwrap();
    assert!(validate_model(&model).is_valid());
    assert_eq!(model.space.points(), &[vec![0], vec![1]]);
    let reference = make_birth_death(1, int(2), int(1)).unwrap();
    let mut got = model.channels().to_vec();
    let mut want = reference.channels().to_vec();
    got.sort_by(|a, b| a.jump.cmp(&b.jump));
    want.sort_by(|a, b| a.jump.cmp(&b.jump));
    assert_eq!(got, want);
    assert_eq!(markov_state_point(1, 2), vec![1]);
}

#[test]
fn one_state_chain_is_zero_dimensional() {
    let model = embed_markov_chain(&[vec![int(0)]]).unwrap();
    assert_eq!(model.dimension(), 0);
    assert!(validate_model(&model).is_valid());
}

#[test]
fn malformed_rate_matrices_are_rejected() {
    assert!(embed_markov_chain(&[vec![int(-1), int(2)], vec![int(1), int(-1)]]).is_err());
    assert!(embed_markov_chain(&[vec![int(1), int(-1)], vec![int(1), int(-1)]]).is_err());
    assert!(embed_markov_chain(&[vec![int(0), int(0)]]).is_err());
}

#[test]
fn validation_reports_each_failure() {
    let space = StateSpace::interval(2);
    let negative = AffineModel::new(
        space.clone(),
        vec![
            JumpChannel::new(vec![-1], AffineFunctional::new(vec![int(1)], int(-1))),
            JumpChannel::new(vec![1], AffineFunctional::constant(1, int(1))),
        ],
    )
    .unwrap();
    let report = validate_model(&negative);
    assert!(report.issues.iter().any(|i| matches!(i, ValidationIssue::NegativeIntensity { .. })));
    assert!(report.issues.iter().any(|i| matches!(i, ValidationIssue::SupportViolation { .. })));

    let flat = StateSpace::new(2, vec![vec![0, 0], vec![1, 1], vec![2, 2]]).unwrap();
    let degenerate = AffineModel::new(flat, vec![]).unwrap();
    assert_eq!(
        validate_model(&degenerate).issues,
        vec![ValidationIssue::DegenerateSpan { span: 1, dimension: 2 }]
    );
}

#[test]
fn interval_counters_are_exact() {
    for n in 1..=5u32 {
        let space = StateSpace::interval(n);
        let down = compute_jump_counter(&space, &[-1]).unwrap();
        let up = compute_jump_counter(&space, &[1]).unwrap();
        assert_eq!(down.functional, AffineFunctional::coordinate(1, 0));
        assert_eq!(up.functional, AffineFunctional::new(vec![int(-1)], int(i64::from(n))));
    }
}

#[test]
fn counter_failures_name_a_reason() {
    let space = StateSpace::interval(4);
    let err = compute_jump_counter(&space, &[-2]).unwrap_err();
    assert!(matches!(err, CounterError::NoCounter { reason: NoCounterReason::BoundaryDimension { .. }, .. }));
    assert!(matches!(
        compute_jump_counter(&space, &[0]).unwrap_err(),
        CounterError::NoCounter { reason: NoCounterReason::ZeroJump, .. }
    ));
}

#[test]
fn layer_example_counters_and_pairs() {
    let model = make_layer_example();
    let space = &model.space;
    assert_eq!(boundary_set(space, &[-1, 0]).len(), 3);
    let counters: Vec<_> = model.jump_set().iter().map(|u| compute_jump_counter(space, u).unwrap()).collect();
    for cu in &counters {
        for cv in &counters {
            if cu.jump != cv.jump {
                let case = pairwise_case(cu, cv).unwrap();
                if cu.functional == cv.functional {
                    assert_eq!(case.case, CounterRelation::SameCounter);
                }
            }
        }
    }
}

#[test]
fn transform_of_spaced_interval() {
    let model = AffineModel::new(
        StateSpace::new(1, vec![vec![5], vec![7], vec![9]]).unwrap(),
        vec![JumpChannel::new(vec![-2], AffineFunctional::new(vec![ratio(1, 2)], ratio(-5, 2)))],
    )
    .unwrap();
    let t = build_transform(&model).unwrap();
    assert_eq!(t.k, 1);
    let image = model.transformed(&t.map).unwrap();
    assert_eq!(image.space.points(), &[vec![0], vec![1], vec![2]]);
    assert_eq!(image.channels()[0].jump, vec![-1]);
}

#[test]
fn classify_model_dispatch() {
    assert!(matches!(
        classify_model(&make_birth_death(2, int(1), int(1)).unwrap()).unwrap(),
        Classification::OneD(_)
    ));
    let deterministic = AffineModel::new(StateSpace::simplex(2, 2), vec![]).unwrap();
    assert!(matches!(classify_model(&deterministic).unwrap(), Classification::Reduced { k: 0, .. }));
    let three = make_uniform_simplex(3, 1, int(1)).unwrap();
    assert!(matches!(classify_model(&three), Err(ClassifyError::Unsupported(3))));
}

#[test]
fn irreducibility() {
    assert!(is_irreducible(&make_birth_death(3, int(1), int(1)).unwrap()));
    assert!(!is_irreducible(&make_birth_death(3, int(1), int(0)).unwrap()));
}

#[test]
fn simplex_with_one_rate_set_is_still_valid() {
    let rates = BTreeMap::from([((1, 0), int(1))]);
    let model = make_simplex(2, 2, &rates).unwrap();
    assert!(validate_model(&model).is_valid());
    assert!(make_simplex(2, 2, &BTreeMap::from([((3, 0), int(1))])).is_err());
    assert!(make_simplex(2, 2, &BTreeMap::from([((1, 0), int(-1))])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn markov_embedding_is_always_valid(q in (1usize..=5).prop_flat_map(rate_matrix)) {
        let n = q.len();
        let model = embed_markov_chain(&q).unwrap();
        let report = validate_model(&model);
        prop_assert!(report.is_valid(), "{:?}", report.issues);
        prop_assert_eq!(model.space.len(), n);
        // Rates are carried over exactly.
        for (i, row) in q.iter().enumerate() {
            let x = markov_state_point(i, n);
            for (j, rate) in row.iter().enumerate() {
                if i == j { continue; }
                let jump: Vec<i64> = markov_state_point(j, n).iter().zip(&x).map(|(a, b)| a - b).collect();
                let got = model.channels().iter().find(|c| c.jump == jump).map(|c| c.intensity.eval(&x));
                prop_assert_eq!(got.unwrap_or_else(Rational::zero), rate.clone());
            }
        }
    }

    #[test]
    fn span_is_invariant_under_unimodular_maps(map in unimodular_map(), which in 0usize..3) {
        let model = planar_models().swap_remove(which);
        let image = model.transformed(&map).unwrap();
        prop_assert_eq!(image.space.span_dim(), model.space.span_dim());
        prop_assert!(validate_model(&image).is_valid());
    }

    #[test]
    fn counters_are_unique_integral_and_count_steps(map in unimodular_map(), which in 0usize..3) {
        let model = planar_models().swap_remove(which).transformed(&map).unwrap();
        for u in model.jump_set() {
            let c = compute_jump_counter(&model.space, &u).unwrap();
            // Recomputing on a reordered point set gives the same functional.
            let mut pts = model.space.points().to_vec();
            pts.reverse();
            let again = compute_jump_counter(&StateSpace::new(2, pts).unwrap(), &u).unwrap();
            prop_assert_eq!(&again.functional, &c.functional);
            prop_assert_eq!(c.functional.increment(&u), int(-1));
            for x in model.space.points() {
                let v = c.eval(x);
                prop_assert!(v.is_integer() && !v.is_negative());
                let target: Vec<i64> = x.iter().zip(&u).map(|(a, b)| a + b).collect();
                prop_assert_eq!(v.is_zero(), !model.space.contains(&target));
            }
        }
    }

    #[test]
    fn trichotomy_holds_for_every_pair(map in unimodular_map(), which in 0usize..3) {
        let model = planar_models().swap_remove(which).transformed(&map).unwrap();
        let counters: Vec<_> =
            model.jump_set().iter().map(|u| compute_jump_counter(&model.space, u).unwrap()).collect();
        for cu in &counters {
            for cv in &counters {
                if cu.jump == cv.jump { continue; }
                let case = pairwise_case(cu, cv).unwrap();
                match case.case {
                    CounterRelation::SameCounter => prop_assert_eq!((case.alpha, case.beta), (-1, -1)),
                    CounterRelation::Opposite => prop_assert_eq!((case.alpha, case.beta), (1, 1)),
                    CounterRelation::Orthogonal => prop_assert!(case.alpha.min(case.beta) == 0),
                }
            }
        }
    }

    #[test]
    fn transform_lands_in_counter_orthant(map in unimodular_map(), which in 0usize..3) {
        let model = planar_models().swap_remove(which).transformed(&map).unwrap();
        let t = build_transform(&model).unwrap();
        prop_assert!(t.map.is_invertible());
        for x in model.space.points() {
            let y = t.map.apply(x);
            prop_assert!(y.iter().all(|v| v.is_integer()));
            prop_assert!(y[..t.k].iter().all(|v| !v.is_negative()));
        }
        for c in &t.counters {
            prop_assert!(t.express(&c.functional).is_some());
        }
    }

    #[test]
    fn transformed_planar_models_classify_as_originals(map in unimodular_map(), which in 0usize..3) {
        let model = planar_models().swap_remove(which);
        let want = classify_2d(&model).unwrap().case;
        match classify_model(&model.transformed(&map).unwrap()).unwrap() {
            Classification::TwoD { result, .. } => prop_assert_eq!(result.case, want),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn random_simplex_classifies_as_simplex_type(
        n in 1u32..=4,
        lambda in proptest::array::uniform6(positive_rational()),
    ) {
        let model = make_simplex(2, n, &planar_simplex_rates(lambda)).unwrap();
        prop_assert!(validate_model(&model).is_valid());
        let c = classify_2d(&model).unwrap();
        prop_assert_eq!(c.case, Case2D::SimplexType);
        prop_assert_eq!(c.jump_set.len(), 6);
    }

    #[test]
    fn birth_death_round_trips(n in 1u32..=6, alpha in positive_rational(), beta in rational(),
                               scale in prop_oneof![Just(1i64), Just(-1), Just(2), Just(-3)], shift in -5i64..5) {
        let model = make_birth_death(n, alpha.clone(), beta.clone()).unwrap();
        let map = AffineMap::new(vec![vec![int(scale)]], vec![int(shift)]);
        let c = classify_1d(&model.transformed(&map).unwrap()).unwrap();
        prop_assert_eq!(c.kind, Kind1D::BirthDeath);
        prop_assert_eq!((c.n, c.alpha_rate, c.beta_rate), (n, alpha, beta));
    }
}

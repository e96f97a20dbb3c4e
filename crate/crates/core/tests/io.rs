//! Round trips of generated models through the JSON format.

use std::collections::BTreeMap;

use affine_core::classify::{make_birth_death, make_independent_product, make_simplex, make_uniform_simplex};
use affine_core::io::{hybrid_to_json, load_model, model_to_json, parse_hybrid, parse_model, IoError};
use affine_core::model::embed_markov_chain;
use affine_core::rational::ratio;
use affine_core::simulate::HybridModel;
use affine_core::Rational;
use proptest::prelude::*;

fn rate() -> impl Strategy<Value = Rational> {
    (0i64..7, 1i64..4).prop_map(|(p, q)| ratio(p, q))
}

fn positive_rate() -> impl Strategy<Value = Rational> {
    (1i64..7, 1i64..4).prop_map(|(p, q)| ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn birth_death_round_trip(n in 1u32..6, a in positive_rate(), b in rate()) {
        let model = make_birth_death(n, a, b).unwrap();
        prop_assert_eq!(parse_model(&model_to_json(&model)).unwrap(), model);
    }

    #[test]
    fn simplex_round_trip(d in 1usize..4, n in 1u32..4, rates in prop::collection::vec(rate(), 12)) {
        let mut table = BTreeMap::new();
        let mut it = rates.into_iter();
        for j in 0..=d {
            for k in 0..=d {
                if j != k {
                    table.insert((j, k), it.next().unwrap_or_else(|| ratio(1, 1)));
                }
            }
        }
        let model = make_simplex(d, n, &table).unwrap();
        prop_assert_eq!(parse_model(&model_to_json(&model)).unwrap(), model);
    }

    #[test]
    fn markov_round_trip(rates in prop::collection::vec(rate(), 6)) {
        let mut q = vec![vec![Rational::default(); 3]; 3];
        let mut it = rates.into_iter();
        for (i, row) in q.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if i != j {
                    *cell = it.next().unwrap();
                }
            }
            let total: Rational = row.iter().cloned().sum();
            row[i] = -total;
        }
        let model = embed_markov_chain(&q).unwrap();
        prop_assert_eq!(parse_model(&model_to_json(&model)).unwrap(), model);
    }
}

#[test]
fn product_and_uniform_simplex_round_trip() {
    for model in [
        make_independent_product((2, ratio(1, 2), ratio(3, 1)), (3, ratio(1, 1), ratio(0, 1))).unwrap(),
        make_uniform_simplex(3, 2, ratio(5, 3)).unwrap(),
    ] {
        assert_eq!(parse_model(&model_to_json(&model)).unwrap(), model);
    }
}

#[test]
fn hybrid_round_trip() {
    for model in [HybridModel::uniform_jump_example(3).unwrap(), HybridModel::drift_coupled_example(2).unwrap()] {
        assert_eq!(parse_hybrid(&hybrid_to_json(&model)).unwrap(), model);
    }
}

#[test]
fn simplex_generator_matches_explicit_points() {
    let generated = parse_model(
        r#"{"dimension": 2, "states": {"kind": "simplex", "N": 3},
            "channels": [{"jump": [-1, 0], "intensity": {"linear": [1, 0], "offset": 0}}]}"#,
    )
    .unwrap();
    assert_eq!(generated.space.len(), 10);
    let explicit = parse_model(&model_to_json(&generated)).unwrap();
    assert_eq!(explicit, generated);
}

#[test]
fn missing_file_is_a_read_error() {
    assert!(matches!(load_model("/nonexistent/model.json"), Err(IoError::Read { .. })));
}

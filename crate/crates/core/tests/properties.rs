mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{backbone, models_of};
use splbee::model_io::{parse_dimacs, to_dimacs, Clause, FeatureModel};
use splbee::mobafs::Position;
use splbee::preprocess::{determine_constants, preprocess};
use splbee::sat::{repair, RepairMode, Solver};
use splbee::Configuration;

fn clause_strategy(f: usize) -> impl Strategy<Value = Clause> {
    prop::collection::btree_set(1..=f as i32, 1..=f.min(4)).prop_flat_map(|vars| {
        let vars: Vec<i32> = vars.into_iter().collect();
        let n = vars.len();
        prop::collection::vec(any::<bool>(), n)
            .prop_map(move |signs| vars.iter().zip(&signs).map(|(&v, &s)| if s { v } else { -v }).collect())
    })
}

fn model_strategy(max_f: usize, max_c: usize) -> impl Strategy<Value = (usize, Vec<Clause>)> {
    (1..=max_f).prop_flat_map(move |f| (Just(f), prop::collection::vec(clause_strategy(f), 0..=max_c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn constants_are_backbone_literals((f, clauses) in model_strategy(12, 30)) {
        let model = FeatureModel::new("p", f, clauses.clone()).unwrap();
        match (determine_constants(&model), backbone(f, &clauses)) {
            (Ok(c), Some((ones, zeros))) => {
                for v in &c.one {
                    prop_assert!(ones >> (v - 1) & 1 == 1);
                }
                for v in &c.zero {
                    prop_assert!(zeros >> (v - 1) & 1 == 1);
                }
            }
            // A propagation conflict proves unsatisfiability.
            (Err(_), sols) => prop_assert!(sols.is_none()),
            // Propagation is incomplete: an unsatisfiable model may survive it.
            (Ok(_), None) => {}
        }
    }

    #[test]
    fn reduced_model_is_at_fixpoint((f, clauses) in model_strategy(12, 30)) {
        let model = FeatureModel::new("p", f, clauses).unwrap();
        if let Ok(reduced) = preprocess(&model) {
            for c in &reduced.active_clauses {
                prop_assert!(c.len() >= 2, "clause {c:?} would still propagate");
            }
            let again = preprocess(&reduced.compact_model()).unwrap();
            prop_assert!(again.constants.is_empty());
            prop_assert_eq!(again.declined, 0);
            prop_assert_eq!(again.num_free(), reduced.num_free());
        }
    }

    #[test]
    fn reduction_preserves_solutions((f, clauses) in model_strategy(10, 25)) {
        let model = FeatureModel::new("p", f, clauses.clone()).unwrap();
        if let Ok(reduced) = preprocess(&model) {
            let original = models_of(f, &clauses);
            let compact = reduced.compact_model();
            let kept = models_of(compact.num_features, &compact.clauses);
            prop_assert_eq!(original.len(), kept.len());
        }
    }

    #[test]
    fn repair_yields_valid_products((f, clauses) in model_strategy(14, 40), seed in any::<u64>()) {
        prop_assume!(!models_of(f, &clauses).is_empty());
        let model = FeatureModel::new("p", f, clauses.clone()).unwrap();
        let reduced = preprocess(&model).unwrap();
        let mut solver = Solver::new(f, &reduced.active_clauses);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let p = Position::random(reduced.num_free(), &mut rng);
            let out = repair(p.decode(&reduced), &reduced, &mut solver, &mut rng, RepairMode::Full).unwrap();
            prop_assert_eq!(out.violations, 0);
            for c in &clauses {
                prop_assert!(c.iter().any(|&l| out.config.get(l.unsigned_abs()) == (l > 0)));
            }
        }
    }

    #[test]
    fn dimacs_round_trip((f, clauses) in model_strategy(20, 30)) {
        let model = FeatureModel::new("p", f, clauses).unwrap();
        let back = parse_dimacs(&to_dimacs(&model)).unwrap();
        prop_assert_eq!(back.num_features, model.num_features);
        prop_assert_eq!(back.clauses, model.clauses);
    }

    #[test]
    fn bitstring_round_trip(selected in prop::collection::btree_set(1u32..=150, 0..40), len in 150usize..200) {
        let c = Configuration::from_selected(len, selected.iter().copied());
        let back = Configuration::from_bitstring(&c.to_bitstring()).unwrap();
        prop_assert_eq!(back.selected().collect::<BTreeSet<_>>(), selected);
        prop_assert_eq!(back, c);
    }
}

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use foon::graph::{index_units, merge};
use foon::model::UnitKey;
use foon::parser::{parse_foon, serialize_foon, Severity};
use foon::retrieval::{search_gbfs, search_ids, validate_tree, Heuristic};
use foon::{
    build_graph, node_satisfied, oracle_min_tree, unit_equals, Foon, FunctionalUnit, Goal, Kitchen,
    MotionNode, ObjectNode,
};

fn object() -> impl Strategy<Value = ObjectNode> {
    (
        prop::sample::select(vec!["a", "B", " c ", "d"]),
        prop::collection::btree_set(prop::sample::select(vec!["x", "Y", "z"]), 0..3),
        prop::collection::btree_set(prop::sample::select(vec!["i", "j"]), 0..2),
    )
        .prop_map(|(n, s, i)| ObjectNode::new(n, s, i).unwrap())
}

fn side() -> impl Strategy<Value = Vec<ObjectNode>> {
    prop::collection::btree_set(object(), 1..4).prop_map(|s| s.into_iter().collect())
}

fn unit() -> impl Strategy<Value = FunctionalUnit> {
    (
        side(),
        prop::sample::select(vec!["cut", "Mix"]),
        0u32..=100,
        side(),
        any::<bool>(),
    )
        .prop_map(|(mut inputs, m, rate, outputs, reverse)| {
            if reverse {
                inputs.reverse();
            }
            FunctionalUnit::new(
                inputs,
                MotionNode::new(m, rate as f64 / 100.0).unwrap(),
                outputs,
            )
            .unwrap()
        })
}

fn unit_set(g: &Foon) -> BTreeSet<UnitKey> {
    g.units().iter().map(|u| u.key()).collect()
}

/// Documents made of well-formed and malformed lines.
fn document() -> impl Strategy<Value = String> {
    let line = prop::sample::select(vec![
        "O\tbowl",
        "O\tEgg",
        "S\thot",
        "S\t\t{a,b}",
        "S\tcold\t{b}",
        "M\tmix",
        "M\tcut\t0.5",
        "M\tbad\t7",
        "//",
        "",
        "# note",
        "Q\tjunk",
        "O\t",
    ]);
    prop::collection::vec(line, 0..40).prop_map(|lines| lines.join("\n"))
}

proptest! {
    #[test]
    fn unit_equality_is_an_equivalence(a in unit(), b in unit(), c in unit()) {
        prop_assert!(unit_equals(&a, &a));
        prop_assert_eq!(unit_equals(&a, &b), unit_equals(&b, &a));
        if unit_equals(&a, &b) && unit_equals(&b, &c) {
            prop_assert!(unit_equals(&a, &c));
        }
    }

    #[test]
    fn identity_is_pure_and_idempotent(n in object()) {
        let key = n.canonical_identity();
        prop_assert_eq!(&key, &n.clone().canonical_identity());
        let again = ObjectNode::from_identity(&key).unwrap();
        prop_assert_eq!(again.canonical_identity(), key);
    }

    #[test]
    fn kitchen_satisfaction_is_monotone(
        n in object(),
        items in prop::collection::vec(object(), 0..5),
        extra in object(),
    ) {
        let mut k: Kitchen = items.into_iter().collect();
        let before = node_satisfied(&n, &k);
        k.insert(extra);
        if before {
            prop_assert!(node_satisfied(&n, &k));
        }
    }

    #[test]
    fn serialization_round_trips(units in prop::collection::vec(unit(), 0..6)) {
        let doc = serialize_foon(&units).unwrap();
        let parsed = parse_foon(&doc);
        prop_assert!(parsed.diagnostics.is_empty());
        prop_assert_eq!(parsed.units.len(), units.len());
        for (a, b) in parsed.units.iter().zip(&units) {
            prop_assert!(unit_equals(a, b));
        }
    }

    #[test]
    fn normalization_is_idempotent(doc in document()) {
        let first = parse_foon(&doc);
        let once = serialize_foon(&first.units).unwrap();
        let twice = serialize_foon(&parse_foon(&once).units).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn diagnostics_point_at_block_lines(doc in document()) {
        let lines: Vec<&str> = doc.split('\n').collect();
        for d in parse_foon(&doc).diagnostics {
            prop_assert_eq!(d.severity, Severity::Error);
            prop_assert!(d.line_number >= 1 && d.line_number <= lines.len());
            let line = lines[d.line_number - 1];
            prop_assert!(!line.trim().is_empty() && !line.starts_with('#'), "{:?}", d);
        }
    }

    #[test]
    fn merge_is_a_set_union(
        a in prop::collection::vec(unit(), 0..6),
        b in prop::collection::vec(unit(), 0..6),
        c in prop::collection::vec(unit(), 0..6),
    ) {
        let (a, b, c) = (build_graph(a), build_graph(b), build_graph(c));
        prop_assert_eq!(unit_set(&merge(&a, &a)), unit_set(&a));
        prop_assert_eq!(unit_set(&merge(&a, &b)), unit_set(&merge(&b, &a)));
        let left = merge(&merge(&a, &b), &c);
        let right = merge(&a, &merge(&b, &c));
        prop_assert_eq!(unit_set(&left), unit_set(&right));
        // The mean rate of each class does not depend on grouping.
        for u in left.units() {
            let v = right.units().iter().find(|v| unit_equals(u, v)).unwrap();
            prop_assert!((u.motion.success_rate() - v.motion.success_rate()).abs() < 1e-9);
        }
    }

    #[test]
    fn graph_indexes_are_consistent(units in prop::collection::vec(unit(), 0..8)) {
        let g = build_graph(units);
        for (i, u) in g.units().iter().enumerate() {
            prop_assert_eq!(u.source_index, i);
            for (j, v) in g.units().iter().enumerate().skip(i + 1) {
                prop_assert!(!unit_equals(u, v), "units {} and {} are duplicates", i, j);
            }
        }
        let (p, c) = index_units(g.units());
        prop_assert_eq!(&p, g.producers());
        prop_assert_eq!(&c, g.consumers());
        for (key, idx) in g.producers() {
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            for &i in idx {
                prop_assert!(g.unit(i).outputs.iter().any(|o| &o.canonical_identity() == key));
            }
        }
    }

    #[test]
    fn searches_are_valid_and_ids_is_minimal(seed in any::<u64>()) {
        let case = common::random_case(&mut common::rng(seed));
        let ids = search_ids(&case.graph, &case.goal, &case.kitchen, 6).unwrap();
        let oracle = oracle_min_tree(&case.graph, &case.goal, &case.kitchen, 6).unwrap();
        prop_assert_eq!(ids.tree().is_some(), oracle.is_some());
        if let (Some(t), Some(o)) = (ids.tree(), &oracle) {
            prop_assert_eq!(t.discovered_depth, o.discovered_depth);
            prop_assert!(validate_tree(o, &case.kitchen).is_valid());
        }
        for outcome in [
            ids,
            search_gbfs(&case.graph, &case.goal, &case.kitchen, Heuristic::H1).0,
            search_gbfs(&case.graph, &case.goal, &case.kitchen, Heuristic::H2).0,
        ] {
            if let Some(t) = outcome.tree() {
                prop_assert!(validate_tree(t, &case.kitchen).is_valid());
            }
        }
    }

    #[test]
    fn goal_in_kitchen_short_circuits(seed in any::<u64>()) {
        let case = common::random_case(&mut common::rng(seed));
        let mut kitchen = case.kitchen.clone();
        kitchen.insert(case.goal.target.clone());
        let goal = Goal::new(case.goal.target.clone());
        let ids = search_ids(&case.graph, &goal, &kitchen, 4).unwrap();
        prop_assert_eq!(ids.expansions, 0);
        prop_assert!(ids.tree().unwrap().is_empty());
        for h in [Heuristic::H1, Heuristic::H2] {
            let (out, trace) = search_gbfs(&case.graph, &goal, &kitchen, h);
            prop_assert_eq!(out.expansions, 0);
            prop_assert!(out.tree().unwrap().is_empty());
            prop_assert!(trace.records.is_empty());
        }
    }

    #[test]
    fn counters_respect_visits(seed in any::<u64>()) {
        let case = common::random_case(&mut common::rng(seed));
        let ids = search_ids(&case.graph, &case.goal, &case.kitchen, 6).unwrap();
        let (h1, _) = search_gbfs(&case.graph, &case.goal, &case.kitchen, Heuristic::H1);
        for o in [ids, h1] {
            prop_assert!(o.kitchen_hits <= o.visited);
            prop_assert!(o.expansions >= o.visited - o.kitchen_hits);
        }
    }
}

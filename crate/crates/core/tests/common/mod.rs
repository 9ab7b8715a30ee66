//! Seeded generators and fixture helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use foon::{
    build_graph, parse_foon, parse_kitchen, Foon, FunctionalUnit, Goal, Kitchen, MotionNode,
    ObjectNode,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MAX_UNITS: usize = 20;
pub const MAX_PRODUCERS: usize = 3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn load_graph(names: &[&str]) -> Foon {
    let mut units = Vec::new();
    for name in names {
        let parsed = parse_foon(&fixture_text(name));
        assert!(
            parsed.diagnostics.is_empty(),
            "{name}: {:?}",
            parsed.diagnostics
        );
        units.extend(parsed.units);
    }
    build_graph(units)
}

pub fn load_kitchen(name: &str) -> Kitchen {
    let parsed = parse_kitchen(&fixture_text(name));
    assert!(
        parsed.diagnostics.is_empty(),
        "{name}: {:?}",
        parsed.diagnostics
    );
    parsed.kitchen
}

/// Graph/kitchen pairs bundled as fixtures.
pub fn fixture_worlds() -> Vec<(&'static str, Foon, Kitchen)> {
    vec![
        (
            "freeze",
            load_graph(&["freeze.foon"]),
            load_kitchen("freeze.kitchen"),
        ),
        (
            "cake",
            load_graph(&["cake.foon"]),
            load_kitchen("cake.kitchen"),
        ),
        (
            "salad",
            load_graph(&["salad.foon"]),
            load_kitchen("salad.kitchen"),
        ),
        (
            "demo",
            load_graph(&["greek_salad.foon", "whipped_cream.foon", "macaroni.foon"]),
            load_kitchen("demo.kitchen"),
        ),
    ]
}

pub fn obj(name: &str) -> ObjectNode {
    ObjectNode::named(name).unwrap()
}

const MOTIONS: [&str; 5] = ["cut", "mix", "pour", "stir", "bake"];
const RATES: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

fn pool_object(i: usize) -> ObjectNode {
    // Every third object carries a state so identities are not just names.
    if i.is_multiple_of(3) {
        ObjectNode::with_states(&format!("o{i}"), ["hot"]).unwrap()
    } else {
        ObjectNode::named(&format!("o{i}")).unwrap()
    }
}

/// A random unit list over `pool` objects. No object gets more than
/// `MAX_PRODUCERS` producers.
pub fn random_units(
    rng: &mut impl Rng,
    count: usize,
    pool: usize,
    max_inputs: usize,
) -> Vec<FunctionalUnit> {
    let objects: Vec<ObjectNode> = (0..pool).map(pool_object).collect();
    let mut producer_count = vec![0usize; pool];
    let mut units = Vec::with_capacity(count);
    while units.len() < count {
        let mut order: Vec<usize> = (0..pool).collect();
        order.shuffle(rng);
        let n_in = rng.gen_range(1..=max_inputs.min(pool - 1));
        let inputs: Vec<usize> = order[..n_in].to_vec();
        let n_out = rng.gen_range(1..=2);
        let outputs: Vec<usize> = order[n_in..]
            .iter()
            .copied()
            .filter(|&o| producer_count[o] < MAX_PRODUCERS)
            .take(n_out)
            .collect();
        if outputs.is_empty() {
            if producer_count.iter().all(|&c| c >= MAX_PRODUCERS) {
                break;
            }
            continue;
        }
        for &o in &outputs {
            producer_count[o] += 1;
        }
        let motion = MotionNode::new(
            MOTIONS[rng.gen_range(0..MOTIONS.len())],
            RATES[rng.gen_range(0..RATES.len())],
        )
        .unwrap();
        units.push(
            FunctionalUnit::new(
                inputs.iter().map(|&i| objects[i].clone()).collect(),
                motion,
                outputs.iter().map(|&i| objects[i].clone()).collect(),
            )
            .unwrap(),
        );
    }
    units
}

pub struct Case {
    pub graph: Foon,
    pub kitchen: Kitchen,
    pub goal: Goal,
}

/// A search problem on a random graph of at most `MAX_UNITS` units with
/// branching at most 3.
pub fn random_case(rng: &mut impl Rng) -> Case {
    let pool = rng.gen_range(4..=12);
    let count = rng.gen_range(1..=MAX_UNITS);
    let graph = build_graph(random_units(rng, count, pool, 3));
    let kitchen: Kitchen = (0..pool)
        .filter(|_| rng.gen_bool(0.35))
        .map(pool_object)
        .collect();
    let produced: Vec<&ObjectNode> = graph
        .units()
        .iter()
        .flat_map(|u| u.outputs.iter())
        .collect();
    let goal = if rng.gen_bool(0.9) && !produced.is_empty() {
        produced[rng.gen_range(0..produced.len())].clone()
    } else {
        pool_object(rng.gen_range(0..pool))
    };
    Case {
        graph,
        kitchen,
        goal: Goal::new(goal),
    }
}

const NAMES: [&str; 8] = [
    "Tomato",
    "bowl",
    "Sweet Potato",
    "knife",
    "ice",
    "WATER",
    "whipped cream",
    "pan",
];
const STATES: [&str; 6] = ["chopped", "Hot", "empty", "liquid", "sliced", "whole"];
const INGREDIENTS: [&str; 5] = ["lettuce", "tomato", "Onion", "feta", "salt"];

fn pick(rng: &mut ChaCha8Rng, from: &[&'static str], max: usize) -> Vec<&'static str> {
    let n = rng.gen_range(0..=max);
    from.choose_multiple(rng, n).copied().collect()
}

fn random_rich_object(rng: &mut ChaCha8Rng) -> ObjectNode {
    let name = NAMES[rng.gen_range(0..NAMES.len())];
    let states = pick(rng, &STATES, 2);
    let ingredients = pick(rng, &INGREDIENTS, 3);
    ObjectNode::new(&format!(" {name}"), states, ingredients).unwrap()
}

fn random_side(rng: &mut ChaCha8Rng) -> Vec<ObjectNode> {
    let mut nodes: Vec<ObjectNode> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let n = random_rich_object(rng);
        if !nodes.contains(&n) {
            nodes.push(n);
        }
    }
    nodes
}

/// Units with mixed-case labels, several states and ingredient sets.
pub fn random_rich_units(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<FunctionalUnit> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            let inputs = random_side(rng);
            let outputs = random_side(rng);
            let rate = rng.gen_range(0..=1_000_000) as f64 / 1_000_000.0;
            let motion = MotionNode::new(MOTIONS[rng.gen_range(0..MOTIONS.len())], rate).unwrap();
            FunctionalUnit::new(inputs, motion, outputs).unwrap()
        })
        .collect()
}

//! Deduplicated FOON graphs with producer and consumer indexes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::{FunctionalUnit, ObjectKey, ObjectNode, UnitKey};

/// A deduplicated set of functional units.
///
/// `units[i].source_index == i`. Each surviving unit remembers how many
/// duplicates it absorbed so that merging keeps the averaged success rate
/// independent of merge order.
#[derive(Debug, Clone, Default)]
pub struct Foon {
    units: Vec<FunctionalUnit>,
    multiplicity: Vec<usize>,
    producers: BTreeMap<ObjectKey, Vec<usize>>,
    consumers: BTreeMap<ObjectKey, Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GraphStats {
    pub unit_count: usize,
    pub object_node_count: usize,
    pub motion_node_count: usize,
}

/// Deduplicates `units`, keeping the first of each equivalence class with
/// the mean success rate of the whole class.
pub fn build_graph(units: Vec<FunctionalUnit>) -> Foon {
    let weighted = units.into_iter().map(|u| (u, 1));
    Foon::from_weighted(weighted)
}

/// Union of two graphs: `build_graph(g1.units ++ g2.units)`.
pub fn merge(g1: &Foon, g2: &Foon) -> Foon {
    let weighted = g1
        .weighted_units()
        .chain(g2.weighted_units())
        .map(|(u, n)| (u.clone(), n));
    Foon::from_weighted(weighted)
}

/// Merges any number of graphs left to right.
pub fn merge_all<'a, I: IntoIterator<Item = &'a Foon>>(graphs: I) -> Foon {
    let weighted = graphs
        .into_iter()
        .flat_map(|g| g.weighted_units())
        .map(|(u, n)| (u.clone(), n));
    Foon::from_weighted(weighted)
}

pub fn producers_of<'a>(g: &'a Foon, node: &ObjectNode) -> Vec<&'a FunctionalUnit> {
    g.producer_indexes(node)
        .iter()
        .map(|&i| &g.units[i])
        .collect()
}

pub fn stats(g: &Foon) -> GraphStats {
    let objects: BTreeSet<&ObjectKey> = g.producers.keys().chain(g.consumers.keys()).collect();
    let motions: BTreeSet<&str> = g.units.iter().map(|u| u.motion.name()).collect();
    GraphStats {
        unit_count: g.units.len(),
        object_node_count: objects.len(),
        motion_node_count: motions.len(),
    }
}

impl Foon {
    fn from_weighted<I>(weighted: I) -> Foon
    where
        I: IntoIterator<Item = (FunctionalUnit, usize)>,
    {
        let mut units: Vec<FunctionalUnit> = Vec::new();
        let mut rate_sums: Vec<f64> = Vec::new();
        let mut multiplicity: Vec<usize> = Vec::new();
        let mut seen: HashMap<UnitKey, usize> = HashMap::new();

        for (unit, count) in weighted {
            let weight = unit.motion.success_rate() * count as f64;
            match seen.get(&unit.key()) {
                Some(&i) => {
                    rate_sums[i] += weight;
                    multiplicity[i] += count;
                }
                None => {
                    seen.insert(unit.key(), units.len());
                    rate_sums.push(weight);
                    multiplicity.push(count);
                    units.push(unit);
                }
            }
        }
        for (i, unit) in units.iter_mut().enumerate() {
            unit.source_index = i;
            if multiplicity[i] > 1 {
                let mean = (rate_sums[i] / multiplicity[i] as f64).clamp(0.0, 1.0);
                unit.motion.set_success_rate(mean);
            }
        }
        let mut g = Foon {
            units,
            multiplicity,
            producers: BTreeMap::new(),
            consumers: BTreeMap::new(),
        };
        g.rebuild_indexes();
        g
    }

    fn rebuild_indexes(&mut self) {
        let (producers, consumers) = index_units(&self.units);
        self.producers = producers;
        self.consumers = consumers;
    }

    fn weighted_units(&self) -> impl Iterator<Item = (&FunctionalUnit, usize)> {
        self.units.iter().zip(self.multiplicity.iter().copied())
    }

    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn unit(&self, index: usize) -> &FunctionalUnit {
        &self.units[index]
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Number of input units folded into `units[index]`.
    pub fn multiplicity(&self, index: usize) -> usize {
        self.multiplicity[index]
    }

    /// Ascending indexes of units whose outputs contain `node`.
    pub fn producer_indexes(&self, node: &ObjectNode) -> &[usize] {
        self.producers
            .get(&node.canonical_identity())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Ascending indexes of units whose inputs contain `node`.
    pub fn consumer_indexes(&self, node: &ObjectNode) -> &[usize] {
        self.consumers
            .get(&node.canonical_identity())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn producers(&self) -> &BTreeMap<ObjectKey, Vec<usize>> {
        &self.producers
    }

    pub fn consumers(&self) -> &BTreeMap<ObjectKey, Vec<usize>> {
        &self.consumers
    }
}

type Index = BTreeMap<ObjectKey, Vec<usize>>;

/// Builds producer and consumer indexes from scratch.
pub fn index_units(units: &[FunctionalUnit]) -> (Index, Index) {
    let mut producers: Index = BTreeMap::new();
    let mut consumers: Index = BTreeMap::new();
    for (i, unit) in units.iter().enumerate() {
        for out in &unit.outputs {
            producers
                .entry(out.canonical_identity())
                .or_default()
                .push(i);
        }
        for inp in &unit.inputs {
            consumers
                .entry(inp.canonical_identity())
                .or_default()
                .push(i);
        }
    }
    (producers, consumers)
}

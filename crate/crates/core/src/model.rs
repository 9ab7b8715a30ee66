//! Node and unit types of a functional object-oriented network.
//!
//! A FOON is bipartite: object nodes (things and their states) and motion
//! nodes (manipulations). A [`FunctionalUnit`] ties a set of input objects
//! to a set of output objects through exactly one motion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0} name is empty")]
    EmptyName(&'static str),
    #[error("label {label:?} is invalid: {reason}")]
    InvalidLabel { label: String, reason: &'static str },
    #[error("success rate {0} is outside [0, 1]")]
    RateOutOfRange(f64),
    #[error("functional unit has no input objects")]
    NoInputs,
    #[error("functional unit has no output objects")]
    NoOutputs,
    #[error("input object {0} is listed more than once")]
    DuplicateInput(String),
    #[error("output object {0} is listed more than once")]
    DuplicateOutput(String),
}

fn normalize_label(raw: &str) -> String {
    raw.trim().to_lowercase()
}

fn check_label(label: &str, forbidden: &[char]) -> Result<(), ModelError> {
    if label.chars().any(|c| c.is_control()) {
        return Err(ModelError::InvalidLabel {
            label: label.to_string(),
            reason: "contains a control character",
        });
    }
    if label.chars().any(|c| forbidden.contains(&c)) {
        return Err(ModelError::InvalidLabel {
            label: label.to_string(),
            reason: "contains a reserved character",
        });
    }
    Ok(())
}

fn normalize_set<I, S>(raw: I, forbidden: &[char]) -> Result<BTreeSet<String>, ModelError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = BTreeSet::new();
    for item in raw {
        let label = normalize_label(item.as_ref());
        if label.is_empty() {
            continue;
        }
        check_label(&label, forbidden)?;
        out.insert(label);
    }
    Ok(out)
}

/// Canonical identity of an object node: lowercased trimmed name plus the
/// sorted state and ingredient labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectKey {
    pub name: String,
    pub states: Vec<String>,
    pub ingredients: Vec<String>,
}

/// Normalizes raw labels into an identity key.
pub fn canonical_identity<I, J, S, T>(
    name: &str,
    states: I,
    ingredients: J,
) -> Result<ObjectKey, ModelError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
    J: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let node = ObjectNode::new(name, states, ingredients)?;
    Ok(node.canonical_identity())
}

/// An object in some state, optionally containing ingredients.
///
/// Always held in canonical form, so the derived equality, ordering and
/// hashing coincide with canonical identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectNode {
    name: String,
    states: BTreeSet<String>,
    ingredients: BTreeSet<String>,
}

impl ObjectNode {
    pub fn new<I, J, S, T>(name: &str, states: I, ingredients: J) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
        J: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let name = normalize_label(name);
        if name.is_empty() {
            return Err(ModelError::EmptyName("object"));
        }
        check_label(&name, &[])?;
        Ok(ObjectNode {
            name,
            // Ingredient lists are comma separated inside braces when serialized.
            states: normalize_set(states, &[])?,
            ingredients: normalize_set(ingredients, &[',', '{', '}'])?,
        })
    }

    /// Object with no states and no ingredients.
    pub fn named(name: &str) -> Result<Self, ModelError> {
        Self::new(name, std::iter::empty::<&str>(), std::iter::empty::<&str>())
    }

    pub fn with_states<I, S>(name: &str, states: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::new(name, states, std::iter::empty::<&str>())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn ingredients(&self) -> &BTreeSet<String> {
        &self.ingredients
    }

    pub fn canonical_identity(&self) -> ObjectKey {
        ObjectKey {
            name: self.name.clone(),
            states: self.states.iter().cloned().collect(),
            ingredients: self.ingredients.iter().cloned().collect(),
        }
    }

    pub fn from_identity(key: &ObjectKey) -> Result<Self, ModelError> {
        Self::new(&key.name, &key.states, &key.ingredients)
    }
}

/// Formats as `name[:state,...][#ingredient,...]`, the goal selector syntax.
impl fmt::Display for ObjectNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.states.is_empty() {
            write!(f, ":{}", join(&self.states))?;
        }
        if !self.ingredients.is_empty() {
            write!(f, "#{}", join(&self.ingredients))?;
        }
        Ok(())
    }
}

fn join(set: &BTreeSet<String>) -> String {
    set.iter().map(String::as_str).collect::<Vec<_>>().join(",")
}

/// A manipulation action with the probability that it succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionNode {
    name: String,
    success_rate: f64,
}

impl MotionNode {
    pub fn new(name: &str, success_rate: f64) -> Result<Self, ModelError> {
        let name = normalize_label(name);
        if name.is_empty() {
            return Err(ModelError::EmptyName("motion"));
        }
        check_label(&name, &[])?;
        if !(0.0..=1.0).contains(&success_rate) {
            return Err(ModelError::RateOutOfRange(success_rate));
        }
        Ok(MotionNode { name, success_rate })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn success_rate(&self) -> f64 {
        self.success_rate
    }

    pub(crate) fn set_success_rate(&mut self, rate: f64) {
        debug_assert!((0.0..=1.0).contains(&rate));
        self.success_rate = rate;
    }
}

/// One atomic action: input objects, a motion, and the objects it yields.
///
/// Fields are public so that callers can assemble units directly; such
/// units are checked by [`FunctionalUnit::validate`] wherever validity
/// matters (serialization refuses invalid units).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalUnit {
    pub inputs: Vec<ObjectNode>,
    pub motion: MotionNode,
    pub outputs: Vec<ObjectNode>,
    /// Position in the owning graph; assigned by `graph::build_graph`.
    pub source_index: usize,
}

/// Identity of a unit for duplicate detection: input set, motion name,
/// output set. Success rate and position do not participate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitKey {
    pub inputs: BTreeSet<ObjectNode>,
    pub motion: String,
    pub outputs: BTreeSet<ObjectNode>,
}

impl FunctionalUnit {
    pub fn new(
        inputs: Vec<ObjectNode>,
        motion: MotionNode,
        outputs: Vec<ObjectNode>,
    ) -> Result<Self, ModelError> {
        let unit = FunctionalUnit {
            inputs,
            motion,
            outputs,
            source_index: 0,
        };
        unit.validate()?;
        Ok(unit)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.inputs.is_empty() {
            return Err(ModelError::NoInputs);
        }
        if self.outputs.is_empty() {
            return Err(ModelError::NoOutputs);
        }
        if let Some(dup) = first_duplicate(&self.inputs) {
            return Err(ModelError::DuplicateInput(dup.to_string()));
        }
        if let Some(dup) = first_duplicate(&self.outputs) {
            return Err(ModelError::DuplicateOutput(dup.to_string()));
        }
        // Re-check the motion in case it was assembled by hand.
        MotionNode::new(self.motion.name(), self.motion.success_rate())?;
        Ok(())
    }

    pub fn key(&self) -> UnitKey {
        UnitKey {
            inputs: self.inputs.iter().cloned().collect(),
            motion: self.motion.name().to_string(),
            outputs: self.outputs.iter().cloned().collect(),
        }
    }

    pub fn produces(&self, node: &ObjectNode) -> bool {
        self.outputs.contains(node)
    }

    pub fn consumes(&self, node: &ObjectNode) -> bool {
        self.inputs.contains(node)
    }
}

impl fmt::Display for FunctionalUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |nodes: &[ObjectNode]| {
            nodes
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" + ")
        };
        write!(
            f,
            "#{} {} -[{}]-> {}",
            self.source_index,
            list(&self.inputs),
            self.motion.name(),
            list(&self.outputs)
        )
    }
}

fn first_duplicate(nodes: &[ObjectNode]) -> Option<&ObjectNode> {
    let mut seen = BTreeMap::new();
    nodes.iter().find(|n| seen.insert(*n, ()).is_some())
}

/// True iff both units have the same input set, output set and motion name.
pub fn unit_equals(a: &FunctionalUnit, b: &FunctionalUnit) -> bool {
    a.key() == b.key()
}

/// The objects available in the environment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Kitchen {
    items: BTreeSet<ObjectNode>,
}

impl Kitchen {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the item was already present.
    pub fn insert(&mut self, item: ObjectNode) -> bool {
        self.items.insert(item)
    }

    pub fn contains(&self, node: &ObjectNode) -> bool {
        self.items.contains(node)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObjectNode> {
        self.items.iter()
    }
}

impl FromIterator<ObjectNode> for Kitchen {
    fn from_iter<T: IntoIterator<Item = ObjectNode>>(iter: T) -> Self {
        Kitchen {
            items: iter.into_iter().collect(),
        }
    }
}

impl Extend<ObjectNode> for Kitchen {
    fn extend<T: IntoIterator<Item = ObjectNode>>(&mut self, iter: T) {
        self.items.extend(iter)
    }
}

/// Exact-match availability: the kitchen must hold an item with the same
/// name, states and ingredients.
pub fn node_satisfied(node: &ObjectNode, kitchen: &Kitchen) -> bool {
    kitchen.contains(node)
}

/// The object node a search should produce. It need not occur in the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub target: ObjectNode,
}

impl Goal {
    pub fn new(target: ObjectNode) -> Self {
        Goal { target }
    }
}

impl From<ObjectNode> for Goal {
    fn from(target: ObjectNode) -> Self {
        Goal { target }
    }
}

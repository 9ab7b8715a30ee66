//! DOT and JSON renderings of graphs and task trees.
//!
//! The JSON layout is described in `docs/json-schema.md`; its
//! `schema_version` is [`SCHEMA_VERSION`].

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FunctionalUnit, ModelError, MotionNode, ObjectNode};
use crate::parser::format_rate;
use crate::retrieval::{Algorithm, TaskTree};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotDocument {
    pub text: String,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn object_id(node: &ObjectNode) -> String {
    format!("\"o:{}\"", escape(&node.to_string()))
}

fn object_label(node: &ObjectNode) -> String {
    let mut label = node.name().to_string();
    if !node.states().is_empty() {
        let states: Vec<&str> = node.states().iter().map(String::as_str).collect();
        label.push_str(&format!("\\n[{}]", states.join(", ")));
    }
    if !node.ingredients().is_empty() {
        let ings: Vec<&str> = node.ingredients().iter().map(String::as_str).collect();
        label.push_str(&format!("\\n{{{}}}", ings.join(", ")));
    }
    label
}

/// Renders units as a bipartite digraph: one ellipse per distinct object,
/// one rectangle per unit.
pub fn to_dot(units: &[FunctionalUnit]) -> DotDocument {
    let mut out = String::from("digraph foon {\n");
    let objects: BTreeSet<&ObjectNode> = units
        .iter()
        .flat_map(|u| u.inputs.iter().chain(u.outputs.iter()))
        .collect();
    for node in &objects {
        writeln!(
            out,
            "  {} [shape=ellipse, label=\"{}\"];",
            object_id(node),
            escape(&object_label(node))
        )
        .unwrap();
    }
    for (i, unit) in units.iter().enumerate() {
        let motion = format!("\"m{i}:{}\"", escape(unit.motion.name()));
        writeln!(
            out,
            "  {motion} [shape=rectangle, label=\"{}\\n{}\"];",
            escape(unit.motion.name()),
            format_rate(unit.motion.success_rate())
        )
        .unwrap();
        for input in &unit.inputs {
            writeln!(out, "  {} -> {motion};", object_id(input)).unwrap();
        }
        for output in &unit.outputs {
            writeln!(out, "  {motion} -> {};", object_id(output)).unwrap();
        }
    }
    out.push_str("}\n");
    DotDocument { text: out }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub name: String,
    pub states: Vec<String>,
    pub ingredients: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionRecord {
    pub name: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub source_index: usize,
    pub inputs: Vec<ObjectRecord>,
    pub motion: MotionRecord,
    pub outputs: Vec<ObjectRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub schema_version: u32,
    pub algorithm: String,
    pub goal: ObjectRecord,
    pub discovered_depth: Option<usize>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema_version: u32,
    pub units: Vec<StepRecord>,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("unknown algorithm {0:?}")]
    Algorithm(String),
    #[error("invalid record: {0}")]
    Model(#[from] ModelError),
}

impl From<&ObjectNode> for ObjectRecord {
    fn from(node: &ObjectNode) -> Self {
        ObjectRecord {
            name: node.name().to_string(),
            states: node.states().iter().cloned().collect(),
            ingredients: node.ingredients().iter().cloned().collect(),
        }
    }
}

impl TryFrom<&ObjectRecord> for ObjectNode {
    type Error = ModelError;

    fn try_from(r: &ObjectRecord) -> Result<Self, Self::Error> {
        ObjectNode::new(&r.name, &r.states, &r.ingredients)
    }
}

impl From<&FunctionalUnit> for StepRecord {
    fn from(u: &FunctionalUnit) -> Self {
        StepRecord {
            source_index: u.source_index,
            inputs: u.inputs.iter().map(ObjectRecord::from).collect(),
            motion: MotionRecord {
                name: u.motion.name().to_string(),
                rate: u.motion.success_rate(),
            },
            outputs: u.outputs.iter().map(ObjectRecord::from).collect(),
        }
    }
}

impl TryFrom<&StepRecord> for FunctionalUnit {
    type Error = ModelError;

    fn try_from(r: &StepRecord) -> Result<Self, Self::Error> {
        let nodes = |records: &[ObjectRecord]| -> Result<Vec<ObjectNode>, ModelError> {
            records.iter().map(ObjectNode::try_from).collect()
        };
        let mut unit = FunctionalUnit::new(
            nodes(&r.inputs)?,
            MotionNode::new(&r.motion.name, r.motion.rate)?,
            nodes(&r.outputs)?,
        )?;
        unit.source_index = r.source_index;
        Ok(unit)
    }
}

pub fn tree_document(tree: &TaskTree) -> TreeDocument {
    TreeDocument {
        schema_version: SCHEMA_VERSION,
        algorithm: tree.algorithm.to_string(),
        goal: ObjectRecord::from(&tree.goal),
        discovered_depth: tree.discovered_depth,
        steps: tree.steps.iter().map(StepRecord::from).collect(),
    }
}

/// Pretty-printed JSON with a fixed key order, newline terminated.
pub fn tree_to_json(tree: &TaskTree) -> String {
    let mut s = serde_json::to_string_pretty(&tree_document(tree)).expect("tree serializes");
    s.push('\n');
    s
}

pub fn tree_from_json(text: &str) -> Result<TaskTree, ExportError> {
    let doc: TreeDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ExportError::SchemaVersion(doc.schema_version));
    }
    let algorithm = Algorithm::parse(&doc.algorithm)
        .ok_or_else(|| ExportError::Algorithm(doc.algorithm.clone()))?;
    let steps = doc
        .steps
        .iter()
        .map(FunctionalUnit::try_from)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TaskTree {
        steps,
        goal: ObjectNode::try_from(&doc.goal)?,
        algorithm,
        discovered_depth: doc.discovered_depth,
    })
}

pub fn graph_to_json(units: &[FunctionalUnit]) -> String {
    let doc = GraphDocument {
        schema_version: SCHEMA_VERSION,
        units: units.iter().map(StepRecord::from).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::model::{Goal, Kitchen};
    use crate::retrieval::{search_ids, validate_tree};

    fn obj(name: &str) -> ObjectNode {
        ObjectNode::named(name).unwrap()
    }

    fn freeze() -> FunctionalUnit {
        FunctionalUnit::new(
            vec![
                ObjectNode::with_states("water", ["liquid"]).unwrap(),
                ObjectNode::with_states("tray", ["empty"]).unwrap(),
            ],
            MotionNode::new("freeze", 0.9).unwrap(),
            vec![obj("ice")],
        )
        .unwrap()
    }

    fn count(text: &str, needle: &str) -> usize {
        text.matches(needle).count()
    }

    #[test]
    fn dot_for_freeze_unit() {
        let dot = to_dot(&[freeze()]).text;
        assert!(dot.starts_with("digraph foon {\n"));
        assert_eq!(count(&dot, "shape=ellipse"), 3);
        assert_eq!(count(&dot, "shape=rectangle"), 1);
        assert_eq!(count(&dot, " -> "), 3);
        assert!(dot.contains("\"o:water:liquid\" -> \"m0:freeze\";"));
        assert!(dot.contains("\"m0:freeze\" -> \"o:ice\";"));
    }

    #[test]
    fn dot_for_empty_list() {
        assert_eq!(to_dot(&[]).text, "digraph foon {\n}\n");
    }

    #[test]
    fn dot_shares_objects_between_units() {
        let melt = FunctionalUnit::new(
            vec![obj("ice")],
            MotionNode::new("melt", 1.0).unwrap(),
            vec![ObjectNode::with_states("water", ["liquid"]).unwrap()],
        )
        .unwrap();
        let dot = to_dot(&[freeze(), melt]).text;
        assert_eq!(count(&dot, "shape=ellipse"), 3);
        assert_eq!(count(&dot, "shape=rectangle"), 2);
        assert_eq!(dot, to_dot(&[freeze(), to_unit(&dot_fixture())]).text);
    }

    fn dot_fixture() -> StepRecord {
        StepRecord {
            source_index: 1,
            inputs: vec![ObjectRecord {
                name: "ice".into(),
                states: vec![],
                ingredients: vec![],
            }],
            motion: MotionRecord {
                name: "melt".into(),
                rate: 1.0,
            },
            outputs: vec![ObjectRecord {
                name: "water".into(),
                states: vec!["liquid".into()],
                ingredients: vec![],
            }],
        }
    }

    fn to_unit(r: &StepRecord) -> FunctionalUnit {
        FunctionalUnit::try_from(r).unwrap()
    }

    #[test]
    fn dot_escapes_quotes() {
        let u = FunctionalUnit::new(
            vec![obj("the \"big\" pot")],
            MotionNode::new("stir", 1.0).unwrap(),
            vec![obj("soup")],
        )
        .unwrap();
        let dot = to_dot(&[u]).text;
        assert!(dot.contains("\"o:the \\\"big\\\" pot\""));
    }

    fn tree_of(steps: Vec<FunctionalUnit>, goal: &str) -> TaskTree {
        TaskTree {
            steps,
            goal: obj(goal),
            algorithm: Algorithm::Ids,
            discovered_depth: Some(0),
        }
    }

    #[test]
    fn json_empty_tree() {
        let json = tree_to_json(&tree_of(vec![], "water"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["steps"], serde_json::json!([]));
        assert_eq!(v["schema_version"], 1);
    }

    #[test]
    fn json_key_order_is_fixed() {
        let json = tree_to_json(&tree_of(vec![freeze()], "ice"));
        let keys = [
            "schema_version",
            "algorithm",
            "goal",
            "discovered_depth",
            "steps",
        ];
        let positions: Vec<usize> = keys
            .iter()
            .map(|k| json.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["steps"][0]["inputs"].as_array().unwrap().len(), 2);
        assert_eq!(v["steps"][0]["outputs"].as_array().unwrap().len(), 1);
        assert_eq!(v["steps"][0]["motion"]["rate"], 0.9);
    }

    #[test]
    fn json_round_trip_and_revalidation() {
        let g = build_graph(vec![
            FunctionalUnit::new(
                vec![obj("batter")],
                MotionNode::new("bake", 1.0).unwrap(),
                vec![obj("cake")],
            )
            .unwrap(),
            FunctionalUnit::new(
                vec![obj("flour"), obj("egg")],
                MotionNode::new("mix", 1.0).unwrap(),
                vec![obj("batter")],
            )
            .unwrap(),
        ]);
        let k: Kitchen = [obj("flour"), obj("egg")].into_iter().collect();
        let out = search_ids(&g, &Goal::new(obj("cake")), &k, 5).unwrap();
        let tree = out.tree().unwrap();
        let json = tree_to_json(tree);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["steps"][0]["motion"]["name"], "mix");
        assert_eq!(v["steps"][1]["motion"]["name"], "bake");

        let back = tree_from_json(&json).unwrap();
        assert_eq!(&back, tree);
        assert!(validate_tree(&back, &k).is_valid());
    }

    #[test]
    fn json_rejects_bad_documents() {
        assert!(matches!(tree_from_json("{"), Err(ExportError::Json(_))));
        let json = tree_to_json(&tree_of(vec![], "water"))
            .replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(
            tree_from_json(&json),
            Err(ExportError::SchemaVersion(7))
        ));
        let json = tree_to_json(&tree_of(vec![], "water")).replace("\"ids\"", "\"dijkstra\"");
        assert!(matches!(
            tree_from_json(&json),
            Err(ExportError::Algorithm(_))
        ));
    }
}

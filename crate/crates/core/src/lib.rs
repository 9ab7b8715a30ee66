//! Functional object-oriented networks (FOON): a bipartite graph of object
//! nodes and motion nodes grouped into functional units.
//!
//! This crate reads and writes FOON subgraph files, merges them into a
//! deduplicated universal graph, and retrieves task trees (executable unit
//! sequences) for goal objects given a kitchen inventory.

pub mod cli;
pub mod export;
pub mod graph;
pub mod model;
pub mod parser;
pub mod retrieval;

pub use graph::{build_graph, merge, producers_of, stats, Foon, GraphStats};
pub use model::{
    canonical_identity, node_satisfied, unit_equals, FunctionalUnit, Goal, Kitchen, ModelError,
    MotionNode, ObjectKey, ObjectNode,
};
pub use parser::{parse_foon, parse_kitchen, serialize_foon, serialize_kitchen, ParseDiagnostic};
pub use retrieval::{
    compare, dfs_limited, oracle_min_tree, search_gbfs, search_ids, topological_order,
    validate_tree, Algorithm, Heuristic, SearchOutcome, SearchResult, TaskTree,
};

//! Task-tree retrieval.
//!
//! Three strategies are provided: iterative deepening over depth-limited
//! DFS ([`search_ids`]) and greedy best-first search under either the
//! motion success-rate heuristic or the fewest-inputs heuristic
//! ([`search_gbfs`]). [`oracle_min_tree`] enumerates every derivation up to
//! a bound and exists to check the others.
//!
//! Depth is counted in functional-unit levels: the unit producing the goal
//! sits at level 1, the units producing its inputs at level 2, and so on.
//! With branching factor `b` and solution depth `d`, IDS re-expands level
//! `k` nodes `d - k + 1` times, so the total work is dominated by the last
//! iteration, `O(b^d)`, while the recursion only holds one path, `O(b d)`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::Foon;
use crate::model::{node_satisfied, FunctionalUnit, Goal, Kitchen, ObjectNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Ids,
    GbfsH1,
    GbfsH2,
    Oracle,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ids => "ids",
            Algorithm::GbfsH1 => "gbfs1",
            Algorithm::GbfsH2 => "gbfs2",
            Algorithm::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ids" => Some(Algorithm::Ids),
            "gbfs1" => Some(Algorithm::GbfsH1),
            "gbfs2" => Some(Algorithm::GbfsH2),
            "oracle" => Some(Algorithm::Oracle),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    /// Highest motion success rate.
    H1,
    /// Fewest input object nodes.
    H2,
}

impl Heuristic {
    pub fn algorithm(self) -> Algorithm {
        match self {
            Heuristic::H1 => Algorithm::GbfsH1,
            Heuristic::H2 => Algorithm::GbfsH2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskTree {
    /// Execution order; the unit producing the goal comes last.
    pub steps: Vec<FunctionalUnit>,
    pub goal: ObjectNode,
    pub algorithm: Algorithm,
    /// Depth bound at which the tree was found (IDS and oracle only).
    pub discovered_depth: Option<usize>,
}

impl TaskTree {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn source_indexes(&self) -> Vec<usize> {
        self.steps.iter().map(|u| u.source_index).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Unsolvable {
    /// The node is neither in the kitchen nor produced by any unit.
    NoProducer(ObjectNode),
    /// The depth-limited search failed without ever reaching its bound, so
    /// no deeper search can succeed either.
    NoDerivation,
    /// The chosen units depend on each other circularly (source indexes).
    Cycle(Vec<usize>),
    /// The chosen units need a node nothing in the tree provides.
    MissingInput { unit: usize, input: ObjectNode },
}

impl fmt::Display for Unsolvable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unsolvable::NoProducer(n) => write!(f, "no unit produces {n} and the kitchen lacks it"),
            Unsolvable::NoDerivation => f.write_str("no task tree exists at any depth"),
            Unsolvable::Cycle(units) => {
                write!(f, "chosen units form a dependency cycle: {units:?}")
            }
            Unsolvable::MissingInput { unit, input } => {
                write!(f, "unit #{unit} needs {input}, which nothing provides")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchResult {
    Tree(TaskTree),
    /// The depth limit was reached before a tree or a proof of failure.
    DepthExhausted {
        max_depth: usize,
    },
    Unsolvable(Unsolvable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub result: SearchResult,
    /// Candidate units evaluated.
    pub expansions: usize,
    /// Distinct object identities resolved: matched by the kitchen or
    /// expanded through at least one candidate unit.
    pub visited: usize,
    /// How many of the visited identities the kitchen matched.
    pub kitchen_hits: usize,
}

impl SearchOutcome {
    pub fn tree(&self) -> Option<&TaskTree> {
        match &self.result {
            SearchResult::Tree(t) => Some(t),
            _ => None,
        }
    }

    /// Short form: step count, `limit` or `unsolvable`.
    pub fn summary(&self) -> String {
        match &self.result {
            SearchResult::Tree(t) => t.len().to_string(),
            SearchResult::DepthExhausted { .. } => "limit".to_string(),
            SearchResult::Unsolvable(_) => "unsolvable".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub needed: ObjectNode,
    /// Source indexes of the candidates, ascending.
    pub candidates: Vec<usize>,
    /// Heuristic value of each candidate, parallel to `candidates`.
    pub scores: Vec<f64>,
    pub chosen: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpansionTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("depth limit must be at least 1, got {0}")]
    InvalidDepth(usize),
}

pub fn h1_score(unit: &FunctionalUnit) -> f64 {
    unit.motion.success_rate()
}

/// Lower is better.
pub fn h2_score(unit: &FunctionalUnit) -> usize {
    unit.inputs.len()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthLimited {
    /// Unit indexes in execution order, or `None` on failure.
    pub steps: Option<Vec<usize>>,
    /// Whether the depth bound pruned any branch.
    pub cutoff: bool,
    pub expansions: usize,
}

struct LimitedDfs<'a> {
    graph: &'a Foon,
    kitchen: &'a Kitchen,
    path: Vec<usize>,
    cutoff: bool,
    expansions: usize,
    resolved: &'a mut BTreeSet<ObjectNode>,
}

fn push_unique(steps: &mut Vec<usize>, unit: usize) {
    if !steps.contains(&unit) {
        steps.push(unit);
    }
}

impl LimitedDfs<'_> {
    fn resolve(&mut self, need: &ObjectNode, limit: usize) -> Option<Vec<usize>> {
        if node_satisfied(need, self.kitchen) {
            self.resolved.insert(need.clone());
            return Some(Vec::new());
        }
        if limit == 0 {
            self.cutoff = true;
            return None;
        }
        let graph = self.graph;
        'candidates: for &candidate in graph.producer_indexes(need) {
            if self.path.contains(&candidate) {
                continue;
            }
            self.expansions += 1;
            self.resolved.insert(need.clone());
            self.path.push(candidate);
            let mut steps = Vec::new();
            for input in &graph.unit(candidate).inputs {
                match self.resolve(input, limit - 1) {
                    Some(sub) => sub.into_iter().for_each(|u| push_unique(&mut steps, u)),
                    None => {
                        self.path.pop();
                        continue 'candidates;
                    }
                }
            }
            self.path.pop();
            push_unique(&mut steps, candidate);
            return Some(steps);
        }
        None
    }
}

/// Depth-limited DFS: the first producer (in file order) whose inputs all
/// resolve within `limit - 1` levels wins. A unit never recurses into
/// itself.
pub fn dfs_limited(g: &Foon, need: &ObjectNode, kitchen: &Kitchen, limit: usize) -> DepthLimited {
    let mut resolved = BTreeSet::new();
    run_limited(g, need, kitchen, limit, &mut resolved)
}

fn run_limited(
    g: &Foon,
    need: &ObjectNode,
    kitchen: &Kitchen,
    limit: usize,
    resolved: &mut BTreeSet<ObjectNode>,
) -> DepthLimited {
    let mut dfs = LimitedDfs {
        graph: g,
        kitchen,
        path: Vec::new(),
        cutoff: false,
        expansions: 0,
        resolved,
    };
    let steps = dfs.resolve(need, limit);
    DepthLimited {
        steps,
        cutoff: dfs.cutoff,
        expansions: dfs.expansions,
    }
}

/// Iterative deepening: depth-limited DFS with limits `0..=max_depth`.
pub fn search_ids(
    g: &Foon,
    goal: &Goal,
    kitchen: &Kitchen,
    max_depth: usize,
) -> Result<SearchOutcome, SearchError> {
    if max_depth < 1 {
        return Err(SearchError::InvalidDepth(max_depth));
    }
    let mut expansions = 0;
    let mut resolved = BTreeSet::new();
    let hits =
        |resolved: &BTreeSet<ObjectNode>| resolved.iter().filter(|n| kitchen.contains(n)).count();
    for limit in 0..=max_depth {
        let pass = run_limited(g, &goal.target, kitchen, limit, &mut resolved);
        expansions += pass.expansions;
        if let Some(indexes) = pass.steps {
            let tree = TaskTree {
                steps: indexes.iter().map(|&i| g.unit(i).clone()).collect(),
                goal: goal.target.clone(),
                algorithm: Algorithm::Ids,
                discovered_depth: Some(limit),
            };
            debug_assert!(validate_tree(&tree, kitchen).is_valid());
            return Ok(SearchOutcome {
                result: SearchResult::Tree(tree),
                expansions,
                visited: resolved.len(),
                kitchen_hits: hits(&resolved),
            });
        }
        if !pass.cutoff {
            return Ok(SearchOutcome {
                result: SearchResult::Unsolvable(Unsolvable::NoDerivation),
                expansions,
                visited: resolved.len(),
                kitchen_hits: hits(&resolved),
            });
        }
    }
    Ok(SearchOutcome {
        result: SearchResult::DepthExhausted { max_depth },
        expansions,
        visited: resolved.len(),
        kitchen_hits: hits(&resolved),
    })
}

/// Greedy best-first retrieval.
///
/// Needed objects are taken from a FIFO queue starting at the goal. Each
/// one the kitchen lacks is expanded with the best producer under the
/// heuristic (ties go to the earliest unit), and the producer's inputs not
/// seen before are queued. The chosen units, reversed and then put in
/// execution order, form the tree.
pub fn search_gbfs(
    g: &Foon,
    goal: &Goal,
    kitchen: &Kitchen,
    heuristic: Heuristic,
) -> (SearchOutcome, ExpansionTrace) {
    let mut trace = ExpansionTrace::default();
    let mut queue = VecDeque::from([goal.target.clone()]);
    let mut seen: BTreeSet<ObjectNode> = BTreeSet::from([goal.target.clone()]);
    let mut chosen_units: Vec<usize> = Vec::new();
    let mut expansions = 0;
    let mut visited = 0;
    let mut kitchen_hits = 0;

    let fail = |reason, expansions, visited, kitchen_hits, trace| {
        let outcome = SearchOutcome {
            result: SearchResult::Unsolvable(reason),
            expansions,
            visited,
            kitchen_hits,
        };
        (outcome, trace)
    };

    while let Some(need) = queue.pop_front() {
        if node_satisfied(&need, kitchen) {
            visited += 1;
            kitchen_hits += 1;
            continue;
        }
        let candidates = g.producer_indexes(&need);
        if candidates.is_empty() {
            return fail(
                Unsolvable::NoProducer(need),
                expansions,
                visited,
                kitchen_hits,
                trace,
            );
        }
        visited += 1;
        expansions += candidates.len();

        let scores: Vec<f64> = candidates
            .iter()
            .map(|&i| match heuristic {
                Heuristic::H1 => h1_score(g.unit(i)),
                Heuristic::H2 => h2_score(g.unit(i)) as f64,
            })
            .collect();
        let best = match heuristic {
            Heuristic::H1 => {
                let mut max = -1.0;
                let mut best = candidates[0];
                for (&c, &s) in candidates.iter().zip(&scores) {
                    if s > max {
                        max = s;
                        best = c;
                    }
                }
                best
            }
            Heuristic::H2 => {
                let mut min = usize::MAX;
                let mut best = candidates[0];
                for &c in candidates {
                    let s = h2_score(g.unit(c));
                    if s < min {
                        min = s;
                        best = c;
                    }
                }
                best
            }
        };
        trace.records.push(TraceRecord {
            needed: need,
            candidates: candidates.to_vec(),
            scores,
            chosen: best,
        });
        chosen_units.push(best);
        for input in &g.unit(best).inputs {
            if seen.insert(input.clone()) {
                queue.push_back(input.clone());
            }
        }
    }

    chosen_units.reverse();
    let mut unique = Vec::with_capacity(chosen_units.len());
    for u in chosen_units {
        push_unique(&mut unique, u);
    }
    let steps: Vec<FunctionalUnit> = unique.iter().map(|&i| g.unit(i).clone()).collect();
    let steps = match topological_order(&steps, kitchen) {
        Ok(s) => s,
        Err(OrderError::Cycle(units)) => {
            return fail(
                Unsolvable::Cycle(units),
                expansions,
                visited,
                kitchen_hits,
                trace,
            )
        }
        Err(OrderError::MissingInput { unit, input }) => {
            return fail(
                Unsolvable::MissingInput { unit, input },
                expansions,
                visited,
                kitchen_hits,
                trace,
            )
        }
    };
    let tree = TaskTree {
        steps,
        goal: goal.target.clone(),
        algorithm: heuristic.algorithm(),
        discovered_depth: None,
    };
    if let Some(v) = validate_tree(&tree, kitchen).violations.first() {
        let reason = Unsolvable::MissingInput {
            unit: tree.steps[v.step].source_index,
            input: v.input.clone(),
        };
        return fail(reason, expansions, visited, kitchen_hits, trace);
    }
    let outcome = SearchOutcome {
        result: SearchResult::Tree(tree),
        expansions,
        visited,
        kitchen_hits,
    };
    (outcome, trace)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderError {
    /// Source indexes of the units caught in the cycle.
    #[error("dependency cycle among units {0:?}")]
    Cycle(Vec<usize>),
    #[error("unit #{unit} needs {input}, which neither the kitchen nor another step provides")]
    MissingInput { unit: usize, input: ObjectNode },
}

/// Stable topological sort of `steps` into an executable order.
///
/// A step is ready once each of its inputs is in the kitchen or is output
/// by some step already placed; the earliest ready step is placed next, so
/// steps with no dependency between them keep their relative order.
pub fn topological_order(
    steps: &[FunctionalUnit],
    kitchen: &Kitchen,
) -> Result<Vec<FunctionalUnit>, OrderError> {
    let mut available: BTreeSet<&ObjectNode> = kitchen.iter().collect();
    let mut remaining: Vec<&FunctionalUnit> = steps.iter().collect();
    let mut ordered = Vec::with_capacity(steps.len());

    while !remaining.is_empty() {
        let ready = remaining
            .iter()
            .position(|u| u.inputs.iter().all(|i| available.contains(i)));
        let Some(pos) = ready else {
            return Err(blocked(&remaining, &available));
        };
        let unit = remaining.remove(pos);
        available.extend(unit.outputs.iter());
        ordered.push(unit.clone());
    }
    Ok(ordered)
}

fn blocked(remaining: &[&FunctionalUnit], available: &BTreeSet<&ObjectNode>) -> OrderError {
    let pending_outputs: BTreeSet<&ObjectNode> =
        remaining.iter().flat_map(|u| u.outputs.iter()).collect();
    for unit in remaining {
        for input in &unit.inputs {
            if !available.contains(input) && !pending_outputs.contains(input) {
                return OrderError::MissingInput {
                    unit: unit.source_index,
                    input: input.clone(),
                };
            }
        }
    }
    OrderError::Cycle(remaining.iter().map(|u| u.source_index).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position in the tree's step list.
    pub step: usize,
    pub input: ObjectNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
    pub goal_satisfied: bool,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty() && self.goal_satisfied
    }
}

/// Simulates the tree from the kitchen and reports every input that is
/// unavailable when its step runs.
pub fn validate_tree(tree: &TaskTree, kitchen: &Kitchen) -> ValidityReport {
    validate_steps(&tree.steps, &tree.goal, kitchen)
}

pub fn validate_steps(
    steps: &[FunctionalUnit],
    goal: &ObjectNode,
    kitchen: &Kitchen,
) -> ValidityReport {
    let mut available = kitchen.clone();
    let mut violations = Vec::new();
    for (step, unit) in steps.iter().enumerate() {
        for input in &unit.inputs {
            if !node_satisfied(input, &available) {
                violations.push(Violation {
                    step,
                    input: input.clone(),
                });
            }
        }
        available.extend(unit.outputs.iter().cloned());
    }
    ValidityReport {
        violations,
        goal_satisfied: node_satisfied(goal, &available),
    }
}

/// One derivation: depth plus units in post-order, each unit once.
#[derive(Debug, Clone)]
struct Derivation {
    depth: usize,
    units: Vec<usize>,
}

impl Derivation {
    fn unit_set(&self) -> Vec<usize> {
        let mut s = self.units.clone();
        s.sort_unstable();
        s
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|u| big.binary_search(u).is_ok())
}

/// Drops every derivation for which another one is no deeper and uses a
/// subset of its units. Swapping a dominated sub-derivation for its
/// dominator never makes the whole tree deeper or larger, so the minimum
/// over complete trees is unchanged.
fn prune_dominated(all: Vec<Derivation>) -> Vec<Derivation> {
    let mut keyed: Vec<(Vec<usize>, Derivation)> =
        all.into_iter().map(|d| (d.unit_set(), d)).collect();
    keyed.sort_by(|(a, da), (b, db)| (da.depth, a.len(), a).cmp(&(db.depth, b.len(), b)));
    let mut kept: Vec<(Vec<usize>, Derivation)> = Vec::new();
    for (set, d) in keyed {
        let dominated = kept
            .iter()
            .any(|(k, kd)| kd.depth <= d.depth && is_subset(k, &set));
        if !dominated {
            kept.push((set, d));
        }
    }
    kept.into_iter().map(|(_, d)| d).collect()
}

struct Enumerator<'a> {
    units: &'a [FunctionalUnit],
    kitchen: &'a Kitchen,
    path: Vec<usize>,
}

impl Enumerator<'_> {
    fn derivations(&mut self, need: &ObjectNode, bound: usize) -> Vec<Derivation> {
        if self.kitchen.contains(need) {
            return vec![Derivation {
                depth: 0,
                units: Vec::new(),
            }];
        }
        if bound == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let units = self.units;
        for (index, unit) in units.iter().enumerate() {
            if !unit.outputs.contains(need) || self.path.contains(&index) {
                continue;
            }
            self.path.push(index);
            let mut partial = vec![Derivation {
                depth: 0,
                units: Vec::new(),
            }];
            for input in &unit.inputs {
                let options = self.derivations(input, bound - 1);
                let mut next = Vec::with_capacity(partial.len() * options.len());
                for p in &partial {
                    for o in &options {
                        let mut units = p.units.clone();
                        o.units.iter().for_each(|&u| push_unique(&mut units, u));
                        next.push(Derivation {
                            depth: p.depth.max(o.depth),
                            units,
                        });
                    }
                }
                partial = prune_dominated(next);
                if partial.is_empty() {
                    break;
                }
            }
            self.path.pop();
            for mut d in partial {
                push_unique(&mut d.units, index);
                d.depth += 1;
                out.push(d);
            }
        }
        prune_dominated(out)
    }
}

/// Exhaustive reference search for small graphs.
///
/// Enumerates every derivation of the goal of depth at most `depth_bound`,
/// trying every producer of every needed node, and returns the one with
/// the smallest depth, then fewest steps, then lexicographically smallest
/// sorted unit indexes. `Ok(None)` means no tree exists within the bound.
pub fn oracle_min_tree(
    g: &Foon,
    goal: &Goal,
    kitchen: &Kitchen,
    depth_bound: usize,
) -> Result<Option<TaskTree>, SearchError> {
    if depth_bound < 1 {
        return Err(SearchError::InvalidDepth(depth_bound));
    }
    let mut enumerator = Enumerator {
        units: g.units(),
        kitchen,
        path: Vec::new(),
    };
    let best = enumerator
        .derivations(&goal.target, depth_bound)
        .into_iter()
        .min_by_key(|d| (d.depth, d.units.len(), d.unit_set()));
    Ok(best.map(|d| TaskTree {
        steps: d.units.iter().map(|&i| g.unit(i).clone()).collect(),
        goal: goal.target.clone(),
        algorithm: Algorithm::Oracle,
        discovered_depth: Some(d.depth),
    }))
}

/// Outcomes of all three strategies for one goal.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub goal: ObjectNode,
    pub ids: SearchOutcome,
    pub h1: SearchOutcome,
    pub h2: SearchOutcome,
}

impl CompareRow {
    /// Step counts (`None` for failures) in IDS, H1, H2 order.
    pub fn counts(&self) -> [Option<usize>; 3] {
        [&self.ids, &self.h1, &self.h2].map(|o| o.tree().map(TaskTree::len))
    }
}

/// Runs IDS and both greedy searches on the same query, concurrently.
pub fn compare(
    g: &Foon,
    goal: &Goal,
    kitchen: &Kitchen,
    max_depth: usize,
) -> Result<CompareRow, SearchError> {
    let (ids, h1, h2) = std::thread::scope(|s| {
        let ids = s.spawn(|| search_ids(g, goal, kitchen, max_depth));
        let h1 = s.spawn(|| search_gbfs(g, goal, kitchen, Heuristic::H1).0);
        let h2 = s.spawn(|| search_gbfs(g, goal, kitchen, Heuristic::H2).0);
        (
            ids.join().expect("IDS search panicked"),
            h1.join().expect("H1 search panicked"),
            h2.join().expect("H2 search panicked"),
        )
    });
    Ok(CompareRow {
        goal: goal.target.clone(),
        ids: ids?,
        h1,
        h2,
    })
}

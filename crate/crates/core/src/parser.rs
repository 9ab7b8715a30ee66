//! Line-oriented text format for FOON subgraphs and kitchen inventories.
//!
//! ```text
//! O<TAB>water
//! S<TAB>liquid
//! O<TAB>tray
//! S<TAB>empty
//! M<TAB>freeze<TAB>0.9
//! O<TAB>ice
//! //
//! ```
//!
//! Objects before the `M` line are inputs, objects after it are outputs.
//! `S` lines attach to the latest `O` line and may carry an ingredient list
//! as a third field, `{a,b,c}`; the state field may be empty when only
//! ingredients are given. Blank lines and lines starting with `#` are
//! skipped. A malformed unit is reported and skipped, never fatal.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{FunctionalUnit, Kitchen, ModelError, MotionNode, ObjectNode};

/// Rate assumed for a motion line without one.
pub const DEFAULT_SUCCESS_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    /// 1-based physical line.
    pub line_number: usize,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}: {}",
            self.line_number, self.severity, self.message
        )
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("document is not valid UTF-8: {0}")]
    NotUtf8(#[from] std::str::Utf8Error),
}

#[derive(Debug, Error, PartialEq)]
#[error("unit {position} cannot be serialized: {source}")]
pub struct SerializeError {
    pub position: usize,
    #[source]
    pub source: ModelError,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedFoon {
    pub units: Vec<FunctionalUnit>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedKitchen {
    pub kitchen: Kitchen,
    pub diagnostics: Vec<ParseDiagnostic>,
}

pub fn has_errors(diagnostics: &[ParseDiagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

enum Record<'a> {
    Object(&'a str),
    State {
        state: &'a str,
        ingredients: Option<Vec<&'a str>>,
    },
    Motion {
        name: &'a str,
        rate: f64,
    },
    Terminator,
}

fn parse_record(line: &str) -> Result<Record<'_>, String> {
    if line == "//" {
        return Ok(Record::Terminator);
    }
    let fields: Vec<&str> = line.split('\t').collect();
    match fields.as_slice() {
        ["O", name] => Ok(Record::Object(name)),
        ["O", ..] => Err("object line takes exactly one field".into()),
        ["S", state] => {
            if state.trim().is_empty() {
                Err("state line has an empty state".into())
            } else {
                Ok(Record::State {
                    state,
                    ingredients: None,
                })
            }
        }
        ["S", state, ings] => {
            let inner = ings
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| format!("ingredient list {ings:?} is not enclosed in braces"))?;
            Ok(Record::State {
                state,
                ingredients: Some(inner.split(',').collect()),
            })
        }
        ["S", ..] => Err("state line takes one or two fields".into()),
        ["M", name] => Ok(Record::Motion {
            name,
            rate: DEFAULT_SUCCESS_RATE,
        }),
        ["M", name, rate] => {
            let rate: f64 = rate
                .trim()
                .parse()
                .map_err(|_| format!("success rate {rate:?} is not a number"))?;
            if !(0.0..=1.0).contains(&rate) {
                return Err(format!("success rate {rate} is outside [0, 1]"));
            }
            Ok(Record::Motion { name, rate })
        }
        ["M", ..] => Err("motion line takes one or two fields".into()),
        _ => Err(format!("unrecognized record {line:?}")),
    }
}

/// An object being assembled from an `O` line and its `S` lines.
struct PendingObject<'a> {
    line: usize,
    name: &'a str,
    states: Vec<&'a str>,
    ingredients: Vec<&'a str>,
}

impl PendingObject<'_> {
    fn finish(&self) -> Result<ObjectNode, ModelError> {
        ObjectNode::new(self.name, &self.states, &self.ingredients)
    }
}

#[derive(Default)]
struct Block<'a> {
    first_line: usize,
    inputs: Vec<PendingObject<'a>>,
    motion: Option<(usize, &'a str, f64)>,
    outputs: Vec<PendingObject<'a>>,
    broken: bool,
}

impl<'a> Block<'a> {
    fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.motion.is_none() && self.outputs.is_empty() && !self.broken
    }

    fn current_object(&mut self) -> Option<&mut PendingObject<'a>> {
        if self.motion.is_some() {
            self.outputs.last_mut()
        } else {
            self.inputs.last_mut()
        }
    }
}

fn logical_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, line)| (i + 1, line.strip_suffix('\r').unwrap_or(line)))
        .filter(|(_, line)| !line.trim().is_empty() && !line.starts_with('#'))
}

struct Diagnostics(Vec<ParseDiagnostic>);

impl Diagnostics {
    fn error(&mut self, line_number: usize, message: impl Into<String>) {
        self.0.push(ParseDiagnostic {
            line_number,
            severity: Severity::Error,
            message: message.into(),
        });
    }
}

/// Parses a FOON subgraph document. Units come back in file order with
/// `source_index` set to their position among the accepted units.
pub fn parse_foon(text: &str) -> ParsedFoon {
    let mut diags = Diagnostics(Vec::new());
    let mut units = Vec::new();
    let mut block = Block::default();
    let mut last_line = 0;

    for (line_number, line) in logical_lines(text) {
        last_line = line_number;
        if block.is_empty() {
            block.first_line = line_number;
        }
        let record = match parse_record(line) {
            Ok(r) => r,
            Err(msg) => {
                diags.error(line_number, msg);
                block.broken = true;
                continue;
            }
        };
        match record {
            Record::Terminator => {
                if let Some(unit) = finish_unit(&block, line_number, &mut diags) {
                    units.push(unit);
                }
                block = Block::default();
            }
            Record::Object(name) => {
                let obj = PendingObject {
                    line: line_number,
                    name,
                    states: Vec::new(),
                    ingredients: Vec::new(),
                };
                if block.motion.is_some() {
                    block.outputs.push(obj);
                } else {
                    block.inputs.push(obj);
                }
            }
            Record::State { state, ingredients } => match block.current_object() {
                Some(obj) => {
                    obj.states.push(state);
                    obj.ingredients.extend(ingredients.unwrap_or_default());
                }
                None => {
                    diags.error(line_number, "state line does not follow an object line");
                    block.broken = true;
                }
            },
            Record::Motion { name, rate } => {
                if block.motion.is_some() {
                    diags.error(line_number, "unit has more than one motion line");
                    block.broken = true;
                } else if block.inputs.is_empty() {
                    diags.error(line_number, "motion line precedes any input object");
                    block.broken = true;
                    // Objects that follow are still outputs of this block.
                    block.motion = Some((line_number, name, rate));
                } else {
                    block.motion = Some((line_number, name, rate));
                }
            }
        }
    }
    if !block.is_empty() {
        diags.error(last_line, "unit is not terminated by `//`");
    }

    for (i, unit) in units.iter_mut().enumerate() {
        unit.source_index = i;
    }
    ParsedFoon {
        units,
        diagnostics: diags.0,
    }
}

fn finish_unit(block: &Block, end_line: usize, diags: &mut Diagnostics) -> Option<FunctionalUnit> {
    if block.broken {
        return None;
    }
    let Some((motion_line, motion_name, rate)) = block.motion else {
        diags.error(end_line, "unit has no motion line");
        return None;
    };
    if block.outputs.is_empty() {
        diags.error(end_line, "unit has no output objects");
        return None;
    }
    let mut objects = |pending: &[PendingObject]| -> Option<Vec<ObjectNode>> {
        let mut out = Vec::with_capacity(pending.len());
        for p in pending {
            match p.finish() {
                Ok(node) => out.push(node),
                Err(e) => {
                    diags.error(p.line, e.to_string());
                    return None;
                }
            }
        }
        Some(out)
    };
    let inputs = objects(&block.inputs)?;
    let outputs = objects(&block.outputs)?;
    let motion = match MotionNode::new(motion_name, rate) {
        Ok(m) => m,
        Err(e) => {
            diags.error(motion_line, e.to_string());
            return None;
        }
    };
    match FunctionalUnit::new(inputs, motion, outputs) {
        Ok(unit) => Some(unit),
        Err(e) => {
            diags.error(block.first_line, e.to_string());
            None
        }
    }
}

/// Parses raw bytes, failing only if they are not UTF-8.
pub fn parse_foon_bytes(bytes: &[u8]) -> Result<ParsedFoon, ParseError> {
    Ok(parse_foon(std::str::from_utf8(bytes)?))
}

/// Formats a rate with at most six decimals, trailing zeros trimmed but
/// always keeping one digit after the point.
pub fn format_rate(rate: f64) -> String {
    let mut s = format!("{rate:.6}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    s
}

fn write_object(out: &mut String, node: &ObjectNode) {
    out.push_str("O\t");
    out.push_str(node.name());
    out.push('\n');
    let ingredients = if node.ingredients().is_empty() {
        None
    } else {
        Some(
            node.ingredients()
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
                .join(","),
        )
    };
    let mut states = node.states().iter();
    match (states.next(), &ingredients) {
        (Some(first), Some(ings)) => out.push_str(&format!("S\t{first}\t{{{ings}}}\n")),
        (Some(first), None) => out.push_str(&format!("S\t{first}\n")),
        (None, Some(ings)) => out.push_str(&format!("S\t\t{{{ings}}}\n")),
        (None, None) => {}
    }
    for state in states {
        out.push_str(&format!("S\t{state}\n"));
    }
}

/// Writes units in canonical form. Every unit is validated first.
pub fn serialize_foon(units: &[FunctionalUnit]) -> Result<String, SerializeError> {
    let mut out = String::new();
    for (position, unit) in units.iter().enumerate() {
        unit.validate()
            .map_err(|source| SerializeError { position, source })?;
        for input in &unit.inputs {
            write_object(&mut out, input);
        }
        out.push_str(&format!(
            "M\t{}\t{}\n",
            unit.motion.name(),
            format_rate(unit.motion.success_rate())
        ));
        for output in &unit.outputs {
            write_object(&mut out, output);
        }
        out.push_str("//\n");
    }
    Ok(out)
}

/// Parses a kitchen inventory: `O`/`S` records separated by `//`.
pub fn parse_kitchen(text: &str) -> ParsedKitchen {
    let mut diags = Diagnostics(Vec::new());
    let mut kitchen = Kitchen::new();
    let mut pending: Vec<PendingObject> = Vec::new();
    let mut broken = false;

    let mut flush = |pending: &mut Vec<PendingObject>, broken: bool, diags: &mut Diagnostics| {
        if !broken {
            for p in pending.iter() {
                match p.finish() {
                    Ok(node) => {
                        kitchen.insert(node);
                    }
                    Err(e) => diags.error(p.line, e.to_string()),
                }
            }
        }
        pending.clear();
    };

    for (line_number, line) in logical_lines(text) {
        match parse_record(line) {
            Ok(Record::Terminator) => {
                flush(&mut pending, broken, &mut diags);
                broken = false;
            }
            Ok(Record::Object(name)) => pending.push(PendingObject {
                line: line_number,
                name,
                states: Vec::new(),
                ingredients: Vec::new(),
            }),
            Ok(Record::State { state, ingredients }) => match pending.last_mut() {
                Some(obj) => {
                    obj.states.push(state);
                    obj.ingredients.extend(ingredients.unwrap_or_default());
                }
                None => {
                    diags.error(line_number, "state line does not follow an object line");
                    broken = true;
                }
            },
            Ok(Record::Motion { .. }) => {
                diags.error(
                    line_number,
                    "motion lines are not allowed in a kitchen file",
                );
                broken = true;
            }
            Err(msg) => {
                diags.error(line_number, msg);
                broken = true;
            }
        }
    }
    // A trailing block without `//` is accepted.
    flush(&mut pending, broken, &mut diags);

    ParsedKitchen {
        kitchen,
        diagnostics: diags.0,
    }
}

pub fn serialize_kitchen(kitchen: &Kitchen) -> String {
    let mut out = String::new();
    for item in kitchen.iter() {
        write_object(&mut out, item);
        out.push_str("//\n");
    }
    out
}

/// Distinct object identities mentioned by `units`, sorted.
pub fn object_nodes(units: &[FunctionalUnit]) -> BTreeSet<ObjectNode> {
    units
        .iter()
        .flat_map(|u| u.inputs.iter().chain(u.outputs.iter()))
        .cloned()
        .collect()
}

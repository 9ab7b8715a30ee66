//! The `foon` command-line tool.
//!
//! Exit status: 0 on success, 1 on a domain failure (no tree, invalid
//! tree, parse errors, unreadable files), 2 on a usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use crate::export::{graph_to_json, to_dot, tree_from_json, tree_to_json};
use crate::graph::{build_graph, merge_all, stats, Foon, GraphStats};
use crate::model::{Goal, Kitchen, ModelError, ObjectNode};
use crate::parser::{
    has_errors, parse_foon_bytes, parse_kitchen, serialize_foon, ParseDiagnostic, Severity,
};
use crate::retrieval::{
    compare, search_gbfs, search_ids, validate_steps, CompareRow, ExpansionTrace, Heuristic,
    SearchOutcome, SearchResult,
};

pub const DEFAULT_MAX_DEPTH: u64 = 25;

/// Goal selector `name[:state,...][#ingredient,...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalSpec(pub ObjectNode);

impl FromStr for GoalSpec {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, ingredients) = match s.split_once('#') {
            Some((h, i)) => (h, i.split(',').collect()),
            None => (s, Vec::new()),
        };
        let (name, states) = match head.split_once(':') {
            Some((n, st)) => (n, st.split(',').collect()),
            None => (head, Vec::new()),
        };
        ObjectNode::new(name, states, ingredients).map(GoalSpec)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "foon",
    version,
    about = "Parse, merge and search functional object-oriented networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Ids,
    Gbfs1,
    Gbfs2,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeFormat {
    Foon,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Dot,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a FOON file, report diagnostics and statistics.
    Parse { file: PathBuf },
    /// Merge FOON files into one deduplicated universal FOON.
    Merge {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print unit, object and motion counts.
    Stats { file: PathBuf },
    /// Retrieve a task tree for a goal.
    Search {
        #[arg(long)]
        goal: GoalSpec,
        #[arg(long)]
        kitchen: PathBuf,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH, value_parser = clap::value_parser!(u64).range(1..))]
        max_depth: u64,
        /// Print the greedy expansion trace to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = TreeFormat::Foon)]
        format: TreeFormat,
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a task tree executes from a kitchen and yields the goal.
    Validate {
        #[arg(long)]
        kitchen: PathBuf,
        #[arg(long)]
        goal: GoalSpec,
        tree_file: PathBuf,
    },
    /// Tabulate tree sizes of all three searches for one or more goals.
    Compare {
        #[arg(long, required = true)]
        goal: Vec<GoalSpec>,
        #[arg(long)]
        kitchen: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH, value_parser = clap::value_parser!(u64).range(1..))]
        max_depth: u64,
        graph: PathBuf,
    },
    /// Render a FOON file as DOT or JSON.
    Export {
        #[arg(long, value_enum)]
        format: ExportFormat,
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Session<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
    failed: bool,
}

impl Session<'_> {
    fn report(&mut self, path: &Path, diagnostics: &[ParseDiagnostic]) {
        for d in diagnostics {
            let severity = match (self.color, d.severity) {
                (true, Severity::Error) => format!("\x1b[31m{}\x1b[0m", d.severity),
                (true, Severity::Warning) => format!("\x1b[33m{}\x1b[0m", d.severity),
                (false, s) => s.to_string(),
            };
            let _ = writeln!(
                self.err,
                "{}:{}: {}: {}",
                path.display(),
                d.line_number,
                severity,
                d.message
            );
        }
        if has_errors(diagnostics) {
            self.failed = true;
        }
    }

    fn load_graph(&mut self, path: &Path) -> anyhow::Result<Foon> {
        let bytes =
            std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let parsed = parse_foon_bytes(&bytes).with_context(|| path.display().to_string())?;
        self.report(path, &parsed.diagnostics);
        Ok(build_graph(parsed.units))
    }

    fn load_kitchen(&mut self, path: &Path) -> anyhow::Result<Kitchen> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let parsed = parse_kitchen(&text);
        self.report(path, &parsed.diagnostics);
        Ok(parsed.kitchen)
    }

    fn emit(&mut self, output: Option<&Path>, text: &str) -> anyhow::Result<()> {
        match output {
            Some(path) => std::fs::write(path, text)
                .with_context(|| format!("cannot write {}", path.display())),
            None => self
                .out
                .write_all(text.as_bytes())
                .context("cannot write output"),
        }
    }

    fn note(&mut self, message: impl AsRef<str>) {
        let _ = writeln!(self.err, "{}", message.as_ref());
    }
}

fn format_stats(s: &GraphStats) -> String {
    format!(
        "units: {}\nobjects: {}\nmotions: {}\n",
        s.unit_count, s.object_node_count, s.motion_node_count
    )
}

/// Fixed-width table, one row per goal, followed by expansion counters.
pub fn format_compare_table(rows: &[CompareRow]) -> String {
    let header = ["Goal", "IDS", "H1", "H2"];
    let cells: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.goal.to_string(),
                r.ids.summary(),
                r.h1.summary(),
                r.h2.summary(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cols: [&str; 4]| {
        let mut s = format!("{:<w$}", cols[0], w = widths[0]);
        for (c, w) in cols[1..].iter().zip(&widths[1..]) {
            write!(s, "  {c:>w$}").unwrap();
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    for row in &cells {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
    }
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "expansions {}: ids={} h1={} h2={}",
            r.goal, r.ids.expansions, r.h1.expansions, r.h2.expansions
        )
        .unwrap();
    }
    out
}

fn format_trace(trace: &ExpansionTrace) -> String {
    let mut out = String::new();
    for r in &trace.records {
        let scored: Vec<String> = r
            .candidates
            .iter()
            .zip(&r.scores)
            .map(|(c, s)| format!("#{c}={s}"))
            .collect();
        writeln!(
            out,
            "need {}: {} -> #{}",
            r.needed,
            scored.join(" "),
            r.chosen
        )
        .unwrap();
    }
    out
}

fn describe(outcome: &SearchOutcome) -> String {
    match &outcome.result {
        SearchResult::Tree(t) => {
            let depth = t
                .discovered_depth
                .map(|d| format!(", depth {d}"))
                .unwrap_or_default();
            format!(
                "{}: {} steps{depth} (expansions {}, visited {})",
                t.algorithm,
                t.len(),
                outcome.expansions,
                outcome.visited
            )
        }
        SearchResult::DepthExhausted { max_depth } => {
            format!(
                "no tree within depth limit {max_depth} (expansions {})",
                outcome.expansions
            )
        }
        SearchResult::Unsolvable(reason) => format!("unsolvable: {reason}"),
    }
}

fn execute(ctx: &mut Session, command: Command) -> anyhow::Result<()> {
    match command {
        Command::Parse { file } => {
            let g = ctx.load_graph(&file)?;
            let text = format_stats(&stats(&g));
            ctx.emit(None, &text)?;
        }
        Command::Stats { file } => {
            let g = ctx.load_graph(&file)?;
            let text = format_stats(&stats(&g));
            ctx.emit(None, &text)?;
        }
        Command::Merge { files, output } => {
            let graphs = files
                .iter()
                .map(|f| ctx.load_graph(f))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let merged = merge_all(&graphs);
            let text = serialize_foon(merged.units())?;
            ctx.emit(output.as_deref(), &text)?;
        }
        Command::Search {
            goal,
            kitchen,
            algo,
            max_depth,
            trace,
            format,
            graph,
            output,
        } => {
            let g = ctx.load_graph(&graph)?;
            let k = ctx.load_kitchen(&kitchen)?;
            let goal = Goal::new(goal.0);
            let max_depth = max_depth as usize;
            let outcome = match algo {
                AlgoArg::All => {
                    let row = compare(&g, &goal, &k, max_depth)?;
                    if row.counts().iter().any(Option::is_none) {
                        ctx.failed = true;
                    }
                    return ctx.emit(output.as_deref(), &format_compare_table(&[row]));
                }
                AlgoArg::Ids => search_ids(&g, &goal, &k, max_depth)?,
                AlgoArg::Gbfs1 | AlgoArg::Gbfs2 => {
                    let h = if algo == AlgoArg::Gbfs1 {
                        Heuristic::H1
                    } else {
                        Heuristic::H2
                    };
                    let (outcome, expansion_trace) = search_gbfs(&g, &goal, &k, h);
                    if trace {
                        let text = format_trace(&expansion_trace);
                        let _ = ctx.err.write_all(text.as_bytes());
                    }
                    outcome
                }
            };
            ctx.note(describe(&outcome));
            match outcome.tree() {
                Some(tree) => {
                    let text = match format {
                        TreeFormat::Foon => serialize_foon(&tree.steps)?,
                        TreeFormat::Json => tree_to_json(tree),
                    };
                    ctx.emit(output.as_deref(), &text)?;
                }
                None => ctx.failed = true,
            }
        }
        Command::Validate {
            kitchen,
            goal,
            tree_file,
        } => {
            let k = ctx.load_kitchen(&kitchen)?;
            let text = std::fs::read_to_string(&tree_file)
                .with_context(|| format!("cannot read {}", tree_file.display()))?;
            let steps = if text.trim_start().starts_with('{') {
                tree_from_json(&text)?.steps
            } else {
                let parsed = crate::parser::parse_foon(&text);
                ctx.report(&tree_file, &parsed.diagnostics);
                parsed.units
            };
            let report = validate_steps(&steps, &goal.0, &k);
            for v in &report.violations {
                ctx.note(format!(
                    "step {}: input {} is not available",
                    v.step, v.input
                ));
            }
            if !report.goal_satisfied {
                ctx.note(format!("goal {} is not produced", goal.0));
            }
            if report.is_valid() {
                ctx.emit(None, &format!("valid: {} steps\n", steps.len()))?;
            } else {
                ctx.emit(None, "invalid\n")?;
                ctx.failed = true;
            }
        }
        Command::Compare {
            goal,
            kitchen,
            max_depth,
            graph,
        } => {
            let g = ctx.load_graph(&graph)?;
            let k = ctx.load_kitchen(&kitchen)?;
            let rows = goal
                .into_iter()
                .map(|spec| compare(&g, &Goal::new(spec.0), &k, max_depth as usize))
                .collect::<Result<Vec<_>, _>>()?;
            if rows.iter().any(|r| r.counts().iter().any(Option::is_none)) {
                ctx.failed = true;
            }
            ctx.emit(None, &format_compare_table(&rows))?;
        }
        Command::Export {
            format,
            file,
            output,
        } => {
            let g = ctx.load_graph(&file)?;
            let text = match format {
                ExportFormat::Dot => to_dot(g.units()).text,
                ExportFormat::Json => graph_to_json(g.units()),
            };
            ctx.emit(output.as_deref(), &text)?;
        }
    }
    Ok(())
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    let _ = write!(err, "\n{}", Cli::command().render_help());
                    2
                }
            };
        }
    };
    let color = std::env::var("FOON_COLOR").as_deref() == Ok("1");
    let mut ctx = Session {
        out,
        err,
        color,
        failed: false,
    };
    match execute(&mut ctx, cli.command) {
        Ok(()) if !ctx.failed => 0,
        Ok(()) => 1,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e:#}");
            1
        }
    }
}

//! End-to-end runs: problem file in, verdict and witness out.

use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::logic::{
    check_cycle_free, normalize, satisfiable, CycleError, Formula, SolveError, SolveOptions, SolveOutcome,
    SolverStats, Witness, DEFAULT_NODE_LIMIT, START_PROP,
};
use crate::predicates::{expand, mentions_start, parse_spec, resolve_placeholders, Environment, PredicateError};
use crate::tree::{from_binary, serialize_forest, validate_with, Annotation, BinaryTree, Document, Element, ForestError, NodeId, ValidateOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    /// Only the witness document.
    Xml,
    Json,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec_path: PathBuf,
    /// Compile attribute constraints of schemas.
    pub attributes: bool,
    /// Live BDD node limit of the solver.
    pub node_budget: usize,
    pub format: OutputFormat,
    /// Looked up for schema files after the directory of the problem file.
    pub schema_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(spec_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            spec_path: spec_path.into(),
            attributes: false,
            node_budget: DEFAULT_NODE_LIMIT,
            format: OutputFormat::default(),
            schema_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfiable,
    Unsatisfiable,
}

/// Outcome of validating the witness against one loaded schema.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub schema: String,
    pub root: String,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
    /// Child index path of the offending element.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseTiming {
    pub phase: &'static str,
    pub millis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub verdict: Verdict,
    /// Serialized witness, present iff satisfiable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip)]
    pub forest: Option<Vec<Element>>,
    #[serde(skip)]
    pub annotation: Option<Annotation>,
    /// The solver's binary witness.
    #[serde(skip)]
    pub model: Option<Witness>,
    #[serde(skip)]
    pub formula: Formula,
    pub diagnostics: Vec<Diagnostic>,
    pub timings: Vec<PhaseTiming>,
    pub formula_size: usize,
    pub stats: SolverStats,
}

impl RunReport {
    pub fn is_sat(&self) -> bool {
        self.verdict == Verdict::Satisfiable
    }

    pub fn total_millis(&self) -> f64 {
        self.timings.iter().map(|t| t.millis).sum()
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Xml => self.witness.clone().unwrap_or_default(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
            OutputFormat::Human => self.human(),
        }
    }

    fn human(&self) -> String {
        let mut out = String::new();
        match &self.witness {
            None => out.push_str("unsatisfiable (property proved)\n"),
            Some(xml) => {
                out.push_str("satisfiable, sample document:\n");
                out.push_str(xml);
            }
        }
        for d in &self.diagnostics {
            let _ = match &d.violation {
                None => writeln!(out, "valid against {} (root {})", d.schema, d.root),
                Some(v) => writeln!(out, "invalid against {} (root {}): {v}", d.schema, d.root),
            };
        }
        let phases: Vec<String> = self.timings.iter().map(|t| format!("{} {:.1} ms", t.phase, t.millis)).collect();
        let _ = writeln!(out, "time: {}", phases.join(", "));
        out
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(PredicateError),
    #[error("expansion error: {0}")]
    Expand(PredicateError),
    #[error("formula is not cycle-free: {0}")]
    CycleFree(#[from] CycleError),
    #[error("budget exhausted: the solver needed more than {limit} BDD nodes")]
    Budget { limit: usize },
    #[error("solver error: {0}")]
    Solve(SolveError),
    #[error("witness error: {0}")]
    Witness(#[from] ForestError),
}

impl RunError {
    pub fn phase(&self) -> &'static str {
        match self {
            RunError::Read { .. } => "read",
            RunError::Parse(_) => "parse",
            RunError::Expand(_) => "expand",
            RunError::CycleFree(_) => "normalize",
            RunError::Budget { .. } | RunError::Solve(_) => "solve",
            RunError::Witness(_) => "witness",
        }
    }
}

struct Clock {
    last: Instant,
    timings: Vec<PhaseTiming>,
}

impl Clock {
    fn new() -> Self {
        Clock { last: Instant::now(), timings: Vec::new() }
    }

    fn lap(&mut self, phase: &'static str) {
        let now = Instant::now();
        self.timings.push(PhaseTiming { phase, millis: (now - self.last).as_secs_f64() * 1e3 });
        self.last = now;
    }
}

/// Reads the problem file named by `config` and solves it.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    let text = std::fs::read_to_string(&config.spec_path)
        .map_err(|source| RunError::Read { path: config.spec_path.display().to_string(), source })?;
    run_source(&text, config)
}

/// Solves problem text; `config.spec_path` only serves to locate schemas.
pub fn run_source(text: &str, config: &RunConfig) -> Result<RunReport, RunError> {
    let mut clock = Clock::new();
    let spec = parse_spec(text).map_err(RunError::Parse)?;
    clock.lap("parse");

    let mut env = Environment::new(config.attributes);
    let spec_dir = config.spec_path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    env = env.with_search_dir(spec_dir);
    if let Some(dir) = &config.schema_dir {
        env = env.with_search_dir(dir);
    }
    let expanded = expand(&spec, &mut env).map_err(RunError::Expand)?;
    clock.lap("expand");

    let formula = normalize(&resolve_placeholders(&expanded, &env));
    check_cycle_free(&formula)?;
    clock.lap("normalize");
    log::info!("solving a formula of size {}", formula.size());

    let opts = SolveOptions { node_limit: config.node_budget, ..SolveOptions::default() };
    let outcome = satisfiable(&formula, &opts).map_err(|e| match e {
        SolveError::ResourceLimit { limit } => RunError::Budget { limit },
        e => RunError::Solve(e),
    })?;
    clock.lap("solve");

    let stats = outcome.stats().clone();
    let mut report = RunReport {
        verdict: Verdict::Unsatisfiable,
        witness: None,
        forest: None,
        annotation: None,
        model: None,
        formula_size: formula.size(),
        formula,
        diagnostics: Vec::new(),
        timings: Vec::new(),
        stats,
    };
    if let SolveOutcome::Sat { witness, .. } = outcome {
        let forest = from_binary(&witness.tree)?;
        let ann = annotate(&witness, &report.formula);
        report.witness = Some(serialize_forest(&forest, Some(&ann)));
        clock.lap("witness");

        let opts = ValidateOptions { attributes: config.attributes };
        for s in env.schemas() {
            let result = match forest.as_slice() {
                [root] => validate_with(&Document::new(root.clone()), &s.tree_type, &opts),
                _ => Err(crate::tree::Violation {
                    path: Vec::new(),
                    element: String::new(),
                    message: format!("the witness has {} top-level elements", forest.len()),
                }),
            };
            report.diagnostics.push(Diagnostic {
                schema: s.path.file_name().map_or_else(|| s.path.display().to_string(), |n| n.to_string_lossy().into_owned()),
                root: s.root.clone(),
                valid: result.is_ok(),
                path: result.as_ref().err().map(|v| v.path.clone()),
                violation: result.err().map(|v| v.message),
            });
        }
        clock.lap("validate");
        report.verdict = Verdict::Satisfiable;
        report.forest = Some(forest);
        report.annotation = Some(ann);
        report.model = Some(witness);
    }
    report.timings = clock.timings;
    Ok(report)
}

/// Binary node ids in the order the forest is serialized.
fn preorder_positions(tree: &BinaryTree) -> Vec<Option<usize>> {
    let mut pos = vec![None; tree.len()];
    let mut stack = vec![tree.root];
    let mut next = 0;
    while let Some(id) = stack.pop() {
        pos[id] = Some(next);
        next += 1;
        let n = tree.node(id);
        // first child subtree before the next sibling
        stack.extend(n.child2);
        stack.extend(n.child1);
    }
    pos
}

/// Marks the nodes carrying the start mark as context, when the goal
/// mentions it, and the satisfying node as target.
pub fn annotate(witness: &Witness, goal: &Formula) -> Annotation {
    let pos = preorder_positions(&witness.tree);
    let context = if mentions_start(goal) {
        witness.tree.marked(START_PROP).into_iter().filter_map(|id: NodeId| pos[id]).collect()
    } else {
        Default::default()
    };
    Annotation { context, target: pos[witness.target] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_model, parse_formula};

    fn solve_text(text: &str) -> RunReport {
        run_source(text, &RunConfig::new("problem.txt")).unwrap()
    }

    #[test]
    fn false_is_unsatisfiable() {
        let r = solve_text("F");
        assert_eq!(r.verdict, Verdict::Unsatisfiable);
        assert!(r.witness.is_none());
        assert!(r.render(OutputFormat::Human).starts_with("unsatisfiable"));
    }

    #[test]
    fn witness_is_annotated() {
        let r = solve_text("a & <1>(# & b)");
        let xml = r.witness.unwrap();
        assert!(xml.contains("<a xmlns:solver=\"http://wam.inrialpes.fr/xml\" solver:target=\"true\">"), "{xml}");
        assert!(xml.contains("<b solver:context=\"true\"/>"), "{xml}");
    }

    #[test]
    fn no_context_without_start_mark() {
        let r = solve_text("a & <1>b");
        assert!(r.annotation.unwrap().context.is_empty());
        assert!(!r.witness.unwrap().contains("solver:context"));
    }

    #[test]
    fn annotated_target_satisfies_the_goal() {
        for src in ["a & <2>b", "b & <-2>a", "c & <-1>(a & <2>b)", "let $X = <1>$X | b in a & $X"] {
            let goal = parse_formula(src).unwrap();
            let SolveOutcome::Sat { witness, .. } = satisfiable(&goal, &SolveOptions::default()).unwrap() else {
                panic!("{src} should be satisfiable")
            };
            let ann = annotate(&witness, &goal);
            assert!(check_model(&goal, &witness.tree, witness.target));
            let pos = preorder_positions(&witness.tree);
            assert_eq!(ann.target, pos[witness.target]);
        }
    }

    #[test]
    fn budget_exhaustion_is_distinct() {
        let config = RunConfig { node_budget: 4, ..RunConfig::new("p.txt") };
        let err = run_source("a & <1>(b & <2>c) & let $X = <1>$X | d in $X", &config).unwrap_err();
        assert!(matches!(err, RunError::Budget { .. }), "{err}");
        assert_eq!(err.phase(), "solve");
    }

    #[test]
    fn phases_are_labelled() {
        let err = run_source("select(\"a[\", #)", &RunConfig::new("p.txt")).unwrap_err();
        assert_eq!(err.phase(), "expand");
        let err = run_source("a &", &RunConfig::new("p.txt")).unwrap_err();
        assert_eq!(err.phase(), "parse");
    }
}

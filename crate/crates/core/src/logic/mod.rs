//! Alternation-free mu-calculus over finite binary trees with attributes.
//!
//! Formulas are interpreted over the first-child/next-sibling encoding of
//! XML forests. Program `1` goes to the first child, `2` to the next
//! sibling, and `-1`/`-2` are the converse moves.

mod bdd;
mod cycle;
mod graph;
mod model_check;
mod normalize;
mod parse;
mod print;
mod solver;

use std::fmt;

pub use bdd::{Bdd, BddManager};
pub use cycle::{check_cycle_free, CycleError};
pub use model_check::{check_model, eval_nodes};
pub use normalize::{is_nnf, normalize};
pub use parse::{parse_formula, ParseError};
pub(crate) use parse::Parser;
pub use solver::{satisfiable, SolveError, DEFAULT_NODE_LIMIT, SolveOptions, SolveOutcome, SolverStats, Witness};

/// Reserved proposition marking the start context of a query.
pub const START_PROP: &str = "#";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    /// First child.
    Down1,
    /// Next sibling.
    Down2,
    /// Parent, seen from a first child.
    Up1,
    /// Previous sibling.
    Up2,
}

impl Program {
    pub const ALL: [Program; 4] = [Program::Down1, Program::Down2, Program::Up1, Program::Up2];

    pub fn converse(self) -> Program {
        match self {
            Program::Down1 => Program::Up1,
            Program::Down2 => Program::Up2,
            Program::Up1 => Program::Down1,
            Program::Up2 => Program::Down2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Program::Down1 => "1",
            Program::Down2 => "2",
            Program::Up1 => "-1",
            Program::Up2 => "-2",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Program::Down1 => 0,
            Program::Down2 => 1,
            Program::Up1 => 2,
            Program::Up2 => 3,
        }
    }

    pub(crate) fn from_label(label: &str) -> Option<Program> {
        match label {
            "1" => Some(Program::Down1),
            "2" => Some(Program::Down2),
            "-1" => Some(Program::Up1),
            "-2" => Some(Program::Up2),
            _ => None,
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Argument of a predicate call: either a formula or a quoted string
/// (an XPath expression or a schema file name).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Arg {
    Formula(Formula),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// The node carries this element name.
    Element(String),
    /// Atomic proposition; names start with an underscore.
    Prop(String),
    /// The start context `#`.
    Start,
    /// The node carries this attribute (`<l>T`).
    Attribute(String),
    Var(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Modal(Program, Box<Formula>),
    /// Simultaneous recursive bindings. Formulas are cycle-free, so least
    /// and greatest fixpoints coincide.
    Let(Vec<(String, Formula)>, Box<Formula>),
    /// Predicate call, removed by expansion.
    Call(String, Vec<Arg>),
    /// Conjunction of `~<l>T` over every attribute name of the run except
    /// the listed ones. Resolved once the attribute universe is known.
    AttrComplement(Vec<String>),
}

impl Formula {
    pub fn element(name: impl Into<String>) -> Formula {
        Formula::Element(name.into())
    }

    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }

    pub fn attribute(name: impl Into<String>) -> Formula {
        Formula::Attribute(name.into())
    }

    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Formula {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    pub fn modal(p: Program, f: Formula) -> Formula {
        Formula::Modal(p, Box::new(f))
    }

    pub fn let_in(bindings: Vec<(String, Formula)>, body: Formula) -> Formula {
        Formula::Let(bindings, Box::new(body))
    }

    /// Conjunction of all items, `T` when empty. Long conjunctions are
    /// nested as a balanced tree to keep the syntax tree shallow.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        balanced(items.into_iter().collect(), Formula::and).unwrap_or(Formula::True)
    }

    /// Disjunction of all items, `F` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        balanced(items.into_iter().collect(), Formula::or).unwrap_or(Formula::False)
    }

    /// Calls `visit` on every subformula in pre-order, including formula
    /// arguments of predicate calls.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        match self {
            Formula::Not(a) | Formula::Modal(_, a) => a.walk(visit),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Equiv(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Formula::Let(bindings, body) => {
                for (_, def) in bindings {
                    def.walk(visit);
                }
                body.walk(visit);
            }
            Formula::Call(_, args) => {
                for arg in args {
                    if let Arg::Formula(f) = arg {
                        f.walk(visit);
                    }
                }
            }
            _ => {}
        }
    }

    /// Number of nodes of the syntax tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Element names occurring in the formula, sorted and deduplicated.
    pub fn element_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Element(n) = f {
                names.push(n.clone());
            }
        });
        names.sort();
        names.dedup();
        names
    }

    /// Attribute names occurring in attribute tests or complements.
    pub fn attribute_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.walk(&mut |f| match f {
            Formula::Attribute(n) => names.push(n.clone()),
            Formula::AttrComplement(list) => names.extend(list.iter().cloned()),
            _ => {}
        });
        names.sort();
        names.dedup();
        names
    }

    /// Variable names used anywhere (bound or free).
    pub fn variable_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.walk(&mut |f| match f {
            Formula::Var(n) => names.push(n.clone()),
            Formula::Let(bindings, _) => names.extend(bindings.iter().map(|(n, _)| n.clone())),
            _ => {}
        });
        names.sort();
        names.dedup();
        names
    }

    pub fn contains_calls(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| {
            if matches!(f, Formula::Call(..)) {
                found = true;
            }
        });
        found
    }

    /// Replaces every attribute complement by the explicit conjunction of
    /// negated attribute tests over `universe`.
    pub fn resolve_attr_complements(&self, universe: &[String]) -> Formula {
        self.map_bottom_up(&mut |f| match f {
            Formula::AttrComplement(list) => Formula::and_all(
                universe
                    .iter()
                    .filter(|a| !list.contains(a))
                    .map(|a| Formula::not(Formula::attribute(a.clone()))),
            ),
            other => other,
        })
    }

    /// Rebuilds the formula, applying `rewrite` to every node after its
    /// children have been rebuilt.
    pub fn map_bottom_up(&self, rewrite: &mut impl FnMut(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::Not(a) => Formula::not(a.map_bottom_up(rewrite)),
            Formula::Modal(p, a) => Formula::modal(*p, a.map_bottom_up(rewrite)),
            Formula::And(a, b) => Formula::and(a.map_bottom_up(rewrite), b.map_bottom_up(rewrite)),
            Formula::Or(a, b) => Formula::or(a.map_bottom_up(rewrite), b.map_bottom_up(rewrite)),
            Formula::Implies(a, b) => {
                Formula::implies(a.map_bottom_up(rewrite), b.map_bottom_up(rewrite))
            }
            Formula::Equiv(a, b) => {
                Formula::equiv(a.map_bottom_up(rewrite), b.map_bottom_up(rewrite))
            }
            Formula::Let(bindings, body) => Formula::let_in(
                bindings
                    .iter()
                    .map(|(n, d)| (n.clone(), d.map_bottom_up(rewrite)))
                    .collect(),
                body.map_bottom_up(rewrite),
            ),
            Formula::Call(name, args) => Formula::Call(
                name.clone(),
                args.iter()
                    .map(|a| match a {
                        Arg::Formula(f) => Arg::Formula(f.map_bottom_up(rewrite)),
                        Arg::Text(s) => Arg::Text(s.clone()),
                    })
                    .collect(),
            ),
            leaf => leaf.clone(),
        };
        rewrite(rebuilt)
    }
}

fn balanced(mut items: Vec<Formula>, op: fn(Formula, Formula) -> Formula) -> Option<Formula> {
    match items.len() {
        0 => None,
        1 => items.pop(),
        n => {
            let right = items.split_off(n - n / 2);
            Some(op(balanced(items, op)?, balanced(right, op)?))
        }
    }
}

/// Generates variable names that do not clash with a set of used names.
#[derive(Debug, Default)]
pub struct FreshNames {
    used: std::collections::HashSet<String>,
    counter: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding(formula: &Formula) -> Self {
        let mut fresh = Self::new();
        fresh.reserve_all(formula);
        fresh
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn reserve_all(&mut self, formula: &Formula) {
        for name in formula.variable_names() {
            self.used.insert(name);
        }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        loop {
            self.counter += 1;
            let candidate = format!("{base}{}", self.counter);
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

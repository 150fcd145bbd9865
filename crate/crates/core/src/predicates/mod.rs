//! Problem specifications and expansion of analysis predicates into the
//! logic.
//!
//! A specification is a list of custom predicate definitions followed by a
//! goal formula. Built-in predicates embed queries and schemas; they are
//! macros over the logic and disappear during [`expand`].

mod env;
mod subst;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::logic::{Arg, Formula, ParseError, Parser, Program};
use crate::schema::{SchemaError, TypeCompiler};
use crate::xpath::{axis_formula, compile_exists, compile_select, parse_xpath, Axis, XPathError};

pub use env::{Environment, Schema};
pub use subst::free_vars;

use subst::Substitution;

/// Tag of every element typed by the new schema in evolution predicates.
pub const ALL_TAG: &str = "_all";
/// Marks nodes where the obligations of the old schema fail.
pub const OLD_COMPLEMENT_TAG: &str = "_old_complement";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("predicate {name} expects {expected} arguments, got {found}")]
    Arity { name: String, expected: String, found: usize },
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("predicate {0} is defined more than once")]
    DuplicateDefinition(String),
    #[error("{0} is a built-in predicate and cannot be redefined")]
    BuiltinRedefinition(String),
    #[error("predicate {0} calls itself; recursion must go through a let binder")]
    RecursiveDefinition(String),
    #[error("argument {index} of {name}: {message}")]
    BadArgument { name: String, index: usize, message: String },
    #[error("query \"{query}\": {error}")]
    XPath { query: String, error: XPathError },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("schema file not found: {0}")]
    UnknownSchemaFile(String),
    #[error("root element {root} is not declared in {path}")]
    RootNotFound { root: String, path: String },
    #[error("proposition {0} is reserved")]
    ReservedProposition(String),
}

/// A custom predicate `name(params) = body`.
#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Formula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub defs: Vec<Definition>,
    pub goal: Formula,
}

/// Canonical name of a built-in predicate, resolving aliases.
fn builtin(name: &str) -> Option<&'static str> {
    Some(match name {
        "select" => "select",
        "exists" => "exists",
        "type" => "type",
        "forward_incompatible" => "forward_incompatible",
        "backward_incompatible" => "backward_incompatible",
        "element" => "element",
        "attribute" => "attribute",
        "exclude" => "exclude",
        "added_element" => "added_element",
        "added_attribute" => "added_attribute",
        "non_empty" => "non_empty",
        "new_element_names" => "new_element_names",
        "new_regions" | "new_region" => "new_regions",
        "new_contents" | "new_content" => "new_contents",
        _ => return axis_predicate(name).map(|a| a.name()),
    })
}

/// Axis predicates, written with `-` or `_`.
fn axis_predicate(name: &str) -> Option<Axis> {
    let axis = Axis::from_name(&name.replace('_', "-"))?;
    (axis != Axis::SelfAxis).then_some(axis)
}

fn arities(canonical: &str) -> &'static [usize] {
    match canonical {
        "select" | "exists" => &[1, 2],
        "type" => &[2, 4],
        "forward_incompatible" | "backward_incompatible" => &[2, 3],
        "added_element" | "added_attribute" | "non_empty" => &[2],
        "new_element_names" | "new_regions" | "new_contents" => &[3, 4],
        _ => &[1],
    }
}

fn describe(arities: &[usize]) -> String {
    arities.iter().map(usize::to_string).collect::<Vec<_>>().join(" or ")
}

/// Parses a problem specification and checks its predicate calls.
pub fn parse_spec(text: &str) -> Result<ProblemSpec, PredicateError> {
    let (raw, goal) = Parser::new(text)?.problem()?;
    let mut defs: Vec<Definition> = Vec::new();
    for d in raw {
        if builtin(&d.name).is_some() {
            return Err(PredicateError::BuiltinRedefinition(d.name));
        }
        if defs.iter().any(|e| e.name == d.name) {
            return Err(PredicateError::DuplicateDefinition(d.name));
        }
        defs.push(Definition { name: d.name, params: d.params, body: d.body });
    }
    let spec = ProblemSpec { defs, goal };
    let arity: HashMap<&str, usize> = spec.defs.iter().map(|d| (d.name.as_str(), d.params.len())).collect();
    for f in spec.defs.iter().map(|d| &d.body).chain([&spec.goal]) {
        check_calls(f, &arity)?;
    }
    check_recursion(&spec)?;
    Ok(spec)
}

fn check_calls(f: &Formula, custom: &HashMap<&str, usize>) -> Result<(), PredicateError> {
    let mut result = Ok(());
    f.walk(&mut |g| {
        let Formula::Call(name, args) = g else { return };
        if result.is_err() {
            return;
        }
        let expected: Vec<usize> = match (builtin(name), custom.get(name.as_str())) {
            (Some(b), _) => arities(b).to_vec(),
            (None, Some(&n)) => vec![n],
            (None, None) => {
                result = Err(PredicateError::UnknownPredicate(name.clone()));
                return;
            }
        };
        if !expected.contains(&args.len()) {
            result = Err(PredicateError::Arity { name: name.clone(), expected: describe(&expected), found: args.len() });
        }
    });
    result
}

fn calls(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    f.walk(&mut |g| {
        if let Formula::Call(name, _) = g {
            out.insert(name.clone());
        }
    });
    out
}

fn check_recursion(spec: &ProblemSpec) -> Result<(), PredicateError> {
    let graph: HashMap<&str, BTreeSet<String>> = spec.defs.iter().map(|d| (d.name.as_str(), calls(&d.body))).collect();
    // Depth-first search with colors: 1 on the stack, 2 done.
    fn visit<'a>(
        n: &'a str,
        graph: &'a HashMap<&str, BTreeSet<String>>,
        color: &mut HashMap<&'a str, u8>,
    ) -> Result<(), PredicateError> {
        match color.get(n) {
            Some(1) => return Err(PredicateError::RecursiveDefinition(n.to_string())),
            Some(_) => return Ok(()),
            None => {}
        }
        color.insert(n, 1);
        for m in &graph[n] {
            if graph.contains_key(m.as_str()) {
                visit(m, graph, color)?;
            }
        }
        color.insert(n, 2);
        Ok(())
    }
    let mut color = HashMap::new();
    for d in &spec.defs {
        visit(&d.name, &graph, &mut color)?;
    }
    Ok(())
}

/// Holds at the root of the tree: no parent and no previous sibling.
pub fn is_root() -> Formula {
    Formula::and(
        Formula::not(Formula::modal(Program::Up1, Formula::True)),
        Formula::not(Formula::modal(Program::Up2, Formula::True)),
    )
}

/// Expands all predicate calls of `spec`. Schemas are loaded through `env`.
/// The result may still contain attribute complements; see
/// [`resolve_placeholders`].
pub fn expand(spec: &ProblemSpec, env: &mut Environment) -> Result<Formula, PredicateError> {
    for f in spec.defs.iter().map(|d| &d.body).chain([&spec.goal]) {
        let mut reserved = None;
        f.walk(&mut |g| {
            if let Formula::Prop(p) = g {
                if p == ALL_TAG || p == OLD_COMPLEMENT_TAG {
                    reserved = Some(p.clone());
                }
            }
        });
        if let Some(p) = reserved {
            return Err(PredicateError::ReservedProposition(p));
        }
    }
    let defs: HashMap<&str, &Definition> = spec.defs.iter().map(|d| (d.name.as_str(), d)).collect();
    let goal = inline(&spec.goal, &defs)?;
    Expander { env }.expand(&goal)
}

/// Replaces custom predicate calls by their bodies.
fn inline(f: &Formula, defs: &HashMap<&str, &Definition>) -> Result<Formula, PredicateError> {
    let mut error = None;
    let out = f.map_bottom_up(&mut |g| match g {
        Formula::Call(name, args) if error.is_none() => match defs.get(name.as_str()) {
            Some(d) => {
                let result = Substitution::new(&d.params, &args, &d.body)
                    .apply(&d.body, &[])
                    .map_err(|p| PredicateError::BadArgument {
                        name: name.clone(),
                        index: d.params.iter().position(|q| *q == p).unwrap_or(0),
                        message: format!("parameter {p} is used as a formula but given a string"),
                    })
                    .and_then(|body| inline(&body, defs));
                match result {
                    Ok(body) => body,
                    Err(e) => {
                        error = Some(e);
                        Formula::False
                    }
                }
            }
            None => Formula::Call(name, args),
        },
        other => other,
    });
    match error {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Resolves attribute complements over the attribute names of `f` and, when
/// attributes are enabled, of every schema loaded in `env`.
pub fn resolve_placeholders(f: &Formula, env: &Environment) -> Formula {
    let mut universe: BTreeSet<String> = f.attribute_names().into_iter().collect();
    if env.attributes {
        for s in env.schemas() {
            universe.extend(s.attribute_names.iter().cloned());
        }
    }
    f.resolve_attr_complements(&universe.into_iter().collect::<Vec<_>>())
}

struct Expander<'e> {
    env: &'e mut Environment,
}

fn or_names(names: impl IntoIterator<Item = String>, atom: fn(String) -> Formula) -> Formula {
    Formula::or_all(names.into_iter().map(atom))
}

impl Expander<'_> {
    fn expand(&mut self, f: &Formula) -> Result<Formula, PredicateError> {
        Ok(match f {
            Formula::Call(name, args) => self.call(name, args)?,
            Formula::Not(a) => Formula::not(self.expand(a)?),
            Formula::Modal(p, a) => Formula::modal(*p, self.expand(a)?),
            Formula::And(a, b) => Formula::and(self.expand(a)?, self.expand(b)?),
            Formula::Or(a, b) => Formula::or(self.expand(a)?, self.expand(b)?),
            Formula::Implies(a, b) => Formula::implies(self.expand(a)?, self.expand(b)?),
            Formula::Equiv(a, b) => Formula::equiv(self.expand(a)?, self.expand(b)?),
            Formula::Let(bindings, body) => Formula::let_in(
                bindings.iter().map(|(v, d)| Ok((v.clone(), self.expand(d)?))).collect::<Result<_, PredicateError>>()?,
                self.expand(body)?,
            ),
            leaf => leaf.clone(),
        })
    }

    fn text(name: &str, args: &[Arg], index: usize) -> Result<String, PredicateError> {
        match &args[index] {
            Arg::Text(s) => Ok(s.clone()),
            Arg::Formula(Formula::Element(s)) => Ok(s.clone()),
            Arg::Formula(_) => Err(PredicateError::BadArgument {
                name: name.to_string(),
                index,
                message: "expected a string".into(),
            }),
        }
    }

    fn formula(&mut self, name: &str, args: &[Arg], index: usize) -> Result<Formula, PredicateError> {
        match &args[index] {
            Arg::Formula(f) => self.expand(f),
            Arg::Text(_) => Err(PredicateError::BadArgument {
                name: name.to_string(),
                index,
                message: "expected a formula".into(),
            }),
        }
    }

    fn query(&self, text: &str) -> Result<crate::xpath::Query, PredicateError> {
        parse_xpath(text).map_err(|error| PredicateError::XPath { query: text.to_string(), error })
    }

    fn select(&mut self, query: &str, ctx: &Formula) -> Result<Formula, PredicateError> {
        let q = self.query(query)?;
        compile_select(&q, ctx).map_err(|error| PredicateError::XPath { query: query.to_string(), error })
    }

    /// The translation of a schema with a tag and a frontier, at the root.
    fn typed(&mut self, file: &str, root: &str, tag: &Formula, frontier: &Formula) -> Result<Formula, PredicateError> {
        let s = self.env.schema(file, root)?;
        let t = TypeCompiler::new(self.env.attributes).compile(&s.binary, tag, frontier);
        Ok(Formula::and(t, is_root()))
    }

    fn plain_type(&mut self, file: &str, root: &str) -> Result<Formula, PredicateError> {
        self.typed(file, root, &Formula::True, &Formula::False)
    }

    /// Element or attribute names of a formula argument, including those of
    /// the schemas it mentions.
    fn names(&mut self, name: &str, args: &[Arg], index: usize, elements: bool) -> Result<BTreeSet<String>, PredicateError> {
        let f = self.formula(name, args, index)?;
        let mut out: BTreeSet<String> =
            if elements { f.element_names() } else { f.attribute_names() }.into_iter().collect();
        let Arg::Formula(raw) = &args[index] else { unreachable!() };
        for (file, root) in type_calls(raw) {
            let s = self.env.schema(&file, &root)?;
            out.extend(if elements { &s.element_names } else { &s.attribute_names }.iter().cloned());
        }
        Ok(out)
    }

    /// Schema file and root of an argument written as `type(f, l)`.
    fn schema_arg(name: &str, args: &[Arg], index: usize) -> Result<(String, String), PredicateError> {
        match &args[index] {
            Arg::Formula(Formula::Call(t, targs)) if t == "type" && targs.len() == 2 => {
                Ok((Self::text(t, targs, 0)?, Self::text(t, targs, 1)?))
            }
            _ => Err(PredicateError::BadArgument {
                name: name.to_string(),
                index,
                message: "expected type(file, root)".into(),
            }),
        }
    }

    fn call(&mut self, name: &str, args: &[Arg]) -> Result<Formula, PredicateError> {
        let canonical = builtin(name).ok_or_else(|| PredicateError::UnknownPredicate(name.to_string()))?;
        if !arities(canonical).contains(&args.len()) {
            return Err(PredicateError::Arity {
                name: name.to_string(),
                expected: describe(arities(canonical)),
                found: args.len(),
            });
        }
        let n = args.len();
        match canonical {
            "select" => {
                let ctx = if n == 2 { self.formula(name, args, 1)? } else { Formula::Start };
                self.select(&Self::text(name, args, 0)?, &ctx)
            }
            "exists" => {
                let ctx = if n == 2 { self.formula(name, args, 1)? } else { Formula::True };
                let query = Self::text(name, args, 0)?;
                let q = self.query(&query)?;
                compile_exists(&q, &ctx).map_err(|error| PredicateError::XPath { query, error })
            }
            "type" => {
                let (file, root) = (Self::text(name, args, 0)?, Self::text(name, args, 1)?);
                if n == 4 {
                    let (tag, frontier) = (self.formula(name, args, 2)?, self.formula(name, args, 3)?);
                    self.typed(&file, &root, &tag, &frontier)
                } else {
                    self.plain_type(&file, &root)
                }
            }
            "forward_incompatible" | "backward_incompatible" => {
                let (old, new) = if n == 3 {
                    let root = Self::text(name, args, 2)?;
                    let old = self.plain_type(&Self::text(name, args, 0)?, &root)?;
                    (old, self.plain_type(&Self::text(name, args, 1)?, &root)?)
                } else {
                    (self.formula(name, args, 0)?, self.formula(name, args, 1)?)
                };
                Ok(if canonical == "backward_incompatible" {
                    Formula::and(new, Formula::not(old))
                } else {
                    Formula::and(old, Formula::not(new))
                })
            }
            "element" => Ok(or_names(self.names(name, args, 0, true)?, Formula::element)),
            "attribute" => Ok(or_names(self.names(name, args, 0, false)?, Formula::attribute)),
            "added_element" | "added_attribute" => {
                let elements = canonical == "added_element";
                let old = self.names(name, args, 0, elements)?;
                let new = self.names(name, args, 1, elements)?;
                let added = new.difference(&old).cloned();
                Ok(or_names(added, if elements { Formula::element } else { Formula::attribute }))
            }
            "exclude" => {
                let f = self.formula(name, args, 0)?;
                Ok(Formula::not(axis_formula(
                    Axis::AncestorOrSelf,
                    axis_formula(Axis::DescendantOrSelf, f),
                )))
            }
            "non_empty" => {
                let t = self.formula(name, args, 1)?;
                self.select(&Self::text(name, args, 0)?, &Formula::and(t, Formula::Start))
            }
            "new_element_names" => {
                let query = Self::text(name, args, 0)?;
                let (old_names, new) = if n == 4 {
                    let root = Self::text(name, args, 3)?;
                    let old = self.env.schema(&Self::text(name, args, 1)?, &root)?;
                    (old.element_names.clone(), self.plain_type(&Self::text(name, args, 2)?, &root)?)
                } else {
                    (self.names(name, args, 1, true)?, self.formula(name, args, 2)?)
                };
                let old = or_names(old_names, Formula::element);
                Ok(Formula::and(Formula::not(old), self.select(&query, &new)?))
            }
            "new_regions" | "new_contents" => {
                let query = Self::text(name, args, 0)?;
                let ((old_file, old_root), (new_file, new_root)) = if n == 4 {
                    let root = Self::text(name, args, 3)?;
                    ((Self::text(name, args, 1)?, root.clone()), (Self::text(name, args, 2)?, root))
                } else {
                    (Self::schema_arg(name, args, 1)?, Self::schema_arg(name, args, 2)?)
                };
                self.evolution(canonical == "new_regions", &query, (&old_file, &old_root), (&new_file, &new_root))
            }
            _ => {
                let axis = axis_predicate(canonical).expect("axis predicate");
                Ok(axis_formula(axis, self.formula(name, args, 0)?))
            }
        }
    }

    /// Selection in documents valid against the new schema but not the old
    /// one, located with respect to where the old schema fails.
    fn evolution(
        &mut self,
        regions: bool,
        query: &str,
        old: (&str, &str),
        new: (&str, &str),
    ) -> Result<Formula, PredicateError> {
        let all = Formula::prop(ALL_TAG);
        let marker = Formula::prop(OLD_COMPLEMENT_TAG);
        let new_type = self.typed(new.0, new.1, &all, &Formula::False)?;
        let old_type = self.typed(old.0, old.1, &Formula::True, &Formula::not(marker.clone()))?;
        let ctx = Formula::and_all([new_type, Formula::not(old_type), Formula::Start]);
        let selected = self.select(query, &ctx)?;

        let old_names = self.env.schema(old.0, old.1)?.element_names.clone();
        let new_names = self.env.schema(new.0, new.1)?.element_names.clone();
        let added = or_names(new_names.difference(&old_names).cloned(), Formula::element);

        let around = |axis| Formula::not(axis_formula(axis, marker.clone()));
        let mut parts = vec![selected, Formula::not(added.clone())];
        if regions {
            parts.push(axis_formula(Axis::Ancestor, marker.clone()));
            parts.push(around(Axis::Descendant));
        } else {
            parts.push(Formula::not(axis_formula(Axis::Ancestor, added)));
            parts.push(axis_formula(Axis::Descendant, marker.clone()));
        }
        parts.push(around(Axis::Following));
        parts.push(around(Axis::Preceding));
        Ok(Formula::and_all(parts))
    }
}

/// `(file, root)` of every two-argument `type` call in `f`.
fn type_calls(f: &Formula) -> Vec<(String, String)> {
    let mut out = Vec::new();
    f.walk(&mut |g| {
        if let Formula::Call(t, args) = g {
            if t == "type" && args.len() >= 2 {
                if let (Ok(file), Ok(root)) = (Expander::text(t, args, 0), Expander::text(t, args, 1)) {
                    out.push((file, root));
                }
            }
        }
    });
    out
}

/// Whether `f` mentions the start mark `#`.
pub fn mentions_start(f: &Formula) -> bool {
    let mut found = false;
    f.walk(&mut |g| found |= matches!(g, Formula::Start));
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_model, parse_formula};
    use crate::tree::{to_binary, Document, Element};

    fn expand_text(text: &str) -> Result<Formula, PredicateError> {
        expand(&parse_spec(text)?, &mut Environment::new(false))
    }

    #[test]
    fn builtin_calls_are_checked() {
        assert!(matches!(parse_spec("frobnicate(a)"), Err(PredicateError::UnknownPredicate(_))));
        assert!(matches!(parse_spec("select()"), Err(PredicateError::Arity { .. })));
        assert!(matches!(parse_spec("p(x) = x; p(a, b)"), Err(PredicateError::Arity { .. })));
        assert!(matches!(parse_spec("type(x) = x; a"), Err(PredicateError::BuiltinRedefinition(_))));
        assert!(parse_spec("new_region(\"a\", type(\"x.dtd\", r), type(\"y.dtd\", r))").is_ok());
    }

    #[test]
    fn custom_predicates() {
        let f = expand_text("mypred(x) = x & <1>T; mypred(a)").unwrap();
        assert_eq!(f, parse_formula("a & <1>T").unwrap());
        let f = expand_text("p(x) = <1>x; q(y) = p(p(y)); q(b)").unwrap();
        assert_eq!(f, parse_formula("<1><1>b").unwrap());
    }

    #[test]
    fn recursion_is_rejected() {
        assert!(matches!(parse_spec("p(x) = q(x); q(x) = p(x); p(a)"), Err(PredicateError::RecursiveDefinition(_))));
        assert!(matches!(parse_spec("p(x) = x | <1>p(x); p(a)"), Err(PredicateError::RecursiveDefinition(_))));
    }

    #[test]
    fn reserved_propositions() {
        assert!(matches!(expand_text("_all & a"), Err(PredicateError::ReservedProposition(_))));
    }

    #[test]
    fn exclude_forbids_everywhere() {
        let f = expand_text("exclude(b)").unwrap();
        let doc = |root| to_binary(&Document::new(root));
        let with_b = doc(Element::with_children("a", vec![Element::new("c"), Element::new("b")]));
        let without_b = doc(Element::with_children("a", vec![Element::new("c")]));
        assert!((0..with_b.len()).all(|n| !check_model(&f, &with_b, n)));
        assert!((0..without_b.len()).all(|n| check_model(&f, &without_b, n)));
    }

    #[test]
    fn query_errors_name_the_query() {
        match expand_text("select(\"a[\")") {
            Err(PredicateError::XPath { query, .. }) => assert_eq!(query, "a["),
            other => panic!("{other:?}"),
        }
    }
}

//! Membership of documents in tree types.
//!
//! The verdict comes from a direct matcher over the hedge type: for every
//! sibling list it computes, for each start position, the set of positions
//! where a type term can end. Diagnostics are then located by a top-down
//! walk over the binarized type.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::schema::{binarize, BinaryTreeType, TreeType};

use super::{Document, Element};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Check attribute constraints.
    pub attributes: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { attributes: true }
    }
}

/// A reason why a document is not valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position of the offending element: its index in the top-level
    /// forest followed by child indices, so the root is `[0]`.
    pub path: Vec<usize>,
    pub element: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks `d` against `t` with attribute constraints.
pub fn validate(d: &Document, t: &TreeType) -> Result<(), Violation> {
    validate_with(d, t, &ValidateOptions::default())
}

pub fn validate_with(d: &Document, t: &TreeType, opts: &ValidateOptions) -> Result<(), Violation> {
    let mut m = Matcher::new(t, opts.attributes);
    if m.matches_hedge(t, std::slice::from_ref(&d.root)) {
        return Ok(());
    }
    let b = binarize(t);
    let found = diagnose(&b, std::slice::from_ref(&d.root), None, BTreeSet::from([b.start]), &mut Vec::new(), opts);
    Err(found.unwrap_or_else(|| Violation {
        path: Vec::new(),
        element: d.root.name.clone(),
        message: format!("document rooted at \"{}\" does not match the type", d.root.name),
    }))
}

type Ends = BTreeSet<usize>;

struct Matcher<'t> {
    /// Definition of every bound variable, by global index.
    defs: Vec<&'t TreeType>,
    /// Global index of the binding referenced by each variable occurrence.
    refs: HashMap<*const TreeType, usize>,
    attributes: bool,
    element_cache: HashMap<(*const TreeType, *const Element), bool>,
    /// Variables reachable from a term without entering an element.
    sequence_vars: HashMap<*const TreeType, Vec<usize>>,
}

impl<'t> Matcher<'t> {
    fn new(t: &'t TreeType, attributes: bool) -> Self {
        let mut m = Matcher {
            defs: Vec::new(),
            refs: HashMap::new(),
            attributes,
            element_cache: HashMap::new(),
            sequence_vars: HashMap::new(),
        };
        m.resolve(t, &mut Vec::new());
        m
    }

    fn resolve(&mut self, t: &'t TreeType, scopes: &mut Vec<HashMap<&'t str, usize>>) {
        match t {
            TreeType::EmptySet | TreeType::EmptySeq => {}
            TreeType::Or(a, b) | TreeType::Concat(a, b) => {
                self.resolve(a, scopes);
                self.resolve(b, scopes);
            }
            TreeType::Element(_, _, c) => self.resolve(c, scopes),
            TreeType::Var(v) => {
                if let Some(id) = scopes.iter().rev().find_map(|s| s.get(v.as_str()).copied()) {
                    self.refs.insert(t as *const _, id);
                }
            }
            TreeType::Bind(bindings, body) => {
                let mut scope = HashMap::new();
                for (name, def) in bindings {
                    scope.insert(name.as_str(), self.defs.len());
                    self.defs.push(def);
                }
                scopes.push(scope);
                for (_, def) in bindings {
                    self.resolve(def, scopes);
                }
                self.resolve(body, scopes);
                scopes.pop();
            }
        }
    }

    fn collect_vars(&self, t: &'t TreeType, out: &mut Vec<usize>) {
        match t {
            TreeType::EmptySet | TreeType::EmptySeq | TreeType::Element(..) => {}
            TreeType::Or(a, b) | TreeType::Concat(a, b) => {
                self.collect_vars(a, out);
                self.collect_vars(b, out);
            }
            TreeType::Var(_) => {
                if let Some(&id) = self.refs.get(&(t as *const _)) {
                    if !out.contains(&id) {
                        out.push(id);
                        self.collect_vars(self.defs[id], out);
                    }
                }
            }
            TreeType::Bind(_, body) => self.collect_vars(body, out),
        }
    }

    fn matches_hedge(&mut self, t: &'t TreeType, siblings: &[Element]) -> bool {
        let key = t as *const _;
        let vars = match self.sequence_vars.get(&key) {
            Some(v) => v.clone(),
            None => {
                let mut v = Vec::new();
                self.collect_vars(t, &mut v);
                self.sequence_vars.insert(key, v.clone());
                v
            }
        };
        // Least fixpoint of the variable end sets on this sibling list.
        let mut env: HashMap<(usize, usize), Ends> = HashMap::new();
        loop {
            let mut changed = false;
            for &x in &vars {
                for i in 0..=siblings.len() {
                    let e = self.ends(self.defs[x], siblings, i, &env);
                    let slot = env.entry((x, i)).or_default();
                    if e.len() != slot.len() {
                        *slot = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.ends(t, siblings, 0, &env).contains(&siblings.len())
    }

    fn ends(&mut self, t: &'t TreeType, siblings: &[Element], i: usize, env: &HashMap<(usize, usize), Ends>) -> Ends {
        match t {
            TreeType::EmptySet => Ends::new(),
            TreeType::EmptySeq => Ends::from([i]),
            TreeType::Or(a, b) => {
                let mut e = self.ends(a, siblings, i, env);
                e.extend(self.ends(b, siblings, i, env));
                e
            }
            TreeType::Concat(a, b) => {
                let mut out = Ends::new();
                for j in self.ends(a, siblings, i, env) {
                    out.extend(self.ends(b, siblings, j, env));
                }
                out
            }
            TreeType::Element(..) => match siblings.get(i) {
                Some(e) if self.matches_element(t, e) => Ends::from([i + 1]),
                _ => Ends::new(),
            },
            TreeType::Var(_) => match self.refs.get(&(t as *const _)) {
                Some(&x) => env.get(&(x, i)).cloned().unwrap_or_default(),
                None => Ends::new(),
            },
            TreeType::Bind(_, body) => self.ends(body, siblings, i, env),
        }
    }

    fn matches_element(&mut self, t: &'t TreeType, e: &Element) -> bool {
        let TreeType::Element(name, attrs, content) = t else { return false };
        if *name != e.name || (self.attributes && !attrs.accepts(&e.attributes)) {
            return false;
        }
        let key = (t as *const _, e as *const _);
        if let Some(&r) = self.element_cache.get(&key) {
            return r;
        }
        let r = self.matches_hedge(content, &e.children);
        self.element_cache.insert(key, r);
        r
    }
}

fn diagnose(
    b: &BinaryTreeType,
    siblings: &[Element],
    parent: Option<&str>,
    states: BTreeSet<usize>,
    path: &mut Vec<usize>,
    opts: &ValidateOptions,
) -> Option<Violation> {
    let mut current = states;
    for (k, e) in siblings.iter().enumerate() {
        path.push(k);
        let violation = |message: String| Violation { path: path.clone(), element: e.name.clone(), message };
        let named: Vec<_> = current
            .iter()
            .flat_map(|&x| b.alternatives(x))
            .filter(|(l, ..)| *l == e.name)
            .collect();
        if named.is_empty() {
            return Some(violation(match parent {
                Some(p) => format!("element \"{}\" is not declared in \"{p}\" list of possible children", e.name),
                None => format!("element \"{}\" is not allowed as root", e.name),
            }));
        }
        let allowed: Vec<_> = if opts.attributes {
            named.iter().copied().filter(|(_, a, ..)| a.accepts(&e.attributes)).collect()
        } else {
            named.clone()
        };
        if allowed.is_empty() {
            let declared: BTreeSet<String> = named.iter().flat_map(|(_, a, ..)| a.names()).collect();
            let message = match e.attributes.iter().find(|a| !declared.contains(*a)) {
                Some(a) => format!("attribute \"{a}\" is not declared for element \"{}\"", e.name),
                None => format!("attributes of element \"{}\" do not match its declaration", e.name),
            };
            return Some(violation(message));
        }
        let children: BTreeSet<usize> = allowed.iter().map(|&(_, _, x1, _)| x1).collect();
        if let Some(v) = diagnose(b, &e.children, Some(&e.name), children, path, opts) {
            return Some(v);
        }
        path.pop();
        current = allowed.iter().map(|&(_, _, _, x2)| x2).collect();
    }
    if !current.iter().any(|&x| b.nullable(x)) {
        let name = parent.unwrap_or("");
        return Some(Violation {
            path: path.clone(),
            element: name.to_string(),
            message: format!("content of element \"{name}\" is incomplete"),
        });
    }
    None
}

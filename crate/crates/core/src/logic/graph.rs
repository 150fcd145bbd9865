//! Hash-consed formula graph used by the solver.
//!
//! Bound variables become slots whose definitions are unfolded on demand.
//! Negation under a modality is pushed out using determinism of the four
//! programs: `<p>~f` is `<p>T & ~<p>f`.

use std::collections::HashMap;

use rustc_hash::FxHashMap;

use super::{Formula, Program, START_PROP};

pub(crate) type GId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum GNode {
    True,
    False,
    Name(u32),
    Prop(u32),
    Attr(u32),
    Not(GId),
    And(GId, GId),
    Or(GId, GId),
    Dia(Program, GId),
    Var(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum GraphError {
    FreeVariable(String),
    Unexpanded(String),
}

#[derive(Default)]
pub(crate) struct Graph {
    pub nodes: Vec<GNode>,
    intern: FxHashMap<GNode, GId>,
    pub var_body: Vec<GId>,
    pub var_names: Vec<String>,
    pub names: Vec<String>,
    pub props: Vec<String>,
    pub attrs: Vec<String>,
    name_ids: HashMap<String, u32>,
    prop_ids: HashMap<String, u32>,
    attr_ids: HashMap<String, u32>,
}

const PENDING: GId = GId::MAX;

impl Graph {
    pub fn new() -> Self {
        let mut g = Graph::default();
        g.add(GNode::True);
        g.add(GNode::False);
        for p in Program::ALL {
            g.add(GNode::Dia(p, Self::TRUE));
        }
        g
    }

    /// Id of `<p>T`.
    #[allow(dead_code)]
    pub fn top(&self, p: Program) -> GId {
        2 + p.index() as GId
    }

    pub const TRUE: GId = 0;
    pub const FALSE: GId = 1;

    fn add(&mut self, n: GNode) -> GId {
        if let Some(&id) = self.intern.get(&n) {
            return id;
        }
        let id = self.nodes.len() as GId;
        self.nodes.push(n);
        self.intern.insert(n, id);
        id
    }

    pub fn node(&self, id: GId) -> GNode {
        self.nodes[id as usize]
    }

    pub fn not(&mut self, a: GId) -> GId {
        match self.node(a) {
            GNode::True => Self::FALSE,
            GNode::False => Self::TRUE,
            GNode::Not(b) => b,
            _ => self.add(GNode::Not(a)),
        }
    }

    pub fn and(&mut self, a: GId, b: GId) -> GId {
        if a == Self::FALSE || b == Self::FALSE {
            return Self::FALSE;
        }
        if a == Self::TRUE || a == b {
            return b;
        }
        if b == Self::TRUE {
            return a;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.add(GNode::And(a, b))
    }

    pub fn or(&mut self, a: GId, b: GId) -> GId {
        if a == Self::TRUE || b == Self::TRUE {
            return Self::TRUE;
        }
        if a == Self::FALSE || a == b {
            return b;
        }
        if b == Self::FALSE {
            return a;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.add(GNode::Or(a, b))
    }

    pub fn dia(&mut self, p: Program, a: GId) -> GId {
        match self.node(a) {
            GNode::False => Self::FALSE,
            GNode::Not(b) => {
                let top = self.add(GNode::Dia(p, Self::TRUE));
                let inner = self.dia(p, b);
                let neg = self.not(inner);
                self.and(top, neg)
            }
            _ => self.add(GNode::Dia(p, a)),
        }
    }

    fn intern_symbol(
        ids: &mut HashMap<String, u32>,
        list: &mut Vec<String>,
        name: &str,
    ) -> u32 {
        if let Some(&i) = ids.get(name) {
            return i;
        }
        let i = list.len() as u32;
        list.push(name.to_string());
        ids.insert(name.to_string(), i);
        i
    }

    pub fn name(&mut self, n: &str) -> GId {
        let i = Self::intern_symbol(&mut self.name_ids, &mut self.names, n);
        self.add(GNode::Name(i))
    }

    pub fn prop(&mut self, n: &str) -> GId {
        let i = Self::intern_symbol(&mut self.prop_ids, &mut self.props, n);
        self.add(GNode::Prop(i))
    }

    pub fn attr(&mut self, n: &str) -> GId {
        let i = Self::intern_symbol(&mut self.attr_ids, &mut self.attrs, n);
        self.add(GNode::Attr(i))
    }

    /// Adds a closed formula to the graph.
    pub fn build(&mut self, f: &Formula) -> Result<GId, GraphError> {
        let mut scopes = Vec::new();
        self.build_in(f, &mut scopes)
    }

    fn build_in(
        &mut self,
        f: &Formula,
        scopes: &mut Vec<HashMap<String, u32>>,
    ) -> Result<GId, GraphError> {
        Ok(match f {
            Formula::True => Self::TRUE,
            Formula::False => Self::FALSE,
            Formula::Element(n) => self.name(n),
            Formula::Prop(n) => self.prop(n),
            Formula::Start => self.prop(START_PROP),
            Formula::Attribute(n) => self.attr(n),
            Formula::Var(n) => {
                let slot = scopes
                    .iter()
                    .rev()
                    .find_map(|s| s.get(n).copied())
                    .ok_or_else(|| GraphError::FreeVariable(n.clone()))?;
                self.add(GNode::Var(slot))
            }
            Formula::Not(a) => {
                let a = self.build_in(a, scopes)?;
                self.not(a)
            }
            Formula::And(a, b) => {
                let a = self.build_in(a, scopes)?;
                let b = self.build_in(b, scopes)?;
                self.and(a, b)
            }
            Formula::Or(a, b) => {
                let a = self.build_in(a, scopes)?;
                let b = self.build_in(b, scopes)?;
                self.or(a, b)
            }
            Formula::Implies(a, b) => {
                let a = self.build_in(a, scopes)?;
                let b = self.build_in(b, scopes)?;
                let na = self.not(a);
                self.or(na, b)
            }
            Formula::Equiv(a, b) => {
                let a = self.build_in(a, scopes)?;
                let b = self.build_in(b, scopes)?;
                let both = self.and(a, b);
                let (na, nb) = (self.not(a), self.not(b));
                let neither = self.and(na, nb);
                self.or(both, neither)
            }
            Formula::Modal(p, a) => {
                let a = self.build_in(a, scopes)?;
                self.dia(*p, a)
            }
            Formula::Let(bindings, body) => {
                let mut scope = HashMap::new();
                let mut slots = Vec::new();
                for (name, _) in bindings {
                    let slot = self.var_body.len() as u32;
                    self.var_body.push(PENDING);
                    self.var_names.push(name.clone());
                    scope.insert(name.clone(), slot);
                    slots.push(slot);
                }
                scopes.push(scope);
                for ((_, def), slot) in bindings.iter().zip(slots) {
                    let id = self.build_in(def, scopes)?;
                    self.var_body[slot as usize] = id;
                }
                let body = self.build_in(body, scopes);
                scopes.pop();
                body?
            }
            Formula::Call(name, _) => return Err(GraphError::Unexpanded(format!("{name}(...)"))),
            Formula::AttrComplement(_) => {
                return Err(GraphError::Unexpanded("attribute complement".into()))
            }
        })
    }
}

/// Atomic propositions of the Lean: the solver's node types assign a truth
/// value to each of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Atom {
    Name(u32),
    Prop(u32),
    Attr(u32),
    Dia(Program, GId),
}

/// Collects the Lean of `root`: every diamond reachable through definitions,
/// the four `<p>T`, names, propositions and attributes, in depth-first
/// order of first occurrence.
pub(crate) fn lean(g: &Graph, root: GId) -> Vec<Atom> {
    let mut atoms = Vec::new();
    let mut seen_atoms = std::collections::HashSet::new();
    for p in Program::ALL {
        let atom = Atom::Dia(p, Graph::TRUE);
        atoms.push(atom);
        seen_atoms.insert(atom);
    }
    let mut visited = vec![false; g.nodes.len()];
    let mut var_visited = vec![false; g.var_body.len()];
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if visited[id as usize] {
            continue;
        }
        visited[id as usize] = true;
        let mut push_atom = |a: Atom, atoms: &mut Vec<Atom>| {
            if seen_atoms.insert(a) {
                atoms.push(a);
            }
        };
        match g.node(id) {
            GNode::True | GNode::False => {}
            GNode::Name(n) => push_atom(Atom::Name(n), &mut atoms),
            GNode::Prop(n) => push_atom(Atom::Prop(n), &mut atoms),
            GNode::Attr(n) => push_atom(Atom::Attr(n), &mut atoms),
            GNode::Not(a) => stack.push(a),
            GNode::And(a, b) | GNode::Or(a, b) => {
                stack.push(b);
                stack.push(a);
            }
            GNode::Dia(p, a) => {
                push_atom(Atom::Dia(p, a), &mut atoms);
                stack.push(a);
            }
            GNode::Var(slot) => {
                if !var_visited[slot as usize] {
                    var_visited[slot as usize] = true;
                    stack.push(g.var_body[slot as usize]);
                }
            }
        }
    }
    atoms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    #[test]
    fn negation_leaves_modalities() {
        let mut g = Graph::new();
        let a = g.build(&parse_formula("<1>~a").unwrap()).unwrap();
        let b = g.build(&parse_formula("<1>T & ~<1>a").unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lean_contains_reachable_diamonds() {
        let mut g = Graph::new();
        let root = g.build(&parse_formula("let $X = a | <1>$X | <2>$X in $X & b").unwrap()).unwrap();
        let atoms = lean(&g, root);
        let dias = atoms.iter().filter(|a| matches!(a, Atom::Dia(..))).count();
        // four <p>T plus <1>$X and <2>$X
        assert_eq!(dias, 6);
        assert!(atoms.contains(&Atom::Name(0)));
        assert!(atoms.contains(&Atom::Name(1)));
    }

    #[test]
    fn free_variables_are_rejected() {
        let mut g = Graph::new();
        assert_eq!(
            g.build(&parse_formula("$X & a").unwrap()),
            Err(GraphError::FreeVariable("X".into()))
        );
    }
}

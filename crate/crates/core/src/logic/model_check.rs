use std::collections::{HashMap, HashSet};

use super::{Formula, Program, START_PROP};
use crate::tree::{BinaryTree, NodeId};

/// Set of nodes of a small tree as a bitset.
#[derive(Clone, PartialEq, Eq, Debug)]
struct NodeSet(Vec<u64>);

impl NodeSet {
    fn empty(n: usize) -> Self {
        NodeSet(vec![0; n.div_ceil(64).max(1)])
    }

    fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    fn and(mut self, other: &NodeSet) -> Self {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
        self
    }

    fn or(mut self, other: &NodeSet) -> Self {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
        self
    }

    fn complement(mut self, universe: &NodeSet) -> Self {
        for (a, b) in self.0.iter_mut().zip(&universe.0) {
            *a = !*a & b;
        }
        self
    }
}

struct Evaluator<'t> {
    tree: &'t BinaryTree,
    all: NodeSet,
    // For each program, the target of the move from every node.
    moves: [Vec<Option<NodeId>>; 4],
    env: Vec<(String, NodeSet)>,
    // Values of closed `let` subformulas, keyed by address.
    closed: HashMap<*const Formula, Option<NodeSet>>,
}

fn free_variables(f: &Formula, bound: &mut Vec<String>, out: &mut HashSet<String>) {
    match f {
        Formula::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        Formula::Let(bindings, body) => {
            let base = bound.len();
            bound.extend(bindings.iter().map(|(n, _)| n.clone()));
            for (_, def) in bindings {
                free_variables(def, bound, out);
            }
            free_variables(body, bound, out);
            bound.truncate(base);
        }
        Formula::Not(a) | Formula::Modal(_, a) => free_variables(a, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
            free_variables(a, bound, out);
            free_variables(b, bound, out);
        }
        _ => {}
    }
}

impl<'t> Evaluator<'t> {
    fn new(tree: &'t BinaryTree) -> Self {
        let n = tree.len();
        let mut moves: [Vec<Option<NodeId>>; 4] = Default::default();
        for m in moves.iter_mut() {
            *m = vec![None; n];
        }
        for (i, node) in tree.nodes.iter().enumerate() {
            if let Some(c) = node.child1 {
                moves[Program::Down1.index()][i] = Some(c);
                moves[Program::Up1.index()][c] = Some(i);
            }
            if let Some(c) = node.child2 {
                moves[Program::Down2.index()][i] = Some(c);
                moves[Program::Up2.index()][c] = Some(i);
            }
        }
        Evaluator { tree, all: NodeSet::full(n), moves, env: Vec::new(), closed: HashMap::new() }
    }

    fn select(&self, pred: impl Fn(NodeId) -> bool) -> NodeSet {
        let mut s = NodeSet::empty(self.tree.len());
        for i in 0..self.tree.len() {
            if pred(i) {
                s.insert(i);
            }
        }
        s
    }

    fn eval(&mut self, f: &Formula) -> NodeSet {
        let n = self.tree.len();
        match f {
            Formula::True => self.all.clone(),
            Formula::False => NodeSet::empty(n),
            Formula::Element(name) => {
                self.select(|i| self.tree.nodes[i].name.as_deref() == Some(name.as_str()))
            }
            Formula::Prop(p) => self.select(|i| self.tree.nodes[i].propositions.contains(p)),
            Formula::Start => {
                self.select(|i| self.tree.nodes[i].propositions.contains(START_PROP))
            }
            Formula::Attribute(a) => self.select(|i| self.tree.nodes[i].attributes.contains(a)),
            Formula::Var(name) => match self.env.iter().rev().find(|(v, _)| v == name) {
                Some((_, s)) => s.clone(),
                None => panic!("free variable ${name} in model check"),
            },
            Formula::Not(a) => self.eval(a).complement(&self.all),
            Formula::And(a, b) => {
                let a = self.eval(a);
                a.and(&self.eval(b))
            }
            Formula::Or(a, b) => {
                let a = self.eval(a);
                a.or(&self.eval(b))
            }
            Formula::Implies(a, b) => {
                let a = self.eval(a).complement(&self.all);
                a.or(&self.eval(b))
            }
            Formula::Equiv(a, b) => {
                let a = self.eval(a);
                let b = self.eval(b);
                let both = a.clone().and(&b);
                let neither = a.complement(&self.all).and(&b.complement(&self.all));
                both.or(&neither)
            }
            Formula::Modal(p, a) => {
                let inner = self.eval(a);
                let moves = &self.moves[p.index()];
                self.select(|i| moves[i].is_some_and(|j| inner.contains(j)))
            }
            Formula::Let(..) => {
                let key = f as *const Formula;
                match self.closed.get(&key) {
                    Some(Some(s)) => return s.clone(),
                    Some(None) => return self.eval_let(f),
                    None => {}
                }
                let mut free = HashSet::new();
                free_variables(f, &mut Vec::new(), &mut free);
                let s = self.eval_let(f);
                self.closed.insert(key, free.is_empty().then(|| s.clone()));
                s
            }
            Formula::Call(name, _) => panic!("predicate {name} must be expanded before model checking"),
            Formula::AttrComplement(_) => {
                panic!("attribute complements must be resolved before model checking")
            }
        }
    }

    fn eval_let(&mut self, f: &Formula) -> NodeSet {
        let n = self.tree.len();
        match f {
            Formula::Let(bindings, body) => {
                let base = self.env.len();
                for (name, _) in bindings {
                    self.env.push((name.clone(), NodeSet::empty(n)));
                }
                // Least fixpoint by simultaneous iteration. For cycle-free
                // formulas this is also the greatest fixpoint.
                let limit = (n + 1) * (bindings.len() + 1) + 1;
                for _ in 0..limit {
                    let next: Vec<NodeSet> =
                        bindings.iter().map(|(_, def)| self.eval(def)).collect();
                    let mut changed = false;
                    for (k, s) in next.into_iter().enumerate() {
                        if self.env[base + k].1 != s {
                            self.env[base + k].1 = s;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                let result = self.eval(body);
                self.env.truncate(base);
                result
            }
            _ => unreachable!(),
        }
    }
}

/// Nodes of `tree` satisfying `f`, in id order.
///
/// `f` must be closed and free of predicate calls and attribute
/// complements.
pub fn eval_nodes(f: &Formula, tree: &BinaryTree) -> Vec<NodeId> {
    let mut ev = Evaluator::new(tree);
    let s = ev.eval(f);
    (0..tree.len()).filter(|&i| s.contains(i)).collect()
}

/// Whether `f` holds at node `n` of `tree`.
pub fn check_model(f: &Formula, tree: &BinaryTree, n: NodeId) -> bool {
    let mut ev = Evaluator::new(tree);
    ev.eval(f).contains(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::tree::{to_binary, Document, Element};

    fn tree() -> BinaryTree {
        to_binary(&Document::new(Element::with_children(
            "a",
            vec![Element::new("b"), Element::new("c")],
        )))
    }

    #[test]
    fn table_one_witness_of_sibling_formula() {
        let t = tree();
        let f = parse_formula("a & <1>(b & <2>c)").unwrap();
        assert!(check_model(&f, &t, t.root));
        assert!(!check_model(&f, &t, 1));
    }

    #[test]
    fn recursion_reaches_descendants() {
        let t = tree();
        let f = parse_formula("let $X = c | <1>$X | <2>$X in $X").unwrap();
        assert_eq!(eval_nodes(&f, &t), vec![0, 1, 2]);
        let up = parse_formula("let $Y = <-1>a | <-2>$Y in $Y").unwrap();
        assert_eq!(eval_nodes(&up, &t), vec![1, 2]);
    }
}

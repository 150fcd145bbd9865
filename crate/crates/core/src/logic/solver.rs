//! Satisfiability by bottom-up saturation of node types.
//!
//! A node type is a truth assignment to the Lean. Sets of types are BDDs
//! over two interleaved copies of the Lean variables: copy 0 for a node and
//! copy 1 for its first child or next sibling. The search starts from
//! leaves and repeatedly adds every type whose children's types are already
//! known, tracking whether the goal occurs in the binary subtree. The
//! formula is satisfiable once a root type with the goal below it appears.

use std::time::Instant;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use thiserror::Error;

use super::bdd::{Bdd, BddManager};
use super::graph::{lean, Atom, GId, GNode, Graph, GraphError};
use super::{check_model, Formula, Program};
use crate::tree::{BinaryNode, BinaryTree, NodeId};

/// Default limit on live BDD nodes.
pub const DEFAULT_NODE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Maximum number of live BDD nodes before giving up.
    pub node_limit: usize,
    /// Model check every witness before returning it.
    pub verify: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { node_limit: DEFAULT_NODE_LIMIT, verify: true }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverStats {
    pub lean_size: usize,
    pub iterations: usize,
    /// Number of node types in the final saturated sets.
    pub admitted_types: f64,
    pub peak_bdd_nodes: usize,
    pub millis: u128,
}

/// A finite tree satisfying the formula at `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub tree: BinaryTree,
    pub target: NodeId,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Sat { witness: Witness, stats: SolverStats },
    Unsat { stats: SolverStats },
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SolveOutcome::Sat { witness, .. } => Some(witness),
            SolveOutcome::Unsat { .. } => None,
        }
    }

    pub fn stats(&self) -> &SolverStats {
        match self {
            SolveOutcome::Sat { stats, .. } | SolveOutcome::Unsat { stats } => stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("resource limit exceeded: more than {limit} live BDD nodes")]
    ResourceLimit { limit: usize },
    #[error("free variable ${0}")]
    FreeVariable(String),
    #[error("{0} must be expanded before solving")]
    Unexpanded(String),
    #[error("variable ${0} refers to itself without crossing a modality")]
    Unguarded(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<GraphError> for SolveError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::FreeVariable(v) => SolveError::FreeVariable(v),
            GraphError::Unexpanded(s) => SolveError::Unexpanded(s),
        }
    }
}

/// Decides whether `f` holds at some node of some finite tree. On success
/// the witness is a smallest-depth tree found by the saturation, with the
/// node where `f` holds as target.
///
/// `f` must be closed, cycle-free and free of predicate calls.
pub fn satisfiable(f: &Formula, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    let mut g = Graph::new();
    let goal = g.build(f)?;
    let atoms = lean(&g, goal);
    let mut solver = Solver::new(&g, atoms, options.node_limit);
    let mut outcome = solver.run(goal)?;
    match &mut outcome {
        SolveOutcome::Sat { witness, stats } => {
            stats.millis = start.elapsed().as_millis();
            if options.verify && !check_model(f, &witness.tree, witness.target) {
                return Err(SolveError::Internal(
                    "witness does not satisfy the formula".into(),
                ));
            }
        }
        SolveOutcome::Unsat { stats } => stats.millis = start.elapsed().as_millis(),
    }
    Ok(outcome)
}

/// Live node count below which garbage is never collected.
const GC_FLOOR: usize = if cfg!(test) { 64 } else { 1 << 20 };

/// Collects garbage once the live node count doubles since the last
/// collection.
struct Collector {
    fixed: Vec<Bdd>,
    threshold: usize,
}

impl Collector {
    fn maybe(&mut self, s: &mut Solver, history: &[(Bdd, Bdd)], temps: &[Bdd]) -> Result<(), SolveError> {
        s.check()?;
        if s.m.live_nodes() <= self.threshold {
            return Ok(());
        }
        let mut roots = self.fixed.clone();
        roots.extend(s.memo.values().copied());
        roots.extend(history.iter().flat_map(|&(a, b)| [a, b]));
        roots.extend_from_slice(temps);
        s.m.gc(&roots);
        let live = s.m.live_nodes();
        log::debug!("collected garbage, {live} live nodes");
        if live > s.limit * 9 / 10 {
            return Err(SolveError::ResourceLimit { limit: s.limit });
        }
        self.threshold = (2 * live).max(GC_FLOOR).min(s.limit * 9 / 10);
        Ok(())
    }
}

struct Solver<'g> {
    g: &'g Graph,
    atoms: Vec<Atom>,
    index: FxHashMap<Atom, usize>,
    m: BddManager,
    memo: FxHashMap<(GId, u8), Bdd>,
    unfolding: FxHashSet<u32>,
    limit: usize,
}

struct Relation {
    conjuncts: Vec<Bdd>,
    // Conjunct order and the child variables to quantify after each step.
    schedule: Vec<(usize, Bdd)>,
    initial_cube: Bdd,
}

impl<'g> Solver<'g> {
    fn new(g: &'g Graph, atoms: Vec<Atom>, limit: usize) -> Self {
        let index = atoms.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let m = BddManager::new(atoms.len() * 2, limit);
        Solver {
            g,
            atoms,
            index,
            m,
            memo: FxHashMap::default(),
            unfolding: FxHashSet::default(),
            limit,
        }
    }

    fn var_of(&self, atom: Atom, copy: u8) -> usize {
        self.index[&atom] * 2 + copy as usize
    }

    fn top(&self, p: Program) -> Atom {
        Atom::Dia(p, Graph::TRUE)
    }

    fn check(&self) -> Result<(), SolveError> {
        if self.m.overflowed() {
            Err(SolveError::ResourceLimit { limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// BDD of a graph node over the given copy, unfolding definitions up
    /// to diamonds.
    fn eval(&mut self, id: GId, copy: u8) -> Result<Bdd, SolveError> {
        if let Some(&b) = self.memo.get(&(id, copy)) {
            return Ok(b);
        }
        let b = match self.g.node(id) {
            GNode::True => Bdd::TRUE,
            GNode::False => Bdd::FALSE,
            GNode::Name(n) => {
                let v = self.var_of(Atom::Name(n), copy);
                self.m.var(v)
            }
            GNode::Prop(n) => {
                let v = self.var_of(Atom::Prop(n), copy);
                self.m.var(v)
            }
            GNode::Attr(n) => {
                let v = self.var_of(Atom::Attr(n), copy);
                self.m.var(v)
            }
            GNode::Dia(p, a) => {
                let v = self.var_of(Atom::Dia(p, a), copy);
                self.m.var(v)
            }
            GNode::Not(a) => {
                let a = self.eval(a, copy)?;
                self.m.not(a)
            }
            GNode::And(a, b) => {
                let a = self.eval(a, copy)?;
                if a.is_false() {
                    Bdd::FALSE
                } else {
                    let b = self.eval(b, copy)?;
                    self.m.and(a, b)
                }
            }
            GNode::Or(a, b) => {
                let a = self.eval(a, copy)?;
                if a.is_true() {
                    Bdd::TRUE
                } else {
                    let b = self.eval(b, copy)?;
                    self.m.or(a, b)
                }
            }
            GNode::Var(slot) => {
                if !self.unfolding.insert(slot) {
                    return Err(SolveError::Unguarded(self.g.var_names[slot as usize].clone()));
                }
                let r = self.eval(self.g.var_body[slot as usize], copy);
                self.unfolding.remove(&slot);
                r?
            }
        };
        self.memo.insert((id, copy), b);
        Ok(b)
    }

    /// Consistency constraints of a single node type.
    fn types(&mut self) -> Bdd {
        let mut none = Bdd::TRUE;
        let mut at_most_one = Bdd::TRUE;
        for i in (0..self.atoms.len()).rev() {
            if let Atom::Name(_) = self.atoms[i] {
                let v = self.m.var(2 * i);
                let nv = self.m.not(v);
                let keep = self.m.and(nv, at_most_one);
                let first = self.m.and(v, none);
                at_most_one = self.m.or(keep, first);
                none = self.m.and(nv, none);
            }
        }
        let mut t = at_most_one;
        for i in 0..self.atoms.len() {
            if let Atom::Dia(p, a) = self.atoms[i] {
                if a != Graph::TRUE {
                    let v = self.m.var(2 * i);
                    let top = self.m.var(self.var_of(self.top(p), 0));
                    let imp = self.m.implies(v, top);
                    t = self.m.and(t, imp);
                }
            }
        }
        let up1 = self.m.var(self.var_of(self.top(Program::Up1), 0));
        let up2 = self.m.var(self.var_of(self.top(Program::Up2), 0));
        let both = self.m.and(up1, up2);
        self.m.and_not(t, both)
    }

    /// The relation between a node (copy 0) and its successor through `a`
    /// (copy 1), as a list of conjuncts with a quantification schedule.
    fn relation(&mut self, a: Program) -> Result<Relation, SolveError> {
        let back = a.converse();
        let mut conjuncts = Vec::new();
        for i in 0..self.atoms.len() {
            if let Atom::Dia(p, psi) = self.atoms[i] {
                if psi == Graph::TRUE {
                    continue;
                }
                if p == a {
                    let here = self.m.var(2 * i);
                    let there = self.eval(psi, 1)?;
                    conjuncts.push(self.m.iff(here, there));
                } else if p == back {
                    let there = self.m.var(2 * i + 1);
                    let here = self.eval(psi, 0)?;
                    conjuncts.push(self.m.iff(there, here));
                }
            }
        }
        let v = self.var_of(self.top(a), 0);
        conjuncts.push(self.m.var(v));
        let v = self.var_of(self.top(back), 1);
        conjuncts.push(self.m.var(v));
        self.check()?;

        // Greedy early quantification: repeatedly pick the conjunct that
        // retires the most child variables while introducing the fewest
        // parent variables.
        let supports: Vec<Vec<usize>> = conjuncts.iter().map(|&c| self.m.support(c)).collect();
        let n = self.atoms.len();
        let mut count = vec![0usize; n];
        for s in &supports {
            for &v in s {
                if v % 2 == 1 {
                    count[v / 2] += 1;
                }
            }
        }
        let unused: Vec<usize> = (0..n).filter(|&i| count[i] == 0).map(|i| 2 * i + 1).collect();
        let initial_cube = self.m.cube(&unused);
        let mut introduced = vec![false; n];
        let mut remaining: Vec<usize> = (0..conjuncts.len()).collect();
        let mut schedule = Vec::new();
        while !remaining.is_empty() {
            let mut best = 0;
            let mut best_score = i64::MIN;
            for (k, &c) in remaining.iter().enumerate() {
                let retired =
                    supports[c].iter().filter(|&&v| v % 2 == 1 && count[v / 2] == 1).count();
                let fresh =
                    supports[c].iter().filter(|&&v| v % 2 == 0 && !introduced[v / 2]).count();
                let score = 2 * retired as i64 - fresh as i64;
                if score > best_score {
                    best_score = score;
                    best = k;
                }
            }
            let c = remaining.swap_remove(best);
            let mut retire = Vec::new();
            for &v in &supports[c] {
                if v % 2 == 1 {
                    count[v / 2] -= 1;
                    if count[v / 2] == 0 {
                        retire.push(v);
                    }
                } else {
                    introduced[v / 2] = true;
                }
            }
            let cube = self.m.cube(&retire);
            schedule.push((c, cube));
        }
        Ok(Relation { conjuncts, schedule, initial_cube })
    }

    /// Parent types having a successor with a type in `set` (over copy 1).
    fn pre_image(&mut self, rel: &Relation, set: Bdd) -> Bdd {
        let mut acc = self.m.exists(set, rel.initial_cube);
        for &(c, cube) in &rel.schedule {
            acc = self.m.and_exists(acc, rel.conjuncts[c], cube);
            if acc.is_false() {
                break;
            }
        }
        acc
    }

    fn run(&mut self, goal: GId) -> Result<SolveOutcome, SolveError> {
        let n = self.atoms.len();
        let types = self.types();
        let goal0 = self.eval(goal, 0)?;
        let up1 = self.m.var(self.var_of(self.top(Program::Up1), 0));
        let up2 = self.m.var(self.var_of(self.top(Program::Up2), 0));
        let any_up = self.m.or(up1, up2);
        let root = self.m.not(any_up);
        let has1 = self.m.var(self.var_of(self.top(Program::Down1), 0));
        let has2 = self.m.var(self.var_of(self.top(Program::Down2), 0));
        let rel1 = self.relation(Program::Down1)?;
        let rel2 = self.relation(Program::Down2)?;
        let to_child = self.m.register_renaming((0..2 * n).map(|v| v | 1).collect());
        self.check()?;

        let mut stats = SolverStats { lean_size: n, ..SolverStats::default() };
        log::debug!("lean of {n} atoms, transition relations of {} + {} conjuncts", rel1.conjuncts.len(), rel2.conjuncts.len());
        let mut history: Vec<(Bdd, Bdd)> = vec![(Bdd::FALSE, Bdd::FALSE)];
        let (mut x0, mut x1) = (Bdd::FALSE, Bdd::FALSE);
        let goal_types = self.m.and(types, goal0);
        if goal_types.is_false() {
            stats.peak_bdd_nodes = self.m.peak_nodes();
            return Ok(SolveOutcome::Unsat { stats });
        }
        let no_goal_types = self.m.and_not(types, goal0);
        let mut fixed: Vec<Bdd> = vec![types, goal0, root, has1, has2, goal_types, no_goal_types];
        for rel in [&rel1, &rel2] {
            fixed.extend(rel.conjuncts.iter().copied());
            fixed.extend(rel.schedule.iter().map(|&(_, c)| c));
            fixed.push(rel.initial_cube);
        }
        let mut gc = Collector { fixed, threshold: GC_FLOOR };
        loop {
            stats.iterations += 1;
            let c0 = self.m.rename(x0, to_child);
            let c1 = self.m.rename(x1, to_child);
            let c10 = self.pre_image(&rel1, c0);
            gc.maybe(self, &history, &[c0, c1, c10])?;
            let c11 = self.pre_image(&rel1, c1);
            gc.maybe(self, &history, &[c0, c1, c10, c11])?;
            let c20 = self.pre_image(&rel2, c0);
            gc.maybe(self, &history, &[c1, c10, c11, c20])?;
            let c21 = self.pre_image(&rel2, c1);
            gc.maybe(self, &history, &[c10, c11, c20, c21])?;
            let no1 = self.m.not(has1);
            let no2 = self.m.not(has2);
            let ok10 = self.m.or(no1, c10);
            let ok20 = self.m.or(no2, c20);
            let any1 = self.m.or(ok10, c11);
            let any2 = self.m.or(ok20, c21);

            let here = self.m.and(any1, any2);
            let here = self.m.and(goal_types, here);
            let left = self.m.and(c11, any2);
            let right = self.m.and(any1, c21);
            let below = self.m.or(left, right);
            let below = self.m.and(types, below);
            let n1 = self.m.or(here, below);
            let n0 = self.m.and(ok10, ok20);
            let n0 = self.m.and(no_goal_types, n0);
            self.check()?;
            log::debug!(
                "iteration {}: {} + {} nodes, {} live",
                stats.iterations,
                self.m.node_count(n0),
                self.m.node_count(n1),
                self.m.live_nodes()
            );
            history.push((n0, n1));

            let rooted = self.m.and(n1, root);
            if !rooted.is_false() {
                stats.admitted_types = self.admitted(n0, n1);
                stats.peak_bdd_nodes = self.m.peak_nodes();
                let witness = self.extract(goal0, root, &history)?;
                return Ok(SolveOutcome::Sat { witness, stats });
            }
            if n0 == x0 && n1 == x1 {
                stats.admitted_types = self.admitted(n0, n1);
                stats.peak_bdd_nodes = self.m.peak_nodes();
                return Ok(SolveOutcome::Unsat { stats });
            }
            x0 = n0;
            x1 = n1;
            gc.maybe(self, &history, &[])?;
        }
    }

    fn admitted(&self, x0: Bdd, x1: Bdd) -> f64 {
        // Only copy-0 variables are constrained.
        let half = self.atoms.len() as i32;
        (self.m.sat_count(x0) + self.m.sat_count(x1)) / 2f64.powi(half)
    }

    fn assignment_from(&self, path: &[(usize, bool)], copy: usize) -> Vec<bool> {
        let mut t = vec![false; self.atoms.len()];
        for &(v, val) in path {
            if v % 2 == copy {
                t[v / 2] = val;
            }
        }
        t
    }

    /// Successor types compatible with the fixed type `t` through `a`,
    /// restricted to `set` (over copy 1).
    fn successors(&mut self, t: &[bool], a: Program, set: Bdd) -> Result<Bdd, SolveError> {
        let back = a.converse();
        let mut acc = set;
        let v = self.var_of(self.top(back), 1);
        let lit = self.m.var(v);
        acc = self.m.and(acc, lit);
        for i in 0..self.atoms.len() {
            if acc.is_false() {
                break;
            }
            if let Atom::Dia(p, psi) = self.atoms[i] {
                if psi == Graph::TRUE {
                    continue;
                }
                if p == a {
                    let there = self.eval(psi, 1)?;
                    acc = if t[i] { self.m.and(acc, there) } else { self.m.and_not(acc, there) };
                } else if p == back {
                    let here = self.eval(psi, 0)?;
                    let value = self.m.eval(here, |v| t[v / 2]);
                    let lit = self.m.literal(2 * i + 1, value);
                    acc = self.m.and(acc, lit);
                }
            }
        }
        self.check()?;
        Ok(acc)
    }

    fn extract(
        &mut self,
        goal0: Bdd,
        root: Bdd,
        history: &[(Bdd, Bdd)],
    ) -> Result<Witness, SolveError> {
        let n = self.atoms.len();
        let to_child = self.m.register_renaming((0..2 * n).map(|v| v | 1).collect());
        let last = history.len() - 1;
        let start = self.m.and(history[last].1, root);
        let path = self.m.sat_one(start).expect("non-empty root set");
        let t = self.assignment_from(&path, 0);

        let mut nodes: Vec<BinaryNode> = Vec::new();
        let mut target = None;
        // Work items: (type, must contain goal, round, parent link).
        let mut stack: Vec<(Vec<bool>, bool, usize, Option<(NodeId, u8)>)> =
            vec![(t, true, last, None)];
        let fresh_name = self.fresh_name();
        while let Some((t, marked, round, link)) = stack.pop() {
            let id = nodes.len();
            nodes.push(self.node_of(&t, &fresh_name));
            if let Some((parent, k)) = link {
                if k == 1 {
                    nodes[parent].child1 = Some(id);
                } else {
                    nodes[parent].child2 = Some(id);
                }
            }
            let goal_here = self.m.eval(goal0, |v| t[v / 2]);
            if marked && goal_here && target.is_none() {
                target = Some(id);
            }
            let has = [
                t[self.index[&self.top(Program::Down1)]],
                t[self.index[&self.top(Program::Down2)]],
            ];
            let options: &[(bool, bool)] = if !marked {
                &[(false, false)]
            } else if goal_here {
                &[(false, false), (true, false), (false, true), (true, true)]
            } else {
                &[(true, false), (false, true), (true, true)]
            };
            let mut chosen = None;
            for &(m1, m2) in options {
                let mut picks = Vec::new();
                for (k, (a, want)) in [(Program::Down1, m1), (Program::Down2, m2)].into_iter().enumerate() {
                    if !has[k] {
                        picks.push(if want { None } else { Some(None) });
                        continue;
                    }
                    let mut found = None;
                    for j in 1..round {
                        let set = if want { history[j].1 } else { history[j].0 };
                        if set.is_false() {
                            continue;
                        }
                        let renamed = self.m.rename(set, to_child);
                        let succ = self.successors(&t, a, renamed)?;
                        if let Some(p) = self.m.sat_one(succ) {
                            found = Some((self.assignment_from(&p, 1), j));
                            break;
                        }
                    }
                    picks.push(found.map(Some));
                }
                if picks.iter().all(Option::is_some) {
                    chosen = Some((m1, m2, picks));
                    break;
                }
            }
            let Some((m1, m2, picks)) = chosen else {
                log::debug!("no children for a node of round {round}: marked {marked}, goal {goal_here}, has {has:?}");
                return Err(SolveError::Internal("witness reconstruction failed".into()));
            };
            let wants = [m1, m2];
            // Push the sibling first so the first child is built next and
            // node ids follow document order.
            for k in [1usize, 0] {
                if let Some(Some((child, j))) = &picks[k] {
                    stack.push((child.clone(), wants[k], *j, Some((id, k as u8 + 1))));
                }
            }
        }
        let target =
            target.ok_or_else(|| SolveError::Internal("no node of the witness holds the goal".into()))?;
        Ok(Witness { tree: BinaryTree { nodes, root: 0 }, target })
    }

    fn fresh_name(&self) -> String {
        let mut candidate = "other".to_string();
        let mut k = 0;
        while self.g.names.contains(&candidate) {
            k += 1;
            candidate = format!("other{k}");
        }
        candidate
    }

    fn node_of(&self, t: &[bool], fresh_name: &str) -> BinaryNode {
        let mut node = BinaryNode::named(fresh_name);
        for (i, atom) in self.atoms.iter().enumerate() {
            if !t[i] {
                continue;
            }
            match *atom {
                Atom::Name(k) => node.name = Some(self.g.names[k as usize].clone()),
                Atom::Prop(k) => {
                    node.propositions.insert(self.g.props[k as usize].clone());
                }
                Atom::Attr(k) => {
                    node.attributes.insert(self.g.attrs[k as usize].clone());
                }
                Atom::Dia(..) => {}
            }
        }
        node
    }
}

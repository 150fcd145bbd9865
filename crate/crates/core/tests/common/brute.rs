//! Random tree logic formulas and a brute-force satisfiability check over
//! all small binary trees. Node sets are bit masks, so trees have at most
//! 64 nodes.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use xsat::logic::{check_cycle_free, Formula, Program};
use xsat::tree::BinaryTree;

/// A binary tree shape with labels as node masks.
#[derive(Debug, Clone, Default)]
pub struct Labelled {
    pub child1: Vec<Option<usize>>,
    pub child2: Vec<Option<usize>>,
    pub names: HashMap<String, u64>,
    pub props: HashMap<String, u64>,
    pub attrs: HashMap<String, u64>,
}

impl Labelled {
    fn len(&self) -> usize {
        self.child1.len()
    }

    fn all(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    pub fn from_binary(t: &BinaryTree) -> Self {
        let mut l = Labelled {
            child1: t.nodes.iter().map(|n| n.child1).collect(),
            child2: t.nodes.iter().map(|n| n.child2).collect(),
            ..Default::default()
        };
        for (i, n) in t.nodes.iter().enumerate() {
            if let Some(name) = &n.name {
                *l.names.entry(name.clone()).or_default() |= 1 << i;
            }
            for p in &n.propositions {
                *l.props.entry(p.clone()).or_default() |= 1 << i;
            }
            for a in &n.attributes {
                *l.attrs.entry(a.clone()).or_default() |= 1 << i;
            }
        }
        l
    }

    /// Nodes whose successor through `p` is in `set`.
    fn pre(&self, p: Program, set: u64) -> u64 {
        let mut out = 0;
        for i in 0..self.len() {
            let hit = |j: Option<usize>| j.is_some_and(|j| set >> j & 1 == 1);
            match p {
                Program::Down1 if hit(self.child1[i]) => out |= 1 << i,
                Program::Down2 if hit(self.child2[i]) => out |= 1 << i,
                Program::Up1 if set >> i & 1 == 1 => {
                    if let Some(j) = self.child1[i] {
                        out |= 1 << j
                    }
                }
                Program::Up2 if set >> i & 1 == 1 => {
                    if let Some(j) = self.child2[i] {
                        out |= 1 << j
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Nodes satisfying `f`, with least fixpoints for `let`.
    pub fn eval(&self, f: &Formula, env: &mut HashMap<String, u64>) -> u64 {
        let all = self.all();
        match f {
            Formula::True => all,
            Formula::False => 0,
            Formula::Element(n) => self.names.get(n).copied().unwrap_or(0),
            Formula::Prop(n) => self.props.get(n).copied().unwrap_or(0),
            Formula::Start => self.props.get("#").copied().unwrap_or(0),
            Formula::Attribute(n) => self.attrs.get(n).copied().unwrap_or(0),
            Formula::Var(v) => env[v],
            Formula::Not(a) => !self.eval(a, env) & all,
            Formula::And(a, b) => self.eval(a, env) & self.eval(b, env),
            Formula::Or(a, b) => self.eval(a, env) | self.eval(b, env),
            Formula::Implies(a, b) => (!self.eval(a, env) & all) | self.eval(b, env),
            Formula::Equiv(a, b) => !(self.eval(a, env) ^ self.eval(b, env)) & all,
            Formula::Modal(p, a) => {
                let s = self.eval(a, env);
                self.pre(*p, s)
            }
            Formula::Let(bindings, body) => {
                let saved: Vec<_> = bindings.iter().map(|(v, _)| (v.clone(), env.get(v).copied())).collect();
                for (v, _) in bindings {
                    env.insert(v.clone(), 0);
                }
                loop {
                    let next: Vec<u64> = bindings.iter().map(|(_, d)| self.eval(d, env)).collect();
                    let mut changed = false;
                    for ((v, _), n) in bindings.iter().zip(next) {
                        changed |= env.insert(v.clone(), n) != Some(n);
                    }
                    if !changed {
                        break;
                    }
                }
                let r = self.eval(body, env);
                for (v, old) in saved {
                    match old {
                        Some(o) => env.insert(v, o),
                        None => env.remove(&v),
                    };
                }
                r
            }
            other => panic!("unexpected formula {other}"),
        }
    }
}

/// All binary tree shapes with exactly `n` nodes, ids in preorder.
pub fn shapes(n: usize) -> Vec<(Vec<Option<usize>>, Vec<Option<usize>>)> {
    fn build(n: usize, offset: usize) -> Vec<(Vec<Option<usize>>, Vec<Option<usize>>)> {
        if n == 0 {
            return vec![(Vec::new(), Vec::new())];
        }
        let mut out = Vec::new();
        for left in 0..n {
            for (l1, l2) in build(left, offset + 1) {
                for (r1, r2) in build(n - 1 - left, offset + 1 + left) {
                    let mut c1 = vec![(left > 0).then_some(offset + 1)];
                    let mut c2 = vec![(n - 1 - left > 0).then_some(offset + 1 + left)];
                    c1.extend(l1.iter().copied());
                    c2.extend(l2.iter().copied());
                    c1.extend(r1.iter().copied());
                    c2.extend(r2.iter().copied());
                    out.push((c1, c2));
                }
            }
        }
        out
    }
    build(n, 0)
}

/// Whether some tree with at most `max` nodes satisfies `f` at some node,
/// labelling nodes with the given names (or none of them), propositions
/// and attributes.
pub fn has_small_model(f: &Formula, max: usize, names: &[String], props: &[String], attrs: &[String]) -> bool {
    let mut env = HashMap::new();
    for n in 1..=max {
        let labels = (names.len() + 1).pow(n as u32);
        for (c1, c2) in shapes(n) {
            let mut t = Labelled { child1: c1, child2: c2, ..Default::default() };
            for code in 0..labels {
                let mut code = code;
                t.names = names.iter().map(|s| (s.clone(), 0)).collect();
                for i in 0..n {
                    let k = code % (names.len() + 1);
                    code /= names.len() + 1;
                    if k > 0 {
                        *t.names.get_mut(&names[k - 1]).unwrap() |= 1 << i;
                    }
                }
                for pmask in 0..1u64 << (n * props.len()) {
                    t.props = props.iter().enumerate().map(|(j, p)| (p.clone(), pmask >> (j * n) & ((1 << n) - 1))).collect();
                    for amask in 0..1u64 << (n * attrs.len()) {
                        t.attrs =
                            attrs.iter().enumerate().map(|(j, a)| (a.clone(), amask >> (j * n) & ((1 << n) - 1))).collect();
                        if t.eval(f, &mut env) != 0 {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

/// Random formulas over elements a and b, proposition _p and attribute x.
pub struct FormulaGen {
    next_var: usize,
}

impl FormulaGen {
    pub fn new() -> Self {
        FormulaGen { next_var: 0 }
    }

    /// A random closed cycle-free formula of depth at most `depth`.
    pub fn formula(&mut self, rng: &mut StdRng, depth: usize) -> Formula {
        loop {
            self.next_var = 0;
            let f = self.gen(rng, depth, &[]);
            if check_cycle_free(&f).is_ok() {
                return f;
            }
        }
    }

    fn atom(rng: &mut StdRng) -> Formula {
        match rng.gen_range(0..7) {
            0 | 1 => Formula::element("a"),
            2 => Formula::element("b"),
            3 => Formula::prop("_p"),
            4 => Formula::attribute("x"),
            5 => Formula::True,
            _ => Formula::not(Formula::element("a")),
        }
    }

    /// `vars` are the variables that may occur here: bound, positive and
    /// guarded by a modality.
    fn gen(&mut self, rng: &mut StdRng, depth: usize, vars: &[String]) -> Formula {
        if depth == 0 || rng.gen_bool(0.2) {
            if !vars.is_empty() && rng.gen_bool(0.4) {
                return Formula::var(vars.choose(rng).unwrap().clone());
            }
            return Self::atom(rng);
        }
        let d = depth - 1;
        match rng.gen_range(0..12) {
            0 | 1 => Formula::not(self.gen(rng, d, &[])),
            2 | 3 => Formula::and(self.gen(rng, d, vars), self.gen(rng, d, vars)),
            4 => Formula::or(self.gen(rng, d, vars), self.gen(rng, d, vars)),
            5 => Formula::implies(self.gen(rng, d, &[]), self.gen(rng, d, vars)),
            6 => Formula::equiv(self.gen(rng, d.min(1), &[]), self.gen(rng, d.min(1), &[])),
            7..=9 => {
                let p = *Program::ALL.choose(rng).unwrap();
                Formula::modal(p, self.gen(rng, d, vars))
            }
            _ => {
                self.next_var += 1;
                let x = format!("X{}", self.next_var);
                let mut inner = vars.to_vec();
                inner.push(x.clone());
                let p = *Program::ALL.choose(rng).unwrap();
                let base = self.gen(rng, d.saturating_sub(1), vars);
                let step = Formula::modal(p, self.gen(rng, d.saturating_sub(1), &inner));
                let def = if rng.gen_bool(0.5) { Formula::or(base, step) } else { Formula::and(base, step) };
                let body = if rng.gen_bool(0.5) {
                    Formula::var(x.clone())
                } else {
                    Formula::and(self.gen(rng, d.saturating_sub(1), vars), Formula::var(x.clone()))
                };
                Formula::let_in(vec![(x, def)], body)
            }
        }
    }
}

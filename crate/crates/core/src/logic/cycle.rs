use std::collections::HashMap;

use thiserror::Error;

use super::{Arg, Formula, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycleError {
    #[error("variable ${variable} recurses without passing a modality")]
    Unguarded { variable: String },
    #[error("variable ${variable} recurses through both <{}> and <{}>", .programs.0, .programs.1)]
    Converse { variable: String, programs: (Program, Program) },
}

struct Edge {
    from: usize,
    to: usize,
    // Bitmask over `Program::index` of the modalities crossed.
    programs: u8,
}

struct Collector {
    names: Vec<String>,
    scopes: Vec<HashMap<String, usize>>,
    edges: Vec<Edge>,
}

const ROOT: usize = usize::MAX;

impl Collector {
    fn visit(&mut self, f: &Formula, owner: usize, programs: u8) {
        match f {
            Formula::Var(name) => {
                let target = self.scopes.iter().rev().find_map(|s| s.get(name).copied());
                if let (Some(to), true) = (target, owner != ROOT) {
                    self.edges.push(Edge { from: owner, to, programs });
                }
            }
            Formula::Modal(p, a) => self.visit(a, owner, programs | (1 << p.index())),
            Formula::Not(a) => self.visit(a, owner, programs),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Equiv(a, b) => {
                self.visit(a, owner, programs);
                self.visit(b, owner, programs);
            }
            Formula::Let(bindings, body) => {
                let mut scope = HashMap::new();
                let mut ids = Vec::new();
                for (name, _) in bindings {
                    let id = self.names.len();
                    self.names.push(name.clone());
                    scope.insert(name.clone(), id);
                    ids.push(id);
                }
                self.scopes.push(scope);
                for ((_, def), id) in bindings.iter().zip(ids) {
                    self.visit(def, id, 0);
                }
                self.visit(body, owner, programs);
                self.scopes.pop();
            }
            Formula::Call(_, args) => {
                for arg in args {
                    if let Arg::Formula(g) = arg {
                        self.visit(g, owner, programs);
                    }
                }
            }
            _ => {}
        }
    }
}

fn strongly_connected(n: usize, succ: &[Vec<usize>]) -> Vec<usize> {
    // Iterative Tarjan; returns the component id of every vertex.
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut ncomp = 0;
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(start, 0)];
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

fn has_cycle(n: usize, succ: &[Vec<usize>]) -> Option<usize> {
    // Colour-based DFS; returns a vertex on a cycle.
    let mut colour = vec![0u8; n];
    for start in 0..n {
        if colour[start] != 0 {
            continue;
        }
        let mut work = vec![(start, 0usize)];
        colour[start] = 1;
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                match colour[w] {
                    0 => {
                        colour[w] = 1;
                        work.push((w, 0));
                    }
                    1 => return Some(w),
                    _ => {}
                }
            } else {
                colour[v] = 2;
                work.pop();
            }
        }
    }
    None
}

/// Checks that every recursive variable is guarded by a modality and that
/// no recursion mixes a program with its converse.
///
/// The converse check is conservative: the union of programs crossed by
/// all edges of a strongly connected component must not contain both `a`
/// and its converse.
pub fn check_cycle_free(f: &Formula) -> Result<(), CycleError> {
    let mut c = Collector { names: Vec::new(), scopes: Vec::new(), edges: Vec::new() };
    c.visit(f, ROOT, 0);
    let n = c.names.len();
    let mut succ = vec![Vec::new(); n];
    for e in &c.edges {
        succ[e.from].push(e.to);
    }
    let comp = strongly_connected(n, &succ);

    let mut unguarded = vec![Vec::new(); n];
    for e in &c.edges {
        if e.programs == 0 && comp[e.from] == comp[e.to] {
            unguarded[e.from].push(e.to);
        }
    }
    if let Some(v) = has_cycle(n, &unguarded) {
        return Err(CycleError::Unguarded { variable: c.names[v].clone() });
    }

    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut mask = vec![0u8; ncomp];
    let mut witness = vec![usize::MAX; ncomp];
    for e in &c.edges {
        if comp[e.from] == comp[e.to] {
            mask[comp[e.from]] |= e.programs;
            witness[comp[e.from]] = witness[comp[e.from]].min(e.from);
        }
    }
    for (k, &m) in mask.iter().enumerate() {
        for p in [Program::Down1, Program::Down2] {
            let q = p.converse();
            if m & (1 << p.index()) != 0 && m & (1 << q.index()) != 0 {
                return Err(CycleError::Converse {
                    variable: c.names[witness[k]].clone(),
                    programs: (p, q),
                });
            }
        }
    }
    Ok(())
}

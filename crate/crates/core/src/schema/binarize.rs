//! Translation of hedge tree types into binary tree types.
//!
//! Every binary variable stands for a residual hedge language: a sequence
//! of type terms still to be matched by a node and its next siblings. The
//! alternatives of a residual are read off its linear form, a set of
//! (element constructor, remaining residual) pairs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{AttrExpr, TreeType};

/// Right-hand side of a binary tree type binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinaryExpr {
    EmptySet,
    /// The empty tree.
    EmptyTree,
    Or(Box<BinaryExpr>, Box<BinaryExpr>),
    /// Element with its attribute expression, the variable for its first
    /// child and the variable for its next sibling.
    Element(String, AttrExpr, usize, usize),
}

/// Binary tree type in two-variable normal form: a set of bindings and a
/// start variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryTreeType {
    pub bindings: Vec<BinaryExpr>,
    pub start: usize,
}

impl BinaryTreeType {
    pub fn var_name(x: usize) -> String {
        format!("x{x}")
    }

    /// Whether the language bound to `x` contains the empty tree.
    pub fn nullable(&self, x: usize) -> bool {
        fn go(e: &BinaryExpr) -> bool {
            match e {
                BinaryExpr::EmptyTree => true,
                BinaryExpr::EmptySet | BinaryExpr::Element(..) => false,
                BinaryExpr::Or(a, b) => go(a) || go(b),
            }
        }
        go(&self.bindings[x])
    }

    /// The element alternatives bound to `x`.
    pub fn alternatives(&self, x: usize) -> Vec<(&str, &AttrExpr, usize, usize)> {
        fn go<'a>(e: &'a BinaryExpr, out: &mut Vec<(&'a str, &'a AttrExpr, usize, usize)>) {
            match e {
                BinaryExpr::Element(l, a, x1, x2) => out.push((l, a, *x1, *x2)),
                BinaryExpr::Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(&self.bindings[x], &mut out);
        out
    }
}

impl fmt::Display for BinaryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinaryExpr::EmptySet => write!(f, "{{}}"),
            BinaryExpr::EmptyTree => write!(f, "()"),
            BinaryExpr::Or(a, b) => write!(f, "{a} | {b}"),
            BinaryExpr::Element(l, a, x1, x2) => {
                write!(f, "{l}")?;
                if *a != AttrExpr::Empty {
                    write!(f, "[{a}]")?;
                }
                write!(f, "(x{x1}, x{x2})")
            }
        }
    }
}

impl fmt::Display for BinaryTreeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "let ")?;
        for (i, e) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "x{i} = {e}")?;
        }
        write!(f, " in x{}", self.start)
    }
}

type TermId = usize;
type Residual = Vec<TermId>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Term {
    EmptySet,
    EmptySeq,
    Or(TermId, TermId),
    Concat(TermId, TermId),
    Element(String, AttrExpr, TermId),
    Var(usize),
}

#[derive(Default)]
struct Arena {
    terms: Vec<Term>,
    index: HashMap<Term, TermId>,
    var_defs: Vec<TermId>,
}

impl Arena {
    fn intern(&mut self, t: Term) -> TermId {
        if let Some(&id) = self.index.get(&t) {
            return id;
        }
        let id = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t, id);
        id
    }

    /// Interns a tree type, giving every bound variable a global index.
    fn flatten(&mut self, t: &TreeType, scopes: &mut Vec<HashMap<String, usize>>) -> TermId {
        match t {
            TreeType::EmptySet => self.intern(Term::EmptySet),
            TreeType::EmptySeq => self.intern(Term::EmptySeq),
            TreeType::Or(a, b) => {
                let (a, b) = (self.flatten(a, scopes), self.flatten(b, scopes));
                self.intern(Term::Or(a, b))
            }
            TreeType::Concat(a, b) => {
                let (a, b) = (self.flatten(a, scopes), self.flatten(b, scopes));
                self.intern(Term::Concat(a, b))
            }
            TreeType::Element(l, a, c) => {
                let c = self.flatten(c, scopes);
                self.intern(Term::Element(l.clone(), a.clone(), c))
            }
            TreeType::Var(v) => {
                // Unbound variables denote the empty set.
                match scopes.iter().rev().find_map(|s| s.get(v).copied()) {
                    Some(id) => self.intern(Term::Var(id)),
                    None => self.intern(Term::EmptySet),
                }
            }
            TreeType::Bind(bindings, body) => {
                let mut scope = HashMap::new();
                let mut ids = Vec::new();
                for (name, _) in bindings {
                    let id = self.var_defs.len();
                    self.var_defs.push(usize::MAX);
                    scope.insert(name.clone(), id);
                    ids.push(id);
                }
                scopes.push(scope);
                for ((_, def), id) in bindings.iter().zip(ids) {
                    self.var_defs[id] = self.flatten(def, scopes);
                }
                let body = self.flatten(body, scopes);
                scopes.pop();
                body
            }
        }
    }
}

type LinearForm = BTreeSet<(TermId, Residual)>;

struct Forms<'a> {
    arena: &'a Arena,
    var_nullable: Vec<bool>,
    var_forms: Vec<LinearForm>,
}

impl<'a> Forms<'a> {
    fn new(arena: &'a Arena) -> Self {
        let n = arena.var_defs.len();
        let mut forms = Forms { arena, var_nullable: vec![false; n], var_forms: vec![BTreeSet::new(); n] };
        // Least fixpoints: unguarded variable cycles contribute nothing new.
        loop {
            let mut changed = false;
            for x in 0..n {
                if !forms.var_nullable[x] && forms.nullable(arena.var_defs[x]) {
                    forms.var_nullable[x] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        loop {
            let mut changed = false;
            for x in 0..n {
                let lf = forms.term_form(arena.var_defs[x]);
                if lf.len() != forms.var_forms[x].len() {
                    forms.var_forms[x] = lf;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        forms
    }

    fn nullable(&self, t: TermId) -> bool {
        match &self.arena.terms[t] {
            Term::EmptySet | Term::Element(..) => false,
            Term::EmptySeq => true,
            Term::Or(a, b) => self.nullable(*a) || self.nullable(*b),
            Term::Concat(a, b) => self.nullable(*a) && self.nullable(*b),
            Term::Var(x) => self.var_nullable[*x],
        }
    }

    fn term_form(&self, t: TermId) -> LinearForm {
        match &self.arena.terms[t] {
            Term::EmptySet | Term::EmptySeq => BTreeSet::new(),
            Term::Element(..) => BTreeSet::from([(t, Vec::new())]),
            Term::Or(a, b) => {
                let mut lf = self.term_form(*a);
                lf.extend(self.term_form(*b));
                lf
            }
            Term::Concat(a, b) => {
                let mut lf: LinearForm =
                    self.term_form(*a).into_iter().map(|(e, r)| (e, self.append(r, &[*b]))).collect();
                if self.nullable(*a) {
                    lf.extend(self.term_form(*b));
                }
                lf
            }
            Term::Var(x) => self.var_forms[*x].clone(),
        }
    }

    fn append(&self, mut r: Residual, rest: &[TermId]) -> Residual {
        r.extend(rest.iter().copied().filter(|&t| self.arena.terms[t] != Term::EmptySeq));
        r
    }

    fn residual_form(&self, r: &[TermId]) -> (LinearForm, bool) {
        let mut lf = BTreeSet::new();
        for (i, &t) in r.iter().enumerate() {
            lf.extend(self.term_form(t).into_iter().map(|(e, rest)| (e, self.append(rest, &r[i + 1..]))));
            if !self.nullable(t) {
                return (lf, false);
            }
        }
        (lf, true)
    }
}

/// Binarizes a hedge tree type. A forest belongs to `t` iff its binary
/// encoding belongs to the start variable of the result.
pub fn binarize(t: &TreeType) -> BinaryTreeType {
    let mut arena = Arena::default();
    let root = arena.flatten(t, &mut Vec::new());
    let forms = Forms::new(&arena);

    let mut states: HashMap<Residual, usize> = HashMap::new();
    let mut queue: Vec<Residual> = Vec::new();
    let mut state_of = |r: Residual, queue: &mut Vec<Residual>| -> usize {
        let next = states.len();
        *states.entry(r.clone()).or_insert_with(|| {
            queue.push(r);
            next
        })
    };
    let start = state_of(forms.append(Vec::new(), &[root]), &mut queue);
    let mut bindings = Vec::new();
    let mut pos = 0;
    while pos < queue.len() {
        let r = queue[pos].clone();
        pos += 1;
        let (lf, nullable) = forms.residual_form(&r);
        let mut alts = Vec::new();
        for (e, rest) in lf {
            let Term::Element(name, attrs, content) = &arena.terms[e] else { unreachable!() };
            let x1 = state_of(forms.append(Vec::new(), &[*content]), &mut queue);
            let x2 = state_of(rest, &mut queue);
            alts.push(BinaryExpr::Element(name.clone(), attrs.clone(), x1, x2));
        }
        if nullable {
            alts.push(BinaryExpr::EmptyTree);
        }
        let expr = alts
            .into_iter()
            .reduce(|a, b| BinaryExpr::Or(Box::new(a), Box::new(b)))
            .unwrap_or(BinaryExpr::EmptySet);
        bindings.push(expr);
    }
    BinaryTreeType { bindings, start }
}

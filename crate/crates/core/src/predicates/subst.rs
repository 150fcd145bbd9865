//! Capture-avoiding substitution of predicate arguments.

use std::collections::{BTreeSet, HashMap};

use crate::logic::{Arg, Formula, FreshNames};

/// Variables occurring free in `f`.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match f {
            Formula::Var(v) if !bound.contains(v) => {
                out.insert(v.clone());
            }
            Formula::Not(a) | Formula::Modal(_, a) => go(a, bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Let(bindings, body) => {
                let n = bound.len();
                bound.extend(bindings.iter().map(|(v, _)| v.clone()));
                for (_, d) in bindings {
                    go(d, bound, out);
                }
                go(body, bound, out);
                bound.truncate(n);
            }
            Formula::Call(_, args) => {
                for a in args {
                    if let Arg::Formula(f) = a {
                        go(f, bound, out);
                    }
                }
            }
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Renames free occurrences of variable `old` to `new`.
fn rename(f: &Formula, old: &str, new: &str) -> Formula {
    match f {
        Formula::Var(v) if v == old => Formula::var(new),
        Formula::Let(bindings, _) if bindings.iter().any(|(v, _)| v == old) => f.clone(),
        Formula::Not(a) => Formula::not(rename(a, old, new)),
        Formula::Modal(p, a) => Formula::modal(*p, rename(a, old, new)),
        Formula::And(a, b) => Formula::and(rename(a, old, new), rename(b, old, new)),
        Formula::Or(a, b) => Formula::or(rename(a, old, new), rename(b, old, new)),
        Formula::Implies(a, b) => Formula::implies(rename(a, old, new), rename(b, old, new)),
        Formula::Equiv(a, b) => Formula::equiv(rename(a, old, new), rename(b, old, new)),
        Formula::Let(bindings, body) => Formula::let_in(
            bindings.iter().map(|(v, d)| (v.clone(), rename(d, old, new))).collect(),
            rename(body, old, new),
        ),
        Formula::Call(name, args) => Formula::Call(
            name.clone(),
            args.iter()
                .map(|a| match a {
                    Arg::Formula(f) => Arg::Formula(rename(f, old, new)),
                    t => t.clone(),
                })
                .collect(),
        ),
        leaf => leaf.clone(),
    }
}

/// Replaces the parameters of a custom predicate by its arguments.
///
/// A parameter may be written as an element name, a variable or a
/// proposition in the body. Binders of the body that would capture a free
/// variable of an argument are renamed. A text argument can only replace
/// a parameter passed on as a call argument.
pub struct Substitution<'a> {
    map: HashMap<&'a str, &'a Arg>,
    avoid: BTreeSet<String>,
    fresh: FreshNames,
}

impl<'a> Substitution<'a> {
    pub fn new(params: &'a [String], args: &'a [Arg], body: &Formula) -> Self {
        let mut avoid = BTreeSet::new();
        let mut fresh = FreshNames::avoiding(body);
        for a in args {
            if let Arg::Formula(f) = a {
                avoid.extend(free_vars(f));
                fresh.reserve_all(f);
            }
        }
        Substitution { map: params.iter().map(String::as_str).zip(args).collect(), avoid, fresh }
    }

    fn lookup(&self, name: &str) -> Option<&'a Arg> {
        self.map.get(name).copied()
    }

    /// Applies the substitution; `Err` carries a parameter bound to text
    /// but used as a formula.
    pub fn apply(&mut self, f: &Formula, shadowed: &[String]) -> Result<Formula, String> {
        let replace = |arg: &Arg, name: &str| match arg {
            Arg::Formula(g) => Ok(g.clone()),
            Arg::Text(_) => Err(name.to_string()),
        };
        Ok(match f {
            Formula::Element(n) | Formula::Prop(n) => match self.lookup(n) {
                Some(a) => replace(a, n)?,
                None => f.clone(),
            },
            Formula::Var(v) if !shadowed.contains(v) => match self.lookup(v) {
                Some(a) => replace(a, v)?,
                None => f.clone(),
            },
            Formula::Not(a) => Formula::not(self.apply(a, shadowed)?),
            Formula::Modal(p, a) => Formula::modal(*p, self.apply(a, shadowed)?),
            Formula::And(a, b) => Formula::and(self.apply(a, shadowed)?, self.apply(b, shadowed)?),
            Formula::Or(a, b) => Formula::or(self.apply(a, shadowed)?, self.apply(b, shadowed)?),
            Formula::Implies(a, b) => Formula::implies(self.apply(a, shadowed)?, self.apply(b, shadowed)?),
            Formula::Equiv(a, b) => Formula::equiv(self.apply(a, shadowed)?, self.apply(b, shadowed)?),
            Formula::Let(bindings, body) => {
                let mut bindings = bindings.clone();
                let mut body = (**body).clone();
                for i in 0..bindings.len() {
                    let old = bindings[i].0.clone();
                    if self.avoid.contains(&old) {
                        let new = self.fresh.fresh(&old);
                        for (v, d) in bindings.iter_mut() {
                            if *v == old {
                                *v = new.clone();
                            }
                            *d = rename(d, &old, &new);
                        }
                        body = rename(&body, &old, &new);
                    }
                }
                let mut inner = shadowed.to_vec();
                inner.extend(bindings.iter().map(|(v, _)| v.clone()));
                let mut out = Vec::with_capacity(bindings.len());
                for (v, d) in &bindings {
                    out.push((v.clone(), self.apply(d, &inner)?));
                }
                Formula::let_in(out, self.apply(&body, &inner)?)
            }
            Formula::Call(name, args) => {
                let mut out = Vec::with_capacity(args.len());
                for a in args {
                    out.push(match a {
                        Arg::Formula(Formula::Element(n)) => match self.lookup(n) {
                            Some(r) => r.clone(),
                            None => a.clone(),
                        },
                        Arg::Formula(g) => Arg::Formula(self.apply(g, shadowed)?),
                        t => t.clone(),
                    });
                }
                Formula::Call(name.clone(), out)
            }
            leaf => leaf.clone(),
        })
    }
}

use std::collections::HashMap;

use super::{FreshNames, Formula};

/// Rewrites a formula into negation normal form.
///
/// Negation is pushed down to atoms and to `<p>T`. Each bound variable gets
/// a dual variable holding the negation of its definition, so recursion
/// never passes under a negation. `=>` and `<=>` are expanded.
pub fn normalize(f: &Formula) -> Formula {
    let mut ctx = Normalizer { fresh: FreshNames::avoiding(f), scopes: Vec::new() };
    ctx.nnf(f, false)
}

struct Normalizer {
    fresh: FreshNames,
    // Innermost scope last: variable name to (positive, negative) names.
    scopes: Vec<HashMap<String, (String, String)>>,
}

impl Normalizer {
    fn lookup(&self, name: &str) -> Option<&(String, String)> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn nnf(&mut self, f: &Formula, neg: bool) -> Formula {
        match f {
            Formula::True => {
                if neg {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            Formula::False => {
                if neg {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::Element(_)
            | Formula::Prop(_)
            | Formula::Start
            | Formula::Attribute(_)
            | Formula::AttrComplement(_)
            | Formula::Call(..) => {
                if neg {
                    Formula::not(f.clone())
                } else {
                    f.clone()
                }
            }
            Formula::Var(name) => match self.lookup(name) {
                Some((pos, negated)) => Formula::var(if neg { negated } else { pos }),
                // Free variables have no dual; keep the negation explicit.
                None if neg => Formula::not(f.clone()),
                None => f.clone(),
            },
            Formula::Not(a) => self.nnf(a, !neg),
            Formula::And(a, b) => {
                let (a, b) = (self.nnf(a, neg), self.nnf(b, neg));
                if neg {
                    Formula::or(a, b)
                } else {
                    Formula::and(a, b)
                }
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.nnf(a, neg), self.nnf(b, neg));
                if neg {
                    Formula::and(a, b)
                } else {
                    Formula::or(a, b)
                }
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.nnf(a, !neg), self.nnf(b, neg));
                if neg {
                    // ~(a => b) = a & ~b
                    Formula::and(a, b)
                } else {
                    Formula::or(a, b)
                }
            }
            Formula::Equiv(a, b) => {
                let (pa, na) = (self.nnf(a, false), self.nnf(a, true));
                let (pb, nb) = (self.nnf(b, false), self.nnf(b, true));
                if neg {
                    Formula::or(Formula::and(pa, nb), Formula::and(na, pb))
                } else {
                    Formula::or(Formula::and(pa, pb), Formula::and(na, nb))
                }
            }
            Formula::Modal(p, a) => {
                if neg {
                    let top = Formula::modal(*p, Formula::True);
                    match a.as_ref() {
                        Formula::True => Formula::not(top),
                        _ => Formula::or(Formula::not(top), Formula::modal(*p, self.nnf(a, true))),
                    }
                } else {
                    Formula::modal(*p, self.nnf(a, false))
                }
            }
            Formula::Let(bindings, body) => {
                let mut scope = HashMap::new();
                for (name, _) in bindings {
                    let negated = self.fresh.fresh(&format!("{name}_n"));
                    scope.insert(name.clone(), (name.clone(), negated));
                }
                self.scopes.push(scope);
                let mut out = Vec::with_capacity(bindings.len() * 2);
                for (name, def) in bindings {
                    let negated = self.scopes.last().unwrap()[name].1.clone();
                    out.push((name.clone(), self.nnf(def, false)));
                    out.push((negated, self.nnf(def, true)));
                }
                let body = self.nnf(body, neg);
                self.scopes.pop();
                prune_bindings(out, body)
            }
        }
    }
}

/// Drops bindings that the body cannot reach.
fn prune_bindings(bindings: Vec<(String, Formula)>, body: Formula) -> Formula {
    let index: HashMap<&str, usize> =
        bindings.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let mut reached = vec![false; bindings.len()];
    let mut stack = Vec::new();
    let push_refs = |f: &Formula, stack: &mut Vec<usize>| {
        f.walk(&mut |g| {
            if let Formula::Var(n) = g {
                if let Some(&i) = index.get(n.as_str()) {
                    stack.push(i);
                }
            }
        });
    };
    push_refs(&body, &mut stack);
    while let Some(i) = stack.pop() {
        if !reached[i] {
            reached[i] = true;
            push_refs(&bindings[i].1, &mut stack);
        }
    }
    let kept: Vec<_> = bindings
        .into_iter()
        .zip(reached)
        .filter_map(|(b, keep)| keep.then_some(b))
        .collect();
    if kept.is_empty() {
        body
    } else {
        Formula::let_in(kept, body)
    }
}

/// True when negation only occurs in front of atoms or `<p>T`, and no
/// implication or equivalence remains.
pub fn is_nnf(f: &Formula) -> bool {
    let mut ok = true;
    f.walk(&mut |g| match g {
        Formula::Not(a) => {
            let atomic = matches!(
                a.as_ref(),
                Formula::Element(_)
                    | Formula::Prop(_)
                    | Formula::Start
                    | Formula::Attribute(_)
                    | Formula::AttrComplement(_)
            ) || matches!(a.as_ref(), Formula::Modal(_, t) if **t == Formula::True);
            ok &= atomic;
        }
        Formula::Implies(..) | Formula::Equiv(..) => ok = false,
        _ => {}
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    #[test]
    fn negated_modality_splits() {
        let f = parse_formula("~<1>a").unwrap();
        assert_eq!(normalize(&f), parse_formula("~<1>T | <1>~a").unwrap());
    }

    #[test]
    fn negated_variable_uses_dual() {
        let f = parse_formula("~(let $X = a | <1>$X in $X)").unwrap();
        let n = normalize(&f);
        assert!(is_nnf(&n));
        assert_eq!(n, parse_formula("let $X_n1 = ~a & (~<1>T | <1>$X_n1) in $X_n1").unwrap());
    }

    #[test]
    fn equivalence_expands() {
        let f = parse_formula("a <=> b").unwrap();
        assert_eq!(normalize(&f), parse_formula("a & b | ~a & ~b").unwrap());
        let g = parse_formula("~(a => b)").unwrap();
        assert_eq!(normalize(&g), parse_formula("a & ~b").unwrap());
    }
}

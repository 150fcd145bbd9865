//! Rewriting of `position()`, `last()` and `count()` into the core fragment.
//!
//! Supported shapes:
//!
//! - `nt[position()=1]` becomes `nt[not(preceding-sibling::nt)]`
//! - `nt[position()=last()]` becomes `nt[not(following-sibling::nt)]`
//! - `nt[position()=k]` becomes
//!   `nt[preceding-sibling::nt^(k-1) and not(preceding-sibling::nt^k)]`
//! - `preceding-sibling::nt[position()=last() and q]` becomes
//!   `preceding-sibling::nt[not(preceding-sibling::nt) and q]`
//! - `count(p)=0` becomes `not(p)` and `count(p)>0` becomes `p`
//! - `count(nt)>k` becomes `nt/following-sibling::nt^k`
//!
//! `nt` is a child step in the first three rows. A positional test must be
//! the first qualifier of its step, alone or as the left conjunct of an
//! `and`.

use super::{Axis, NodeTest, Position, Qualifier, Query, Step, XPathError};

/// Removes all sugar from `q`. The result has no position or count tests.
pub fn desugar(q: &Query) -> Result<Query, XPathError> {
    Ok(match q {
        Query::Path { absolute, steps } => Query::Path { absolute: *absolute, steps: steps_(steps)? },
        Query::Union(a, b) => Query::Union(Box::new(desugar(a)?), Box::new(desugar(b)?)),
        Query::Intersection(a, b) => Query::Intersection(Box::new(desugar(a)?), Box::new(desugar(b)?)),
    })
}

fn steps_(steps: &[Step]) -> Result<Vec<Step>, XPathError> {
    steps.iter().map(step).collect()
}

fn step(s: &Step) -> Result<Step, XPathError> {
    let mut out = Step::new(s.axis, s.test.clone());
    for (i, q) in s.qualifiers.iter().enumerate() {
        let q = match (i, split_position(q)) {
            (0, Some((p, rest))) => {
                let head = position(s, p)?;
                match rest {
                    Some(r) => Qualifier::and(head, qualifier(r)?),
                    None => head,
                }
            }
            (_, Some((p, _))) => {
                return Err(XPathError::UnsupportedSugar(format!(
                    "{} in a qualifier other than the first of {}::{}",
                    Qualifier::Position(p.clone()),
                    s.axis.name(),
                    s.test
                )))
            }
            (_, None) => qualifier(q)?,
        };
        out.qualifiers.push(q);
    }
    Ok(out)
}

/// Splits `position()=... [and rest]`.
fn split_position(q: &Qualifier) -> Option<(&Position, Option<&Qualifier>)> {
    match q {
        Qualifier::Position(p) => Some((p, None)),
        Qualifier::And(a, b) => match a.as_ref() {
            Qualifier::Position(p) => Some((p, Some(b))),
            _ => None,
        },
        _ => None,
    }
}

fn sibling_chain(axis: Axis, test: &NodeTest, k: usize) -> Vec<Step> {
    vec![Step::new(axis, test.clone()); k]
}

fn position(s: &Step, p: &Position) -> Result<Qualifier, XPathError> {
    let not = |steps: Vec<Step>| Qualifier::not(Qualifier::Path(steps));
    match (s.axis, p) {
        (Axis::Child, Position::Index(1)) => Ok(not(sibling_chain(Axis::PrecedingSibling, &s.test, 1))),
        (Axis::Child, Position::Index(k)) => Ok(Qualifier::and(
            Qualifier::Path(sibling_chain(Axis::PrecedingSibling, &s.test, k - 1)),
            not(sibling_chain(Axis::PrecedingSibling, &s.test, *k)),
        )),
        (Axis::Child, Position::Last) => Ok(not(sibling_chain(Axis::FollowingSibling, &s.test, 1))),
        (Axis::PrecedingSibling, Position::Last) => Ok(not(sibling_chain(Axis::PrecedingSibling, &s.test, 1))),
        _ => Err(XPathError::UnsupportedSugar(format!(
            "{} on axis {}",
            Qualifier::Position(p.clone()),
            s.axis.name()
        ))),
    }
}

fn qualifier(q: &Qualifier) -> Result<Qualifier, XPathError> {
    Ok(match q {
        Qualifier::And(a, b) => Qualifier::and(qualifier(a)?, qualifier(b)?),
        Qualifier::Or(a, b) => Qualifier::or(qualifier(a)?, qualifier(b)?),
        Qualifier::Not(a) => Qualifier::not(qualifier(a)?),
        Qualifier::Path(steps) => Qualifier::Path(steps_(steps)?),
        Qualifier::AttrPath(steps, a) => Qualifier::AttrPath(steps_(steps)?, a.clone()),
        Qualifier::Attr(a) => Qualifier::Attr(a.clone()),
        Qualifier::Position(p) => {
            return Err(XPathError::UnsupportedSugar(format!("{} nested in a qualifier", Qualifier::Position(p.clone()))))
        }
        Qualifier::CountZero(steps) => Qualifier::not(Qualifier::Path(steps_(steps)?)),
        Qualifier::CountAbove(steps, 0) => Qualifier::Path(steps_(steps)?),
        Qualifier::CountAbove(steps, k) => match steps.as_slice() {
            [s] if s.axis == Axis::Child && s.test != NodeTest::Node => {
                let s = step(s)?;
                let mut sibling = s.clone();
                sibling.axis = Axis::FollowingSibling;
                let mut path = vec![s];
                path.extend(std::iter::repeat(sibling).take(*k));
                Qualifier::Path(path)
            }
            _ => return Err(XPathError::UnsupportedSugar(format!("{q} on a path other than a child step"))),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xpath::parse_xpath;

    fn rewrite(src: &str) -> String {
        desugar(&parse_xpath(src).unwrap()).unwrap().to_string()
    }

    #[test]
    fn first_and_last() {
        assert_eq!(rewrite("a[position()=1]"), "child::a[not(preceding-sibling::a)]");
        assert_eq!(rewrite("a[1]"), "child::a[not(preceding-sibling::a)]");
        assert_eq!(rewrite("*[last()]"), "child::*[not(following-sibling::*)]");
    }

    #[test]
    fn kth_position_is_exact() {
        assert_eq!(
            rewrite("a[position()=3]"),
            "child::a[preceding-sibling::a/preceding-sibling::a and not(preceding-sibling::a/preceding-sibling::a/preceding-sibling::a)]"
        );
    }

    #[test]
    fn counts() {
        assert_eq!(rewrite("a[count(b/c)=0]"), "child::a[not(child::b/child::c)]");
        assert_eq!(rewrite("a[count(b)>0]"), "child::a[child::b]");
        assert_eq!(rewrite("a[count(b)>2]"), "child::a[child::b/following-sibling::b/following-sibling::b]");
    }

    #[test]
    fn last_preceding_sibling_with_qualifier() {
        assert_eq!(
            rewrite("sin[preceding-sibling::*[position()=last() and (self::compose or self::inverse)]]"),
            "child::sin[preceding-sibling::*[not(preceding-sibling::*) and (self::compose or self::inverse)]]"
        );
    }

    #[test]
    fn unsupported_shapes() {
        for src in ["a[b][1]", "descendant::a[1]", "a[not(last())]", "a[count(b/c)>1]", "following-sibling::a[last()]"] {
            assert!(
                matches!(desugar(&parse_xpath(src).unwrap()), Err(XPathError::UnsupportedSugar(_))),
                "{src}"
            );
        }
    }
}

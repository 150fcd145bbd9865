//! Translation of queries into the logic.
//!
//! Formulas hold at element nodes of the binary encoding. Documents also
//! have a document node above the top-level elements; it is not a node of
//! the binary tree, so whether the current node set contains it is tracked
//! as a separate closed formula.

use crate::logic::{Formula, FreshNames, Program};

use super::{desugar, Axis, NodeTest, Qualifier, Query, Step, XPathError};

/// Node sets during selection: elements satisfying `elem`, plus the
/// document node when the closed formula `doc` holds.
struct Selected {
    elem: Formula,
    doc: Formula,
}

struct Compiler {
    fresh: FreshNames,
}

fn and(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, x) | (x, Formula::True) => x,
        (Formula::False, _) | (_, Formula::False) => Formula::False,
        (a, b) => Formula::and(a, b),
    }
}

fn or(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, x) | (x, Formula::False) => x,
        (Formula::True, _) | (_, Formula::True) => Formula::True,
        (a, b) => Formula::or(a, b),
    }
}

fn not(a: Formula) -> Formula {
    match a {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(x) => *x,
        a => Formula::not(a),
    }
}

fn dia(p: Program, f: Formula) -> Formula {
    match f {
        Formula::False => Formula::False,
        f => Formula::modal(p, f),
    }
}

fn var(name: &str) -> Formula {
    Formula::var(name)
}

/// Holds at nodes without a parent element: the top-level siblings.
pub fn is_top_level() -> Formula {
    Compiler { fresh: FreshNames::new() }.top_level()
}

/// Holds at every node iff some node of the tree satisfies `f`.
pub fn somewhere(f: Formula) -> Formula {
    Compiler { fresh: FreshNames::avoiding(&f) }.somewhere(f)
}

/// Holds at `n` iff some node in `axis` of `n` satisfies `f`. Only element
/// nodes are considered.
pub fn axis_formula(axis: Axis, f: Formula) -> Formula {
    Compiler { fresh: FreshNames::avoiding(&f) }.axis(axis, f)
}

/// Holds at the nodes selected by `q` from the nodes satisfying `ctx`.
/// Absolute queries start at the document node, provided some node
/// satisfies `ctx`.
pub fn compile_select(q: &Query, ctx: &Formula) -> Result<Formula, XPathError> {
    let q = desugar(q)?;
    let mut c = Compiler { fresh: FreshNames::avoiding(ctx) };
    Ok(c.select(&q, ctx)?.elem)
}

/// Holds at the nodes satisfying `ctx` from which `q` selects some node.
pub fn compile_exists(q: &Query, ctx: &Formula) -> Result<Formula, XPathError> {
    let q = desugar(q)?;
    let mut c = Compiler { fresh: FreshNames::avoiding(ctx) };
    let (elem, _) = c.exists_query(&q)?;
    Ok(and(ctx.clone(), elem))
}

impl Compiler {
    fn name(&mut self, base: &str) -> String {
        self.fresh.fresh(base)
    }

    fn top_level(&mut self) -> Formula {
        let x = self.name("t");
        not(Formula::let_in(
            vec![(x.clone(), or(dia(Program::Up1, Formula::True), dia(Program::Up2, var(&x))))],
            var(&x),
        ))
    }

    fn somewhere(&mut self, f: Formula) -> Formula {
        match f {
            Formula::True | Formula::False => f,
            f => {
                let (u, d) = (self.name("u"), self.name("d"));
                Formula::let_in(
                    vec![
                        (u.clone(), or(var(&d), or(dia(Program::Up1, var(&u)), dia(Program::Up2, var(&u))))),
                        (d.clone(), or(f, or(dia(Program::Down1, var(&d)), dia(Program::Down2, var(&d))))),
                    ],
                    var(&u),
                )
            }
        }
    }

    /// `<p> let x = f | <q>x in x`: some node reached by one `p` step
    /// followed by any number of `q` steps satisfies `f`.
    fn chain(&mut self, p: Option<Program>, q: Program, f: Formula) -> Formula {
        let x = self.name("x");
        let body = Formula::let_in(vec![(x.clone(), or(f, dia(q, var(&x))))], var(&x));
        match p {
            Some(p) => dia(p, body),
            None => body,
        }
    }

    fn axis(&mut self, axis: Axis, f: Formula) -> Formula {
        use Program::*;
        if f == Formula::False {
            return f;
        }
        match axis {
            Axis::SelfAxis => f,
            Axis::Child => self.chain(Some(Down1), Down2, f),
            Axis::FollowingSibling => self.chain(Some(Down2), Down2, f),
            Axis::PrecedingSibling => self.chain(Some(Up2), Up2, f),
            Axis::Parent => {
                let x = self.name("x");
                Formula::let_in(vec![(x.clone(), or(dia(Up1, f), dia(Up2, var(&x))))], var(&x))
            }
            Axis::Descendant => {
                let x = self.name("x");
                dia(
                    Down1,
                    Formula::let_in(
                        vec![(x.clone(), or(f, or(dia(Down1, var(&x)), dia(Down2, var(&x)))))],
                        var(&x),
                    ),
                )
            }
            Axis::DescendantOrSelf => {
                let (x, y) = (self.name("x"), self.name("y"));
                Formula::let_in(
                    vec![
                        (x.clone(), or(f, dia(Down1, var(&y)))),
                        (y.clone(), or(var(&x), dia(Down2, var(&y)))),
                    ],
                    var(&x),
                )
            }
            Axis::Ancestor => {
                let x = self.name("x");
                Formula::let_in(vec![(x.clone(), or(dia(Up1, or(f, var(&x))), dia(Up2, var(&x))))], var(&x))
            }
            Axis::AncestorOrSelf => {
                let (x, z) = (self.name("x"), self.name("z"));
                Formula::let_in(
                    vec![
                        (x.clone(), or(f, var(&z))),
                        (z.clone(), or(dia(Up1, var(&x)), dia(Up2, var(&z)))),
                    ],
                    var(&x),
                )
            }
            Axis::Following => {
                let (fo, p, d) = (self.name("f"), self.name("p"), self.name("d"));
                Formula::let_in(
                    vec![
                        (fo.clone(), or(dia(Down2, var(&d)), var(&p))),
                        (p.clone(), or(dia(Up1, var(&fo)), dia(Up2, var(&p)))),
                        (d.clone(), or(f, or(dia(Down1, var(&d)), dia(Down2, var(&d))))),
                    ],
                    var(&fo),
                )
            }
            Axis::Preceding => {
                let (g, p, s, m, d) =
                    (self.name("g"), self.name("p"), self.name("s"), self.name("m"), self.name("d"));
                Formula::let_in(
                    vec![
                        (g.clone(), or(dia(Up2, var(&s)), var(&p))),
                        (p.clone(), or(dia(Up1, var(&g)), dia(Up2, var(&p)))),
                        (s.clone(), or(var(&m), dia(Up2, var(&s)))),
                        (m.clone(), or(f, dia(Down1, var(&d)))),
                        (d.clone(), or(var(&m), dia(Down2, var(&d)))),
                    ],
                    var(&g),
                )
            }
        }
    }

    /// Whether the document node lies in `axis` of an element satisfying
    /// `from`, as a closed formula.
    fn document_from_elements(&mut self, axis: Axis, from: Formula) -> Formula {
        match axis {
            Axis::Parent => {
                let top = self.top_level();
                self.somewhere(and(from, top))
            }
            Axis::Ancestor | Axis::AncestorOrSelf => self.somewhere(from),
            _ => Formula::False,
        }
    }

    /// Whether the document node lies in `axis` of an element where it
    /// holds, as a formula at that element.
    fn document_above(&mut self, axis: Axis) -> Formula {
        match axis {
            Axis::Parent => self.top_level(),
            Axis::Ancestor | Axis::AncestorOrSelf => Formula::True,
            _ => Formula::False,
        }
    }

    /// Elements in `axis` of the document node satisfying `f`, at those
    /// elements.
    fn elements_below_document(&mut self, axis: Axis, f: Formula) -> Formula {
        match axis {
            Axis::Child => and(self.top_level(), f),
            Axis::Descendant | Axis::DescendantOrSelf => f,
            _ => Formula::False,
        }
    }

    fn document_in_own_axis(axis: Axis) -> bool {
        matches!(axis, Axis::SelfAxis | Axis::DescendantOrSelf | Axis::AncestorOrSelf)
    }

    fn test(t: &NodeTest) -> Formula {
        match t {
            NodeTest::Name(n) => Formula::element(n.clone()),
            NodeTest::Star | NodeTest::Node => Formula::True,
        }
    }

    fn select(&mut self, q: &Query, ctx: &Formula) -> Result<Selected, XPathError> {
        match q {
            Query::Path { absolute, steps } => {
                let start = if *absolute {
                    let doc = self.somewhere(ctx.clone());
                    Selected { elem: Formula::False, doc }
                } else {
                    Selected { elem: ctx.clone(), doc: Formula::False }
                };
                steps.iter().try_fold(start, |s, step| self.select_step(s, step))
            }
            Query::Union(a, b) => {
                let (a, b) = (self.select(a, ctx)?, self.select(b, ctx)?);
                Ok(Selected { elem: or(a.elem, b.elem), doc: or(a.doc, b.doc) })
            }
            Query::Intersection(a, b) => {
                let (a, b) = (self.select(a, ctx)?, self.select(b, ctx)?);
                Ok(Selected { elem: and(a.elem, b.elem), doc: and(a.doc, b.doc) })
            }
        }
    }

    fn select_step(&mut self, from: Selected, step: &Step) -> Result<Selected, XPathError> {
        let (quals, quals_doc) = self.qualifiers(&step.qualifiers)?;
        let reached = self.axis(step.axis.converse(), from.elem.clone());
        let below = self.elements_below_document(step.axis, Formula::True);
        let elem = and(
            and(Self::test(&step.test), quals),
            or(reached, and(below, from.doc.clone())),
        );
        let doc = if step.test == NodeTest::Node {
            let own = if Self::document_in_own_axis(step.axis) { from.doc } else { Formula::False };
            let above = self.document_from_elements(step.axis, from.elem);
            and(quals_doc, or(own, above))
        } else {
            Formula::False
        };
        Ok(Selected { elem, doc })
    }

    /// Conjunction of qualifiers, at an element and at the document node.
    fn qualifiers(&mut self, qs: &[Qualifier]) -> Result<(Formula, Formula), XPathError> {
        let mut elem = Formula::True;
        let mut doc = Formula::True;
        for q in qs {
            let (e, d) = self.qualifier(q)?;
            elem = and(elem, e);
            doc = and(doc, d);
        }
        Ok((elem, doc))
    }

    fn attribute(a: &Option<String>) -> Formula {
        match a {
            Some(a) => Formula::attribute(a.clone()),
            None => not(Formula::AttrComplement(Vec::new())),
        }
    }

    fn qualifier(&mut self, q: &Qualifier) -> Result<(Formula, Formula), XPathError> {
        Ok(match q {
            Qualifier::And(a, b) => {
                let (a, b) = (self.qualifier(a)?, self.qualifier(b)?);
                (and(a.0, b.0), and(a.1, b.1))
            }
            Qualifier::Or(a, b) => {
                let (a, b) = (self.qualifier(a)?, self.qualifier(b)?);
                (or(a.0, b.0), or(a.1, b.1))
            }
            Qualifier::Not(a) => {
                let (e, d) = self.qualifier(a)?;
                (not(e), not(d))
            }
            Qualifier::Path(steps) => self.exists_path(steps, Formula::True, Formula::True)?,
            Qualifier::AttrPath(steps, a) => self.exists_path(steps, Self::attribute(a), Formula::False)?,
            Qualifier::Attr(a) => (Self::attribute(a), Formula::False),
            Qualifier::Position(_) | Qualifier::CountZero(_) | Qualifier::CountAbove(..) => {
                return Err(XPathError::Unsupported(format!("{q} remains after rewriting")))
            }
        })
    }

    /// Existence of `q` from a node: a formula at elements and a closed
    /// formula for the document node.
    fn exists_query(&mut self, q: &Query) -> Result<(Formula, Formula), XPathError> {
        match q {
            Query::Path { absolute: false, steps } => self.exists_path(steps, Formula::True, Formula::True),
            Query::Path { absolute: true, steps } => {
                let (_, doc) = self.exists_path(steps, Formula::True, Formula::True)?;
                Ok((doc.clone(), doc))
            }
            Query::Union(a, b) => {
                let (a, b) = (self.exists_query(a)?, self.exists_query(b)?);
                Ok((or(a.0, b.0), or(a.1, b.1)))
            }
            Query::Intersection(..) => {
                Err(XPathError::Unsupported(format!("existence of an intersection ({q})")))
            }
        }
    }

    /// Whether `steps` lead to an element satisfying `last` or to the
    /// document node when `last_doc` holds.
    fn exists_path(
        &mut self,
        steps: &[Step],
        last: Formula,
        last_doc: Formula,
    ) -> Result<(Formula, Formula), XPathError> {
        let mut elem = last;
        let mut doc = last_doc;
        for step in steps.iter().rev() {
            let (quals, quals_doc) = self.qualifiers(&step.qualifiers)?;
            let target = and(and(Self::test(&step.test), quals), elem);
            let target_doc = if step.test == NodeTest::Node { and(quals_doc, doc) } else { Formula::False };
            let above = self.document_above(step.axis);
            let via_axis = self.axis(step.axis, target.clone());
            let new_elem = or(via_axis, and(above, target_doc.clone()));
            let below = self.elements_below_document(step.axis, target);
            let below = self.somewhere(below);
            let own = if Self::document_in_own_axis(step.axis) { target_doc } else { Formula::False };
            doc = or(below, own);
            elem = new_elem;
        }
        Ok((elem, doc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_cycle_free, parse_formula};
    use crate::xpath::parse_xpath;

    fn select(src: &str) -> Formula {
        compile_select(&parse_xpath(src).unwrap(), &Formula::Start).unwrap()
    }

    #[test]
    fn qualified_child_step() {
        let f = select("child::r[child::w/@att]");
        let expected = parse_formula("r & (<1> let $x1 = w & <att>T | <2>$x1 in $x1) & (let $x5 = <-1># | <-2>$x5 in $x5)")
            .unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn self_step_is_the_context() {
        assert_eq!(select("self::*"), Formula::Start);
    }

    #[test]
    fn compiled_formulas_are_cycle_free() {
        for src in ["//a[b]/following::c", "a/../preceding::*[@x]", "/descendant-or-self::node()/a | b ∩ c", ".//a[ancestor::node()/b]"] {
            check_cycle_free(&select(src)).unwrap();
        }
    }

    #[test]
    fn intersection_existence_is_rejected() {
        let q = parse_xpath("a ∩ b").unwrap();
        assert!(matches!(compile_exists(&q, &Formula::True), Err(XPathError::Unsupported(_))));
    }
}

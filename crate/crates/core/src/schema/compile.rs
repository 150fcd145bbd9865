//! Translation of binary tree types and attribute expressions into the logic.

use crate::logic::{Formula, Program};

use super::{AttrExpr, AttrItem, BinaryExpr, BinaryTreeType};

/// Options of the type translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TypeCompiler {
    /// Compile attribute expressions; when false they become `T`.
    pub attributes: bool,
}

impl TypeCompiler {
    pub fn new(attributes: bool) -> Self {
        TypeCompiler { attributes }
    }

    /// Translates `b` with `tag` conjoined to every element definition and
    /// `frontier` disjoined to it.
    pub fn compile(&self, b: &BinaryTreeType, tag: &Formula, frontier: &Formula) -> Formula {
        let bindings = (0..b.bindings.len())
            .filter(|&x| !matches!(b.bindings[x], BinaryExpr::EmptyTree | BinaryExpr::EmptySet))
            .map(|x| (BinaryTreeType::var_name(x), self.expr(b, &b.bindings[x], tag, frontier)))
            .collect::<Vec<_>>();
        let body = match b.bindings[b.start] {
            BinaryExpr::EmptyTree | BinaryExpr::EmptySet => Formula::False,
            _ => Formula::var(BinaryTreeType::var_name(b.start)),
        };
        if bindings.is_empty() {
            body
        } else {
            Formula::let_in(bindings, body)
        }
    }

    fn expr(&self, b: &BinaryTreeType, e: &BinaryExpr, tag: &Formula, frontier: &Formula) -> Formula {
        match e {
            BinaryExpr::EmptySet | BinaryExpr::EmptyTree => Formula::False,
            BinaryExpr::Or(l, r) => {
                or_opt(self.expr(b, l, tag, frontier), self.expr(b, r, tag, frontier))
            }
            BinaryExpr::Element(l, a, x1, x2) => {
                let mut parts = vec![Formula::element(l.clone())];
                if *tag != Formula::True {
                    parts.push(tag.clone());
                }
                if self.attributes {
                    parts.push(compile_attr(a));
                }
                parts.push(successor(b, *x1, Program::Down1));
                parts.push(successor(b, *x2, Program::Down2));
                let node = Formula::and_all(parts);
                if *frontier == Formula::False {
                    node
                } else {
                    Formula::or(node, frontier.clone())
                }
            }
        }
    }
}

fn or_opt(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, x) | (x, Formula::False) => x,
        (a, b) => Formula::or(a, b),
    }
}

/// The frontier condition on successor `p` typed by variable `x`.
fn successor(b: &BinaryTreeType, x: usize, p: Program) -> Formula {
    let no_successor = Formula::not(Formula::modal(p, Formula::True));
    match b.bindings[x] {
        BinaryExpr::EmptyTree => no_successor,
        // `<p>F` is unsatisfiable; no binding is emitted for empty sets.
        BinaryExpr::EmptySet => Formula::False,
        _ => {
            let step = Formula::modal(p, Formula::var(BinaryTreeType::var_name(x)));
            if b.nullable(x) {
                Formula::or(no_successor, step)
            } else {
                step
            }
        }
    }
}

/// Translates a binary tree type with tag `tag` and frontier `frontier`.
pub fn compile_type(
    b: &BinaryTreeType,
    tag: &Formula,
    frontier: &Formula,
    attributes: bool,
) -> Formula {
    TypeCompiler::new(attributes).compile(b, tag, frontier)
}

/// Translates an attribute expression. Attributes outside an alternative
/// are excluded through an attribute complement placeholder.
pub fn compile_attr(a: &AttrExpr) -> Formula {
    match a {
        AttrExpr::Empty => Formula::AttrComplement(Vec::new()),
        AttrExpr::Choice(items, rest) => {
            let names: Vec<String> = items.iter().map(|i| i.name().to_string()).collect();
            let alternative = Formula::and_all(
                items.iter().map(compile_item).chain([Formula::AttrComplement(names)]),
            );
            match **rest {
                AttrExpr::Empty => alternative,
                _ => Formula::or(alternative, compile_attr(rest)),
            }
        }
    }
}

fn compile_item(item: &AttrItem) -> Formula {
    match item {
        AttrItem::Required(l) => Formula::attribute(l.clone()),
        AttrItem::Optional(l) => {
            Formula::or(Formula::attribute(l.clone()), Formula::not(Formula::attribute(l.clone())))
        }
        AttrItem::Prohibited(l) => Formula::not(Formula::attribute(l.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::schema::{binarize, parse_internal};

    #[test]
    fn required_attribute() {
        let a = AttrExpr::list(vec![AttrItem::Required("l".into())]);
        let f = compile_attr(&a).resolve_attr_complements(&["l".to_string()]);
        assert_eq!(f, parse_formula("<l>T & T").unwrap());
    }

    #[test]
    fn empty_attribute_expression_denies_everything() {
        let f = compile_attr(&AttrExpr::Empty)
            .resolve_attr_complements(&["p".to_string(), "q".to_string()]);
        assert_eq!(f, parse_formula("~<p>T & ~<q>T").unwrap());
    }

    #[test]
    fn leaf_successors_are_absent() {
        let b = binarize(&parse_internal("a{}").unwrap());
        let f = compile_type(&b, &Formula::True, &Formula::False, false);
        assert_eq!(f, parse_formula("let $x0 = a & ~<1>T & ~<2>T in $x0").unwrap());
    }
}

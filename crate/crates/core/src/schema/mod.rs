//! Regular tree types: the internal grammar syntax, DTDs, binarization
//! and translation into the logic.

mod binarize;
mod compile;
mod dtd;
mod internal;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use binarize::{binarize, BinaryExpr, BinaryTreeType};
pub use compile::{compile_attr, compile_type, TypeCompiler};
pub use dtd::{parse_dtd, parse_dtd_file, AttributeDecl, ContentModel, Dtd, Particle};
pub use internal::parse_internal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("variable `{0}` recurses through a non-tail position of a sequence")]
    NonTailRecursion(String),
    #[error("unbound type variable `{0}`")]
    UnboundVariable(String),
    #[error("unsupported DTD feature: {0}")]
    UnsupportedDtdFeature(String),
    #[error("root element `{0}` is not declared")]
    UnknownRoot(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Constraint on one attribute of an element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttrItem {
    Required(String),
    Optional(String),
    Prohibited(String),
}

impl AttrItem {
    pub fn name(&self) -> &str {
        match self {
            AttrItem::Required(n) | AttrItem::Optional(n) | AttrItem::Prohibited(n) => n,
        }
    }
}

/// Attribute expression: a list of alternatives, each a list of item
/// constraints. An element matches an alternative when it satisfies every
/// item and carries no attribute outside the list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrExpr {
    /// No attribute at all.
    Empty,
    Choice(Vec<AttrItem>, Box<AttrExpr>),
}

impl AttrExpr {
    /// A single alternative.
    pub fn list(items: Vec<AttrItem>) -> AttrExpr {
        AttrExpr::Choice(items, Box::new(AttrExpr::Empty))
    }

    /// Attribute names mentioned anywhere.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut cur = self;
        while let AttrExpr::Choice(items, rest) = cur {
            out.extend(items.iter().map(|i| i.name().to_string()));
            cur = rest;
        }
        out
    }

    /// Whether a set of attribute names satisfies the expression.
    pub fn accepts(&self, attrs: &BTreeSet<String>) -> bool {
        match self {
            AttrExpr::Empty => attrs.is_empty(),
            AttrExpr::Choice(items, rest) => {
                let listed = items.iter().all(|i| match i {
                    AttrItem::Required(n) => attrs.contains(n),
                    AttrItem::Prohibited(n) => !attrs.contains(n),
                    AttrItem::Optional(_) => true,
                });
                let closed = attrs.iter().all(|a| items.iter().any(|i| i.name() == a));
                (listed && closed) || (**rest != AttrExpr::Empty && rest.accepts(attrs))
            }
        }
    }
}

/// A regular tree type over hedges (sequences of trees).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeType {
    /// The empty set of hedges.
    EmptySet,
    /// The empty hedge `()`.
    EmptySeq,
    Or(Box<TreeType>, Box<TreeType>),
    Concat(Box<TreeType>, Box<TreeType>),
    Element(String, AttrExpr, Box<TreeType>),
    Var(String),
    Bind(Vec<(String, TreeType)>, Box<TreeType>),
}

impl TreeType {
    pub fn or(a: TreeType, b: TreeType) -> TreeType {
        TreeType::Or(Box::new(a), Box::new(b))
    }

    pub fn concat(a: TreeType, b: TreeType) -> TreeType {
        TreeType::Concat(Box::new(a), Box::new(b))
    }

    pub fn element(name: impl Into<String>, attrs: AttrExpr, content: TreeType) -> TreeType {
        TreeType::Element(name.into(), attrs, Box::new(content))
    }

    pub fn var(name: impl Into<String>) -> TreeType {
        TreeType::Var(name.into())
    }

    /// Element names of all element constructors.
    pub fn element_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let TreeType::Element(n, _, _) = t {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Attribute names of all element constructors.
    pub fn attribute_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let TreeType::Element(_, a, _) = t {
                out.extend(a.names());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&TreeType)) {
        f(self);
        match self {
            TreeType::Or(a, b) | TreeType::Concat(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            TreeType::Element(_, _, c) => c.visit(f),
            TreeType::Bind(bindings, body) => {
                for (_, t) in bindings {
                    t.visit(f);
                }
                body.visit(f);
            }
            _ => {}
        }
    }
}

/// Whether the type bound to `var` in the outermost binding of `t`
/// contains the empty hedge.
pub fn hedge_nullable(t: &TreeType, var: &str) -> Option<bool> {
    let TreeType::Bind(bindings, _) = t else { return None };
    let defs: HashMap<&str, &TreeType> = bindings.iter().map(|(n, t)| (n.as_str(), t)).collect();
    defs.get(var)?;
    // Least fixpoint over the bindings.
    let mut value: HashMap<&str, bool> = defs.keys().map(|&k| (k, false)).collect();
    loop {
        let mut changed = false;
        for (&name, &def) in &defs {
            if !value[name] && nullable_with(def, &value) {
                value.insert(name, true);
                changed = true;
            }
        }
        if !changed {
            return Some(value[var]);
        }
    }
}

fn nullable_with(t: &TreeType, env: &HashMap<&str, bool>) -> bool {
    match t {
        TreeType::EmptySet | TreeType::Element(..) => false,
        TreeType::EmptySeq => true,
        TreeType::Or(a, b) => nullable_with(a, env) || nullable_with(b, env),
        TreeType::Concat(a, b) => nullable_with(a, env) && nullable_with(b, env),
        TreeType::Var(v) => env.get(v.as_str()).copied().unwrap_or(false),
        TreeType::Bind(bindings, body) => {
            let mut inner = env.clone();
            for (n, _) in bindings {
                inner.insert(n.as_str(), false);
            }
            loop {
                let mut changed = false;
                for (n, def) in bindings {
                    if !inner[n.as_str()] && nullable_with(def, &inner) {
                        inner.insert(n.as_str(), true);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            nullable_with(body, &inner)
        }
    }
}

// Printing in the internal syntax. Binding strength: `|` < `,` < atoms.
fn write_type(out: &mut fmt::Formatter<'_>, t: &TreeType, min: u8) -> fmt::Result {
    let level = match t {
        TreeType::Bind(..) => 0,
        TreeType::Or(..) => 1,
        TreeType::Concat(..) => 2,
        _ => 3,
    };
    if level < min {
        write!(out, "(")?;
    }
    match t {
        TreeType::EmptySet => write!(out, "{{}}")?,
        TreeType::EmptySeq => write!(out, "()")?,
        TreeType::Or(a, b) => {
            write_type(out, a, 1)?;
            write!(out, " | ")?;
            write_type(out, b, 2)?;
        }
        TreeType::Concat(a, b) => {
            write_type(out, a, 2)?;
            write!(out, ", ")?;
            write_type(out, b, 3)?;
        }
        TreeType::Element(name, attrs, content) => {
            write!(out, "{name}")?;
            if *attrs != AttrExpr::Empty {
                write!(out, "[{attrs}]")?;
            }
            write!(out, "{{")?;
            if **content != TreeType::EmptySeq {
                write_type(out, content, 0)?;
            }
            write!(out, "}}")?;
        }
        TreeType::Var(v) => write!(out, "{v}")?,
        TreeType::Bind(bindings, body) => {
            write!(out, "let ")?;
            for (i, (n, def)) in bindings.iter().enumerate() {
                if i > 0 {
                    write!(out, "; ")?;
                }
                write!(out, "{n} = ")?;
                write_type(out, def, 1)?;
            }
            write!(out, " in ")?;
            write_type(out, body, 0)?;
        }
    }
    if level < min {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for TreeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self, 0)
    }
}

impl fmt::Display for AttrItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrItem::Required(n) => write!(f, "{n}"),
            AttrItem::Optional(n) => write!(f, "{n}?"),
            AttrItem::Prohibited(n) => write!(f, "~{n}"),
        }
    }
}

impl fmt::Display for AttrExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut cur = self;
        let mut first = true;
        while let AttrExpr::Choice(items, rest) = cur {
            if !first {
                write!(f, " | ")?;
            }
            first = false;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{item}")?;
            }
            cur = rest;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_expressions() {
        let e = AttrExpr::list(vec![
            AttrItem::Optional("b".into()),
            AttrItem::Required("c".into()),
        ]);
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert!(e.accepts(&set(&["c"])));
        assert!(e.accepts(&set(&["b", "c"])));
        assert!(!e.accepts(&set(&["b"])));
        assert!(!e.accepts(&set(&["c", "d"])));
        assert!(AttrExpr::Empty.accepts(&set(&[])));
        assert!(!AttrExpr::Empty.accepts(&set(&["a"])));
    }

    #[test]
    fn nullable_through_mutual_recursion() {
        let t = parse_internal("let x = y | (); y = x in x").unwrap();
        assert_eq!(hedge_nullable(&t, "x"), Some(true));
        assert_eq!(hedge_nullable(&t, "y"), Some(true));
        let u = parse_internal("let x = a{}, x | b{} in x").unwrap();
        assert_eq!(hedge_nullable(&u, "x"), Some(false));
    }
}

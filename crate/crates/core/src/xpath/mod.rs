//! XPath fragment: parsing, rewriting of positional sugar, translation into
//! the logic, and a direct evaluator over documents.

mod compile;
mod desugar;
mod oracle;
mod parse;

use std::fmt;

use thiserror::Error;

pub use compile::{axis_formula, compile_exists, compile_select, is_top_level, somewhere};
pub use desugar::desugar;
pub use oracle::{eval_oracle, DocumentIndex, DOCUMENT_NODE};
pub use parse::parse_xpath;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XPathError {
    #[error("position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unsupported use of {0}")]
    UnsupportedSugar(String),
    #[error("unsupported query: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    SelfAxis,
    Child,
    Parent,
    Descendant,
    Ancestor,
    DescendantOrSelf,
    AncestorOrSelf,
    FollowingSibling,
    PrecedingSibling,
    Following,
    Preceding,
}

impl Axis {
    pub const ALL: [Axis; 11] = [
        Axis::SelfAxis,
        Axis::Child,
        Axis::Parent,
        Axis::Descendant,
        Axis::Ancestor,
        Axis::DescendantOrSelf,
        Axis::AncestorOrSelf,
        Axis::FollowingSibling,
        Axis::PrecedingSibling,
        Axis::Following,
        Axis::Preceding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::SelfAxis => "self",
            Axis::Child => "child",
            Axis::Parent => "parent",
            Axis::Descendant => "descendant",
            Axis::Ancestor => "ancestor",
            Axis::DescendantOrSelf => "descendant-or-self",
            Axis::AncestorOrSelf => "ancestor-or-self",
            Axis::FollowingSibling => "following-sibling",
            Axis::PrecedingSibling => "preceding-sibling",
            Axis::Following => "following",
            Axis::Preceding => "preceding",
        }
    }

    pub fn from_name(name: &str) -> Option<Axis> {
        Axis::ALL.into_iter().find(|a| a.name() == name)
    }

    /// The axis relating the same pairs of nodes in the other direction.
    pub fn converse(self) -> Axis {
        match self {
            Axis::SelfAxis => Axis::SelfAxis,
            Axis::Child => Axis::Parent,
            Axis::Parent => Axis::Child,
            Axis::Descendant => Axis::Ancestor,
            Axis::Ancestor => Axis::Descendant,
            Axis::DescendantOrSelf => Axis::AncestorOrSelf,
            Axis::AncestorOrSelf => Axis::DescendantOrSelf,
            Axis::FollowingSibling => Axis::PrecedingSibling,
            Axis::PrecedingSibling => Axis::FollowingSibling,
            Axis::Following => Axis::Preceding,
            Axis::Preceding => Axis::Following,
        }
    }

    /// Reverse axes list nodes nearest first, against document order.
    pub fn is_reverse(self) -> bool {
        matches!(
            self,
            Axis::Parent | Axis::Ancestor | Axis::AncestorOrSelf | Axis::PrecedingSibling | Axis::Preceding
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeTest {
    Name(String),
    /// `*`: any element.
    Star,
    /// `node()`: any element or the document node.
    Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub axis: Axis,
    pub test: NodeTest,
    pub qualifiers: Vec<Qualifier>,
}

impl Step {
    pub fn new(axis: Axis, test: NodeTest) -> Self {
        Step { axis, test, qualifiers: Vec::new() }
    }

    pub fn with(mut self, q: Qualifier) -> Self {
        self.qualifiers.push(q);
        self
    }
}

/// Argument of `position() = ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Position {
    Index(usize),
    Last,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Qualifier {
    And(Box<Qualifier>, Box<Qualifier>),
    Or(Box<Qualifier>, Box<Qualifier>),
    Not(Box<Qualifier>),
    /// A relative path; true when it selects some node.
    Path(Vec<Step>),
    /// `path/@name`; `None` for `@*`.
    AttrPath(Vec<Step>, Option<String>),
    /// `@name`; `None` for `@*`.
    Attr(Option<String>),
    /// `position() = k` or `position() = last()`; removed by desugaring.
    Position(Position),
    /// `count(path) = 0`; removed by desugaring.
    CountZero(Vec<Step>),
    /// `count(path) > k`; removed by desugaring.
    CountAbove(Vec<Step>, usize),
}

impl Qualifier {
    pub fn and(a: Qualifier, b: Qualifier) -> Qualifier {
        Qualifier::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Qualifier, b: Qualifier) -> Qualifier {
        Qualifier::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Qualifier) -> Qualifier {
        Qualifier::Not(Box::new(a))
    }

    fn has_sugar(&self) -> bool {
        match self {
            Qualifier::And(a, b) | Qualifier::Or(a, b) => a.has_sugar() || b.has_sugar(),
            Qualifier::Not(a) => a.has_sugar(),
            Qualifier::Path(steps) | Qualifier::AttrPath(steps, _) => {
                steps.iter().any(|s| s.qualifiers.iter().any(Qualifier::has_sugar))
            }
            Qualifier::Attr(_) => false,
            Qualifier::Position(_) | Qualifier::CountZero(_) | Qualifier::CountAbove(..) => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    /// A location path; absolute paths start at the document node.
    Path { absolute: bool, steps: Vec<Step> },
    Union(Box<Query>, Box<Query>),
    Intersection(Box<Query>, Box<Query>),
}

impl Query {
    pub fn relative(steps: Vec<Step>) -> Query {
        Query::Path { absolute: false, steps }
    }

    pub fn absolute(steps: Vec<Step>) -> Query {
        Query::Path { absolute: true, steps }
    }

    /// Whether positional or counting sugar remains.
    pub fn has_sugar(&self) -> bool {
        match self {
            Query::Path { steps, .. } => steps.iter().any(|s| s.qualifiers.iter().any(Qualifier::has_sugar)),
            Query::Union(a, b) | Query::Intersection(a, b) => a.has_sugar() || b.has_sugar(),
        }
    }
}

fn write_steps(f: &mut fmt::Formatter<'_>, steps: &[Step]) -> fmt::Result {
    for (i, s) in steps.iter().enumerate() {
        if i > 0 {
            write!(f, "/")?;
        }
        write!(f, "{s}")?;
    }
    Ok(())
}

impl fmt::Display for NodeTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeTest::Name(n) => write!(f, "{n}"),
            NodeTest::Star => write!(f, "*"),
            NodeTest::Node => write!(f, "node()"),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.axis.name(), self.test)?;
        for q in &self.qualifiers {
            write!(f, "[{q}]")?;
        }
        Ok(())
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let attr = |a: &Option<String>| a.clone().unwrap_or_else(|| "*".to_string());
        match self {
            Qualifier::And(a, b) => {
                let wrap = |q: &Qualifier| matches!(q, Qualifier::Or(..));
                let (a, b) = (a.as_ref(), b.as_ref());
                if wrap(a) { write!(f, "({a})")? } else { write!(f, "{a}")? }
                write!(f, " and ")?;
                if wrap(b) { write!(f, "({b})") } else { write!(f, "{b}") }
            }
            Qualifier::Or(a, b) => write!(f, "{a} or {b}"),
            Qualifier::Not(a) => write!(f, "not({a})"),
            Qualifier::Path(steps) => write_steps(f, steps),
            Qualifier::AttrPath(steps, a) => {
                write_steps(f, steps)?;
                write!(f, "/@{}", attr(a))
            }
            Qualifier::Attr(a) => write!(f, "@{}", attr(a)),
            Qualifier::Position(Position::Index(k)) => write!(f, "position()={k}"),
            Qualifier::Position(Position::Last) => write!(f, "position()=last()"),
            Qualifier::CountZero(steps) => {
                write!(f, "count(")?;
                write_steps(f, steps)?;
                write!(f, ")=0")
            }
            Qualifier::CountAbove(steps, k) => {
                write!(f, "count(")?;
                write_steps(f, steps)?;
                write!(f, ")>{k}")
            }
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Path { absolute, steps } => {
                if *absolute {
                    write!(f, "/")?;
                }
                write_steps(f, steps)
            }
            Query::Union(a, b) => write!(f, "({a}) | ({b})"),
            Query::Intersection(a, b) => write!(f, "({a}) intersect ({b})"),
        }
    }
}

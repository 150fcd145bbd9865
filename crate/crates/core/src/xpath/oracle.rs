//! Direct evaluation of queries on documents.
//!
//! Elements are numbered in document order, as in the binary encoding; the
//! document node gets the number following the last element.

use std::collections::BTreeSet;

use crate::tree::{Document, Element};

use super::{Axis, NodeTest, Position, Qualifier, Query, Step};

/// Marker for the document node in [`eval_oracle`] inputs.
pub const DOCUMENT_NODE: usize = usize::MAX;

/// Navigation structure of a forest below a document node.
#[derive(Debug, Clone)]
pub struct DocumentIndex {
    names: Vec<String>,
    attributes: Vec<BTreeSet<String>>,
    /// Parent of every node; the document node for top-level elements.
    parent: Vec<usize>,
    /// Children of every node, the document node last.
    children: Vec<Vec<usize>>,
    /// One past the last descendant of every element.
    end: Vec<usize>,
}

impl DocumentIndex {
    pub fn from_forest(forest: &[Element]) -> Self {
        fn visit(e: &Element, parent: usize, ix: &mut DocumentIndex) -> usize {
            let id = ix.names.len();
            ix.names.push(e.name.clone());
            ix.attributes.push(e.attributes.clone());
            ix.parent.push(parent);
            ix.children.push(Vec::new());
            ix.end.push(0);
            for c in &e.children {
                let cid = visit(c, id, ix);
                ix.children[id].push(cid);
            }
            ix.end[id] = ix.names.len();
            id
        }
        let mut ix = DocumentIndex {
            names: Vec::new(),
            attributes: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            end: Vec::new(),
        };
        // Top-level parents are patched once the element count is known.
        let top: Vec<usize> = forest.iter().map(|e| visit(e, usize::MAX, &mut ix)).collect();
        let doc = ix.names.len();
        for &t in &top {
            ix.parent[t] = doc;
        }
        ix.children.push(top);
        ix
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Id of the document node.
    pub fn document(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, n: usize) -> Option<&str> {
        self.names.get(n).map(String::as_str)
    }

    fn is_element(&self, n: usize) -> bool {
        n < self.names.len()
    }

    fn ancestors(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = n;
        while self.is_element(cur) {
            cur = self.parent[cur];
            out.push(cur);
        }
        out
    }

    fn siblings(&self, n: usize) -> (&[usize], usize) {
        let sibs = &self.children[self.parent[n]];
        let k = sibs.iter().position(|&s| s == n).expect("node among its parent's children");
        (sibs, k)
    }

    /// Nodes of `axis` from `n`, nearest first.
    pub fn axis(&self, axis: Axis, n: usize) -> Vec<usize> {
        let doc = self.document();
        let subtree = |n: usize| -> std::ops::Range<usize> {
            if n == doc {
                0..doc
            } else {
                n + 1..self.end[n]
            }
        };
        match axis {
            Axis::SelfAxis => vec![n],
            Axis::Child => self.children[n].clone(),
            Axis::Parent => self.ancestors(n).into_iter().take(1).collect(),
            Axis::Ancestor => self.ancestors(n),
            Axis::AncestorOrSelf => std::iter::once(n).chain(self.ancestors(n)).collect(),
            Axis::Descendant => subtree(n).collect(),
            Axis::DescendantOrSelf => std::iter::once(n).chain(subtree(n)).collect(),
            Axis::FollowingSibling if self.is_element(n) => {
                let (sibs, k) = self.siblings(n);
                sibs[k + 1..].to_vec()
            }
            Axis::PrecedingSibling if self.is_element(n) => {
                let (sibs, k) = self.siblings(n);
                sibs[..k].iter().rev().copied().collect()
            }
            Axis::Following if self.is_element(n) => (self.end[n]..doc).collect(),
            Axis::Preceding if self.is_element(n) => {
                let anc: BTreeSet<usize> = self.ancestors(n).into_iter().collect();
                (0..n).rev().filter(|m| !anc.contains(m)).collect()
            }
            Axis::FollowingSibling | Axis::PrecedingSibling | Axis::Following | Axis::Preceding => Vec::new(),
        }
    }

    fn test(&self, t: &NodeTest, n: usize) -> bool {
        match t {
            NodeTest::Node => true,
            NodeTest::Star => self.is_element(n),
            NodeTest::Name(l) => self.name(n) == Some(l),
        }
    }

    fn has_attribute(&self, n: usize, a: &Option<String>) -> bool {
        match (self.attributes.get(n), a) {
            (Some(attrs), Some(a)) => attrs.contains(a),
            (Some(attrs), None) => !attrs.is_empty(),
            (None, _) => false,
        }
    }

    /// Evaluates `q` from the nodes in `ctx`. Results may include the
    /// document node. Position and count tests follow standard semantics.
    pub fn eval(&self, q: &Query, ctx: &BTreeSet<usize>) -> BTreeSet<usize> {
        match q {
            Query::Path { absolute, steps } => {
                let start = if !*absolute {
                    ctx.clone()
                } else if ctx.is_empty() {
                    BTreeSet::new()
                } else {
                    BTreeSet::from([self.document()])
                };
                self.steps(steps, start)
            }
            Query::Union(a, b) => self.eval(a, ctx).union(&self.eval(b, ctx)).copied().collect(),
            Query::Intersection(a, b) => self.eval(a, ctx).intersection(&self.eval(b, ctx)).copied().collect(),
        }
    }

    fn steps(&self, steps: &[Step], mut current: BTreeSet<usize>) -> BTreeSet<usize> {
        for s in steps {
            let mut next = BTreeSet::new();
            for &n in &current {
                let mut list: Vec<usize> = self.axis(s.axis, n).into_iter().filter(|&m| self.test(&s.test, m)).collect();
                for q in &s.qualifiers {
                    let last = list.len();
                    list = list
                        .iter()
                        .enumerate()
                        .filter(|&(i, &m)| self.qualifier(q, m, i + 1, last))
                        .map(|(_, &m)| m)
                        .collect();
                }
                next.extend(list);
            }
            current = next;
        }
        current
    }

    fn qualifier(&self, q: &Qualifier, n: usize, position: usize, last: usize) -> bool {
        let from = || BTreeSet::from([n]);
        match q {
            Qualifier::And(a, b) => self.qualifier(a, n, position, last) && self.qualifier(b, n, position, last),
            Qualifier::Or(a, b) => self.qualifier(a, n, position, last) || self.qualifier(b, n, position, last),
            Qualifier::Not(a) => !self.qualifier(a, n, position, last),
            Qualifier::Path(steps) => !self.steps(steps, from()).is_empty(),
            Qualifier::AttrPath(steps, a) => self.steps(steps, from()).into_iter().any(|m| self.has_attribute(m, a)),
            Qualifier::Attr(a) => self.has_attribute(n, a),
            Qualifier::Position(Position::Index(k)) => position == *k,
            Qualifier::Position(Position::Last) => position == last,
            Qualifier::CountZero(steps) => self.steps(steps, from()).is_empty(),
            Qualifier::CountAbove(steps, k) => self.steps(steps, from()).len() > *k,
        }
    }
}

/// Elements selected by `q` from `ctx` in `d`, by document order index.
/// [`DOCUMENT_NODE`] in `ctx` stands for the document node; the document
/// node itself is never part of the result.
pub fn eval_oracle(q: &Query, d: &Document, ctx: &BTreeSet<usize>) -> BTreeSet<usize> {
    let ix = DocumentIndex::from_forest(std::slice::from_ref(&d.root));
    let doc = ix.document();
    let ctx = ctx.iter().map(|&n| if n == DOCUMENT_NODE { doc } else { n }).collect();
    ix.eval(q, &ctx).into_iter().filter(|&n| n != doc).collect()
}

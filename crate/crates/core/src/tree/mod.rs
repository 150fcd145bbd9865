//! Unranked XML trees and their first-child/next-sibling binary encoding.

mod validate;
mod xml;

use std::collections::BTreeSet;

use thiserror::Error;

pub use validate::{validate, validate_with, ValidateOptions, Violation};
pub use xml::{parse_xml, serialize, serialize_forest, to_compact_xml, Annotation, XmlError, SOLVER_NS};

/// An element with its attribute names and ordered children. Text content
/// and attribute values are not modelled.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    pub name: String,
    pub attributes: BTreeSet<String>,
    pub children: Vec<Element>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element { name: name.into(), attributes: BTreeSet::new(), children: Vec::new() }
    }

    pub fn with_children(name: impl Into<String>, children: Vec<Element>) -> Self {
        Element { name: name.into(), attributes: BTreeSet::new(), children }
    }

    pub fn with_attribute(mut self, name: impl Into<String>) -> Self {
        self.attributes.insert(name.into());
        self
    }

    /// Number of elements in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Element::size).sum::<usize>()
    }

    /// Elements of the subtree in document order.
    pub fn preorder(&self) -> Vec<&Element> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            out.push(e);
            stack.extend(e.children.iter().rev());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Document {
    pub root: Element,
}

impl Document {
    pub fn new(root: Element) -> Self {
        Document { root }
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryNode {
    /// Element name; `None` for a node whose name is irrelevant.
    pub name: Option<String>,
    pub propositions: BTreeSet<String>,
    pub attributes: BTreeSet<String>,
    pub child1: Option<NodeId>,
    pub child2: Option<NodeId>,
}

impl BinaryNode {
    pub fn named(name: impl Into<String>) -> Self {
        BinaryNode {
            name: Some(name.into()),
            propositions: BTreeSet::new(),
            attributes: BTreeSet::new(),
            child1: None,
            child2: None,
        }
    }
}

/// Binary tree stored as an arena. Node ids of a tree built by
/// [`to_binary`] follow document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryTree {
    pub nodes: Vec<BinaryNode>,
    pub root: NodeId,
}

impl BinaryTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &BinaryNode {
        &self.nodes[id]
    }

    /// Parent links: for every node, its predecessor and whether it is the
    /// first child (program 1) or next sibling (program 2) of it.
    pub fn parents(&self) -> Vec<Option<(NodeId, u8)>> {
        let mut parents = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(c) = n.child1 {
                parents[c] = Some((i, 1));
            }
            if let Some(c) = n.child2 {
                parents[c] = Some((i, 2));
            }
        }
        parents
    }

    /// Adds a proposition to a node.
    pub fn mark(&mut self, id: NodeId, prop: &str) {
        self.nodes[id].propositions.insert(prop.to_string());
    }

    /// Ids of all nodes carrying `prop`.
    pub fn marked(&self, prop: &str) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].propositions.contains(prop)).collect()
    }

    /// Checks that the arena is a single tree rooted at `root` in which no
    /// node is reachable twice.
    pub fn is_well_formed(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if n >= self.nodes.len() || seen[n] {
                return false;
            }
            seen[n] = true;
            stack.extend(self.nodes[n].child1);
            stack.extend(self.nodes[n].child2);
        }
        seen.iter().all(|&s| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForestError {
    #[error("node {0} has no element name")]
    MissingName(NodeId),
    #[error("the tree is not well formed")]
    Malformed,
}

/// Encodes a document: first child becomes child 1, next sibling child 2.
pub fn to_binary(doc: &Document) -> BinaryTree {
    forest_to_binary(std::slice::from_ref(&doc.root))
}

/// Encodes a sequence of sibling trees; the root is the first tree.
pub fn forest_to_binary(forest: &[Element]) -> BinaryTree {
    fn encode(siblings: &[Element], nodes: &mut Vec<BinaryNode>) -> Option<NodeId> {
        let mut first = None;
        let mut prev: Option<NodeId> = None;
        for e in siblings {
            let id = nodes.len();
            nodes.push(BinaryNode {
                name: Some(e.name.clone()),
                propositions: BTreeSet::new(),
                attributes: e.attributes.clone(),
                child1: None,
                child2: None,
            });
            let child = encode(&e.children, nodes);
            nodes[id].child1 = child;
            match prev {
                Some(p) => nodes[p].child2 = Some(id),
                None => first = Some(id),
            }
            prev = Some(id);
        }
        first
    }
    let mut nodes = Vec::new();
    let root = encode(forest, &mut nodes).unwrap_or(0);
    BinaryTree { nodes, root }
}

/// Decodes a binary tree into the forest of its root and the root's
/// next siblings.
pub fn from_binary(tree: &BinaryTree) -> Result<Vec<Element>, ForestError> {
    if !tree.is_well_formed() {
        return Err(ForestError::Malformed);
    }
    fn decode(tree: &BinaryTree, start: Option<NodeId>) -> Result<Vec<Element>, ForestError> {
        let mut out = Vec::new();
        let mut cur = start;
        while let Some(id) = cur {
            let n = &tree.nodes[id];
            let name = n.name.clone().ok_or(ForestError::MissingName(id))?;
            out.push(Element {
                name,
                attributes: n.attributes.clone(),
                children: decode(tree, n.child1)?,
            });
            cur = n.child2;
        }
        Ok(out)
    }
    decode(tree, Some(tree.root))
}

/// Maps every binary node to its element in the decoded forest, as a path
/// of child indices starting with the index of the top-level tree.
pub fn binary_paths(tree: &BinaryTree) -> Vec<Vec<usize>> {
    let mut paths = vec![Vec::new(); tree.nodes.len()];
    let mut stack = vec![(tree.root, vec![0usize])];
    while let Some((id, path)) = stack.pop() {
        let n = &tree.nodes[id];
        if let Some(c) = n.child1 {
            let mut p = path.clone();
            p.push(0);
            stack.push((c, p));
        }
        if let Some(s) = n.child2 {
            let mut p = path.clone();
            *p.last_mut().unwrap() += 1;
            stack.push((s, p));
        }
        paths[id] = path;
    }
    paths
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Document {
        Document::new(Element::with_children(
            "a",
            vec![
                Element::with_children("b", vec![Element::new("d")]),
                Element::new("c").with_attribute("x"),
            ],
        ))
    }

    #[test]
    fn encoding_follows_first_child_next_sibling() {
        let t = to_binary(&sample());
        assert_eq!(t.len(), 4);
        let a = t.node(t.root);
        assert_eq!(a.name.as_deref(), Some("a"));
        let b = t.node(a.child1.unwrap());
        assert_eq!(b.name.as_deref(), Some("b"));
        let c = t.node(b.child2.unwrap());
        assert_eq!(c.name.as_deref(), Some("c"));
        assert!(c.attributes.contains("x"));
        assert_eq!(t.node(b.child1.unwrap()).name.as_deref(), Some("d"));
        assert!(a.child2.is_none());
    }

    #[test]
    fn round_trip() {
        let d = sample();
        let back = from_binary(&to_binary(&d)).unwrap();
        assert_eq!(back, vec![d.root]);
    }

    #[test]
    fn paths_match_document_positions() {
        let t = to_binary(&sample());
        let paths = binary_paths(&t);
        assert_eq!(paths, vec![vec![0], vec![0, 0], vec![0, 0, 0], vec![0, 1]]);
    }

    #[test]
    fn missing_name_is_an_error() {
        let mut t = to_binary(&sample());
        t.nodes[2].name = None;
        assert_eq!(from_binary(&t), Err(ForestError::MissingName(2)));
    }
}

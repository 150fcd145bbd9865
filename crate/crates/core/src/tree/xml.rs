use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use super::{Document, Element};

/// Namespace of the witness annotations.
pub const SOLVER_NS: &str = "http://wam.inrialpes.fr/xml";

/// Witness annotations, as pre-order indices over the serialized forest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotation {
    pub context: BTreeSet<usize>,
    pub target: Option<usize>,
}

impl Annotation {
    pub fn is_empty(&self) -> bool {
        self.context.is_empty() && self.target.is_none()
    }
}

#[derive(Debug, Error)]
pub enum XmlError {
    #[error("malformed XML: {0}")]
    Malformed(#[from] roxmltree::Error),
}

fn write_element(
    out: &mut String,
    e: &Element,
    ann: Option<&Annotation>,
    counter: &mut usize,
    depth: usize,
    pretty: bool,
    top: bool,
) {
    let index = *counter;
    *counter += 1;
    if pretty {
        for _ in 0..depth {
            out.push_str("  ");
        }
    }
    out.push('<');
    out.push_str(&e.name);
    if let Some(ann) = ann {
        if top && !ann.is_empty() {
            let _ = write!(out, " xmlns:solver=\"{SOLVER_NS}\"");
        }
    }
    for a in &e.attributes {
        let _ = write!(out, " {a}=\"\"");
    }
    if let Some(ann) = ann {
        if ann.context.contains(&index) {
            out.push_str(" solver:context=\"true\"");
        }
        if ann.target == Some(index) {
            out.push_str(" solver:target=\"true\"");
        }
    }
    if e.children.is_empty() {
        out.push_str("/>");
        if pretty {
            out.push('\n');
        }
        return;
    }
    out.push('>');
    if pretty {
        out.push('\n');
    }
    for c in &e.children {
        write_element(out, c, ann, counter, depth + 1, pretty, false);
    }
    if pretty {
        for _ in 0..depth {
            out.push_str("  ");
        }
    }
    let _ = write!(out, "</{}>", e.name);
    if pretty {
        out.push('\n');
    }
}

/// Pretty prints a forest with two-space indentation. Attribute values
/// are empty strings. Annotated forests declare the solver namespace on
/// every top-level element.
pub fn serialize_forest(forest: &[Element], ann: Option<&Annotation>) -> String {
    let mut out = String::new();
    let mut counter = 0;
    for e in forest {
        write_element(&mut out, e, ann, &mut counter, 0, true, true);
    }
    out
}

pub fn serialize(doc: &Document, ann: Option<&Annotation>) -> String {
    serialize_forest(std::slice::from_ref(&doc.root), ann)
}

/// Serializes without any whitespace, e.g. `<a><b/></a>`.
pub fn to_compact_xml(e: &Element) -> String {
    let mut out = String::new();
    write_element(&mut out, e, None, &mut 0, 0, false, true);
    out
}

fn qualified(node: &roxmltree::Node, namespace: Option<&str>, local: &str) -> String {
    match namespace {
        Some("http://www.w3.org/XML/1998/namespace") => format!("xml:{local}"),
        Some(uri) => match node.lookup_prefix(uri) {
            Some(prefix) if !prefix.is_empty() => format!("{prefix}:{local}"),
            _ => local.to_string(),
        },
        None => local.to_string(),
    }
}

fn convert(node: roxmltree::Node) -> Element {
    let tag = node.tag_name();
    let mut e = Element::new(qualified(&node, tag.namespace(), tag.name()));
    for a in node.attributes() {
        if a.namespace() == Some(SOLVER_NS) {
            continue;
        }
        e.attributes.insert(qualified(&node, a.namespace(), a.name()));
    }
    // Namespace declarations are not attributes and are not kept.
    for child in node.children() {
        if child.is_element() {
            e.children.push(convert(child));
        } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
            log::warn!("discarding text content inside <{}>", e.name);
        }
    }
    e
}

/// Reads an XML document, keeping element and attribute names only. Text
/// is discarded with a warning; solver annotations are dropped.
pub fn parse_xml(text: &str) -> Result<Document, XmlError> {
    let options = roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() };
    let doc = roxmltree::Document::parse_with_options(text, options)?;
    Ok(Document::new(convert(doc.root_element())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pretty_printing_with_annotations() {
        let d = Document::new(Element::with_children(
            "a",
            vec![Element::new("b").with_attribute("href"), Element::new("c")],
        ));
        let ann = Annotation { context: [0].into_iter().collect(), target: Some(2) };
        let text = serialize(&d, Some(&ann));
        assert_eq!(
            text,
            "<a xmlns:solver=\"http://wam.inrialpes.fr/xml\" solver:context=\"true\">\n  <b href=\"\"/>\n  <c solver:target=\"true\"/>\n</a>\n"
        );
        assert_eq!(parse_xml(&text).unwrap(), d);
    }

    #[test]
    fn compact_form() {
        let e = Element::with_children("a", vec![Element::new("b")]);
        assert_eq!(to_compact_xml(&e), "<a><b/></a>");
    }

    #[test]
    fn text_is_discarded() {
        let d = parse_xml("<p>hello <b>world</b></p>").unwrap();
        assert_eq!(d.root, Element::with_children("p", vec![Element::new("b")]));
    }

    #[test]
    fn namespace_declarations_are_dropped() {
        let d = parse_xml("<html xmlns=\"http://www.w3.org/1999/xhtml\" xml:lang=\"en\"><head/></html>")
            .unwrap();
        let attrs: Vec<_> = d.root.attributes.iter().cloned().collect();
        assert_eq!(attrs, vec!["xml:lang".to_string()]);
        assert!(d.root.children[0].attributes.is_empty());
    }
}

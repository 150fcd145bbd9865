//! Random generators shared by the integration tests.

#![allow(dead_code)]

pub mod brute;
pub mod grammars;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use xsat::tree::Element;
use xsat::xpath::{Axis, NodeTest, Position, Qualifier, Query, Step};

pub const NAMES: [&str; 3] = ["a", "b", "c"];

/// A random forest with exactly `size` elements.
pub fn random_forest(rng: &mut StdRng, size: usize, names: &[&str], attrs: &[&str]) -> Vec<Element> {
    let mut out = Vec::new();
    let mut left = size;
    while left > 0 {
        let n = rng.gen_range(1..=left);
        out.push(random_element(rng, n, names, attrs));
        left -= n;
    }
    out
}

/// A random element with exactly `size` nodes in its subtree.
pub fn random_element(rng: &mut StdRng, size: usize, names: &[&str], attrs: &[&str]) -> Element {
    let mut e = Element::new(*names.choose(rng).unwrap());
    for a in attrs {
        if rng.gen_bool(0.3) {
            e = e.with_attribute(*a);
        }
    }
    e.children = random_forest(rng, size - 1, names, attrs);
    e
}

/// All forests over `names` with exactly `size` nodes and no attributes.
pub fn all_forests(size: usize, names: &[&str]) -> Vec<Vec<Element>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    // First tree has k nodes, the rest of the forest size - k.
    for k in 1..=size {
        for children in all_forests(k - 1, names) {
            for rest in all_forests(size - k, names) {
                for n in names {
                    let mut forest = vec![Element::with_children(*n, children.clone())];
                    forest.extend(rest.iter().cloned());
                    out.push(forest);
                }
            }
        }
    }
    out
}

fn random_test(rng: &mut StdRng) -> NodeTest {
    match rng.gen_range(0..6) {
        0 => NodeTest::Star,
        1 => NodeTest::Node,
        _ => NodeTest::Name(NAMES.choose(rng).unwrap().to_string()),
    }
}

pub fn random_step(rng: &mut StdRng, depth: usize) -> Step {
    let mut s = Step::new(*Axis::ALL.choose(rng).unwrap(), random_test(rng));
    if depth > 0 && rng.gen_bool(0.35) {
        s.qualifiers.push(random_qualifier(rng, depth - 1));
    }
    s
}

pub fn random_steps(rng: &mut StdRng, max: usize, depth: usize) -> Vec<Step> {
    let n = rng.gen_range(1..=max);
    (0..n).map(|_| random_step(rng, depth)).collect()
}

pub fn random_qualifier(rng: &mut StdRng, depth: usize) -> Qualifier {
    let attr = || Some("x".to_string());
    match rng.gen_range(0..if depth == 0 { 3 } else { 6 }) {
        0 => Qualifier::Path(random_steps(rng, 2, depth)),
        1 => Qualifier::Attr(if rng.gen_bool(0.8) { attr() } else { None }),
        2 => Qualifier::AttrPath(random_steps(rng, 2, depth), attr()),
        3 => Qualifier::not(random_qualifier(rng, depth - 1)),
        4 => Qualifier::and(random_qualifier(rng, depth - 1), random_qualifier(rng, depth - 1)),
        _ => Qualifier::or(random_qualifier(rng, depth - 1), random_qualifier(rng, depth - 1)),
    }
}

/// A random sugar-free query with at most four steps per path.
pub fn random_query(rng: &mut StdRng) -> Query {
    let path = |rng: &mut StdRng| Query::Path { absolute: rng.gen_bool(0.2), steps: random_steps(rng, 4, 2) };
    match rng.gen_range(0..10) {
        0 => Query::Union(Box::new(path(rng)), Box::new(path(rng))),
        1 => Query::Intersection(Box::new(path(rng)), Box::new(path(rng))),
        _ => path(rng),
    }
}

/// A random query using one of the supported positional or counting
/// shapes.
pub fn random_sugared_query(rng: &mut StdRng) -> Query {
    let test = |rng: &mut StdRng| if rng.gen_bool(0.5) { NodeTest::Star } else { NodeTest::Name(NAMES.choose(rng).unwrap().to_string()) };
    let mut steps = vec![Step::new(Axis::DescendantOrSelf, NodeTest::Node)];
    let t = test(rng);
    let step = match rng.gen_range(0..6) {
        0 => Step::new(Axis::Child, t).with(Qualifier::Position(Position::Index(rng.gen_range(1..=3)))),
        1 => Step::new(Axis::Child, t).with(Qualifier::Position(Position::Last)),
        2 => Step::new(Axis::PrecedingSibling, t).with(Qualifier::and(
            Qualifier::Position(Position::Last),
            random_qualifier(rng, 1),
        )),
        3 => Step::new(Axis::Child, t).with(Qualifier::CountZero(random_steps(rng, 2, 0))),
        4 => Step::new(Axis::Child, t).with(Qualifier::CountAbove(random_steps(rng, 2, 0), 0)),
        _ => Step::new(Axis::SelfAxis, NodeTest::Star)
            .with(Qualifier::CountAbove(vec![Step::new(Axis::Child, test(rng))], rng.gen_range(1..=3))),
    };
    steps.push(step);
    if rng.gen_bool(0.5) {
        steps.push(random_step(rng, 1));
    }
    Query::relative(steps)
}

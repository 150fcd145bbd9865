//! Small tree grammars over elements a and b, in the internal syntax.

use xsat::tree::{from_binary, BinaryNode, BinaryTree, Element};

use super::brute::{shapes, Labelled};

pub const GRAMMARS: [&str; 22] = [
    "a{()}",
    "a{b{()}}",
    "a{b{()} | ()}",
    "a{b{()}, b{()}}",
    "let x = b{()}, x | () in a{x}",
    "let x = b{()}, x | b{()} in a{x}",
    "let x = a{y}; y = x, y | () in x",
    "a{()} | b{()}",
    "let x = a{y} | b{y}; y = x, y | () in x",
    "let x = a{x} | b{()} in x",
    "let x = a{y}; y = b{()}, y | x | () in x",
    "a{{}}",
    "a{()}, b{()}",
    "let x = b{()}, b{()}, x | () in a{x}",
    "let x = a{y}; y = b{z}, y | (); z = x, z | () in x",
    "a{b{()}, a{()} | a{()}, b{()}}",
    "let x = a{()}, x | b{()} in a{x}",
    "let y = a{()}, y | () in b{y}",
    "let x = a{y}; y = x | () in x",
    "let x = a{y}; y = x, x | () in x",
    "a{b{()}, (b{()} | ())}",
    "let x = b{x} | () in a{x, x}",
];

/// Every document over elements a and b with at most `max` nodes.
pub fn all_documents(max: usize) -> Vec<(Labelled, Element)> {
    let mut out = Vec::new();
    for n in 1..=max {
        for (c1, c2) in shapes(n).into_iter().filter(|(_, c2)| c2[0].is_none()) {
            for bits in 0..1u64 << n {
                let nodes = (0..n)
                    .map(|i| BinaryNode {
                        child1: c1[i],
                        child2: c2[i],
                        ..BinaryNode::named(if bits >> i & 1 == 1 { "b" } else { "a" })
                    })
                    .collect();
                let tree = BinaryTree { nodes, root: 0 };
                let root = from_binary(&tree).expect("named nodes").remove(0);
                out.push((Labelled::from_binary(&tree), root));
            }
        }
    }
    out
}


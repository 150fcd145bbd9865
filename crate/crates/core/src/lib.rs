//! Static analysis of XPath queries and XML tree types.
//!
//! Queries, schemas and their combinations are compiled into a tree logic
//! whose satisfiability is decided by a symbolic solver.

pub mod logic;
pub mod tree;
pub mod schema;
pub mod xpath;
pub mod predicates;
pub mod driver;

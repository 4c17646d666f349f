//! Turtle-subset import and canonical N-Triples export.

mod ntriples;
mod turtle;

pub use ntriples::{escape_literal, export_ntriples};
pub use turtle::{import_turtle, import_turtle_with, parse_prefix_map, ParseError, ParseErrorKind};

//! Types, terms, parsing and printing.

mod parse;
mod print;
mod term;
mod types;

pub use parse::{parse_open_term, parse_program, parse_term, parse_type, Program};
pub use term::{fresh_name, Name, Term};
pub use types::{Signature, SimpleType};

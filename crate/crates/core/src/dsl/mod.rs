//! Text syntax for polynomial functionals: literals, increments `x<i>`,
//! Hermite polynomials `h<k>(x<i>)`, `+ - *`, unary minus, parentheses and
//! vector literals `[e1, .., ed]`.

mod ast;
mod lexer;
mod lower;
mod parser;

pub use ast::{BinOp, Expr, FunctionalExpr};
pub use lexer::Span;
pub use lower::{lower, Lowered};
pub use parser::parse_functional;

use crate::chaos::Ambient;
use crate::error::Result;

/// Parses and lowers in one step.
pub fn compile(text: &str, ambient: Ambient) -> Result<Lowered> {
    lower(&parse_functional(text)?, ambient)
}

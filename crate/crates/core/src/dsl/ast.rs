use std::fmt;

use super::lexer::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

/// Scalar expression. Parentheses are kept as nodes so the printer can
/// reproduce the source.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number { text: String, span: Span },
    /// `x<i>`, the increment `eta_i`.
    Var { index: usize, span: Span },
    /// `h<k>(x<i>)`, `He_k(eta_i)`.
    Hermite { order: u32, index: usize, span: Span },
    Neg { inner: Box<Expr>, span: Span },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, span: Span },
    Paren { inner: Box<Expr>, span: Span },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Number { span, .. }
            | Expr::Var { span, .. }
            | Expr::Hermite { span, .. }
            | Expr::Neg { span, .. }
            | Expr::Binary { span, .. }
            | Expr::Paren { span, .. } => *span,
        }
    }
}

/// A parsed functional: a scalar expression or a vector literal.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalExpr {
    Scalar(Expr),
    Vector { items: Vec<Expr>, span: Span },
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number { text, .. } => f.write_str(text),
            Expr::Var { index, .. } => write!(f, "x{index}"),
            Expr::Hermite { order, index, .. } => write!(f, "h{order}(x{index})"),
            Expr::Neg { inner, .. } => write!(f, "-{inner}"),
            Expr::Binary { op, lhs, rhs, .. } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Expr::Paren { inner, .. } => write!(f, "({inner})"),
        }
    }
}

impl fmt::Display for FunctionalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalExpr::Scalar(e) => e.fmt(f),
            FunctionalExpr::Vector { items, .. } => {
                f.write_str("[")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    e.fmt(f)?;
                }
                f.write_str("]")
            }
        }
    }
}

use super::ast::{BinOp, Expr, FunctionalExpr};
use super::lexer::Span;
use crate::chaos::{Ambient, ChaosPoly};
use crate::error::{Error, Result};
use crate::malliavin::VField;

/// Result of lowering: scalar functionals become polynomials, vector
/// literals become `VField`s.
#[derive(Debug, Clone, PartialEq)]
pub enum Lowered {
    Scalar(ChaosPoly),
    Vector(VField),
}

impl Lowered {
    /// Views the result as a `VField`; a scalar becomes a one-component field.
    pub fn into_vfield(self) -> Result<VField> {
        match self {
            Lowered::Scalar(p) => VField::new(vec![p]),
            Lowered::Vector(v) => Ok(v),
        }
    }
}

fn semantic(span: Span, message: String) -> Error {
    Error::Semantic { line: span.line, column: span.column, message }
}

fn lower_expr(e: &Expr, ambient: Ambient) -> Result<ChaosPoly> {
    let check_index = |index: usize, span: Span| {
        if index == 0 || index > ambient.dim() {
            Err(semantic(span, format!("variable x{index} outside x1..x{}", ambient.dim())))
        } else {
            Ok(())
        }
    };
    match e {
        Expr::Number { text, span } => {
            let v: f64 = text.parse().map_err(|_| semantic(*span, format!("bad number `{text}`")))?;
            if !v.is_finite() {
                return Err(semantic(*span, format!("number `{text}` is not finite")));
            }
            Ok(ChaosPoly::constant(ambient, v))
        }
        Expr::Var { index, span } => {
            check_index(*index, *span)?;
            ChaosPoly::coordinate(ambient, *index)
        }
        Expr::Hermite { order, index, span } => {
            check_index(*index, *span)?;
            if *order > ambient.degree_cap() {
                return Err(semantic(*span, format!("order {order} exceeds the degree cap {}", ambient.degree_cap())));
            }
            ChaosPoly::hermite(ambient, *index, *order)
        }
        Expr::Neg { inner, .. } => Ok(lower_expr(inner, ambient)?.scale(-1.0)),
        Expr::Paren { inner, .. } => lower_expr(inner, ambient),
        Expr::Binary { op, lhs, rhs, span } => {
            let (a, b) = (lower_expr(lhs, ambient)?, lower_expr(rhs, ambient)?);
            match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.hermite_product(&b).map_err(|err| match err {
                    Error::DegreeCap { degree, cap } => {
                        semantic(*span, format!("product has degree {degree}, above the degree cap {cap}"))
                    }
                    other => other,
                }),
            }
        }
    }
}

/// Evaluates the expression in the chaos algebra over `ambient`.
pub fn lower(expr: &FunctionalExpr, ambient: Ambient) -> Result<Lowered> {
    match expr {
        FunctionalExpr::Scalar(e) => Ok(Lowered::Scalar(lower_expr(e, ambient)?)),
        FunctionalExpr::Vector { items, .. } => {
            let comps = items.iter().map(|e| lower_expr(e, ambient)).collect::<Result<Vec<_>>>()?;
            Ok(Lowered::Vector(VField::new(comps)?))
        }
    }
}

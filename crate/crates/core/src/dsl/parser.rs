//! Recursive descent parser.
//!
//! ```text
//! functional := expr | "[" expr ("," expr)* "]"
//! expr       := term (("+" | "-") term)*
//! term       := unary ("*" unary)*
//! unary      := "-" unary | atom
//! atom       := number | x<i> | h<k> "(" x<i> ")" | "(" expr ")"
//! ```

use super::ast::{BinOp, Expr, FunctionalExpr};
use super::lexer::{tokenize, Token, TokenKind};
use crate::error::{Error, Result};

const ATOM_START: &[&str] = &["number", "x<i>", "h<k>", "(", "-"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> Error {
        let t = self.peek();
        Error::Syntax {
            line: t.span.line,
            column: t.span.column,
            message: format!("unexpected {}", t.kind.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &[&str]) -> Result<Token> {
        if self.peek().kind == kind {
            Ok(self.next())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn functional(&mut self) -> Result<FunctionalExpr> {
        let out = if self.peek().kind == TokenKind::LBracket {
            let open = self.next();
            let mut items = vec![self.expr()?];
            loop {
                match self.peek().kind {
                    TokenKind::Comma => {
                        self.next();
                        items.push(self.expr()?);
                    }
                    TokenKind::RBracket => break,
                    _ => return Err(self.unexpected(&["+", "-", "*", ",", "]"])),
                }
            }
            let close = self.next();
            FunctionalExpr::Vector { items, span: open.span.to(close.span) }
        } else {
            FunctionalExpr::Scalar(self.expr()?)
        };
        if self.peek().kind != TokenKind::Eof {
            return Err(self.unexpected(&["+", "-", "*", "end of input"]));
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            let span = lhs.span().to(rhs.span());
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek().kind == TokenKind::Star {
            self.next();
            let rhs = self.unary()?;
            let span = lhs.span().to(rhs.span());
            lhs = Expr::Binary { op: BinOp::Mul, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().kind == TokenKind::Minus {
            let minus = self.next();
            let inner = self.unary()?;
            let span = minus.span.to(inner.span());
            return Ok(Expr::Neg { inner: Box::new(inner), span });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let span = self.peek().span;
        match self.peek().kind.clone() {
            TokenKind::Number(text) => {
                self.next();
                Ok(Expr::Number { text, span })
            }
            TokenKind::Var(index) => {
                self.next();
                Ok(Expr::Var { index, span })
            }
            TokenKind::Hermite(order) => {
                self.next();
                self.expect(TokenKind::LParen, &["("])?;
                let index = match self.peek().kind {
                    TokenKind::Var(i) => {
                        self.next();
                        i
                    }
                    _ => return Err(self.unexpected(&["x<i>"])),
                };
                let close = self.expect(TokenKind::RParen, &[")"])?;
                Ok(Expr::Hermite { order, index, span: span.to(close.span) })
            }
            TokenKind::LParen => {
                self.next();
                let inner = self.expr()?;
                if self.peek().kind != TokenKind::RParen {
                    return Err(self.unexpected(&["+", "-", "*", ")"]));
                }
                let close = self.next();
                Ok(Expr::Paren { inner: Box::new(inner), span: span.to(close.span) })
            }
            _ => Err(self.unexpected(ATOM_START)),
        }
    }
}

pub fn parse_functional(text: &str) -> Result<FunctionalExpr> {
    Parser { tokens: tokenize(text)?, pos: 0 }.functional()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syntax(text: &str) -> (usize, usize, Vec<String>) {
        match parse_functional(text) {
            Err(Error::Syntax { line, column, expected, .. }) => (line, column, expected),
            other => panic!("expected a syntax error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let FunctionalExpr::Scalar(e) = parse_functional("1 - x1 - x2 * x3 * 2").unwrap() else { panic!() };
        let Expr::Binary { op: BinOp::Sub, lhs, rhs, .. } = e else { panic!("top is a subtraction") };
        assert!(matches!(*lhs, Expr::Binary { op: BinOp::Sub, .. }));
        let Expr::Binary { op: BinOp::Mul, lhs: inner, .. } = *rhs else { panic!("rhs is a product") };
        assert!(matches!(*inner, Expr::Binary { op: BinOp::Mul, .. }));
    }

    #[test]
    fn unary_minus_binds_tightest() {
        let FunctionalExpr::Scalar(e) = parse_functional("-x1 * x2").unwrap() else { panic!() };
        assert!(matches!(e, Expr::Binary { op: BinOp::Mul, .. }));
    }

    #[test]
    fn truncated_product_points_at_open_paren() {
        let (line, column, expected) = syntax("x1*(");
        assert_eq!((line, column), (1, 4));
        assert!(expected.contains(&"x<i>".to_string()));
    }

    #[test]
    fn error_positions() {
        assert_eq!(syntax("x1 x2").1, 4);
        assert_eq!(syntax("h2 x1").1, 4);
        assert_eq!(syntax("h2(3)").1, 4);
        assert_eq!(syntax("[x1, x2").2, vec!["+", "-", "*", ",", "]"]);
        assert_eq!(syntax("x1 +\n ]").0, 2);
        assert_eq!(syntax("[x1, [x2]]").1, 6);
        assert_eq!(syntax("").2, ATOM_START);
    }

    #[test]
    fn vectors() {
        let FunctionalExpr::Vector { items, .. } = parse_functional("[x1*x2, h2(x1)]").unwrap() else { panic!() };
        assert_eq!(items.len(), 2);
    }

    #[test]
    fn printer_reproduces_source() {
        for s in ["x1 * x2", "h2(x1) + 3", "-(x1 - 2.50) * -x2", "[x1, 1e-3 * h0(x4)]"] {
            assert_eq!(parse_functional(s).unwrap().to_string(), s);
        }
    }
}

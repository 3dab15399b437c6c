use crate::error::{Error, Result};

/// Source position; `line` and `column` are 1-based and count characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Literal text is kept so printing reproduces it.
    Number(String),
    Var(usize),
    Hermite(u32),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Number(t) => format!("number `{t}`"),
            TokenKind::Var(i) => format!("`x{i}`"),
            TokenKind::Hermite(k) => format!("`h{k}`"),
            TokenKind::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Comma => ",",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, skip: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(skip)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_digits(&mut self) -> usize {
        let mut n = 0;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            n += 1;
        }
        n
    }

    fn here(&self) -> Span {
        Span { start: self.pos, end: self.pos, line: self.line, column: self.column }
    }

    fn error(&self, at: Span, message: String, expected: &[&str]) -> Error {
        Error::Syntax {
            line: at.line,
            column: at.column,
            message,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut cur = Cursor { src, pos: 0, line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        let start = cur.here();
        let Some(c) = cur.peek() else {
            // end of input is reported at the last token so that truncated
            // input points at the construct left open
            let span = out.last().map(|t: &Token| t.span).unwrap_or(start);
            out.push(Token { kind: TokenKind::Eof, span });
            return Ok(out);
        };
        let kind = match c {
            '0'..='9' => {
                cur.eat_digits();
                if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                    cur.bump();
                    cur.eat_digits();
                }
                if matches!(cur.peek(), Some('e' | 'E')) {
                    let signed = matches!(cur.peek_at(1), Some('+' | '-'));
                    let digit_at = if signed { 2 } else { 1 };
                    if cur.peek_at(digit_at).is_some_and(|d| d.is_ascii_digit()) {
                        cur.bump();
                        if signed {
                            cur.bump();
                        }
                        cur.eat_digits();
                    }
                }
                TokenKind::Number(src[start.start..cur.pos].to_string())
            }
            'x' | 'h' => {
                cur.bump();
                let digits_at = cur.pos;
                if cur.eat_digits() == 0 {
                    let what = if c == 'x' { "x<i>" } else { "h<k>" };
                    return Err(cur.error(start, format!("`{c}` must be followed by an index"), &[what]));
                }
                let text = &src[digits_at..cur.pos];
                let overflow = || cur.error(start, format!("index `{text}` is too large"), &[]);
                if c == 'x' {
                    TokenKind::Var(text.parse().map_err(|_| overflow())?)
                } else {
                    TokenKind::Hermite(text.parse().map_err(|_| overflow())?)
                }
            }
            _ => {
                cur.bump();
                match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    ',' => TokenKind::Comma,
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    other => {
                        return Err(cur.error(start, format!("unexpected character `{other}`"), &[]));
                    }
                }
            }
        };
        let span = Span { end: cur.pos, ..start };
        out.push(Token { kind, span });
    }
}

//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?            # right-associative
//! unary  := '-' unary | atom
//! atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! var    := 'x' | 'y' | 'z'
//! func   := 'sin' | 'cos' | 'exp' | 'log' | 'ln' | 'sqrt'
//! ```

use super::{Expr, Func, Var};
use crate::error::{Error, Result};

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Spanned> {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let tok = match self.peek() {
            None => Tok::End,
            Some(b) => match b {
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'/' => {
                    self.bump();
                    Tok::Slash
                }
                b'^' => {
                    self.bump();
                    Tok::Caret
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
                        self.bump();
                    }
                    if matches!(self.peek(), Some(b'e' | b'E')) {
                        let save = (self.pos, self.line, self.col);
                        self.bump();
                        if matches!(self.peek(), Some(b'+' | b'-')) {
                            self.bump();
                        }
                        if matches!(self.peek(), Some(b'0'..=b'9')) {
                            while matches!(self.peek(), Some(b'0'..=b'9')) {
                                self.bump();
                            }
                        } else {
                            (self.pos, self.line, self.col) = save;
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let v: f64 = text
                        .parse()
                        .map_err(|_| Error::Parse { line, col, msg: format!("invalid number `{text}`") })?;
                    Tok::Num(v)
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_')) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    Tok::Ident(text.to_string())
                }
                other => return Err(self.error(format!("unexpected character `{}`", other as char))),
            },
        };
        Ok(Spanned { tok, line, col })
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.idx]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.idx].clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn error_at(&self, msg: impl Into<String>) -> Error {
        let s = self.peek();
        Error::Parse { line: s.line, col: s.col, msg: msg.into() }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(fold_constant(exp))));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error_at("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "z" => Ok(Expr::Var(Var::Z)),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "sin" | "cos" | "exp" | "log" | "ln" | "sqrt" => {
                    if self.peek().tok != Tok::LParen {
                        return Err(self.error_at(format!("expected `(` after `{name}`")));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if self.peek().tok != Tok::RParen {
                        return Err(self.error_at("expected `)`"));
                    }
                    self.bump();
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "log" | "ln" => Func::Log,
                        _ => Func::Sqrt,
                    };
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                other => Err(Error::Parse {
                    line: t.line,
                    col: t.col,
                    msg: format!("unknown identifier `{other}`"),
                }),
            },
            Tok::End => Err(Error::Parse { line: t.line, col: t.col, msg: "unexpected end of input".into() }),
            other => Err(Error::Parse { line: t.line, col: t.col, msg: format!("unexpected token {other:?}") }),
        }
    }
}

/// Variable-free exponents collapse to literals so integer powers stay on
/// the exact `powi` path.
fn fold_constant(e: Expr) -> Expr {
    fn has_vars(e: &Expr) -> bool {
        match e {
            Expr::Num(_) => false,
            Expr::Var(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => has_vars(a),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                has_vars(a) || has_vars(b)
            }
        }
    }
    if !has_vars(&e) {
        if let Ok(v) = e.eval_xyz(0.0, 0.0, 0.0) {
            return Expr::Num(v);
        }
    }
    e
}

pub fn parse_expression(src: &str) -> Result<Expr> {
    let mut lexer = Lexer::new(src);
    let mut tokens = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let end = t.tok == Tok::End;
        tokens.push(t);
        if end {
            break;
        }
    }
    let mut parser = Parser { tokens, idx: 0 };
    let e = parser.expr()?;
    if parser.peek().tok != Tok::End {
        return Err(parser.error_at("trailing input after expression"));
    }
    Ok(e)
}

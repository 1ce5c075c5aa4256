//! Recursive descent parser for the expression grammar.
//!
//! Errors carry the byte offset of the offending token and the set of token
//! kinds that would have been accepted there.

use super::{BinOp, Builtin, Expr, Func};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the source where the error was detected.
    pub offset: usize,
    /// What the parser found there.
    pub found: String,
    /// Token kinds that would have been accepted.
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at offset {}: found {}, expected {}",
            self.offset,
            self.found,
            self.expected.join(" | ")
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational, bool), // value, is_integer_literal
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(..) => "number".into(),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            let start = lx.pos;
            let Some(&c) = lx.src.get(lx.pos) else {
                out.push((Tok::Eof, start));
                return Ok(out);
            };
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' => lx.number(start)?,
                c if c.is_ascii_alphabetic() => lx.ident(),
                other => {
                    return Err(ParseError {
                        offset: start,
                        found: format!("character {:?}", other as char),
                        expected: vec!["number", "identifier", "operator", "'('", "')'"],
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let mut is_int = true;
        if self.src.get(self.pos) == Some(&b'.') {
            is_int = false;
            self.pos += 1;
            let frac_start = self.pos;
            while matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if self.pos == frac_start {
                return Err(ParseError {
                    offset: self.pos,
                    found: "end of digits".into(),
                    expected: vec!["digit after '.'"],
                });
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value = if let Some(dotpos) = text.find('.') {
            let digits: String = text.chars().filter(|c| *c != '.').collect();
            let numer: BigInt = digits.parse().unwrap();
            let frac_len = text.len() - dotpos - 1;
            BigRational::new(numer, BigInt::from(10).pow(frac_len as u32))
        } else {
            BigRational::from_integer(text.parse().unwrap())
        };
        Ok(Tok::Num(value, is_int))
    }

    fn ident(&mut self) -> Tok {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            offset: self.offset(),
            found: self.peek().describe(),
            expected,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Tok::Caret) {
            self.bump();
            match self.bump() {
                Tok::Num(r, true) => {
                    let n = num_traits::ToPrimitive::to_u32(r.numer()).ok_or_else(|| ParseError {
                        offset: self.toks[self.at - 1].1,
                        found: "oversized exponent".into(),
                        expected: vec!["integer exponent (fits in u32)"],
                    })?;
                    return Ok(Expr::Pow(Box::new(base), n));
                }
                _ => {
                    return Err(ParseError {
                        offset: self.toks[self.at - 1].1,
                        found: self.toks[self.at - 1].0.describe(),
                        expected: vec!["integer literal exponent"],
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(r, _) => {
                self.bump();
                Ok(Expr::Num(r))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    if !matches!(self.peek(), Tok::LParen) {
                        return Err(self.err(vec!["'(' after function name"]));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if !matches!(self.peek(), Tok::RParen) {
                        return Err(self.err(vec!["')'"]));
                    }
                    self.bump();
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(b) = Builtin::from_name(&name) {
                    return Ok(Expr::Builtin(b));
                }
                Ok(Expr::Param(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if !matches!(self.peek(), Tok::RParen) {
                    return Err(self.err(vec!["')'"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.err(vec!["number", "identifier", "function", "'('", "'-'"])),
        }
    }
}

/// Parse DSL source text into an [`Expr`].
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.err(vec!["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_product_with_function() {
        let e = parse("f1*cos(t)").unwrap();
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Mul,
                Box::new(Expr::Param("f1".into())),
                Box::new(Expr::Call(Func::Cos, Box::new(Expr::Param("t".into())))),
            )
        );
    }

    #[test]
    fn parses_reserved_constants() {
        let e = parse("(sigma/sqrt(q))*f1*sin(t)").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(vars, ["f1", "t"]);
    }

    #[test]
    fn reports_offset_and_expectations() {
        let err = parse("f1 + * 2").unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(err.expected.contains(&"number"));
    }

    #[test]
    fn rejects_trailing_garbage() {
        let err = parse("f1 f2").unwrap_err();
        assert_eq!(err.offset, 3);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(parse("x^y").is_err());
        assert!(parse("x^2.5").is_err());
        assert!(parse("x^2").is_ok());
    }

    #[test]
    fn function_requires_parens() {
        assert!(parse("sin x").is_err());
        assert!(parse("sin(x)").is_ok());
    }

    #[test]
    fn lexical_error_has_offset() {
        let err = parse("a + $").unwrap_err();
        assert_eq!(err.offset, 4);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parser_never_panics(src in "\\PC{0,64}") {
                let _ = parse(&src);
            }

            #[test]
            fn every_error_offset_is_in_bounds(src in "[a-z0-9+*/()^. -]{0,40}") {
                if let Err(e) = parse(&src) {
                    prop_assert!(e.offset <= src.len());
                    prop_assert!(!e.expected.is_empty());
                }
            }
        }
    }

    #[test]
    fn precedence_pow_over_neg_over_mul() {
        // -x^2 is -(x^2); a+b*c is a+(b*c); 2^3*4 is (2^3)*4
        assert_eq!(parse("-x^2").unwrap().render(), "-x^2");
        assert_eq!(
            parse("a+b*c").unwrap(),
            Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Param("a".into())),
                Box::new(Expr::Bin(
                    BinOp::Mul,
                    Box::new(Expr::Param("b".into())),
                    Box::new(Expr::Param("c".into())),
                )),
            )
        );
    }
}

//! Recursive-descent parser for the expression DSL.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?          right-associative, constant exponent
//! atom   := number | name | func '(' expr ')' | '(' expr ')'
//! ```

use std::f64::consts;
use std::fmt;

use thiserror::Error;

use super::{BinaryOp, Expr, ExprKind, Span, UnaryOp};

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    InvalidNumber(String),
    UnknownIdentifier(String),
    UnknownFunction(String),
    Arity { function: String, found: usize },
    NonConstantExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found {found:?}")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number {s:?}"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier {s:?}"),
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function {s:?}"),
            ParseErrorKind::Arity { function, found } => {
                write!(f, "{function} takes 1 argument, got {found}")
            }
            ParseErrorKind::NonConstantExponent => {
                write!(f, "exponents must be constant expressions")
            }
        }
    }
}

/// Parse failure at byte `offset` of the input.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, col)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => x.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Op(c) => c.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let value = s.parse::<f64>().map_err(|_| ParseError {
                offset: start,
                kind: ParseErrorKind::InvalidNumber(s.to_string()),
            })?;
            out.push((Tok::Num(value), Span::new(start, i)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), Span::new(start, i)));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                let ch = text[i..].chars().next().unwrap_or(c);
                return Err(ParseError {
                    offset: i,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        };
        i += 1;
        out.push((tok, Span::new(start, i)));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    len: usize,
    chart: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(_, s)| s.start)
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        self.pos += 1;
        t
    }

    fn fail(&self, expected: &'static str) -> ParseError {
        match self.toks.get(self.pos) {
            Some((t, s)) => ParseError {
                offset: s.start,
                kind: ParseErrorKind::UnexpectedToken {
                    found: t.describe(),
                    expected,
                },
            },
            None => ParseError {
                offset: self.len,
                kind: ParseErrorKind::UnexpectedEnd { expected },
            },
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                let (_, span) = self.bump();
                let arg = self.unary()?;
                let span = span.join(arg.span());
                Ok(Expr::new(ExprKind::Unary(UnaryOp::Neg, Box::new(arg)), span))
            }
            Some(Tok::Op('+')) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let at = self.offset();
            let exponent = self.unary()?;
            if !exponent.is_constant() {
                return Err(ParseError {
                    offset: at,
                    kind: ParseErrorKind::NonConstantExponent,
                });
            }
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.fail("a number, name or '('"));
        };
        match tok {
            Tok::Num(x) => {
                let (_, span) = self.bump();
                Ok(Expr::new(ExprKind::Const(x), span))
            }
            Tok::LParen => {
                let (_, open) = self.bump();
                let mut inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        let (_, close) = self.bump();
                        inner.span = open.join(close);
                        Ok(inner)
                    }
                    _ => Err(self.fail("')'")),
                }
            }
            Tok::Ident(name) => {
                let (_, span) = self.bump();
                if let Some(Tok::LParen) = self.peek() {
                    return self.call(name, span);
                }
                if let Some(index) = self.chart.iter().position(|c| *c == name) {
                    return Ok(Expr::new(ExprKind::Var(index), span));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::new(ExprKind::Const(consts::PI), span)),
                    "e" => Ok(Expr::new(ExprKind::Const(consts::E), span)),
                    _ => Err(ParseError {
                        offset: span.start,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    }),
                }
            }
            _ => Err(self.fail("a number, name or '('")),
        }
    }

    fn call(&mut self, name: String, name_span: Span) -> Result<Expr, ParseError> {
        let Some(op) = UnaryOp::from_name(&name) else {
            return Err(ParseError {
                offset: name_span.start,
                kind: ParseErrorKind::UnknownFunction(name),
            });
        };
        self.bump(); // '('
        let mut args = Vec::new();
        if let Some(Tok::RParen) = self.peek() {
            // zero arguments, reported as arity below
        } else {
            args.push(self.expr()?);
            while let Some(Tok::Comma) = self.peek() {
                self.bump();
                args.push(self.expr()?);
            }
        }
        let close = match self.peek() {
            Some(Tok::RParen) => self.bump().1,
            _ => return Err(self.fail("')'")),
        };
        if args.len() != 1 {
            return Err(ParseError {
                offset: name_span.start,
                kind: ParseErrorKind::Arity {
                    function: name,
                    found: args.len(),
                },
            });
        }
        let arg = args.pop().expect("one argument");
        Ok(Expr::new(
            ExprKind::Unary(op, Box::new(arg)),
            name_span.join(close),
        ))
    }
}

/// Parses `text` into an expression over the coordinates named in `chart`.
pub fn parse_expression(text: &str, chart: &[String]) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        len: text.len(),
        chart,
    };
    let expr = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return Err(parser.fail("an operator or end of input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Vec<String> {
        ["u", "v", "w"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn product_of_three_factors() {
        let e = parse_expression("w*u*cos(v)", &chart()).unwrap();
        let expected = Expr::binary(
            BinaryOp::Mul,
            Expr::binary(BinaryOp::Mul, Expr::var(2), Expr::var(0)),
            Expr::unary(UnaryOp::Cos, Expr::var(1)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn zero_is_a_constant() {
        assert_eq!(parse_expression("0", &chart()).unwrap(), Expr::constant(0.0));
    }

    #[test]
    fn nested_inverse_cosine() {
        let e = parse_expression("acos((u^2-1)/(u^2+1))", &chart()).unwrap();
        let ExprKind::Unary(UnaryOp::Acos, inner) = e.kind() else {
            panic!("expected acos node");
        };
        assert!(matches!(inner.kind(), ExprKind::Binary(BinaryOp::Div, _, _)));
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_minus() {
        let c = chart();
        let e = parse_expression("-u^2^3", &c).unwrap();
        let expected = Expr::unary(
            UnaryOp::Neg,
            Expr::binary(
                BinaryOp::Pow,
                Expr::var(0),
                Expr::binary(BinaryOp::Pow, Expr::constant(2.0), Expr::constant(3.0)),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn errors_report_offsets() {
        let c = chart();
        let err = parse_expression("u + x", &c).unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("x".into()));

        let err = parse_expression("u * (v + 1", &c).unwrap_err();
        assert_eq!(err.offset, 10);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));

        let err = parse_expression("sin(u, v)", &c).unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(matches!(err.kind, ParseErrorKind::Arity { found: 2, .. }));

        let err = parse_expression("u ^ v", &c).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonConstantExponent);

        let err = parse_expression("u $ v", &c).unwrap_err();
        assert_eq!(err.offset, 2);

        let err = parse_expression("foo(u)", &c).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("foo".into()));

        let err = parse_expression("u v", &c).unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn line_and_column() {
        let text = "ab\ncd\nef";
        assert_eq!(line_col(text, 0), (1, 1));
        assert_eq!(line_col(text, 4), (2, 2));
        assert_eq!(line_col(text, 6), (3, 1));
    }

    #[test]
    fn scientific_notation() {
        let e = parse_expression("1.5e-3 + .5", &chart()).unwrap();
        assert!((e.eval(&[0.0, 0.0, 0.0]).unwrap() - 0.5015).abs() < 1e-15);
    }
}

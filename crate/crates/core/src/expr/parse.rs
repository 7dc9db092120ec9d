//! Recursive-descent parser.
//!
//! ```text
//! expr    := term { ("+"|"-") term } ;
//! term    := factor { ("*"|"/") factor } ;
//! factor  := unary [ "^" factor ] ;
//! unary   := "-" unary | primary ;
//! primary := NUMBER | IDENT | IDENT "(" expr { "," expr } ")" | "(" expr ")" ;
//! ```
//!
//! Positions are zero-based character columns.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{BinOp, Expr, Func, VarSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at column {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown identifier `{name}` at column {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("`{function}` takes {expected} argument(s), got {found}")]
    Arity {
        function: String,
        expected: usize,
        found: usize,
    },
    #[error("empty expression")]
    Empty,
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. } => Some(*position),
            _ => None,
        }
    }
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
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lexeme: String = chars[start..i].iter().collect();
            match lexeme.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push((Tok::Num(v), start)),
                _ => {
                    return Err(ParseError::Syntax {
                        position: start,
                        expected: vec!["number"],
                        found: format!("`{lexeme}`"),
                    })
                }
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else {
            return Err(ParseError::Syntax {
                position: start,
                expected: vec!["expression"],
                found: format!("`{c}`"),
            });
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a VarSpec,
    constants: &'a BTreeMap<String, f64>,
}

const PRIMARY: &[&str] = &["number", "identifier", "`(`", "`-`"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            position: self.column(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
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
            lhs = Expr::binary(op, lhs, self.term()?);
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
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let column = self.column();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::constant(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownIdentifier {
                        name: name.clone(),
                        position: column,
                    })?;
                    if args.len() != 1 {
                        return Err(ParseError::Arity {
                            function: name,
                            expected: 1,
                            found: args.len(),
                        });
                    }
                    return Ok(Expr::call(func, args.pop().unwrap()));
                }
                if let Some(i) = self.vars.index_of(&name) {
                    Ok(Expr::var(i))
                } else if let Some(&c) = self.constants.get(&name) {
                    Ok(Expr::constant(c))
                } else {
                    Err(ParseError::UnknownIdentifier {
                        name,
                        position: column,
                    })
                }
            }
            _ => Err(self.error(PRIMARY)),
        }
    }
}

/// Parse `text` over the declared variables.
pub fn parse(text: &str, vars: &VarSpec) -> Result<Expr, ParseError> {
    parse_with_constants(text, vars, &BTreeMap::new())
}

/// Parse with named numeric constants, which are folded into literals.
/// Variables shadow constants of the same name.
pub fn parse_with_constants(
    text: &str,
    vars: &VarSpec,
    constants: &BTreeMap<String, f64>,
) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars,
        constants,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Identifiers used as variables in `text`, in order of first appearance,
/// skipping builtin calls and names bound in `constants`.
pub fn free_identifiers(
    text: &str,
    constants: &BTreeMap<String, f64>,
) -> Result<Vec<String>, ParseError> {
    let toks = lex(text)?;
    let mut names: Vec<String> = Vec::new();
    for (k, (t, _)) in toks.iter().enumerate() {
        if let Tok::Ident(name) = t {
            let is_call = matches!(toks.get(k + 1), Some((Tok::LParen, _)));
            if !is_call && !constants.contains_key(name) && !names.contains(name) {
                names.push(name.clone());
            }
        }
    }
    Ok(names)
}

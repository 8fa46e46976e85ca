//! Text input: a `ring v1 ... vn` header followed by one polynomial per line.
//! `#` starts a comment.

use num_complex::Complex64;

use super::{LaurentPolynomial, PolynomialSystem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, imaginary: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(src: &str, line: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let column = i + 1;
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Spanned { tok, column });
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // optional decimal exponent
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
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| syntax(line, column, format!("malformed number `{text}`")))?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars
                    .get(i + 1)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_');
            if imaginary {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Num { value, imaginary },
                column,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        return Err(syntax(line, column, format!("unexpected character `{ch}`")));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
    end_column: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.column)
            .unwrap_or(self.end_column)
    }

    fn n(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<LaurentPolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPolynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                // juxtaposition, e.g. `2x` or `(x+1)(x-1)`
                Some(Tok::Num { .. }) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<LaurentPolynomial> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.scale(Complex64::new(-1.0, 0.0)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<LaurentPolynomial> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let column = self.column();
        let k = self.integer_exponent()?;
        base.pow(k).ok_or_else(|| {
            syntax(
                self.line,
                column,
                "negative exponent applied to a non-monomial",
            )
        })
    }

    fn integer_exponent(&mut self) -> Result<i64> {
        let column = self.column();
        let mut sign = 1;
        let mut parens = false;
        if self.peek() == Some(&Tok::LParen) {
            parens = true;
            self.pos += 1;
        }
        while let Some(tok @ (Tok::Minus | Tok::Plus)) = self.peek() {
            if *tok == Tok::Minus {
                sign = -sign;
            }
            self.pos += 1;
        }
        let k = match self.peek() {
            Some(Tok::Num {
                value,
                imaginary: false,
            }) if value.fract() == 0.0 && value.abs() < 1e9 => *value as i64,
            _ => return Err(syntax(self.line, column, "expected integer exponent")),
        };
        self.pos += 1;
        if parens {
            if self.peek() != Some(&Tok::RParen) {
                return Err(syntax(self.line, self.column(), "expected `)`"));
            }
            self.pos += 1;
        }
        Ok(sign * k)
    }

    fn atom(&mut self) -> Result<LaurentPolynomial> {
        let column = self.column();
        let n = self.n();
        match self.peek().cloned() {
            Some(Tok::Num { value, imaginary }) => {
                self.pos += 1;
                let c = if imaginary {
                    Complex64::new(0.0, value)
                } else {
                    Complex64::new(value, 0.0)
                };
                Ok(LaurentPolynomial::constant(n, c))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(j) = self.vars.iter().position(|v| *v == name) {
                    Ok(LaurentPolynomial::variable(n, j))
                } else if name == "i" {
                    Ok(LaurentPolynomial::constant(n, Complex64::new(0.0, 1.0)))
                } else {
                    Err(Error::UnknownVariable {
                        name,
                        line: self.line,
                        column,
                    })
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax(self.line, self.column(), "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(tok) => Err(syntax(self.line, column, format!("unexpected token {tok:?}"))),
            None => Err(syntax(self.line, column, "unexpected end of line")),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    }
}

/// Parses the system text format.
pub fn parse_system(text: &str) -> Result<PolynomialSystem> {
    let mut vars: Option<Vec<String>> = None;
    let mut polys = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let Some(names) = &vars else {
            let mut words = body.split_whitespace();
            if words.next() != Some("ring") {
                return Err(syntax(line, 1, "expected `ring` declaration"));
            }
            let names: Vec<String> = words.map(str::to_string).collect();
            if names.is_empty() {
                return Err(syntax(line, 1, "ring declares no variables"));
            }
            for (k, v) in names.iter().enumerate() {
                let ok = v.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                    && v.chars().all(|c| c.is_alphanumeric() || c == '_');
                if !ok || names[..k].contains(v) {
                    return Err(syntax(line, 1, format!("invalid variable name `{v}`")));
                }
            }
            vars = Some(names);
            continue;
        };
        let toks = tokenize(body, line)?;
        let mut parser = Parser {
            toks,
            pos: 0,
            line,
            end_column: body.chars().count() + 1,
            vars: names,
        };
        let p = parser.expr()?;
        if parser.pos != parser.toks.len() {
            return Err(syntax(line, parser.column(), "trailing input"));
        }
        if p.is_zero() {
            return Err(Error::EmptyPolynomial { line });
        }
        polys.push(p);
    }
    let vars = vars.ok_or(Error::EmptySystem)?;
    if polys.is_empty() {
        return Err(Error::EmptySystem);
    }
    PolynomialSystem::with_names(polys, vars)
}

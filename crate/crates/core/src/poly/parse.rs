use num_bigint::BigInt;

use super::{Rational, WPolynomial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
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

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
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
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].parse().expect("digits")), start));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(Error::Syntax { offset: start, message: format!("unexpected character `{other}`") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: &str) -> Result<T> {
        Err(Error::Syntax { offset: self.offset(), message: message.to_string() })
    }

    fn expr(&mut self) -> Result<WPolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<WPolynomial> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.unary()?)?;
        }
        match self.peek() {
            Tok::Int(_) | Tok::Ident(_) | Tok::LParen => self.err("implicit multiplication is not allowed"),
            _ => Ok(acc),
        }
    }

    fn unary(&mut self) -> Result<WPolynomial> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<WPolynomial> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        match self.bump().0 {
            Tok::Int(e) => {
                let e: u32 = e.try_into().map_err(|_| Error::Syntax { offset: at, message: "exponent too large".into() })?;
                Ok(base.pow(e))
            }
            Tok::Minus => Err(Error::NegativeExponent { offset: at }),
            _ => Err(Error::Syntax { offset: at, message: "expected a non-negative integer exponent".into() }),
        }
    }

    fn atom(&mut self) -> Result<WPolynomial> {
        let n = self.vars.len();
        let (tok, at) = self.bump();
        match tok {
            Tok::Int(num) => {
                let mut value = Rational::from_integer(num);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dat = self.offset();
                    match self.bump().0 {
                        Tok::Int(den) if den != BigInt::from(0) => value /= Rational::from_integer(den),
                        Tok::Int(_) => return Err(Error::Syntax { offset: dat, message: "zero denominator".into() }),
                        _ => return Err(Error::Syntax { offset: dat, message: "expected an integer denominator".into() }),
                    }
                }
                Ok(WPolynomial::constant(n, value))
            }
            Tok::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(WPolynomial::var(n, i)),
                None => Err(Error::UnknownVariable { name, offset: at }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(Error::Syntax { offset: at, message: "unexpected end of input".into() }),
            _ => Err(Error::Syntax { offset: at, message: "expected a number, variable or `(`".into() }),
        }
    }
}

/// Parse a polynomial over the named variables.
///
/// Grammar: integer and `p/q` literals, variables, `+ - *`, `^` with a
/// non-negative integer exponent, parentheses. Juxtaposition is rejected.
pub fn parse_poly(text: &str, var_names: &[String]) -> Result<WPolynomial> {
    let mut p = Parser { toks: lex(text)?, pos: 0, vars: var_names };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(out)
}

//! Reads polynomial text such as `-6*n*s^3 + 3*(n+1)*s^2 - (1+n)*(1+2*b2)`.
//!
//! Grammar: integers, the variables `s`, `b2`, `n`, binary `+ - *`, unary
//! minus, parentheses and `^` with a non-negative integer exponent.

use num_rational::BigRational;
use num_bigint::BigInt;

use super::mpoly::{MPoly, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Var(Var),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v: BigInt = text.parse().map_err(|e: num_bigint::ParseBigIntError| Error::Parse(e.to_string()))?;
            out.push(Tok::Num(BigRational::from_integer(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            let v = match name.as_str() {
                "s" => Var::S,
                "b2" => Var::B2,
                "n" => Var::N,
                other => return Err(Error::Parse(format!("unknown variable {other:?}"))),
            };
            out.push(Tok::Var(v));
        } else if "+-*^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<MPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            acc = acc.checked_mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MPoly> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<MPoly> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(k)) if k.is_integer() => {
                    self.pos += 1;
                    let k: u32 = k.to_integer().try_into().map_err(|_| Error::ExponentOverflow)?;
                    return base.checked_pow(k);
                }
                other => return Err(Error::Parse(format!("expected an exponent, found {other:?}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MPoly> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(MPoly::constant(v))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(MPoly::var(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(inner)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

pub(crate) fn parse_poly(src: &str) -> Result<MPoly> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(out)
}

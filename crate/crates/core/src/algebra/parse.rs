//! A small infix reader for series, e.g. `1/2*x1*xs1 - lambda*x2^2`.
//!
//! Products are taken in the written order, so `xs2*xs1` equals `-xs1*xs2`.

use std::sync::Arc;

use num_bigint::BigInt;

use super::context::{VariableContext, LAMBDA};
use super::series::{Rational, SuperSeries};
use crate::error::{Error, Result};

pub fn parse_series(ctx: &Arc<VariableContext>, text: &str) -> Result<SuperSeries> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        ctx,
        tokens,
        pos: 0,
    };
    let s = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!("unexpected `{:?}` in `{text}`", p.tokens[p.pos])));
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
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
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Int(s.parse().expect("digits")));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Name(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    ctx: &'a Arc<VariableContext>,
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<SuperSeries> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SuperSeries> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            acc = acc.mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<SuperSeries> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            match self.tokens.get(self.pos).cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| Error::Parse("exponent too large".into()))?;
                    base.pow(e)
                }
                _ => Err(Error::Parse("expected integer exponent".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<SuperSeries> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let mut q = Rational::from_integer(n);
                if self.eat('/') {
                    match self.tokens.get(self.pos).cloned() {
                        Some(Tok::Int(d)) if d != BigInt::from(0) => {
                            self.pos += 1;
                            q /= Rational::from_integer(d);
                        }
                        _ => return Err(Error::Parse("expected nonzero denominator".into())),
                    }
                }
                Ok(SuperSeries::constant(self.ctx, q))
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                if name == LAMBDA {
                    Ok(SuperSeries::lambda(self.ctx))
                } else {
                    SuperSeries::named(self.ctx, &name)
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing `)`".into()));
                }
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected {other:?}"))),
        }
    }
}

impl VariableContext {
    /// Shorthand for [`parse_series`].
    pub fn parse(self: &Arc<Self>, text: &str) -> Result<SuperSeries> {
        parse_series(self, text)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::context::{Parity, Role};

    fn ctx() -> Arc<VariableContext> {
        VariableContext::builder()
            .var("x1", Parity::Even, Role::Base)
            .var("xs1", Parity::Odd, Role::Base)
            .var("xs2", Parity::Odd, Role::Base)
            .build()
            .unwrap()
    }

    #[test]
    fn written_order_sets_the_sign() {
        let c = ctx();
        assert_eq!(c.parse("xs2*xs1").unwrap(), c.parse("-xs1*xs2").unwrap());
        assert_eq!(
            c.parse("(x1 + 1)^2").unwrap(),
            c.parse("x1^2 + 2*x1 + 1").unwrap()
        );
        assert_eq!(
            c.parse("1/2*x1 + 1/2*x1").unwrap(),
            c.parse("x1").unwrap()
        );
    }

    #[test]
    fn errors_are_reported() {
        let c = ctx();
        assert!(matches!(c.parse("y"), Err(Error::Context(_))));
        assert!(matches!(c.parse("x1 +"), Err(Error::Parse(_))));
        assert!(matches!(c.parse("1/0"), Err(Error::Parse(_))));
    }
}

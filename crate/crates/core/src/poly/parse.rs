//! Recursive-descent parser for the human-readable polynomial syntax, e.g.
//! `3*d^4*(t-4*d^2)^2` or `-1/2*x`.

use num_bigint::BigInt;

use super::MPoly;
use crate::error::{Error, Result};
use crate::number::Rat;

pub fn parse_poly(src: &str) -> Result<MPoly> {
    let mut p = Parser {
        src,
        chars: src.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(),
        pos: 0,
    };
    let out = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn error(&self, msg: &str) -> Error {
        let offset = self.chars.get(self.pos).map_or(self.src.len(), |&(i, _)| i);
        Error::parse(format!("polynomial `{}` offset {offset}", self.src), msg)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // expr := ['+'|'-'] term (('+'|'-') term)*
    fn expr(&mut self) -> Result<MPoly> {
        let mut acc = if self.eat('-') {
            -&self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
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

    // term := factor (('*'|'/') factor)*, division only by rational constants
    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.factor()?;
            } else if self.eat('/') {
                let den = self.factor()?;
                let c = den
                    .as_constant()
                    .filter(|c| !num_traits::Zero::is_zero(c))
                    .ok_or_else(|| self.error("division only by nonzero constants"))?;
                acc = acc.scale(&c.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    // factor := atom ('^' integer)?
    fn factor(&mut self) -> Result<MPoly> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.integer()?;
            let e: u32 = e
                .try_into()
                .map_err(|_| self.error("exponent out of range"))?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MPoly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some('-') => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            Some(c) if c.is_ascii_digit() => Ok(MPoly::constant(Rat::from_integer(self.integer()?))),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
                Ok(MPoly::var(&name))
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        digits.parse().map_err(|_| self.error("invalid integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly("3*").is_err());
        assert!(parse_poly("(a+b").is_err());
        assert!(parse_poly("a/b").is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_poly("2*x^2").unwrap(), parse_poly("2*(x*x)").unwrap());
        assert_eq!(parse_poly("-x^2").unwrap(), parse_poly("-(x^2)").unwrap());
        assert_eq!(parse_poly("1/2*x").unwrap(), parse_poly("x/2").unwrap());
    }
}

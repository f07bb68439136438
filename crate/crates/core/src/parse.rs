//! A small infix parser for polynomial expressions such as
//! `x1*x2^2 - 3/4*t + (t-1)^3`.
//!
//! Division is only accepted when the divisor is a nonzero constant.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::PolyError;
use crate::{Rat, RatPoly};

pub fn parse_poly(src: &str, vars: &[&str]) -> Result<RatPoly, PolyError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        vars,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse {
            column: self.pos + 1,
            message: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<RatPoly, PolyError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc += &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatPoly, PolyError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    match d.constant_value() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&(Rat::from_integer(1.into()) / c)),
                        _ => {
                            self.pos = at;
                            return Err(self.err("division by a non-constant or zero"));
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatPoly, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatPoly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a nonnegative integer exponent"));
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatPoly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(RatPoly::var(self.nvars(), i)),
                    None => {
                        self.pos = start;
                        Err(self.err(&format!("unknown variable '{name}'")))
                    }
                }
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<RatPoly, PolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        let mut frac = String::new();
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac = std::str::from_utf8(&self.src[fs..self.pos]).unwrap().to_string();
        }
        if int_part.is_empty() && frac.is_empty() {
            return Err(self.err("malformed number"));
        }
        let digits = format!("{int_part}{frac}");
        let num: BigInt = digits.parse().map_err(|_| self.err("malformed number"))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        Ok(RatPoly::constant(self.nvars(), Rat::new(num, den)))
    }
}

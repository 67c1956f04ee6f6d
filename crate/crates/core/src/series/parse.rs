//! Text form of a series:
//!
//! ```text
//! series := term ("+" term)* ["+" "O(X^" int ")"] | "O(X^" int ")"
//! term   := coeff ["*" "X^" int] | "X^" int
//! ```
//!
//! Coefficients are integers reduced mod p; a missing `O(..)` term means the
//! series is exact. Whitespace is ignored. A bare `X` is read as `X^1`.

use super::LaurentSeries;
use crate::error::{Error, Result};
use crate::ff::Prime;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            message: message.into(),
        })
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let begin = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = begin;
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.src[begin..self.pos]).unwrap();
        text.parse().or_else(|_| {
            self.pos = begin;
            self.err("integer out of range")
        })
    }

    fn power_of_x(&mut self) -> Result<i64> {
        self.expect(b'X')?;
        if self.eat(b'^') {
            self.int()
        } else {
            Ok(1)
        }
    }
}

impl LaurentSeries {
    /// Parses the text grammar over `F_p`.
    pub fn parse(p: Prime, text: &str) -> Result<Self> {
        let mut ps = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut terms = Vec::new();
        let mut precision = None;
        loop {
            match ps.peek() {
                None => return ps.err("unexpected end of input"),
                Some(b'O') => {
                    ps.pos += 1;
                    ps.expect(b'(')?;
                    precision = Some(ps.power_of_x()?);
                    ps.expect(b')')?;
                    break;
                }
                Some(b'X') => terms.push((ps.power_of_x()?, 1)),
                Some(_) => {
                    let c = ps.int()?;
                    if ps.eat(b'*') {
                        terms.push((ps.power_of_x()?, c));
                    } else {
                        terms.push((0, c));
                    }
                }
            }
            if !ps.eat(b'+') {
                break;
            }
        }
        if ps.peek().is_some() {
            return ps.err("trailing input");
        }
        if let Some(n) = precision {
            if let Some(&(e, _)) = terms.iter().find(|t| t.0 >= n) {
                return Err(Error::Parse {
                    position: 0,
                    message: format!("term X^{e} lies at or above the precision O(X^{n})"),
                });
            }
        }
        Ok(Self::from_terms(p, &terms, precision))
    }
}

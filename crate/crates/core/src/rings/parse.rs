//! Recursive-descent parser for polynomial text such as `5*t + v*t^2`.
//!
//! Grammar:
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := power ('*' power)*
//! power  := atom ['^' ['-'] int]
//! atom   := int ['/' int] | ident | '(' expr ')'
//! ```
//! Identifiers are `t` (when allowed), `v` in Laurent rings, and the ring's
//! formal generator names. Negative exponents are only allowed on units.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{CoeffRing, RingElem};
use crate::error::{Error, Result};

/// A polynomial in `t` with ring coefficients, keyed by `t`-degree.
pub type TPoly = BTreeMap<u32, RingElem>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Int(s[start..i].parse().unwrap())));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < b.len() && b[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::parse(i, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    ring: &'a CoeffRing,
    allow_t: bool,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<TPoly> {
        let mut neg = false;
        if self.eat('-') {
            neg = true;
        } else {
            self.eat('+');
        }
        let mut acc = self.term()?;
        if neg {
            acc = neg_poly(self.ring, &acc);
        }
        loop {
            if self.eat('+') {
                let t = self.term()?;
                acc = add_poly(self.ring, &acc, &t);
            } else if self.eat('-') {
                let t = self.term()?;
                acc = add_poly(self.ring, &acc, &neg_poly(self.ring, &t));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<TPoly> {
        let mut acc = self.power()?;
        while self.eat('*') {
            let f = self.power()?;
            acc = mul_poly(self.ring, &acc, &f);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<TPoly> {
        let base_pos = self.here();
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let at = self.here();
        let e = match self.peek() {
            Some(Tok::Int(n)) => {
                let n =
                    u32::try_from(n.clone()).map_err(|_| Error::parse(at, "exponent too large"))?;
                self.pos += 1;
                n
            }
            _ => return Err(Error::parse(at, "expected an integer exponent")),
        };
        let base = if neg {
            let c = match (base.len(), base.get(&0)) {
                (1, Some(c)) => c.clone(),
                _ => return Err(Error::parse(base_pos, "negative power of a non-unit")),
            };
            let inv = self
                .ring
                .inverse(&c)
                .map_err(|_| Error::parse(base_pos, "negative power of a non-unit"))?;
            TPoly::from([(0, inv)])
        } else {
            base
        };
        let mut r = TPoly::from([(0, self.ring.one())]);
        for _ in 0..e {
            r = mul_poly(self.ring, &r, &base);
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<TPoly> {
        let at = self.here();
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let c = if self.eat('/') {
                    let dpos = self.here();
                    let d = match self.peek() {
                        Some(Tok::Int(d)) => d.clone(),
                        _ => return Err(Error::parse(dpos, "expected a denominator")),
                    };
                    self.pos += 1;
                    self.ring
                        .from_ratio(&n, &d)
                        .map_err(|e| Error::parse(dpos, e.to_string()))?
                } else {
                    self.ring.from_bigint(&n)
                };
                Ok(constant(c))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "t" && self.allow_t {
                    return Ok(TPoly::from([(1, self.ring.one())]));
                }
                if name == "v" {
                    let v = self
                        .ring
                        .v_pow(1)
                        .map_err(|_| Error::parse(at, "ring has no Laurent variable v"))?;
                    return Ok(constant(v));
                }
                match self.ring.formal_gen_by_name(&name) {
                    Some(g) => Ok(constant(g)),
                    None => Err(Error::parse(at, format!("unknown symbol {name:?}"))),
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::parse(self.here(), "expected ')'"));
                }
                Ok(e)
            }
            Some(Tok::Sym(c)) => Err(Error::parse(at, format!("unexpected {c:?}"))),
            None => Err(Error::parse(at, "unexpected end of input")),
        }
    }
}

fn constant(c: RingElem) -> TPoly {
    let mut p = TPoly::new();
    if !c.is_zero() {
        p.insert(0, c);
    }
    p
}

fn add_poly(r: &CoeffRing, a: &TPoly, b: &TPoly) -> TPoly {
    let mut out = a.clone();
    for (k, c) in b {
        let s = r.add(out.get(k).unwrap_or(&RingElem::zero()), c);
        if s.is_zero() {
            out.remove(k);
        } else {
            out.insert(*k, s);
        }
    }
    out
}

fn neg_poly(r: &CoeffRing, a: &TPoly) -> TPoly {
    a.iter().map(|(k, c)| (*k, r.neg(c))).collect()
}

fn mul_poly(r: &CoeffRing, a: &TPoly, b: &TPoly) -> TPoly {
    let mut out = TPoly::new();
    for (i, x) in a {
        for (j, y) in b {
            let term = TPoly::from([(i + j, r.mul(x, y))]);
            out = add_poly(r, &out, &term);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Parse `s` as a polynomial in `t` (when `allow_t`) over `ring`.
pub fn parse_tpoly(ring: &CoeffRing, s: &str, allow_t: bool) -> Result<TPoly> {
    let toks = lex(s)?;
    let mut p = Parser {
        ring,
        allow_t,
        toks,
        pos: 0,
        end: s.len(),
    };
    if p.toks.is_empty() {
        return Err(Error::parse(0, "empty expression"));
    }
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(p.here(), "trailing input"));
    }
    Ok(out)
}

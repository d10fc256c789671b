//! Exact coefficient rings.
//!
//! A [`CoeffRing`] is one of ℚ, 𝔽_p or ℤ/p^K (the finite-precision stand-in
//! for the p-adic integers), optionally extended by an invertible even
//! variable `v` and by commuting formal polynomial generators. Elements are
//! [`RingElem`]s: finitely supported maps from [`Monomial`]s to exact
//! [`Scalar`]s. All arithmetic goes through the ring, which owns the modulus.

mod parse;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use parse::{parse_tpoly, TPoly};

/// Maximum number of formal polynomial generators a ring may carry.
pub const MAX_FORMAL: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Rationals,
    PrimeField(u64),
    TruncatedPadic { p: u64, precision: u32 },
}

/// A monomial `v^v · Π x_i^{e_i}` in the Laurent variable and the formal
/// generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub v: i32,
    pub formal: [u16; MAX_FORMAL],
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        v: 0,
        formal: [0; MAX_FORMAL],
    };

    pub fn v_pow(k: i32) -> Self {
        Monomial { v: k, ..Self::ONE }
    }

    pub fn generator(i: usize) -> Self {
        let mut m = Self::ONE;
        m.formal[i] = 1;
        m
    }

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }

    pub fn has_formal(&self) -> bool {
        self.formal.iter().any(|&e| e != 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut formal = [0u16; MAX_FORMAL];
        for (i, slot) in formal.iter_mut().enumerate() {
            *slot = self.formal[i]
                .checked_add(other.formal[i])
                .expect("formal exponent overflow");
        }
        Monomial {
            v: self.v + other.v,
            formal,
        }
    }

    /// Degree under the 2-periodic convention (`|v| = 2`, formal generators
    /// are treated as degree zero).
    pub fn degree(&self) -> i64 {
        2 * self.v as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Residue(u64),
}

type Terms = SmallVec<[(Monomial, Scalar); 1]>;

/// An element of a [`CoeffRing`]. Terms are sorted by monomial and never
/// carry a zero scalar, so structural equality is ring equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RingElem {
    terms: Terms,
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem {
            terms: SmallVec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.terms
    }

    /// Parity of the element under the 2-periodic convention. Coefficients
    /// are always even.
    pub fn is_homogeneous(&self) -> bool {
        self.terms.windows(2).all(|w| w[0].0.v == w[1].0.v)
    }

    fn from_sorted(terms: Terms) -> Self {
        RingElem { terms }
    }
}

/// A coefficient ring. Cheap to clone; compare by value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffRing {
    kind: RingKind,
    laurent: bool,
    formal: Arc<Vec<String>>,
    modulus: u64,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

impl CoeffRing {
    pub fn new(kind: RingKind, laurent: bool) -> Result<Self> {
        let modulus = match kind {
            RingKind::Rationals => 0,
            RingKind::PrimeField(p) => {
                if !is_prime(p) {
                    return Err(Error::InvalidRing(format!("{p} is not prime")));
                }
                if p >= 1 << 62 {
                    return Err(Error::InvalidRing(format!("prime {p} too large")));
                }
                p
            }
            RingKind::TruncatedPadic { p, precision } => {
                if !is_prime(p) {
                    return Err(Error::InvalidRing(format!("{p} is not prime")));
                }
                if precision == 0 {
                    return Err(Error::InvalidRing("precision K must be at least 1".into()));
                }
                let mut m: u64 = 1;
                for _ in 0..precision {
                    m = m
                        .checked_mul(p)
                        .filter(|&m| m < 1 << 62)
                        .ok_or_else(|| Error::InvalidRing(format!("{p}^{precision} too large")))?;
                }
                m
            }
        };
        Ok(CoeffRing {
            kind,
            laurent,
            formal: Arc::new(Vec::new()),
            modulus,
        })
    }

    pub fn rationals() -> Self {
        Self::new(RingKind::Rationals, false).unwrap()
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        Self::new(RingKind::PrimeField(p), false)
    }

    pub fn padic(p: u64, precision: u32) -> Result<Self> {
        Self::new(RingKind::TruncatedPadic { p, precision }, false)
    }

    pub fn with_laurent(mut self) -> Self {
        self.laurent = true;
        self
    }

    /// Adjoin commuting formal polynomial generators with the given names.
    pub fn with_formal<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() > MAX_FORMAL {
            return Err(Error::InvalidRing(format!(
                "at most {MAX_FORMAL} formal generators"
            )));
        }
        for n in names {
            let n = n.as_ref();
            let ok = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && n.chars().all(|c| c.is_ascii_alphanumeric())
                && n != "t"
                && n != "v";
            if !ok {
                return Err(Error::InvalidRing(format!("bad generator name {n:?}")));
            }
        }
        self.formal = Arc::new(names.iter().map(|n| n.as_ref().to_string()).collect());
        Ok(self)
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn is_laurent(&self) -> bool {
        self.laurent
    }

    pub fn formal_names(&self) -> &[String] {
        &self.formal
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// True for ℚ and 𝔽_p (with or without `v`): every nonzero homogeneous
    /// element is invertible.
    pub fn is_graded_field(&self) -> bool {
        self.formal.is_empty() && !matches!(self.kind, RingKind::TruncatedPadic { .. })
    }

    /// True when exact linear algebra is available (ungraded ℚ or 𝔽_p).
    pub fn is_field(&self) -> bool {
        self.is_graded_field() && !self.laurent
    }

    /// Characteristic of a graded field; 0 for ℚ.
    pub fn characteristic(&self) -> u64 {
        match self.kind {
            RingKind::Rationals => 0,
            RingKind::PrimeField(p) => p,
            RingKind::TruncatedPadic { .. } => self.modulus,
        }
    }

    /// Characteristic of the residue field (`p` for 𝔽_p and ℤ/p^K).
    pub fn residue_characteristic(&self) -> u64 {
        match self.kind {
            RingKind::Rationals => 0,
            RingKind::PrimeField(p) => p,
            RingKind::TruncatedPadic { p, .. } => p,
        }
    }

    pub fn has_uniformizer(&self) -> bool {
        matches!(self.kind, RingKind::TruncatedPadic { .. })
    }

    /// `(p, K)` in DVR mode.
    pub fn dvr_params(&self) -> Result<(u64, u32)> {
        match self.kind {
            RingKind::TruncatedPadic { p, precision } => Ok((p, precision)),
            _ => Err(Error::NoUniformizer),
        }
    }

    pub fn uniformizer(&self) -> Result<RingElem> {
        let (p, _) = self.dvr_params()?;
        Ok(self.from_u64(p))
    }

    /// The residue ring `R/π`: ℤ/p^K ↦ 𝔽_p, keeping `v` and formal generators.
    pub fn residue_ring(&self) -> Result<CoeffRing> {
        let (p, _) = self.dvr_params()?;
        let mut r = CoeffRing::new(RingKind::PrimeField(p), self.laurent)?;
        r.formal = self.formal.clone();
        Ok(r)
    }

    /// Image of `a` in [`residue_ring`](Self::residue_ring).
    pub fn reduce_mod_uniformizer(&self, a: &RingElem) -> Result<RingElem> {
        let (p, _) = self.dvr_params()?;
        let terms = a
            .terms
            .iter()
            .filter_map(|(m, s)| match s {
                Scalar::Residue(x) if x % p != 0 => Some((*m, Scalar::Residue(x % p))),
                _ => None,
            })
            .collect();
        Ok(RingElem::from_sorted(terms))
    }

    // ---- scalars ----

    fn scalar_from_bigint(&self, n: &BigInt) -> Scalar {
        if self.modulus == 0 {
            Scalar::Rational(BigRational::from_integer(n.clone()))
        } else {
            let m = BigInt::from(self.modulus);
            Scalar::Residue(n.mod_floor(&m).to_u64().unwrap())
        }
    }

    fn scalar_is_zero(s: &Scalar) -> bool {
        match s {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Residue(x) => *x == 0,
        }
    }

    fn s_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x + y),
            (Scalar::Residue(x), Scalar::Residue(y)) => {
                Scalar::Residue(((*x as u128 + *y as u128) % self.modulus as u128) as u64)
            }
            _ => unreachable!("scalar kinds are fixed by the ring"),
        }
    }

    fn s_neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Rational(x) => Scalar::Rational(-x),
            Scalar::Residue(x) => Scalar::Residue(if *x == 0 { 0 } else { self.modulus - x }),
        }
    }

    fn s_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x * y),
            (Scalar::Residue(x), Scalar::Residue(y)) => {
                Scalar::Residue(((*x as u128 * *y as u128) % self.modulus as u128) as u64)
            }
            _ => unreachable!("scalar kinds are fixed by the ring"),
        }
    }

    fn s_is_unit(&self, a: &Scalar) -> bool {
        match (a, self.kind) {
            (Scalar::Rational(x), _) => !x.is_zero(),
            (Scalar::Residue(x), RingKind::TruncatedPadic { p, .. }) => x % p != 0,
            (Scalar::Residue(x), _) => *x != 0,
        }
    }

    fn s_inverse(&self, a: &Scalar) -> Option<Scalar> {
        match a {
            Scalar::Rational(x) => (!x.is_zero()).then(|| Scalar::Rational(x.recip())),
            Scalar::Residue(x) => mod_inverse(*x, self.modulus).map(Scalar::Residue),
        }
    }

    fn s_valuation(&self, a: &Scalar) -> u32 {
        match (a, self.kind) {
            (Scalar::Residue(x), RingKind::TruncatedPadic { p, precision }) => {
                if *x == 0 {
                    return precision;
                }
                let (mut x, mut v) = (*x, 0);
                while x % p == 0 {
                    x /= p;
                    v += 1;
                }
                v
            }
            _ => 0,
        }
    }

    // ---- constructors ----

    pub fn zero(&self) -> RingElem {
        RingElem::zero()
    }

    pub fn one(&self) -> RingElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> RingElem {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_u64(&self, n: u64) -> RingElem {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> RingElem {
        self.constant(self.scalar_from_bigint(n))
    }

    /// `num/den`; in modular rings `den` must be invertible.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<RingElem> {
        if den.is_zero() {
            return Err(Error::NotAUnit("0".into()));
        }
        if self.modulus == 0 {
            return Ok(self.constant(Scalar::Rational(BigRational::new(num.clone(), den.clone()))));
        }
        let d = self.scalar_from_bigint(den);
        let inv = self
            .s_is_unit(&d)
            .then(|| self.s_inverse(&d))
            .flatten()
            .ok_or_else(|| Error::NotAUnit(den.to_string()))?;
        Ok(self.constant(self.s_mul(&self.scalar_from_bigint(num), &inv)))
    }

    fn constant(&self, s: Scalar) -> RingElem {
        self.term(Monomial::ONE, s)
    }

    fn term(&self, m: Monomial, s: Scalar) -> RingElem {
        if Self::scalar_is_zero(&s) {
            RingElem::zero()
        } else {
            RingElem::from_sorted(smallvec::smallvec![(m, s)])
        }
    }

    /// `v^k`; requires a Laurent ring.
    pub fn v_pow(&self, k: i32) -> Result<RingElem> {
        if !self.laurent {
            return Err(Error::InvalidRing("ring has no Laurent variable v".into()));
        }
        Ok(self.term(Monomial::v_pow(k), self.scalar_from_bigint(&BigInt::one())))
    }

    /// The `i`-th formal generator.
    pub fn formal_gen(&self, i: usize) -> Result<RingElem> {
        if i >= self.formal.len() {
            return Err(Error::InvalidRing(format!("no formal generator #{i}")));
        }
        Ok(self.term(
            Monomial::generator(i),
            self.scalar_from_bigint(&BigInt::one()),
        ))
    }

    pub fn formal_gen_by_name(&self, name: &str) -> Option<RingElem> {
        let i = self.formal.iter().position(|n| n == name)?;
        self.formal_gen(i).ok()
    }

    // ---- arithmetic ----

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let mut out = Terms::new();
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() && j < b.terms.len() {
            let (ma, sa) = &a.terms[i];
            let (mb, sb) = &b.terms[j];
            match ma.cmp(mb) {
                Ordering::Less => {
                    out.push((*ma, sa.clone()));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((*mb, sb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let s = self.s_add(sa, sb);
                    if !Self::scalar_is_zero(&s) {
                        out.push((*ma, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a.terms[i..].iter().cloned());
        out.extend(b.terms[j..].iter().cloned());
        RingElem::from_sorted(out)
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        RingElem::from_sorted(a.terms.iter().map(|(m, s)| (*m, self.s_neg(s))).collect())
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        if a.is_zero() || b.is_zero() {
            return RingElem::zero();
        }
        if a.terms.len() == 1 && b.terms.len() == 1 {
            let (ma, sa) = &a.terms[0];
            let (mb, sb) = &b.terms[0];
            return self.term(ma.mul(mb), self.s_mul(sa, sb));
        }
        let mut acc: std::collections::BTreeMap<Monomial, Scalar> = Default::default();
        for (ma, sa) in &a.terms {
            for (mb, sb) in &b.terms {
                let m = ma.mul(mb);
                let s = self.s_mul(sa, sb);
                match acc.get_mut(&m) {
                    Some(x) => *x = self.s_add(x, &s),
                    None => {
                        acc.insert(m, s);
                    }
                }
            }
        }
        RingElem::from_sorted(
            acc.into_iter()
                .filter(|(_, s)| !Self::scalar_is_zero(s))
                .collect(),
        )
    }

    pub fn mul_int(&self, a: &RingElem, n: i64) -> RingElem {
        if n == 1 {
            return a.clone();
        }
        self.mul(a, &self.from_i64(n))
    }

    pub fn pow(&self, a: &RingElem, e: u32) -> RingElem {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    pub fn is_one(&self, a: &RingElem) -> bool {
        *a == self.one()
    }

    /// Units are the nonzero homogeneous monomials `c·v^k` with `c` a unit
    /// scalar and no formal generators.
    pub fn is_unit(&self, a: &RingElem) -> bool {
        match a.terms.as_slice() {
            [(m, s)] => !m.has_formal() && self.s_is_unit(s),
            _ => false,
        }
    }

    pub fn inverse(&self, a: &RingElem) -> Result<RingElem> {
        if !self.is_unit(a) {
            return Err(Error::NotAUnit(self.format(a)));
        }
        let (m, s) = &a.terms[0];
        let inv = self
            .s_inverse(s)
            .ok_or_else(|| Error::NotAUnit(self.format(a)))?;
        Ok(self.term(Monomial::v_pow(-m.v), inv))
    }

    pub fn div(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        Ok(self.mul(a, &self.inverse(b)?))
    }

    /// π-adic valuation; the precision `K` for zero.
    pub fn valuation(&self, a: &RingElem) -> Result<u32> {
        let (_, k) = self.dvr_params()?;
        Ok(a.terms
            .iter()
            .map(|(_, s)| self.s_valuation(s))
            .min()
            .unwrap_or(k))
    }

    pub fn divisible_by_uniformizer(&self, a: &RingElem) -> Result<bool> {
        Ok(self.valuation(a)? >= 1)
    }

    /// `a/π` for `a` divisible by `π`. The result is only determined modulo
    /// `π^{K-1}`; the representative with the smallest lift is returned.
    pub fn div_by_uniformizer(&self, a: &RingElem) -> Result<RingElem> {
        let (p, _) = self.dvr_params()?;
        if !self.divisible_by_uniformizer(a)? {
            return Err(Error::NotInvertible(format!(
                "{} is not divisible by {p}",
                self.format(a)
            )));
        }
        let terms = a
            .terms
            .iter()
            .map(|(m, s)| match s {
                Scalar::Residue(x) => (*m, Scalar::Residue(x / p)),
                Scalar::Rational(_) => unreachable!(),
            })
            .collect();
        Ok(RingElem::from_sorted(terms))
    }

    /// Map an element into `target`, which must have the same shape
    /// (Laurent flag, formal generators). Residues are reduced by the target
    /// modulus, which must divide ours.
    pub fn map_into(&self, target: &CoeffRing, a: &RingElem) -> Result<RingElem> {
        if target.laurent != self.laurent && a.terms.iter().any(|(m, _)| m.v != 0) {
            return Err(Error::IncompatibleRing);
        }
        let mut out = target.zero();
        for (m, s) in &a.terms {
            let n = match s {
                Scalar::Residue(x) => BigInt::from(*x),
                Scalar::Rational(q) if q.is_integer() => q.to_integer(),
                Scalar::Rational(q) => {
                    let e = target.from_ratio(q.numer(), q.denom())?;
                    let sc = e.terms.first().map(|t| t.1.clone());
                    if let Some(sc) = sc {
                        out = target.add(&out, &target.term(*m, sc));
                    }
                    continue;
                }
            };
            if self.modulus != 0 && target.modulus != 0 && !self.modulus.is_multiple_of(target.modulus) {
                return Err(Error::IncompatibleRing);
            }
            out = target.add(&out, &target.term(*m, target.scalar_from_bigint(&n)));
        }
        Ok(out)
    }

    /// Set-theoretic lift into a residue ring whose modulus is a multiple of
    /// ours, using representatives in `[0, modulus)`. Not a ring map.
    pub fn lift_into(&self, target: &CoeffRing, a: &RingElem) -> Result<RingElem> {
        if self.modulus == 0
            || !target.modulus.is_multiple_of(self.modulus)
            || target.laurent != self.laurent
            || target.formal != self.formal
        {
            return Err(Error::IncompatibleRing);
        }
        let terms = a.terms.iter().map(|(m, s)| (*m, s.clone())).collect();
        Ok(RingElem::from_sorted(terms))
    }

    /// Integer lift of a constant scalar element, if it is one.
    pub fn as_integer(&self, a: &RingElem) -> Option<BigInt> {
        match a.terms.as_slice() {
            [] => Some(BigInt::zero()),
            [(m, s)] if m.is_one() => match s {
                Scalar::Residue(x) => Some(BigInt::from(*x)),
                Scalar::Rational(q) if q.is_integer() => Some(q.to_integer()),
                _ => None,
            },
            _ => None,
        }
    }

    /// Rational value of a constant element of ℚ.
    pub fn as_rational(&self, a: &RingElem) -> Option<BigRational> {
        match a.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(m, Scalar::Rational(q))] if m.is_one() => Some(q.clone()),
            _ => None,
        }
    }

    /// Leading `(v-exponent, scalar)` of a single-term element.
    pub fn as_monomial(&self, a: &RingElem) -> Option<(Monomial, Scalar)> {
        match a.terms.as_slice() {
            [(m, s)] => Some((*m, s.clone())),
            _ => None,
        }
    }

    pub fn from_monomial(&self, m: Monomial, s: Scalar) -> RingElem {
        self.term(m, s)
    }

    // ---- text ----

    pub fn format(&self, a: &RingElem) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (m, s)) in a.terms.iter().enumerate() {
            let (neg, mag) = match s {
                Scalar::Rational(q) if q.is_negative() => (true, -q.clone()),
                Scalar::Rational(q) => (false, q.clone()),
                Scalar::Residue(x) => (false, BigRational::from_integer(BigInt::from(*x))),
            };
            let mut factors = Vec::new();
            if m.v == 1 {
                factors.push("v".to_string());
            } else if m.v != 0 {
                factors.push(format!("v^{}", m.v));
            }
            for (i, &e) in m.formal.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.formal[i].clone()),
                    e => factors.push(format!("{}^{e}", self.formal[i])),
                }
            }
            let body = if factors.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", mag, factors.join("*"))
            };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }

    /// Parse an element, e.g. `3*v^-1 + 2`.
    pub fn parse_elem(&self, s: &str) -> Result<RingElem> {
        let poly = parse_tpoly(self, s, false)?;
        Ok(poly.get(&0).cloned().unwrap_or_default())
    }

    pub fn spec(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::Rationals => write!(f, "Q")?,
            RingKind::PrimeField(p) => write!(f, "F{p}")?,
            RingKind::TruncatedPadic { p, precision } => write!(f, "Zp:{p}:{precision}")?,
        }
        if self.laurent {
            write!(f, "[v]")?;
        }
        if !self.formal.is_empty() {
            write!(f, "{{{}}}", self.formal.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for CoeffRing {
    type Err = Error;

    /// `Q`, `F<p>`, `Zp:<p>:<K>`, each with an optional `[v]` suffix and an
    /// optional `{x1,x2,...}` list of formal generators.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::InvalidRing(format!("{s:?}: {msg}"));
        let (s, formal) = match s.find('{') {
            Some(i) => {
                let rest = &s[i + 1..];
                let body = rest
                    .strip_suffix('}')
                    .ok_or_else(|| bad("unterminated '{'"))?;
                let names: Vec<&str> = body
                    .split(',')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .collect();
                (&s[..i], names)
            }
            None => (s, Vec::new()),
        };
        let (base, laurent) = match s.strip_suffix("[v]") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let num = |x: &str| x.parse::<u64>().map_err(|_| bad("expected an integer"));
        let kind = if base == "Q" {
            RingKind::Rationals
        } else if let Some(rest) = base.strip_prefix("Zp:") {
            let mut parts = rest.split(':');
            let p = num(parts.next().unwrap_or(""))?;
            let k = num(parts.next().ok_or_else(|| bad("missing precision"))?)?;
            if parts.next().is_some() {
                return Err(bad("too many fields"));
            }
            let k = u32::try_from(k).map_err(|_| bad("precision too large"))?;
            RingKind::TruncatedPadic { p, precision: k }
        } else if let Some(rest) = base.strip_prefix('F') {
            RingKind::PrimeField(num(rest)?)
        } else {
            return Err(bad("expected Q, F<p> or Zp:<p>:<K>"));
        };
        let ring = CoeffRing::new(kind, laurent)?;
        if formal.is_empty() {
            Ok(ring)
        } else {
            ring.with_formal(&formal)
        }
    }
}

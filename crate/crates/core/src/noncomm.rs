//! The cobar algebra `R⟨⟨τ,t⟩⟩` truncated by word length.
//!
//! `τ` is odd; `t` has the parity of the Moore degree `d`. Coefficients are
//! always even, so the parity of a word is the number of odd letters in it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::rings::{CoeffRing, RingElem};
use crate::series::PowerSeries;

/// Longest word length a [`Word`] can hold.
pub const MAX_WORD_LEN: usize = 31;

/// A word over `{τ, t}`; letter `i` is bit `i` of `bits` (0 = τ, 1 = t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    Tau,
    T,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, bits: 0 };
    pub const TAU: Word = Word { len: 1, bits: 0 };
    pub const T: Word = Word { len: 1, bits: 1 };

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `t^k`.
    pub fn t_pow(k: usize) -> Word {
        assert!(k <= MAX_WORD_LEN);
        Word {
            len: k as u8,
            bits: if k == 0 { 0 } else { u32::MAX >> (32 - k) },
        }
    }

    pub fn from_letters(letters: &[Letter]) -> Word {
        assert!(letters.len() <= MAX_WORD_LEN);
        let mut bits = 0;
        for (i, l) in letters.iter().enumerate() {
            if *l == Letter::T {
                bits |= 1 << i;
            }
        }
        Word {
            len: letters.len() as u8,
            bits,
        }
    }

    pub fn letter(&self, i: usize) -> Letter {
        if self.bits >> i & 1 == 1 {
            Letter::T
        } else {
            Letter::Tau
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(|i| self.letter(i))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let len = self.len + other.len;
        assert!(len as usize <= MAX_WORD_LEN, "word too long");
        Word {
            len,
            bits: self.bits | other.bits << self.len,
        }
    }

    /// Letters `[a, b)`.
    pub fn slice(&self, a: usize, b: usize) -> Word {
        let len = b - a;
        let mask = if len == 0 { 0 } else { u32::MAX >> (32 - len) };
        Word {
            len: len as u8,
            bits: (self.bits >> a) & mask,
        }
    }

    pub fn count_t(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn count_tau(&self) -> usize {
        self.len() - self.count_t()
    }

    pub fn is_t_power(&self) -> bool {
        self.count_tau() == 0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("1");
        }
        for l in self.letters() {
            f.write_str(match l {
                Letter::Tau => "T",
                Letter::T => "t",
            })?;
        }
        Ok(())
    }
}

/// Fixes the parity of `t` through the Moore degree `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GradingContext {
    pub d: i64,
}

impl GradingContext {
    pub fn new(d: i64) -> Self {
        GradingContext { d }
    }

    pub fn t_odd(&self) -> bool {
        self.d.rem_euclid(2) == 1
    }

    /// Integer degree of `τ`.
    pub fn tau_degree(&self) -> i64 {
        -1
    }

    /// Integer degree of `t`.
    pub fn t_degree(&self) -> i64 {
        -self.d - 2
    }

    pub fn letter_odd(&self, l: Letter) -> bool {
        match l {
            Letter::Tau => true,
            Letter::T => self.t_odd(),
        }
    }

    pub fn word_odd(&self, w: &Word) -> bool {
        let odd_letters = if self.t_odd() { w.len() } else { w.count_tau() };
        odd_letters % 2 == 1
    }
}

/// A truncated element of `R⟨⟨τ,t⟩⟩`: words of length at most `maxlen`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCSeries {
    ring: CoeffRing,
    maxlen: usize,
    terms: BTreeMap<Word, RingElem>,
}

impl NCSeries {
    pub fn zero(ring: &CoeffRing, maxlen: usize) -> Self {
        assert!(
            maxlen <= MAX_WORD_LEN,
            "word-length truncation above {MAX_WORD_LEN}"
        );
        NCSeries {
            ring: ring.clone(),
            maxlen,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(ring: &CoeffRing, maxlen: usize, w: Word, c: RingElem) -> Self {
        let mut s = Self::zero(ring, maxlen);
        s.add_term(w, c);
        s
    }

    pub fn one(ring: &CoeffRing, maxlen: usize) -> Self {
        Self::monomial(ring, maxlen, Word::EMPTY, ring.one())
    }

    pub fn tau(ring: &CoeffRing, maxlen: usize) -> Self {
        Self::monomial(ring, maxlen, Word::TAU, ring.one())
    }

    pub fn t(ring: &CoeffRing, maxlen: usize) -> Self {
        Self::monomial(ring, maxlen, Word::T, ring.one())
    }

    /// `Σ c_k t^k` for a one-variable series.
    pub fn from_t_series(ps: &PowerSeries, maxlen: usize) -> Self {
        let mut s = Self::zero(ps.ring(), maxlen);
        for k in 0..=ps.trunc().min(maxlen) {
            s.add_term(Word::t_pow(k), ps.coeff(k));
        }
        s
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn maxlen(&self) -> usize {
        self.maxlen
    }

    pub fn terms(&self) -> &BTreeMap<Word, RingElem> {
        &self.terms
    }

    pub fn coeff(&self, w: &Word) -> RingElem {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `c·w`, ignoring words beyond the truncation.
    pub fn add_term(&mut self, w: Word, c: RingElem) {
        if c.is_zero() || w.len() > self.maxlen {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(x) => {
                let s = self.ring.add(x, &c);
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::IncompatibleRing);
        }
        Ok(())
    }

    pub fn truncate(&self, maxlen: usize) -> Self {
        let mut s = Self::zero(&self.ring, maxlen.min(self.maxlen));
        for (w, c) in &self.terms {
            s.add_term(*w, c.clone());
        }
        s
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut s = self.truncate(self.maxlen.min(other.maxlen));
        for (w, c) in &other.terms {
            s.add_term(*w, c.clone());
        }
        Ok(s)
    }

    pub fn scale(&self, c: &RingElem) -> Self {
        let mut s = Self::zero(&self.ring, self.maxlen);
        for (w, x) in &self.terms {
            s.add_term(*w, self.ring.mul(x, c));
        }
        s
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.ring.from_i64(-1))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut s = Self::zero(&self.ring, self.maxlen.min(other.maxlen));
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                if wa.len() + wb.len() <= s.maxlen {
                    s.add_term(wa.concat(wb), self.ring.mul(ca, cb));
                }
            }
        }
        Ok(s)
    }

    /// Parity of a homogeneous element; `None` for zero.
    pub fn parity(&self, ctx: &GradingContext) -> Result<Option<bool>> {
        let mut it = self.terms.keys().map(|w| ctx.word_odd(w));
        let Some(p) = it.next() else { return Ok(None) };
        if it.any(|q| q != p) {
            return Err(Error::ParityMismatch(format!(
                "inhomogeneous element {self}"
            )));
        }
        Ok(Some(p))
    }

    /// Graded commutator `ab − (−1)^{|a||b|} ba`.
    pub fn commutator(&self, other: &Self, ctx: &GradingContext) -> Result<Self> {
        let pa = self.parity(ctx)?.unwrap_or(false);
        let pb = other.parity(ctx)?.unwrap_or(false);
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        if pa && pb {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }

    /// Contains a word with the letter `τ`.
    pub fn involves_tau(&self) -> bool {
        self.terms.keys().any(|w| !w.is_t_power())
    }

    /// Coefficients of `1, t, t², …, t^maxlen`.
    pub fn t_part(&self) -> PowerSeries {
        let mut ps = PowerSeries::zero(&self.ring, self.maxlen);
        for k in 0..=self.maxlen {
            ps.set_coeff(k, self.coeff(&Word::t_pow(k)));
        }
        ps
    }

    /// Length of the shortest word present.
    pub fn min_len(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).min()
    }
}

impl fmt::Display for NCSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let cs = self.ring.format(c);
            match (cs.as_str(), w.is_empty()) {
                ("1", false) => write!(f, "{w}")?,
                (_, true) => write!(f, "({cs})")?,
                _ if c.terms().len() > 1 => write!(f, "({cs})*{w}")?,
                _ => write!(f, "{cs}*{w}")?,
            }
        }
        Ok(())
    }
}

/// A continuous derivation, determined by its values on `τ` and `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub on_tau: NCSeries,
    pub on_t: NCSeries,
    odd: bool,
    ctx: GradingContext,
}

impl Derivation {
    /// Checks that the values have the parities forced by `odd`.
    pub fn new(ctx: GradingContext, odd: bool, on_tau: NCSeries, on_t: NCSeries) -> Result<Self> {
        on_tau.check_ring(&on_t)?;
        if let Some(p) = on_tau.parity(&ctx)? {
            if p != (odd ^ true) {
                return Err(Error::ParityMismatch(format!(
                    "value on τ has the wrong parity: {on_tau}"
                )));
            }
        }
        if let Some(p) = on_t.parity(&ctx)? {
            if p != (odd ^ ctx.t_odd()) {
                return Err(Error::ParityMismatch(format!(
                    "value on t has the wrong parity: {on_t}"
                )));
            }
        }
        Ok(Derivation {
            on_tau,
            on_t,
            odd,
            ctx,
        })
    }

    /// Skips the parity check; Leibniz signs use the declared parity `odd`.
    /// Only useful for deliberately malformed structures.
    pub fn new_unchecked(ctx: GradingContext, odd: bool, on_tau: NCSeries, on_t: NCSeries) -> Self {
        Derivation {
            on_tau,
            on_t,
            odd,
            ctx,
        }
    }

    pub fn zero(ring: &CoeffRing, maxlen: usize, ctx: GradingContext, odd: bool) -> Self {
        let z = NCSeries::zero(ring, maxlen);
        Derivation {
            on_tau: z.clone(),
            on_t: z,
            odd,
            ctx,
        }
    }

    /// `A(t)∂_τ + B(t)∂_t`.
    pub fn from_series(
        ctx: GradingContext,
        odd: bool,
        a: &PowerSeries,
        b: &PowerSeries,
        maxlen: usize,
    ) -> Result<Self> {
        Self::new(
            ctx,
            odd,
            NCSeries::from_t_series(a, maxlen),
            NCSeries::from_t_series(b, maxlen),
        )
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn ctx(&self) -> GradingContext {
        self.ctx
    }

    pub fn ring(&self) -> &CoeffRing {
        self.on_tau.ring()
    }

    pub fn maxlen(&self) -> usize {
        self.on_tau.maxlen().min(self.on_t.maxlen())
    }

    /// Values contain no `τ`.
    pub fn is_normalized(&self) -> bool {
        !self.on_tau.involves_tau() && !self.on_t.involves_tau()
    }

    fn value(&self, l: Letter) -> &NCSeries {
        match l {
            Letter::Tau => &self.on_tau,
            Letter::T => &self.on_t,
        }
    }

    /// Signed Leibniz extension:
    /// `ξ(x₁⋯xₙ) = Σ (−1)^{|ξ|(|x₁|+⋯+|x_{i−1}|)} x₁⋯ξ(xᵢ)⋯xₙ`.
    pub fn apply(&self, x: &NCSeries) -> Result<NCSeries> {
        self.on_tau.check_ring(x)?;
        let r = x.ring();
        let maxlen = self.maxlen().min(x.maxlen());
        let mut out = NCSeries::zero(r, maxlen);
        for (w, c) in x.terms() {
            let mut prefix_odd = false;
            for i in 0..w.len() {
                let l = w.letter(i);
                let neg = self.odd && prefix_odd;
                let coeff = if neg { r.neg(c) } else { c.clone() };
                let pre = w.slice(0, i);
                let post = w.slice(i + 1, w.len());
                for (v, cv) in self.value(l).terms() {
                    if pre.len() + v.len() + post.len() <= maxlen {
                        out.add_term(pre.concat(v).concat(&post), r.mul(&coeff, cv));
                    }
                }
                prefix_odd ^= self.ctx.letter_odd(l);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Derivation {
            on_tau: self.on_tau.add(&other.on_tau)?,
            on_t: self.on_t.add(&other.on_t)?,
            odd: self.odd,
            ctx: self.ctx,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&self.ring().from_i64(-1)))
    }

    pub fn scale(&self, c: &RingElem) -> Self {
        Derivation {
            on_tau: self.on_tau.scale(c),
            on_t: self.on_t.scale(c),
            ..self.clone()
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.odd != other.odd || self.ctx != other.ctx {
            return Err(Error::ParityMismatch(
                "derivations of different parity".into(),
            ));
        }
        Ok(())
    }

    /// `ξ∘η − (−1)^{|ξ||η|} η∘ξ`, read off on the generators.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ParityMismatch("different grading contexts".into()));
        }
        let both_odd = self.odd && other.odd;
        let side = |g: &NCSeries| -> Result<NCSeries> {
            let a = self.apply(&other.apply(g)?)?;
            let b = other.apply(&self.apply(g)?)?;
            if both_odd {
                a.add(&b)
            } else {
                a.sub(&b)
            }
        };
        let r = self.ring();
        let len = self.maxlen().min(other.maxlen());
        let on_tau = side(&NCSeries::tau(r, len))?;
        let on_t = side(&NCSeries::t(r, len))?;
        Derivation::new(self.ctx, self.odd ^ other.odd, on_tau, on_t)
    }

    /// `ξ∘ξ` on the generators.
    pub fn square(&self) -> Result<(NCSeries, NCSeries)> {
        let r = self.ring();
        let len = self.maxlen();
        let a = self.apply(&self.apply(&NCSeries::tau(r, len))?)?;
        let b = self.apply(&self.apply(&NCSeries::t(r, len))?)?;
        Ok((a, b))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ ↦ {}; t ↦ {}", self.on_tau, self.on_t)
    }
}

/// First nonzero coefficient of `ξ∘ξ`, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareZeroFailure {
    pub generator: Letter,
    pub word: Word,
    pub coeff: String,
}

/// `ξ∘ξ = 0` on both generators up to the truncation.
pub fn check_square_zero(xi: &Derivation) -> Result<Option<SquareZeroFailure>> {
    if !xi.is_odd() {
        return Err(Error::ParityMismatch(
            "square-zero check needs an odd derivation".into(),
        ));
    }
    let (a, b) = xi.square()?;
    for (g, s) in [(Letter::Tau, a), (Letter::T, b)] {
        if let Some((w, c)) = s.terms().iter().next() {
            return Ok(Some(SquareZeroFailure {
                generator: g,
                word: *w,
                coeff: s.ring().format(c),
            }));
        }
    }
    Ok(None)
}

/// The structure derivation `A(t)∂_τ + B(t)∂_t + adτ − τ²∂_τ` of a unital
/// A∞-structure in normalized form.
pub fn structure_derivation(
    ctx: GradingContext,
    a: &PowerSeries,
    b: &PowerSeries,
    maxlen: usize,
) -> Result<Derivation> {
    let r = a.ring();
    let tau = NCSeries::tau(r, maxlen);
    let t = NCSeries::t(r, maxlen);
    let on_tau = NCSeries::from_t_series(a, maxlen).add(&tau.mul(&tau)?)?;
    let on_t = NCSeries::from_t_series(b, maxlen).add(&tau.commutator(&t, &ctx)?)?;
    Derivation::new(ctx, true, on_tau, on_t)
}

/// `m*` of an even Moore algebra: `u(t)∂_τ + adτ − τ²∂_τ`.
pub fn mstar_even(u: &PowerSeries, d: i64, maxlen: usize) -> Result<Derivation> {
    let ctx = GradingContext::new(d);
    if ctx.t_odd() {
        return Err(Error::ParityMismatch(format!(
            "even Moore algebra with odd d = {d}"
        )));
    }
    structure_derivation(ctx, u, &PowerSeries::zero(u.ring(), u.trunc()), maxlen)
}

/// `m*` of an odd Moore algebra: `v(t)∂_t + w(t)∂_τ + adτ − τ²∂_τ`.
pub fn mstar_odd(v: &PowerSeries, w: &PowerSeries, d: i64, maxlen: usize) -> Result<Derivation> {
    let ctx = GradingContext::new(d);
    if !ctx.t_odd() {
        return Err(Error::ParityMismatch(format!(
            "odd Moore algebra with even d = {d}"
        )));
    }
    if !v.is_even() || !w.is_even() {
        return Err(Error::ParityMismatch(
            "v(t), w(t) must involve even powers of t only".into(),
        ));
    }
    structure_derivation(ctx, w, v, maxlen)
}

/// A continuous algebra endomorphism `τ ↦ image_tau`, `t ↦ image_t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCEndo {
    pub image_tau: NCSeries,
    pub image_t: NCSeries,
}

impl NCEndo {
    pub fn new(image_tau: NCSeries, image_t: NCSeries) -> Result<Self> {
        image_tau.check_ring(&image_t)?;
        if !image_tau.coeff(&Word::EMPTY).is_zero() || !image_t.coeff(&Word::EMPTY).is_zero() {
            return Err(Error::CompositionUndefined);
        }
        Ok(NCEndo { image_tau, image_t })
    }

    pub fn identity(ring: &CoeffRing, maxlen: usize) -> Self {
        NCEndo {
            image_tau: NCSeries::tau(ring, maxlen),
            image_t: NCSeries::t(ring, maxlen),
        }
    }

    /// `τ ↦ τ + G(t)`, `t ↦ F(t)`.
    pub fn from_series(g: &PowerSeries, f: &PowerSeries, maxlen: usize) -> Result<Self> {
        let r = g.ring();
        let tau = NCSeries::tau(r, maxlen);
        Self::new(
            tau.add(&NCSeries::from_t_series(g, maxlen))?,
            NCSeries::from_t_series(f, maxlen),
        )
    }

    pub fn ring(&self) -> &CoeffRing {
        self.image_tau.ring()
    }

    pub fn maxlen(&self) -> usize {
        self.image_tau.maxlen().min(self.image_t.maxlen())
    }

    /// `image_tau − τ` and `image_t` contain no `τ`.
    pub fn is_normalized(&self) -> bool {
        let g = self
            .image_tau
            .sub(&NCSeries::tau(self.ring(), self.maxlen()));
        !self.image_t.involves_tau() && g.is_ok_and(|g| !g.involves_tau())
    }

    /// `(G, F)` of a normalized endomorphism.
    pub fn normalized_parts(&self) -> Option<(PowerSeries, PowerSeries)> {
        if !self.is_normalized() {
            return None;
        }
        let g = self
            .image_tau
            .sub(&NCSeries::tau(self.ring(), self.maxlen()))
            .ok()?;
        Some((g.t_part(), self.image_t.t_part()))
    }

    /// The substitution homomorphism applied to `x`.
    pub fn apply(&self, x: &NCSeries) -> Result<NCSeries> {
        self.image_tau.check_ring(x)?;
        let maxlen = self.maxlen().min(x.maxlen());
        let r = x.ring();
        let mut cache: HashMap<Word, NCSeries> = HashMap::new();
        let mut out = NCSeries::zero(r, maxlen);
        for (w, c) in x.terms() {
            let img = self.image_of_word(w, maxlen, &mut cache)?;
            for (v, cv) in img.terms() {
                out.add_term(*v, r.mul(c, cv));
            }
        }
        Ok(out)
    }

    fn image_of_word(
        &self,
        w: &Word,
        maxlen: usize,
        cache: &mut HashMap<Word, NCSeries>,
    ) -> Result<NCSeries> {
        if let Some(s) = cache.get(w) {
            return Ok(s.clone());
        }
        let r = self.ring();
        let s = if w.is_empty() {
            NCSeries::one(r, maxlen)
        } else {
            let head = match w.letter(0) {
                Letter::Tau => self.image_tau.truncate(maxlen),
                Letter::T => self.image_t.truncate(maxlen),
            };
            let tail = self.image_of_word(&w.slice(1, w.len()), maxlen, cache)?;
            head.mul(&tail)?
        };
        cache.insert(*w, s.clone());
        Ok(s)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &NCEndo) -> Result<NCEndo> {
        NCEndo::new(self.apply(&other.image_tau)?, self.apply(&other.image_t)?)
    }

    /// Linear part as the matrix `[[τ→τ, τ→t], [t→τ, t→t]]` (row = generator).
    fn linear_part(&self) -> [[RingElem; 2]; 2] {
        [
            [
                self.image_tau.coeff(&Word::TAU),
                self.image_tau.coeff(&Word::T),
            ],
            [self.image_t.coeff(&Word::TAU), self.image_t.coeff(&Word::T)],
        ]
    }

    /// Inverse by the closed formula `(G,F)⁻¹ = (−G(F⁻¹), F⁻¹)` when
    /// normalized; otherwise by [`inverse_iterative`](Self::inverse_iterative).
    pub fn inverse(&self) -> Result<NCEndo> {
        let Some((g, f)) = self.normalized_parts() else {
            return self.inverse_iterative();
        };
        let finv = f.reversion()?;
        let ginv = g.compose(&finv)?.neg();
        NCEndo::from_series(&ginv, &finv, self.maxlen())
    }

    /// Inverse by fixed-point iteration `ψ(x) = L⁻¹(x − ψ(N(x)))`, where
    /// `L` and `N` are the linear and higher parts of `self`. Works for any
    /// endomorphism with invertible linear part.
    pub fn inverse_iterative(&self) -> Result<NCEndo> {
        let r = self.ring().clone();
        let maxlen = self.maxlen();
        let [[a, b], [c, d]] = self.linear_part();
        let det = r.sub(&r.mul(&a, &d), &r.mul(&b, &c));
        let det_inv = r
            .inverse(&det)
            .map_err(|_| Error::NotInvertible("linear part of endomorphism".into()))?;
        // Rows of L⁻¹ expressing ψ(τ), ψ(t) through images of τ, t.
        let li = [
            [r.mul(&d, &det_inv), r.neg(&r.mul(&b, &det_inv))],
            [r.neg(&r.mul(&c, &det_inv)), r.mul(&a, &det_inv)],
        ];
        let strip = |s: &NCSeries| -> NCSeries {
            let mut out = NCSeries::zero(&r, maxlen);
            for (w, x) in s.terms() {
                if w.len() >= 2 {
                    out.add_term(*w, x.clone());
                }
            }
            out
        };
        let high = [strip(&self.image_tau), strip(&self.image_t)];
        let gens = [NCSeries::tau(&r, maxlen), NCSeries::t(&r, maxlen)];
        let mut psi = NCEndo::identity(&r, maxlen);
        for _ in 0..=maxlen {
            // ψ(φ(g)) = Σ_h L[g][h] ψ(h) + ψ(N(g)) must equal g.
            let rhs = [
                gens[0].sub(&psi.apply(&high[0])?)?,
                gens[1].sub(&psi.apply(&high[1])?)?,
            ];
            let next = NCEndo {
                image_tau: rhs[0].scale(&li[0][0]).add(&rhs[1].scale(&li[0][1]))?,
                image_t: rhs[0].scale(&li[1][0]).add(&rhs[1].scale(&li[1][1]))?,
            };
            if next == psi {
                break;
            }
            psi = next;
        }
        Ok(psi)
    }

    /// `φ ∘ ξ ∘ φ⁻¹`, read off on the generators.
    pub fn conjugate(&self, xi: &Derivation) -> Result<Derivation> {
        let inv = self.inverse_iterative()?;
        let on = |g: &NCSeries| -> Result<NCSeries> { self.apply(&xi.apply(&inv.apply(g)?)?) };
        let r = xi.ring();
        let len = xi.maxlen().min(self.maxlen());
        let on_tau = on(&NCSeries::tau(r, len))?;
        let on_t = on(&NCSeries::t(r, len))?;
        Derivation::new(xi.ctx(), xi.is_odd(), on_tau, on_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> CoeffRing {
        CoeffRing::rationals()
    }

    fn w(s: &str) -> Word {
        Word::from_letters(
            &s.chars()
                .map(|c| if c == 'T' { Letter::Tau } else { Letter::T })
                .collect::<Vec<_>>(),
        )
    }

    fn nc(r: &CoeffRing, l: usize, terms: &[(&str, i64)]) -> NCSeries {
        let mut s = NCSeries::zero(r, l);
        for (word, c) in terms {
            s.add_term(w(word), r.from_i64(*c));
        }
        s
    }

    #[test]
    fn words() {
        let x = w("Ttt");
        assert_eq!(x.to_string(), "Ttt");
        assert_eq!(x.concat(&w("T")).to_string(), "TttT");
        assert_eq!(x.slice(1, 3), Word::t_pow(2));
        assert_eq!(Word::EMPTY.to_string(), "1");
    }

    #[test]
    fn commutators() {
        let r = q();
        let even = GradingContext::new(0);
        let tau = NCSeries::tau(&r, 4);
        let t = NCSeries::t(&r, 4);
        assert_eq!(
            tau.commutator(&t, &even).unwrap(),
            nc(&r, 4, &[("Tt", 1), ("tT", -1)])
        );
        assert_eq!(
            tau.commutator(&tau, &even).unwrap(),
            nc(&r, 4, &[("TT", 2)])
        );
        assert!(t.commutator(&t, &even).unwrap().is_zero());
        let odd = GradingContext::new(1);
        assert_eq!(
            tau.commutator(&t, &odd).unwrap(),
            nc(&r, 4, &[("Tt", 1), ("tT", 1)])
        );
        let mixed = tau.add(&t).unwrap();
        assert!(matches!(
            mixed.commutator(&t, &even),
            Err(Error::ParityMismatch(_))
        ));
    }

    fn ad_tau_minus_tau_sq(r: &CoeffRing, d: i64, l: usize) -> Derivation {
        let z = PowerSeries::zero(r, l);
        structure_derivation(GradingContext::new(d), &z, &z, l).unwrap()
    }

    #[test]
    fn derivation_application() {
        let r = q();
        let xi = ad_tau_minus_tau_sq(&r, 0, 5);
        assert_eq!(
            xi.apply(&NCSeries::t(&r, 5)).unwrap(),
            nc(&r, 5, &[("Tt", 1), ("tT", -1)])
        );
        assert_eq!(
            xi.apply(&NCSeries::tau(&r, 5)).unwrap(),
            nc(&r, 5, &[("TT", 1)])
        );

        let u = PowerSeries::parse(&r, "3*t + t^2", 5).unwrap();
        let eta = Derivation::from_series(
            GradingContext::new(0),
            true,
            &u,
            &PowerSeries::zero(&r, 5),
            5,
        )
        .unwrap();
        let got = eta.apply(&nc(&r, 5, &[("Tt", 1)])).unwrap();
        assert_eq!(got, nc(&r, 5, &[("tt", 3), ("ttt", 1)]));
    }

    #[test]
    fn odd_derivation_leibniz_sign() {
        // ξ = ∂_τ (odd) on τ·τ gives 1·τ − τ·1 = 0; on t·τ with t even gives t.
        let r = q();
        let ctx = GradingContext::new(0);
        let one = PowerSeries::monomial(&r, 3, 0, r.one());
        let xi = Derivation::from_series(ctx, true, &one, &PowerSeries::zero(&r, 3), 3).unwrap();
        assert!(xi.apply(&nc(&r, 3, &[("TT", 1)])).unwrap().is_zero());
        assert_eq!(
            xi.apply(&nc(&r, 3, &[("tT", 1)])).unwrap(),
            nc(&r, 3, &[("t", 1)])
        );
        assert_eq!(
            xi.apply(&nc(&r, 3, &[("Tt", 1)])).unwrap(),
            nc(&r, 3, &[("t", 1)])
        );
        let odd = GradingContext::new(1);
        let one_t = PowerSeries::zero(&r, 3);
        let xi = Derivation::from_series(odd, true, &one, &one_t, 3).unwrap();
        assert_eq!(
            xi.apply(&nc(&r, 3, &[("tT", 1)])).unwrap(),
            nc(&r, 3, &[("t", -1)])
        );
    }

    #[test]
    fn mstar_examples() {
        let z = CoeffRing::padic(5, 6).unwrap();
        let u = PowerSeries::parse(&z, "5*t", 6).unwrap();
        let m = mstar_even(&u, 0, 6).unwrap();
        assert_eq!(m.on_tau, nc(&z, 6, &[("t", 5), ("TT", 1)]));
        assert_eq!(m.on_t, nc(&z, 6, &[("Tt", 1), ("tT", -1)]));
        assert_eq!(check_square_zero(&m).unwrap(), None);

        let zero = PowerSeries::zero(&z, 6);
        let m = mstar_odd(&zero, &zero, 1, 6).unwrap();
        assert_eq!(m.on_tau, nc(&z, 6, &[("TT", 1)]));
        assert_eq!(m.on_t, nc(&z, 6, &[("Tt", 1), ("tT", 1)]));
        assert!(mstar_even(&u, 1, 6).is_err());
    }

    #[test]
    fn tampered_odd_structure_fails() {
        let r = q();
        let zero = PowerSeries::zero(&r, 8);
        let m = mstar_odd(&zero, &zero, 1, 8).unwrap();
        let on_t = m.on_t.add(&nc(&r, 8, &[("ttt", 1)])).unwrap();
        assert!(Derivation::new(m.ctx(), true, m.on_tau.clone(), on_t.clone()).is_err());
        let bad = Derivation::new_unchecked(m.ctx(), true, m.on_tau.clone(), on_t);
        let fail = check_square_zero(&bad)
            .unwrap()
            .expect("square must not vanish");
        assert_eq!(fail.generator, Letter::T);
    }

    #[test]
    fn commutator_with_mstar() {
        // [B∂_t, m*] = u′B∂_τ and [A∂_τ, m*] = 0 for even Moore algebras.
        let r = q();
        let l = 9;
        let ctx = GradingContext::new(0);
        let u = PowerSeries::parse(&r, "2*t + 3*t^2 - t^3", l).unwrap();
        let m = mstar_even(&u, 0, l).unwrap();
        let b = PowerSeries::parse(&r, "1 + t^2", l).unwrap();
        let zero = PowerSeries::zero(&r, l);
        let xi = Derivation::from_series(ctx, false, &zero, &b, l).unwrap();
        let c = xi.commutator(&m).unwrap();
        let expect = u.derivative().mul(&b.truncate(l - 1)).unwrap();
        assert!(c.on_t.is_zero());
        for k in 0..l - 2 {
            assert_eq!(c.on_tau.coeff(&Word::t_pow(k)), expect.coeff(k), "t^{k}");
        }
        assert!(c
            .on_tau
            .terms()
            .keys()
            .filter(|w| w.len() < l - 1)
            .all(Word::is_t_power));

        let a = PowerSeries::parse(&r, "1 + 2*t - t^3", l).unwrap();
        let xi = Derivation::from_series(ctx, true, &a, &zero, l).unwrap();
        let c = xi.commutator(&m).unwrap();
        assert!(c.on_tau.terms().keys().all(|w| w.len() >= l));
        assert!(c.on_t.terms().keys().all(|w| w.len() >= l));
    }

    #[test]
    fn endomorphisms() {
        let r = q();
        let l = 6;
        let id = NCEndo::identity(&r, l);
        let m = mstar_even(&PowerSeries::parse(&r, "t^2 + t^3", l).unwrap(), 0, l).unwrap();
        assert_eq!(id.conjugate(&m).unwrap(), m);
        assert_eq!(id.inverse().unwrap(), id);

        let zero = PowerSeries::zero(&r, l);
        let two_t =
            NCEndo::from_series(&zero, &PowerSeries::parse(&r, "2*t", l).unwrap(), l).unwrap();
        let half =
            NCEndo::from_series(&zero, &PowerSeries::parse(&r, "1/2*t", l).unwrap(), l).unwrap();
        assert_eq!(two_t.inverse().unwrap(), half);
        assert_eq!(two_t.inverse_iterative().unwrap(), half);

        let g = PowerSeries::parse(&r, "t^2 + 3*t^4", l).unwrap();
        let t = PowerSeries::identity(&r, l);
        let phi = NCEndo::from_series(&g, &t, l).unwrap();
        let expect = NCEndo::from_series(&g.neg(), &t, l).unwrap();
        assert_eq!(phi.inverse().unwrap(), expect);
        assert_eq!(phi.inverse_iterative().unwrap(), expect);
    }

    #[test]
    fn rescaling_conjugation_is_composition() {
        let r = q();
        let l = 7;
        let u = PowerSeries::parse(&r, "t + 2*t^2 - t^5", l).unwrap();
        let m = mstar_even(&u, 0, l).unwrap();
        let rt = PowerSeries::parse(&r, "3*t", l).unwrap();
        let phi = NCEndo::from_series(&PowerSeries::zero(&r, l), &rt, l).unwrap();
        let expect = mstar_even(&u.compose(&rt).unwrap(), 0, l).unwrap();
        assert_eq!(phi.conjugate(&m).unwrap(), expect);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f7() -> CoeffRing {
        CoeffRing::prime_field(7).unwrap()
    }

    /// Random element of the given parity with words of length `1..=maxword`.
    fn random_nc(
        rng: &mut ChaCha8Rng,
        ctx: &GradingContext,
        odd: bool,
        maxword: usize,
        l: usize,
    ) -> NCSeries {
        let r = f7();
        let mut s = NCSeries::zero(&r, l);
        for _ in 0..4 {
            let len = rng.random_range(1..=maxword);
            let letters: Vec<Letter> = (0..len)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        Letter::T
                    } else {
                        Letter::Tau
                    }
                })
                .collect();
            let w = Word::from_letters(&letters);
            if ctx.word_odd(&w) == odd {
                s.add_term(w, r.from_i64(rng.random_range(1..7)));
            }
        }
        s
    }

    fn random_derivation(seed: u64, d: i64, odd: bool, l: usize) -> Derivation {
        let ctx = GradingContext::new(d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let on_tau = random_nc(&mut rng, &ctx, !odd, 3, l);
        let on_t = random_nc(&mut rng, &ctx, odd ^ ctx.t_odd(), 3, l);
        Derivation::new(ctx, odd, on_tau, on_t).unwrap()
    }

    /// Degree-preserving `(G, F)`: for odd `t` both are odd series, for even
    /// `t` the odd `G` must vanish.
    fn random_endo(seed: u64, t_odd: bool, l: usize) -> NCEndo {
        let r = f7();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = PowerSeries::zero(&r, l);
        let mut f = PowerSeries::zero(&r, l);
        f.set_coeff(1, r.from_i64(rng.random_range(1..7)));
        for k in 2..=l {
            if !t_odd || k % 2 == 1 {
                f.set_coeff(k, r.from_i64(rng.random_range(0..7)));
            }
            if t_odd && k % 2 == 1 {
                g.set_coeff(k, r.from_i64(rng.random_range(0..7)));
            }
        }
        NCEndo::from_series(&g, &f, l).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn jacobi(s in any::<u64>(), d in 0i64..2, pa: bool, pb: bool, pc: bool) {
            let l = 6;
            let x = random_derivation(s, d, pa, l);
            let y = random_derivation(s.wrapping_add(1), d, pb, l);
            let z = random_derivation(s.wrapping_add(2), d, pc, l);
            let lhs = x.commutator(&y.commutator(&z).unwrap()).unwrap();
            let a = x.commutator(&y).unwrap().commutator(&z).unwrap();
            let b = y.commutator(&x.commutator(&z).unwrap()).unwrap();
            let rhs = if pa && pb { a.sub(&b) } else { a.add(&b) }.unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn weight_filtration(s in any::<u64>(), k in 1usize..4) {
            // Values of t-degree ≥ k raise word length by at least k − 1.
            let l = 8;
            let r = f7();
            let ctx = GradingContext::new(0);
            let mut a = PowerSeries::zero(&r, l);
            a.set_coeff(k, r.one());
            a.set_coeff(k + 2, r.from_i64(3));
            let xi = Derivation::from_series(ctx, true, &a, &PowerSeries::zero(&r, l), l).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let odd = rng.random_bool(0.5);
            let x = random_nc(&mut rng, &ctx, odd, 4, l);
            let y = xi.apply(&x).unwrap();
            let lo = x.min_len().unwrap_or(0);
            prop_assert!(y.min_len().is_none_or(|m| m + 1 >= lo + k));
        }

        #[test]
        fn conjugation_is_an_action(s in any::<u64>(), odd: bool) {
            let l = 6;
            let r = f7();
            let m = if odd {
                let v = PowerSeries::from_i64s(&r, l, &[0, 0, 2, 0, 1, 0, 3]);
                let w = PowerSeries::from_i64s(&r, l, &[0, 0, 5, 0, 0, 0, 1]);
                mstar_odd(&v, &w, 1, l).unwrap()
            } else {
                let u = PowerSeries::from_i64s(&r, l, &[0, 3, 1, 4, 0, 2, 5]);
                mstar_even(&u, 0, l).unwrap()
            };
            let phi = random_endo(s, odd, l);
            let psi = random_endo(s ^ 0x5555, odd, l);
            let lhs = phi.compose(&psi).unwrap().conjugate(&m).unwrap();
            let rhs = phi.conjugate(&psi.conjugate(&m).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_routes_agree(s in any::<u64>(), odd: bool) {
            let l = 7;
            let phi = random_endo(s, odd, l);
            let a = phi.inverse().unwrap();
            let b = phi.inverse_iterative().unwrap();
            prop_assert_eq!(&a, &b);
            let id = NCEndo::identity(phi.ring(), l);
            prop_assert_eq!(phi.compose(&a).unwrap(), id.clone());
            prop_assert_eq!(a.compose(&phi).unwrap(), id);
        }

        #[test]
        fn even_mstar_squares_to_zero(coeffs in proptest::collection::vec(0i64..7, 9)) {
            let r = f7();
            let mut c = coeffs;
            c[0] = 0;
            let u = PowerSeries::from_i64s(&r, 8, &c);
            let m = mstar_even(&u, 0, 8).unwrap();
            prop_assert_eq!(check_square_zero(&m).unwrap(), None);
        }
    }
}

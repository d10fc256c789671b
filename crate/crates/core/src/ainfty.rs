//! Bar-side A∞ machinery on a finite free graded module.
//!
//! Components act on the suspension: `c_k : (ΣA)^{⊗k} → ΣA`. A [`Cochain`]
//! stores dense tables for every arity up to `exact_to`, the largest arity
//! at which its components are known exactly. Operations propagate that
//! bound, so truncated inputs never produce silently wrong high-arity data.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::noncomm::{Derivation, GradingContext, Letter, NCSeries, Word};
use crate::rings::{CoeffRing, RingElem};

/// Generators with integer degrees and a distinguished unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedBasis {
    names: Vec<String>,
    degrees: Vec<i64>,
    unit: usize,
}

impl GradedBasis {
    pub fn new(gens: Vec<(String, i64)>, unit: usize) -> Result<Self> {
        if unit >= gens.len() || gens[unit].1 != 0 {
            return Err(Error::BasisMismatch(
                "unit must be a degree-0 generator".into(),
            ));
        }
        let (names, degrees) = gens.into_iter().unzip();
        Ok(GradedBasis {
            names,
            degrees,
            unit,
        })
    }

    /// `{1, y}` with `|y| = d + 1`, dual to `{τ, t}`.
    pub fn two_cell(d: i64) -> Self {
        GradedBasis {
            names: vec!["1".into(), "y".into()],
            degrees: vec![0, d + 1],
            unit: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    /// Parity of the suspended generator `[a]`.
    pub fn susp_odd(&self, i: usize) -> bool {
        (self.degrees[i] + 1).rem_euclid(2) == 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A dense multilinear map `(ΣA)^{⊗k} → ΣA` on basis elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiComponent {
    arity: usize,
    b: usize,
    table: Vec<RingElem>,
}

impl MultiComponent {
    pub fn zero(arity: usize, b: usize) -> Self {
        let n = b.pow(arity as u32) * b;
        MultiComponent {
            arity,
            b,
            table: vec![RingElem::zero(); n],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    fn index(&self, inputs: &[usize]) -> usize {
        debug_assert_eq!(inputs.len(), self.arity);
        inputs.iter().rev().fold(0, |acc, &x| acc * self.b + x)
    }

    /// Output vector on a tuple of basis elements.
    pub fn get(&self, inputs: &[usize]) -> &[RingElem] {
        let i = self.index(inputs) * self.b;
        &self.table[i..i + self.b]
    }

    pub fn entry(&self, inputs: &[usize], out: usize) -> &RingElem {
        &self.get(inputs)[out]
    }

    pub fn set(&mut self, inputs: &[usize], out: usize, c: RingElem) {
        let i = self.index(inputs) * self.b + out;
        self.table[i] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(RingElem::is_zero)
    }

    /// Nonzero entries as `(inputs, output, coefficient)`.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, usize, &RingElem)> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (decode(i / self.b, self.arity, self.b), i % self.b, c))
    }
}

fn decode(mut idx: usize, arity: usize, b: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(arity);
    for _ in 0..arity {
        v.push(idx % b);
        idx /= b;
    }
    v
}

/// All tuples of length `n` over `0..b`.
pub fn tuples(n: usize, b: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..b.pow(n as u32)).map(move |i| decode(i, n, b))
}

/// A Hochschild cochain: components of every arity `0..=exact_to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    basis: GradedBasis,
    ring: CoeffRing,
    odd: bool,
    comps: Vec<MultiComponent>,
}

impl Cochain {
    pub fn zero(basis: &GradedBasis, ring: &CoeffRing, odd: bool, exact_to: usize) -> Self {
        let comps = (0..=exact_to)
            .map(|k| MultiComponent::zero(k, basis.len()))
            .collect();
        Cochain {
            basis: basis.clone(),
            ring: ring.clone(),
            odd,
            comps,
        }
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn exact_to(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn component(&self, k: usize) -> &MultiComponent {
        &self.comps[k]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut MultiComponent {
        &mut self.comps[k]
    }

    pub fn set(&mut self, inputs: &[usize], out: usize, c: RingElem) {
        self.comps[inputs.len()].set(inputs, out, c);
    }

    /// Parity of `[a₁]⊗⋯⊗[a_k]`.
    pub fn inputs_odd(&self, inputs: &[usize]) -> bool {
        self.prefix_odd(inputs, inputs.len())
    }

    /// Every nonzero entry `c[a₁|…|a_k] ∋ [o]` has `|[o]| = |c| + Σ|[aᵢ]|`.
    pub fn is_homogeneous(&self) -> bool {
        self.comps.iter().all(|c| {
            c.entries().all(|(inputs, o, _)| {
                self.basis.susp_odd(o) == (self.odd ^ self.inputs_odd(&inputs))
            })
        })
    }

    /// Keep arities `0..=k`.
    pub fn truncate(&self, k: usize) -> Self {
        let mut c = self.clone();
        c.comps.truncate(k.min(self.exact_to()) + 1);
        c
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::IncompatibleRing);
        }
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("cochains on different bases".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.odd != other.odd {
            return Err(Error::ParityMismatch(
                "sum of cochains of different parity".into(),
            ));
        }
        let e = self.exact_to().min(other.exact_to());
        let mut out = self.truncate(e);
        for (k, comp) in out.comps.iter_mut().enumerate() {
            for (x, y) in comp.table.iter_mut().zip(&other.comps[k].table) {
                *x = self.ring.add(x, y);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &RingElem) -> Self {
        let mut out = self.clone();
        for comp in &mut out.comps {
            for x in &mut comp.table {
                *x = self.ring.mul(x, c);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.ring.from_i64(-1))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// All components up to arity `k` vanish.
    pub fn is_zero_to(&self, k: usize) -> bool {
        self.comps.iter().take(k + 1).all(MultiComponent::is_zero)
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero_to(self.exact_to())
    }

    /// Arity and inputs of the first nonzero entry.
    pub fn first_nonzero(&self) -> Option<(Vec<usize>, usize, String)> {
        self.comps.iter().find_map(|c| {
            c.entries()
                .next()
                .map(|(i, o, x)| (i, o, self.ring.format(x)))
        })
    }

    /// `Σ_{l<k} |[a_l]|` mod 2.
    fn prefix_odd(&self, a: &[usize], k: usize) -> bool {
        a[..k].iter().filter(|&&x| self.basis.susp_odd(x)).count() % 2 == 1
    }

    /// `self ∘ inner`: insert `inner` into every slot of `self` with the
    /// sign `(−1)^{|inner|(|[a₁]|+⋯+|[a_k]|)}`.
    pub fn compose(&self, inner: &Cochain) -> Result<Cochain> {
        self.check(inner)?;
        let r = &self.ring;
        let b = self.basis.len();
        let shift = usize::from(!inner.comps[0].is_zero());
        let e = self
            .exact_to()
            .checked_sub(shift)
            .ok_or_else(|| Error::Invariant("composition with no exact arities".into()))?
            .min(inner.exact_to());
        let mut out = Cochain::zero(&self.basis, r, self.odd ^ inner.odd, e);
        let mut buf = Vec::with_capacity(e + 1);
        for n in 0..=e {
            for a in tuples(n, b) {
                let mut acc = vec![RingElem::zero(); b];
                for j in 0..=n {
                    let i = n - j + 1;
                    if i > self.exact_to() || inner.comps[j].is_zero() || self.comps[i].is_zero() {
                        continue;
                    }
                    for k in 0..=n - j {
                        let neg = inner.odd && self.prefix_odd(&a, k);
                        let inner_out = inner.comps[j].get(&a[k..k + j]);
                        for (o_in, x) in inner_out.iter().enumerate() {
                            if x.is_zero() {
                                continue;
                            }
                            buf.clear();
                            buf.extend_from_slice(&a[..k]);
                            buf.push(o_in);
                            buf.extend_from_slice(&a[k + j..]);
                            let coef = if neg { r.neg(x) } else { x.clone() };
                            for (o, y) in self.comps[i].get(&buf).iter().enumerate() {
                                if !y.is_zero() {
                                    acc[o] = r.add(&acc[o], &r.mul(&coef, y));
                                }
                            }
                        }
                    }
                }
                for (o, x) in acc.into_iter().enumerate() {
                    if !x.is_zero() {
                        out.comps[n].set(&a, o, x);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Graded commutator `[self, other] = self∘other − (−1)^{|self||other|} other∘self`.
    pub fn bracket(&self, other: &Cochain) -> Result<Cochain> {
        let a = self.compose(other)?;
        let b = other.compose(self)?;
        if self.odd && other.odd {
            a.add(&b)
        } else {
            a.sub(&b)
        }
    }

    /// Vanishes whenever the unit occurs among the first `i` arguments.
    pub fn is_i_normalized(&self, i: usize, upto: usize) -> bool {
        let unit = self.basis.unit;
        self.comps.iter().take(upto + 1).all(|c| {
            c.entries()
                .all(|(inputs, _, _)| !inputs.iter().take(i).any(|&x| x == unit))
        })
    }

    /// Vanishes whenever any argument is the unit.
    pub fn is_normalized(&self, upto: usize) -> bool {
        self.is_i_normalized(usize::MAX, upto)
    }

    /// Evaluate the coderivation extension of `self` on a tensor word:
    /// `Σ (−1)^{|c|(|[a₁]|+⋯+|[aᵢ]|)} [a₁|…|aᵢ|c_k[aᵢ₊₁|…|aᵢ₊ₖ]|…]`.
    pub fn coderivation_extend(&self, word: &[usize]) -> Result<TensorExpr> {
        let n = word.len();
        let r = &self.ring;
        let mut out = TensorExpr::new();
        for i in 0..=n {
            for k in 0..=n - i {
                if k > self.exact_to() {
                    if !self.comps.iter().all(MultiComponent::is_zero) {
                        return Err(Error::Invariant(format!("arity {k} beyond exact range")));
                    }
                    continue;
                }
                let neg = self.odd && self.prefix_odd(word, i);
                for (o, x) in self.comps[k].get(&word[i..i + k]).iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let mut w = word[..i].to_vec();
                    w.push(o);
                    w.extend_from_slice(&word[i + k..]);
                    add_term(r, &mut out, w, if neg { r.neg(x) } else { x.clone() });
                }
            }
        }
        Ok(out)
    }

    /// Linear extension of [`coderivation_extend`](Self::coderivation_extend).
    pub fn coderivation_apply(&self, x: &TensorExpr) -> Result<TensorExpr> {
        let r = &self.ring;
        let mut out = TensorExpr::new();
        for (w, c) in x {
            for (v, d) in self.coderivation_extend(w)? {
                add_term(r, &mut out, v, r.mul(c, &d));
            }
        }
        Ok(out)
    }

    /// Coalgebra-morphism extension of even components `f_k`, `k ≥ 1`:
    /// `Σ [f_{k₁}[a₁…]|f_{k₂}[…]|…]` over all splittings into consecutive blocks.
    pub fn morphism_extend(&self, word: &[usize]) -> Result<TensorExpr> {
        if self.odd || !self.comps[0].is_zero() {
            return Err(Error::ParityMismatch(
                "morphism components must be even, arity ≥ 1".into(),
            ));
        }
        let r = &self.ring;
        let mut partial: TensorExpr = TensorExpr::from([(Vec::new(), r.one())]);
        let n = word.len();
        // partial[pos] would be cleaner; instead extend splittings block by block.
        let mut states: Vec<(usize, TensorExpr)> = vec![(0, std::mem::take(&mut partial))];
        let mut out = TensorExpr::new();
        while let Some((pos, expr)) = states.pop() {
            if pos == n {
                for (w, c) in expr {
                    add_term(r, &mut out, w, c);
                }
                continue;
            }
            for k in 1..=(n - pos).min(self.exact_to()) {
                let f = self.comps[k].get(&word[pos..pos + k]);
                let mut next = TensorExpr::new();
                for (w, c) in &expr {
                    for (o, x) in f.iter().enumerate() {
                        if !x.is_zero() {
                            let mut w2 = w.clone();
                            w2.push(o);
                            add_term(r, &mut next, w2, r.mul(c, x));
                        }
                    }
                }
                if !next.is_empty() {
                    states.push((pos + k, next));
                }
            }
        }
        Ok(out)
    }
}

/// A linear combination of tensor words `[a₁|…|aₙ]`.
pub type TensorExpr = BTreeMap<Vec<usize>, RingElem>;

fn add_term(r: &CoeffRing, e: &mut TensorExpr, w: Vec<usize>, c: RingElem) {
    if c.is_zero() {
        return;
    }
    let s = match e.get(&w) {
        Some(x) => r.add(x, &c),
        None => c,
    };
    if s.is_zero() {
        e.remove(&w);
    } else {
        e.insert(w, s);
    }
}

/// The contracting homotopy `[a₁|…|aₙ] ↦ [1|a₁|…|aₙ]` of the bar
/// construction of a unital structure.
pub fn contracting_homotopy(basis: &GradedBasis, x: &TensorExpr) -> TensorExpr {
    x.iter()
        .map(|(w, c)| {
            let mut v = Vec::with_capacity(w.len() + 1);
            v.push(basis.unit());
            v.extend_from_slice(w);
            (v, c.clone())
        })
        .collect()
}

/// An A∞-structure: an odd cochain with no arity-0 component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInfStructure {
    m: Cochain,
}

impl AInfStructure {
    pub fn new(m: Cochain) -> Result<Self> {
        if !m.odd {
            return Err(Error::ParityMismatch("structure maps must be odd".into()));
        }
        if !m.comps[0].is_zero() {
            return Err(Error::BasisMismatch("m₀ must vanish".into()));
        }
        Ok(AInfStructure { m })
    }

    /// From a differential graded algebra: `m₁[a] = −[da]` and
    /// `m₂[a|b] = (−1)^{|a|}[ab]`. `d[i]` and `mult[i][j]` are coordinate
    /// vectors over the basis.
    pub fn from_dga(
        basis: &GradedBasis,
        ring: &CoeffRing,
        d: &[Vec<RingElem>],
        mult: &[Vec<Vec<RingElem>>],
        exact_to: usize,
    ) -> Result<Self> {
        let b = basis.len();
        let mut m = Cochain::zero(basis, ring, true, exact_to.max(2));
        for a in 0..b {
            for (o, x) in d[a].iter().enumerate() {
                m.set(&[a], o, ring.neg(x));
            }
            for c in 0..b {
                let sign = if basis.degree(a).rem_euclid(2) == 1 {
                    -1
                } else {
                    1
                };
                for (o, x) in mult[a][c].iter().enumerate() {
                    m.set(&[a, c], o, ring.mul_int(x, sign));
                }
            }
        }
        Self::new(m)
    }

    pub fn cochain(&self) -> &Cochain {
        &self.m
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.m.basis
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.m.ring
    }

    pub fn exact_to(&self) -> usize {
        self.m.exact_to()
    }

    pub fn component(&self, k: usize) -> &MultiComponent {
        self.m.component(k)
    }

    /// `m∘m` (half of `[m,m]`); zero iff the Stasheff identities hold.
    pub fn square(&self) -> Result<Cochain> {
        self.m.compose(&self.m)
    }

    pub fn satisfies_stasheff(&self) -> Result<bool> {
        Ok(self.square()?.is_zero())
    }

    /// `m₂[1|a] = [a] = (−1)^{|a|} m₂[a|1]` and `m_i` vanishes on the unit
    /// for `i ≠ 2`.
    pub fn is_unital(&self) -> bool {
        let basis = &self.m.basis;
        let r = &self.m.ring;
        let u = basis.unit();
        let b = basis.len();
        for (k, comp) in self.m.comps.iter().enumerate() {
            for (inputs, _, _) in comp.entries() {
                if k != 2 && inputs.contains(&u) {
                    return false;
                }
            }
        }
        if self.m.exact_to() < 2 {
            return true;
        }
        let m2 = &self.m.comps[2];
        for a in 0..b {
            let sign = if basis.degree(a).rem_euclid(2) == 1 {
                -1
            } else {
                1
            };
            for o in 0..b {
                let want = if o == a { r.one() } else { r.zero() };
                if *m2.entry(&[u, a], o) != want {
                    return false;
                }
                if r.mul_int(m2.entry(&[a, u], o), sign) != want {
                    return false;
                }
            }
        }
        true
    }

    /// `∂c = [c, m]`.
    pub fn hochschild_differential(&self, c: &Cochain) -> Result<Cochain> {
        if !c.is_homogeneous() {
            return Err(Error::ParityMismatch("inhomogeneous cochain".into()));
        }
        c.bracket(&self.m)
    }

    /// `s_i(c)[a₁|…|a_{n−1}] = (−1)^{|a₁|+⋯+|aᵢ|+i+1} c[a₁|…|aᵢ|1|aᵢ₊₁|…]`,
    /// with unsuspended degrees `|a|`.
    pub fn s_op(&self, i: usize, c: &Cochain) -> Result<Cochain> {
        let e = c
            .exact_to()
            .checked_sub(1)
            .ok_or_else(|| Error::Invariant("s_i of a cochain exact only in arity 0".into()))?;
        let basis = &c.basis;
        let r = &c.ring;
        let u = basis.unit();
        let mut out = Cochain::zero(basis, r, !c.odd, e);
        for n in i..=e {
            for a in tuples(n, basis.len()) {
                let neg = !c.prefix_odd(&a, i);
                let mut w = a[..i].to_vec();
                w.push(u);
                w.extend_from_slice(&a[i..]);
                for (o, x) in c.comps[n + 1].get(&w).iter().enumerate() {
                    if !x.is_zero() {
                        out.comps[n].set(&a, o, if neg { r.neg(x) } else { x.clone() });
                    }
                }
            }
        }
        Ok(out)
    }

    /// `h_i(c) = c − ∂(s_i c) − s_i(∂c)`.
    pub fn h_op(&self, i: usize, c: &Cochain) -> Result<Cochain> {
        let s = self.s_op(i, c)?;
        let ds = self.hochschild_differential(&s)?;
        let sd = self.s_op(i, &self.hochschild_differential(c)?)?;
        c.sub(&ds)?.sub(&sd)
    }

    /// Apply `h_0, …, h_{levels−1}`, returning the result together with the
    /// homotopy data: `c − result = ∂(witness) + correction`, where
    /// `witness = Σ s_i(cᵢ)` and `correction = Σ s_i(∂cᵢ)`.
    pub fn normalize(&self, c: &Cochain, levels: usize) -> Result<Normalization> {
        let mut cur = c.clone();
        let mut witness: Option<Cochain> = None;
        let mut correction: Option<Cochain> = None;
        for i in 0..levels {
            let s = self.s_op(i, &cur)?;
            let sd = self.s_op(i, &self.hochschild_differential(&cur)?)?;
            let next = cur.sub(&self.hochschild_differential(&s)?)?.sub(&sd)?;
            witness = Some(match witness {
                Some(w) => w.add(&s)?,
                None => s,
            });
            correction = Some(match correction {
                Some(w) => w.add(&sd)?,
                None => sd,
            });
            cur = next;
        }
        let zero = |odd| Cochain::zero(&c.basis, &c.ring, odd, c.exact_to());
        Ok(Normalization {
            normalized: cur,
            witness: witness.unwrap_or_else(|| zero(!c.odd)),
            correction: correction.unwrap_or_else(|| zero(c.odd)),
        })
    }
}

/// Output of [`AInfStructure::normalize`].
#[derive(Clone, Debug)]
pub struct Normalization {
    pub normalized: Cochain,
    pub witness: Cochain,
    pub correction: Cochain,
}

fn letter_index(l: Letter) -> usize {
    match l {
        Letter::Tau => 0,
        Letter::T => 1,
    }
}

/// Bar-side structure of a cobar derivation on the two-cell basis. The
/// coefficient of the word `x₁⋯x_k` in `m*(g)` is the coefficient of `[g^∨]`
/// in `m_k[x₁^∨|…|x_k^∨]`, where `τ^∨ = 1` and `t^∨ = y`.
pub fn dualize(mstar: &Derivation) -> Result<AInfStructure> {
    if !mstar.is_odd() {
        return Err(Error::ParityMismatch(
            "structure derivation must be odd".into(),
        ));
    }
    let basis = GradedBasis::two_cell(mstar.ctx().d);
    let l = mstar.maxlen();
    let mut m = Cochain::zero(&basis, mstar.ring(), true, l);
    for (out, value) in [(0, &mstar.on_tau), (1, &mstar.on_t)] {
        for (w, c) in value.terms() {
            if w.is_empty() {
                return Err(Error::BasisMismatch(
                    "derivation has a constant term".into(),
                ));
            }
            let inputs: Vec<usize> = w.letters().map(letter_index).collect();
            m.set(&inputs, out, c.clone());
        }
    }
    AInfStructure::new(m)
}

/// Inverse of [`dualize`].
pub fn dualize_back(m: &AInfStructure) -> Result<Derivation> {
    let basis = m.basis();
    if basis.len() != 2 || basis.unit() != 0 {
        return Err(Error::BasisMismatch(
            "expected the two-cell basis {1, y}".into(),
        ));
    }
    let ctx = GradingContext::new(basis.degree(1) - 1);
    let r = m.ring();
    let l = m.exact_to();
    let mut values = [NCSeries::zero(r, l), NCSeries::zero(r, l)];
    for k in 1..=l {
        for (inputs, out, c) in m.component(k).entries() {
            let letters: Vec<Letter> = inputs
                .iter()
                .map(|&x| if x == 0 { Letter::Tau } else { Letter::T })
                .collect();
            values[out].add_term(Word::from_letters(&letters), c.clone());
        }
    }
    let [on_tau, on_t] = values;
    Derivation::new(ctx, true, on_tau, on_t)
}

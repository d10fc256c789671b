//! Classification of even Moore algebras up to weak equivalence.
//!
//! An even Moore algebra is determined by its characteristic series `u(t)`,
//! and the group of power series `f(t) = f₁t + …` with `f₁` a unit acts on
//! the right by `u ↦ u∘f`. Over a graded field the orbits are labelled by
//! the height and the class of the leading coefficient modulo `n`-th powers;
//! over a complete discrete valuation ring every orbit with `u₁ = rπ`
//! contains a unique trivial or canonical series.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::noncomm::{mstar_even, mstar_odd, Derivation};
use crate::rings::{CoeffRing, Monomial, RingElem, RingKind, Scalar};
use crate::series::PowerSeries;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MooreAlgebra {
    Even {
        u: PowerSeries,
        d: i64,
    },
    Odd {
        v: PowerSeries,
        w: PowerSeries,
        d: i64,
    },
}

impl MooreAlgebra {
    pub fn even(u: PowerSeries, d: i64) -> Result<Self> {
        if d % 2 != 0 {
            return Err(Error::ParityMismatch(format!(
                "even Moore algebra with odd d = {d}"
            )));
        }
        if !u.coeff(0).is_zero() {
            return Err(Error::CompositionUndefined);
        }
        Ok(MooreAlgebra::Even { u, d })
    }

    pub fn odd(v: PowerSeries, w: PowerSeries, d: i64) -> Result<Self> {
        if d % 2 == 0 {
            return Err(Error::ParityMismatch(format!(
                "odd Moore algebra with even d = {d}"
            )));
        }
        if v.ring() != w.ring() {
            return Err(Error::IncompatibleRing);
        }
        for s in [&v, &w] {
            if !s.is_even() || !s.coeff(0).is_zero() {
                return Err(Error::ParityMismatch(
                    "v(t), w(t) must be supported on even exponents ≥ 2".into(),
                ));
            }
        }
        Ok(MooreAlgebra::Odd { v, w, d })
    }

    pub fn d(&self) -> i64 {
        match self {
            MooreAlgebra::Even { d, .. } | MooreAlgebra::Odd { d, .. } => *d,
        }
    }

    pub fn ring(&self) -> &CoeffRing {
        match self {
            MooreAlgebra::Even { u, .. } => u.ring(),
            MooreAlgebra::Odd { v, .. } => v.ring(),
        }
    }

    pub fn trunc(&self) -> usize {
        match self {
            MooreAlgebra::Even { u, .. } => u.trunc(),
            MooreAlgebra::Odd { v, w, .. } => v.trunc().min(w.trunc()),
        }
    }

    /// Characteristic series of an even algebra.
    pub fn u(&self) -> Result<&PowerSeries> {
        match self {
            MooreAlgebra::Even { u, .. } => Ok(u),
            MooreAlgebra::Odd { .. } => Err(Error::UnsupportedCase(
                "operation needs an even Moore algebra".into(),
            )),
        }
    }

    pub fn height(&self) -> Result<usize> {
        self.u()?.height()
    }

    /// The structure derivation `m*` on words of length at most `maxlen`.
    pub fn mstar(&self, maxlen: usize) -> Result<Derivation> {
        match self {
            MooreAlgebra::Even { u, d } => mstar_even(u, *d, maxlen),
            MooreAlgebra::Odd { v, w, d } => mstar_odd(v, w, *d, maxlen),
        }
    }
}

fn check_substitution(f: &PowerSeries) -> Result<()> {
    if !f.coeff(0).is_zero() {
        return Err(Error::CompositionUndefined);
    }
    let f1 = f.coeff(1);
    if !f.ring().is_unit(&f1) {
        return Err(Error::NotInvertible(format!(
            "linear coefficient {} of the substitution",
            f.ring().format(&f1)
        )));
    }
    Ok(())
}

/// Right action of the substitution `t ↦ f(t)` on an even algebra.
pub fn act(m: &MooreAlgebra, f: &PowerSeries) -> Result<MooreAlgebra> {
    check_substitution(f)?;
    let u = m.u()?;
    MooreAlgebra::even(u.compose(f)?, m.d())
}

/// `Σ_{k odd} s_k t^{k−1}`: the odd part of `s` divided by `t`.
fn odd_quotient(s: &PowerSeries) -> PowerSeries {
    let r = s.ring();
    let n = s.trunc().saturating_sub(1);
    let mut out = PowerSeries::zero(r, n);
    for k in (1..=s.trunc()).step_by(2) {
        out.set_coeff(k - 1, s.coeff(k));
    }
    out
}

/// Action of the normalized endomorphism `(G, F)` on the structure
/// derivation `A∂_τ + B∂_t + adτ − τ²∂_τ` with `t` odd. Returns `(A′, B′)`:
///
/// `A′ = A(F) − G² − [B·D(G∘F⁻¹)](F)`, `B′ = 2Gt + [B·D(F⁻¹)](F)`,
/// where `D(S) = Σ_{k odd} s_k t^{k−1}`.
pub fn act_full(
    a: &PowerSeries,
    b: &PowerSeries,
    g: &PowerSeries,
    f: &PowerSeries,
) -> Result<(PowerSeries, PowerSeries)> {
    check_substitution(f)?;
    if !a.is_even() || !b.is_even() {
        return Err(Error::ParityMismatch(
            "A(t), B(t) must be even series".into(),
        ));
    }
    if !g.is_odd() || !f.is_odd() {
        return Err(Error::ParityMismatch(
            "G(t), F(t) must be odd series".into(),
        ));
    }
    let finv = f.reversion()?;
    let a_new = a
        .compose(f)?
        .sub(&g.mul(g)?)?
        .sub(&b.mul(&odd_quotient(&g.compose(&finv)?))?.compose(f)?)?;
    let two = g.ring().from_i64(2);
    let b_new = g
        .shift_up(1)
        .scale(&two)
        .add(&b.mul(&odd_quotient(&finv))?.compose(f)?)?;
    Ok((a_new, b_new))
}

/// Action of `(G, F)` on an odd algebra, whose `m*` has `A = w`, `B = v`.
pub fn act_odd(m: &MooreAlgebra, g: &PowerSeries, f: &PowerSeries) -> Result<MooreAlgebra> {
    let MooreAlgebra::Odd { v, w, d } = m else {
        return Err(Error::UnsupportedCase(
            "act_odd needs an odd Moore algebra".into(),
        ));
    };
    let (w2, v2) = act_full(w, v, g, f)?;
    MooreAlgebra::odd(v2, w2, *d)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormKind {
    /// `u = πt`.
    Trivial,
    /// `u₁ = π`, `π | u₂..u_{n−1}`, `u_n` a unit, nothing above.
    Canonical { n: usize, coeffs: Vec<RingElem> },
    /// `u = u_n tⁿ` over a graded field.
    GradedFieldForm { n: usize, leading: RingElem },
}

/// A normal form together with the substitution reaching it:
/// `u∘witness = form` to the working truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub kind: FormKind,
    pub form: PowerSeries,
    pub witness: PowerSeries,
    /// Over ℤ/p^K: the power of π modulo which the form is an orbit
    /// invariant of the given data. The linear coefficient of a witness is
    /// only pinned down modulo π^{K−1}, and an unknown term beyond the
    /// t-truncation N reaches the form at valuation ⌈(N+1−k)/(k−1)⌉.
    /// `None` over a graded field, where the form is exact.
    pub pi_precision: Option<u32>,
}

impl CanonicalForm {
    /// Same kind and degree, and forms equal modulo the smaller of the two
    /// π-precisions (exactly over a graded field).
    pub fn agrees_with(&self, other: &CanonicalForm) -> Result<bool> {
        let shape = |k: &FormKind| match k {
            FormKind::Trivial => (0, 0),
            FormKind::Canonical { n, .. } => (1, *n),
            FormKind::GradedFieldForm { n, .. } => (2, *n),
        };
        if shape(&self.kind) != shape(&other.kind) {
            return Ok(false);
        }
        let Some(e) = self.pi_precision.min(other.pi_precision) else {
            return Ok(self.form == other.form);
        };
        let r = self.form.ring();
        let (p, k) = r.dvr_params()?;
        if e >= k {
            return Ok(self.form == other.form);
        }
        if e == 0 {
            return Ok(true);
        }
        let coarse = CoeffRing::padic(p, e)?;
        let coarse = if r.is_laurent() {
            coarse.with_laurent()
        } else {
            coarse
        };
        Ok(self.form.map_into(&coarse)? == other.form.map_into(&coarse)?)
    }

    pub fn to_json(&self) -> Value {
        let r = self.form.ring();
        let kind = match &self.kind {
            FormKind::Trivial => json!({ "type": "trivial" }),
            FormKind::Canonical { n, coeffs } => json!({
                "type": "canonical",
                "n": n,
                "coeffs": coeffs.iter().map(|c| r.format(c)).collect::<Vec<_>>(),
            }),
            FormKind::GradedFieldForm { n, leading } => json!({
                "type": "graded-field",
                "n": n,
                "leading": r.format(leading),
            }),
        };
        json!({
            "kind": kind,
            "form": self.form.to_text(),
            "witness": self.witness.to_text(),
            "pi_precision": self.pi_precision,
        })
    }
}

fn require_graded_field(r: &CoeffRing) -> Result<()> {
    if r.is_graded_field() && r.formal_names().is_empty() {
        Ok(())
    } else {
        Err(Error::NotAField(r.spec()))
    }
}

fn check_char(r: &CoeffRing, n: usize) -> Result<()> {
    let p = r.characteristic();
    if p != 0 && (n as u64).is_multiple_of(p) {
        return Err(Error::UnsupportedCase(format!(
            "height {n} divisible by the characteristic {p}"
        )));
    }
    Ok(())
}

/// Reduce `u` to `u_n tⁿ` by the substitutions `t ↦ t − c t^{k−n+1}`.
pub fn canonicalize_char0(u: &PowerSeries) -> Result<CanonicalForm> {
    let r = u.ring().clone();
    require_graded_field(&r)?;
    let n = u.height()?;
    check_char(&r, n)?;
    let un = u.coeff(n);
    let denom = r.inverse(&r.mul_int(&un, n as i64))?;
    let trunc = u.trunc();
    let mut cur = u.clone();
    let mut witness = PowerSeries::identity(&r, trunc);
    // Each pass clears the first coefficient above n and never refills it.
    while let Some(k) = (n + 1..=trunc).find(|&k| !cur.coeff(k).is_zero()) {
        let c = r.mul(&cur.coeff(k), &denom);
        let mut h = PowerSeries::identity(&r, trunc);
        h.set_coeff(k - n + 1, r.neg(&c));
        cur = cur.compose(&h)?;
        witness = witness.compose(&h)?;
    }
    Ok(CanonicalForm {
        kind: FormKind::GradedFieldForm { n, leading: un },
        form: cur,
        witness,
        pi_precision: None,
    })
}

/// Reduce `u` with `u₁ = rπ` to its trivial or canonical form over ℤ/p^K.
/// The result is canonical modulo `(π^K, t^{N+1})`.
pub fn canonicalize_dvr(u: &PowerSeries) -> Result<CanonicalForm> {
    let r = u.ring().clone();
    let (p, prec) = r.dvr_params()?;
    if !u.coeff(0).is_zero() {
        return Err(Error::CompositionUndefined);
    }
    let trunc = u.trunc();
    let u1 = u.coeff(1);
    if trunc < 1 || r.valuation(&u1)? != 1 || !r.divisible_by_uniformizer(&u1)? {
        return Err(Error::UnsupportedCase("u₁ must be π times a unit".into()));
    }
    // u ↦ u(r⁻¹t) makes u₁ = π exactly.
    let unit = r.div_by_uniformizer(&u1)?;
    let mut witness = PowerSeries::monomial(&r, trunc, 1, r.inverse(&unit)?);
    let mut cur = u.compose(&witness)?;

    let first_unit = (2..=trunc).find(|&i| r.is_unit(&cur.coeff(i)));
    for i in 2..=first_unit.unwrap_or(trunc) {
        let c = cur.coeff(i);
        if !r.is_unit(&c) && !r.divisible_by_uniformizer(&c)? {
            return Err(Error::UnsupportedCase(format!(
                "coefficient {} is neither a unit nor divisible by π",
                r.format(&c)
            )));
        }
    }

    let Some(k) = first_unit else {
        // Everything is divisible by π: clear u_n with t ↦ t − (u_n/π)tⁿ.
        for n in 2..=trunc {
            let c = cur.coeff(n);
            if c.is_zero() {
                continue;
            }
            let mut h = PowerSeries::identity(&r, trunc);
            h.set_coeff(n, r.neg(&r.div_by_uniformizer(&c)?));
            cur = cur.compose(&h)?;
            witness = witness.compose(&h)?;
        }
        return Ok(CanonicalForm {
            kind: FormKind::Trivial,
            form: cur,
            witness,
            pi_precision: Some(prec),
        });
    };
    if (k as u64).is_multiple_of(p) {
        return Err(Error::WildCase { p, k });
    }

    let denom = r.inverse(&r.mul_int(&cur.coeff(k), k as i64))?;
    // Every step either raises l or moves s strictly right.
    let budget = (prec as usize + 1) * (trunc + 1);
    for _ in 0..=budget {
        let mut best: Option<(u32, usize)> = None;
        for i in k + 1..=trunc {
            let c = cur.coeff(i);
            if c.is_zero() {
                continue;
            }
            let l = r.valuation(&c)?;
            if best.is_none_or(|(bl, _)| l < bl) {
                best = Some((l, i));
            }
        }
        let Some((_, s)) = best else {
            let coeffs = (2..=k).map(|i| cur.coeff(i)).collect();
            let reach = (trunc + 1 - k).div_ceil(k - 1) as u32;
            return Ok(CanonicalForm {
                kind: FormKind::Canonical { n: k, coeffs },
                form: cur,
                witness,
                pi_precision: Some(reach.min(prec - 1)),
            });
        };
        let c = r.mul(&cur.coeff(s), &denom);
        let mut h = PowerSeries::identity(&r, trunc);
        h.set_coeff(s - k + 1, r.neg(&c));
        cur = cur.compose(&h)?;
        witness = witness.compose(&h)?;
    }
    Err(Error::NeedsHigherPrecision(format!(
        "canonicalization did not settle within {budget} steps"
    )))
}

/// Truncation from which the canonical form of degree `k` over ℤ/p^K is
/// pinned down modulo π^K by the data, when computed over ℤ/p^{K+1}.
pub fn dvr_exact_truncation(k: usize, precision: u32) -> usize {
    (precision as usize + 1) * k.saturating_sub(1)
}

/// The orbit label `(n, class of u_n modulo n-th powers of degree-0 units)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitInvariant {
    pub n: usize,
    /// A representative of the class; equal classes over 𝔽_p always get
    /// the same representative, over ℚ whenever the square-free-style
    /// reduction by trial division is complete.
    pub class: RingElem,
    leading: RingElem,
}

impl OrbitInvariant {
    pub fn leading(&self) -> &RingElem {
        &self.leading
    }

    /// Exact test: same height and `u_n^A / u_n^C` an `n`-th power.
    pub fn same_orbit(&self, other: &OrbitInvariant, r: &CoeffRing) -> Result<bool> {
        if self.n != other.n {
            return Ok(false);
        }
        let (ma, sa) = split_unit(r, &self.leading)?;
        let (mb, sb) = split_unit(r, &other.leading)?;
        if ma != mb {
            return Ok(false);
        }
        is_nth_power_ratio(r, &sa, &sb, self.n)
    }
}

fn split_unit(r: &CoeffRing, a: &RingElem) -> Result<(Monomial, Scalar)> {
    match r.as_monomial(a) {
        Some((m, s)) if r.is_unit(a) => Ok((m, s)),
        _ => Err(Error::NotAUnit(r.format(a))),
    }
}

fn fp_power(a: u64, e: u64, p: u64) -> u64 {
    BigInt::from(a)
        .modpow(&BigInt::from(e), &BigInt::from(p))
        .try_into()
        .expect("residue fits u64")
}

fn is_nth_power_ratio(r: &CoeffRing, a: &Scalar, b: &Scalar, n: usize) -> Result<bool> {
    match (r.kind(), a, b) {
        (RingKind::Rationals, Scalar::Rational(x), Scalar::Rational(y)) => {
            Ok(rational_is_nth_power(&(x / y), n))
        }
        (RingKind::PrimeField(p), Scalar::Residue(x), Scalar::Residue(y)) => {
            let e = (p - 1) / (n as u64).gcd(&(p - 1));
            Ok(fp_power(*x, e, p) == fp_power(*y, e, p))
        }
        _ => Err(Error::NotAField(r.spec())),
    }
}

fn rational_is_nth_power(q: &BigRational, n: usize) -> bool {
    if q.is_negative() && n.is_multiple_of(2) {
        return false;
    }
    let n32 = n as u32;
    let is_power = |z: &BigInt| {
        let z = z.abs();
        let root = z.nth_root(n32);
        root.pow(n32) == z
    };
    is_power(q.numer()) && is_power(q.denom())
}

/// Divide out `n`-th powers of small primes and a perfect `n`-th power
/// cofactor from a positive integer.
fn reduce_integer_class(mut z: BigInt, n: u32) -> BigInt {
    let mut out = BigInt::one();
    let mut p = BigInt::from(2u32);
    let bound = BigInt::from(100_000u32);
    while p <= bound && &p * &p <= z {
        let mut e = 0u32;
        while z.is_multiple_of(&p) {
            z /= &p;
            e += 1;
        }
        out *= p.pow(e % n);
        p += 1u32;
    }
    let root = z.nth_root(n);
    if root.pow(n) == z {
        z = BigInt::one();
    }
    out * z
}

fn class_representative(r: &CoeffRing, s: &Scalar, n: usize) -> Result<Scalar> {
    match (r.kind(), s) {
        (RingKind::Rationals, Scalar::Rational(q)) => {
            let n32 = n as u32;
            // q·den^n is an integer in the same class.
            let mut z = q.numer() * q.denom().pow(n32 - 1);
            let negative = z.is_negative();
            z = z.abs();
            let mut rep = reduce_integer_class(z, n32);
            // −1 is an n-th power for odd n.
            if negative && n.is_multiple_of(2) {
                rep = -rep;
            }
            Ok(Scalar::Rational(BigRational::from_integer(rep)))
        }
        (RingKind::PrimeField(p), Scalar::Residue(x)) => {
            let e = (p - 1) / (n as u64).gcd(&(p - 1));
            let target = fp_power(*x, e, p);
            // Small residues meet every class quickly.
            let rep = (1..p).find(|&y| fp_power(y, e, p) == target).unwrap_or(*x);
            Ok(Scalar::Residue(rep))
        }
        _ => Err(Error::NotAField(r.spec())),
    }
}

/// Height and leading-coefficient class of an even algebra over ℚ or 𝔽_p
/// (optionally Laurent), valid when the characteristic does not divide the
/// height.
pub fn orbit_invariant_char0(m: &MooreAlgebra) -> Result<OrbitInvariant> {
    let u = m.u()?;
    let r = u.ring();
    require_graded_field(r)?;
    let n = u.height()?;
    check_char(r, n)?;
    let leading = u.coeff(n);
    let (mono, s) = split_unit(r, &leading)?;
    let class = r.from_monomial(mono, class_representative(r, &s, n)?);
    Ok(OrbitInvariant { n, class, leading })
}

/// Whether two even algebras lie in the same orbit: by orbit invariants
/// over a graded field, by canonical forms over ℤ/p^K (compared modulo
/// the π-precision the data determines, see [`CanonicalForm`]).
pub fn equivalent(a: &MooreAlgebra, b: &MooreAlgebra) -> Result<bool> {
    let (ua, ub) = (a.u()?, b.u()?);
    if ua.ring() != ub.ring() {
        return Err(Error::IncompatibleRing);
    }
    if a.d() != b.d() {
        return Ok(false);
    }
    let r = ua.ring();
    if r.has_uniformizer() {
        let n = ua.trunc().min(ub.trunc());
        let ca = canonicalize_dvr(&ua.truncate(n))?;
        let cb = canonicalize_dvr(&ub.truncate(n))?;
        return ca.agrees_with(&cb);
    }
    let ia = orbit_invariant_char0(a)?;
    let ib = orbit_invariant_char0(b)?;
    ia.same_orbit(&ib, r)
}

/// A coefficient whose degree disagrees with the one forced by `d`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct DegreeViolation {
    pub coefficient: String,
    pub value: String,
    pub expected: i64,
    pub found: Vec<i64>,
}

/// Check `|u_i| = i(d+2)−2` (even) or `|v_i| = 2i(d+2)−d−3`,
/// `|w_i| = 2i(d+2)−2` (odd), with `|v| = 2`. Empty unless Laurent.
pub fn degree_audit(m: &MooreAlgebra) -> Vec<DegreeViolation> {
    let r = m.ring();
    if !r.is_laurent() {
        return Vec::new();
    }
    let d = m.d();
    let mut out = Vec::new();
    let mut check = |name: String, c: RingElem, expected: i64| {
        let found: Vec<i64> = c
            .terms()
            .iter()
            .map(|(mono, _)| mono.degree())
            .filter(|&deg| deg != expected)
            .collect();
        if !found.is_empty() {
            out.push(DegreeViolation {
                coefficient: name,
                value: r.format(&c),
                expected,
                found,
            });
        }
    };
    match m {
        MooreAlgebra::Even { u, .. } => {
            for i in 1..=u.trunc() {
                let ii = i as i64;
                check(format!("u{i}"), u.coeff(i), ii * (d + 2) - 2);
            }
        }
        MooreAlgebra::Odd { v, w, .. } => {
            // v_i, w_i are the coefficients of t^{2i}.
            for i in 1..=m.trunc() / 2 {
                let ii = i as i64;
                check(format!("v{i}"), v.coeff(2 * i), 2 * ii * (d + 2) - d - 3);
                check(format!("w{i}"), w.coeff(2 * i), 2 * ii * (d + 2) - 2);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noncomm::{structure_derivation, GradingContext, NCEndo};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ps(r: &CoeffRing, s: &str, n: usize) -> PowerSeries {
        PowerSeries::parse(r, s, n).unwrap()
    }

    fn even(r: &CoeffRing, s: &str, n: usize) -> MooreAlgebra {
        MooreAlgebra::even(ps(r, s, n), 0).unwrap()
    }

    fn random_series(
        rng: &mut ChaCha8Rng,
        r: &CoeffRing,
        n: usize,
        keep: impl Fn(usize) -> bool,
    ) -> PowerSeries {
        let p = r.characteristic().max(r.modulus()).max(7) as i64;
        let mut s = PowerSeries::zero(r, n);
        for i in 1..=n {
            if keep(i) {
                s.set_coeff(i, r.from_i64(rng.random_range(0..p)));
            }
        }
        s
    }

    fn random_substitution(
        rng: &mut ChaCha8Rng,
        r: &CoeffRing,
        n: usize,
        keep: impl Fn(usize) -> bool,
    ) -> PowerSeries {
        let mut f = random_series(rng, r, n, keep);
        let p = r.characteristic().max(r.modulus()).max(7) as i64;
        loop {
            let c = r.from_i64(rng.random_range(1..p));
            if r.is_unit(&c) {
                f.set_coeff(1, c);
                return f;
            }
        }
    }

    #[test]
    fn act_identity_and_scaling() {
        let q = CoeffRing::rationals();
        let m = even(&q, "t^2 + t^5", 8);
        assert_eq!(act(&m, &PowerSeries::identity(&q, 8)).unwrap(), m);
        let sq = even(&q, "t^2", 8);
        let scaled = act(&sq, &ps(&q, "3*t", 8)).unwrap();
        assert_eq!(scaled.u().unwrap(), &ps(&q, "9*t^2", 8));
        assert!(act(&m, &ps(&q, "t^2", 8)).is_err());
    }

    #[test]
    fn act_matches_conjugation_even() {
        let r = CoeffRing::prime_field(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = 7;
        for _ in 0..4 {
            let u = random_series(&mut rng, &r, l, |_| true);
            let f = random_substitution(&mut rng, &r, l, |_| true);
            let m = MooreAlgebra::even(u, 0).unwrap();
            let acted = act(&m, &f).unwrap();
            let phi = NCEndo::from_series(&PowerSeries::zero(&r, l), &f, l).unwrap();
            let conj = phi.conjugate(&m.mstar(l).unwrap()).unwrap();
            assert_eq!(conj, acted.mstar(l).unwrap());
        }
    }

    #[test]
    fn act_full_matches_conjugation_odd() {
        let r = CoeffRing::prime_field(7).unwrap();
        let ctx = GradingContext::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = 8;
        for _ in 0..4 {
            let a = random_series(&mut rng, &r, l + 1, |i| i % 2 == 0);
            let b = random_series(&mut rng, &r, l + 1, |i| i % 2 == 0);
            let g = random_series(&mut rng, &r, l + 1, |i| i % 2 == 1);
            let f = random_substitution(&mut rng, &r, l + 1, |i| i % 2 == 1);
            let (a2, b2) = act_full(&a, &b, &g, &f).unwrap();
            let xi = structure_derivation(ctx, &a, &b, l).unwrap();
            let phi = NCEndo::from_series(&g, &f, l).unwrap();
            let conj = phi.conjugate(&xi).unwrap();
            let expect = structure_derivation(ctx, &a2, &b2, l).unwrap();
            assert_eq!(conj, expect);
        }
    }

    #[test]
    fn act_full_degenerate_cases() {
        let r = CoeffRing::prime_field(7).unwrap();
        let a = ps(&r, "t^2 + 3*t^4", 8);
        let b = ps(&r, "2*t^2", 8);
        let zero = PowerSeries::zero(&r, 8);
        let t = PowerSeries::identity(&r, 8);
        let (a2, b2) = act_full(&a, &b, &zero, &t).unwrap();
        assert_eq!(
            (a2.truncate(7), b2.truncate(7)),
            (a.truncate(7), b.truncate(7))
        );
        let f = ps(&r, "2*t + t^3", 8);
        let (a3, b3) = act_full(&a, &zero, &zero, &f).unwrap();
        assert_eq!(a3.truncate(7), a.compose(&f).unwrap().truncate(7));
        assert!(b3.is_zero());
        assert!(act_full(&ps(&r, "t", 8), &b, &zero, &t).is_err());
        assert!(act_full(&a, &b, &ps(&r, "t^2", 8), &t).is_err());
    }

    #[test]
    fn char0_examples() {
        let q = CoeffRing::rationals();
        let c = canonicalize_char0(&ps(&q, "t^2", 6)).unwrap();
        assert_eq!(c.witness, PowerSeries::identity(&q, 6));
        let u = ps(&q, "t^2 + t^3", 4);
        let c = canonicalize_char0(&u).unwrap();
        assert_eq!(c.form, ps(&q, "t^2", 4));
        assert_eq!(c.witness.truncate(3), ps(&q, "t - 1/2*t^2 + 5/8*t^3", 3));
        assert_eq!(u.compose(&c.witness).unwrap(), c.form);

        let f7 = CoeffRing::prime_field(7).unwrap();
        let u = ps(&f7, "2*t^3 + t^4", 6);
        let c = canonicalize_char0(&u).unwrap();
        assert_eq!(c.form, ps(&f7, "2*t^3", 6));
        // h₁ = t − t²/(3·2) = t − t²·(1/6).
        assert_eq!(
            c.witness.coeff(2),
            f7.neg(&f7.inverse(&f7.from_i64(6)).unwrap())
        );
        assert_eq!(u.compose(&c.witness).unwrap(), c.form);

        let f3 = CoeffRing::prime_field(3).unwrap();
        assert!(matches!(
            canonicalize_char0(&ps(&f3, "t^3 + t^4", 6)),
            Err(Error::UnsupportedCase(_))
        ));
    }

    #[test]
    fn invariant_examples() {
        let q = CoeffRing::rationals();
        let i = orbit_invariant_char0(&even(&q, "t^2 + t^3", 6)).unwrap();
        assert_eq!((i.n, i.class.clone()), (2, q.one()));
        let i = orbit_invariant_char0(&even(&q, "3*t^5", 6)).unwrap();
        assert_eq!((i.n, i.class), (5, q.from_i64(3)));
        let i = orbit_invariant_char0(&even(&q, "-24*t^3", 6)).unwrap();
        assert_eq!(i.class, q.from_i64(3));
        let i = orbit_invariant_char0(&even(&q, "-1/2*t^2", 6)).unwrap();
        assert_eq!(i.class, q.from_i64(-2));
        assert!(equivalent(&even(&q, "t^2", 6), &even(&q, "4*t^2", 6)).unwrap());
        assert!(!equivalent(&even(&q, "t^2", 6), &even(&q, "2*t^2", 6)).unwrap());
        assert!(!equivalent(&even(&q, "t^2", 6), &even(&q, "-t^2", 6)).unwrap());
        assert!(equivalent(&even(&q, "t^3", 6), &even(&q, "-8*t^3", 6)).unwrap());

        let f7 = CoeffRing::prime_field(7).unwrap();
        // Squares mod 7 are {1,2,4}.
        assert!(equivalent(&even(&f7, "t^2", 6), &even(&f7, "2*t^2", 6)).unwrap());
        assert!(!equivalent(&even(&f7, "t^2", 6), &even(&f7, "3*t^2", 6)).unwrap());
        // gcd(5, 6) = 1: every unit is a fifth power.
        assert!(equivalent(&even(&f7, "t^5", 6), &even(&f7, "3*t^5", 6)).unwrap());
        let i = orbit_invariant_char0(&even(&f7, "5*t^2", 6)).unwrap();
        assert_eq!(i.class, f7.from_i64(3));
    }

    #[test]
    fn dvr_examples() {
        let z = CoeffRing::padic(5, 6).unwrap();
        let c = canonicalize_dvr(&ps(&z, "5*t", 8)).unwrap();
        assert_eq!(c.kind, FormKind::Trivial);
        let u = ps(&z, "5*t + t^2", 8);
        let c = canonicalize_dvr(&u).unwrap();
        assert!(matches!(c.kind, FormKind::Canonical { n: 2, .. }));
        assert_eq!(c.witness, PowerSeries::identity(&z, 8));
        assert_eq!(c.form, u);

        let u = ps(&z, "5*t + 5*t^2 + t^3 + t^4", 10);
        let c = canonicalize_dvr(&u).unwrap();
        let FormKind::Canonical { n: 3, coeffs } = &c.kind else {
            panic!("{:?}", c.kind)
        };
        assert!(z.divisible_by_uniformizer(&coeffs[0]).unwrap());
        assert!(c.form.is_canonical().unwrap());
        assert_eq!(u.compose(&c.witness).unwrap(), c.form);
        assert_eq!(canonicalize_dvr(&c.form).unwrap().form, c.form);

        // u₁ = 2·5 needs the r⁻¹t substitution first.
        let u = ps(&z, "10*t + 25*t^2 + 3*t^3", 8);
        let c = canonicalize_dvr(&u).unwrap();
        assert!(c.form.is_canonical().unwrap());
        assert_eq!(u.compose(&c.witness).unwrap(), c.form);

        let u = ps(&z, "5*t + 10*t^3 + 25*t^4", 8);
        let c = canonicalize_dvr(&u).unwrap();
        assert!(c.form.is_trivial().unwrap());
        assert_eq!(u.compose(&c.witness).unwrap(), c.form);

        assert!(matches!(
            canonicalize_dvr(&ps(&z, "5*t + t^5", 8)),
            Err(Error::WildCase { p: 5, k: 5 })
        ));
        assert!(canonicalize_dvr(&ps(&z, "25*t + t^2", 8)).is_err());
        assert!(!equivalent(&even(&z, "5*t + t^2", 8), &even(&z, "5*t + t^3", 8)).unwrap());
    }

    #[test]
    fn dvr_forms_need_working_precision() {
        // Over ℤ/5⁴ at truncation 9 the two forms of one orbit differ by
        // 75 in the t⁴ coefficient; one extra digit and truncation
        // (K+1)(k−1) pin them down modulo 5⁴.
        let z4 = CoeffRing::padic(5, 4).unwrap();
        let u = "5*t + 315*t^2 + 50*t^3 + 3*t^4 + 168*t^5 + 523*t^6 + 314*t^7 + 58*t^8 + 360*t^9";
        let f =
            "322*t + 54*t^2 + 414*t^3 + 598*t^4 + 110*t^5 + 9*t^6 + 279*t^7 + 209*t^8 + 535*t^9";
        let a = canonicalize_dvr(&ps(&z4, u, 9)).unwrap();
        let b = canonicalize_dvr(&ps(&z4, u, 9).compose(&ps(&z4, f, 9)).unwrap()).unwrap();
        assert_ne!(a.form, b.form);
        assert_eq!(a.pi_precision, Some(2));
        assert!(a.agrees_with(&b).unwrap());

        let z5 = CoeffRing::padic(5, 5).unwrap();
        let n = dvr_exact_truncation(4, 4);
        let uw = ps(&z5, u, n);
        let a = canonicalize_dvr(&uw).unwrap();
        let b = canonicalize_dvr(&uw.compose(&ps(&z5, f, n)).unwrap()).unwrap();
        assert_eq!(a.pi_precision, Some(4));
        assert_eq!(a.form.map_into(&z4).unwrap(), b.form.map_into(&z4).unwrap());
    }

    #[test]
    fn audit_examples() {
        let r: CoeffRing = "Zp:5:6[v]".parse().unwrap();
        let m = MooreAlgebra::even(ps(&r, "5*t + v*t^2", 6), 0).unwrap();
        assert!(degree_audit(&m).is_empty());
        let m = MooreAlgebra::even(ps(&r, "5*t + t^2", 6), 2).unwrap();
        let bad = degree_audit(&m);
        let u2 = bad.iter().find(|v| v.coefficient == "u2").unwrap();
        assert_eq!((u2.expected, u2.found.clone()), (6, vec![0]));
        let plain = CoeffRing::padic(5, 6).unwrap();
        assert!(degree_audit(&MooreAlgebra::even(ps(&plain, "t^2", 6), 2).unwrap()).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn right_action_law(seed in any::<u64>()) {
            let r = CoeffRing::prime_field(7).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = MooreAlgebra::even(random_series(&mut rng, &r, 8, |_| true), 0).unwrap();
            let f = random_substitution(&mut rng, &r, 8, |_| true);
            let g = random_substitution(&mut rng, &r, 8, |_| true);
            let lhs = act(&act(&m, &f).unwrap(), &g).unwrap();
            let rhs = act(&m, &f.compose(&g).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn invariants_constant_on_orbits(seed in any::<u64>()) {
            let q = CoeffRing::rationals();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..4usize);
            let mut u = random_series(&mut rng, &q, 8, |i| i > n);
            u.set_coeff(n, q.from_i64(rng.random_range(1..30)));
            let m = MooreAlgebra::even(u.clone(), 0).unwrap();
            let f = random_substitution(&mut rng, &q, 8, |_| true);
            let moved = act(&m, &f).unwrap();
            prop_assert_eq!(moved.height().unwrap(), n);
            prop_assert!(equivalent(&m, &moved).unwrap());
            let c = canonicalize_char0(&u).unwrap();
            prop_assert_eq!(u.compose(&c.witness).unwrap(), c.form);
        }

        #[test]
        fn dvr_forms_constant_on_orbits(seed in any::<u64>()) {
            let z = CoeffRing::padic(5, 4).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut u = random_series(&mut rng, &z, 9, |i| i > 1);
            u.set_coeff(1, z.from_i64(5 * rng.random_range(1..5)));
            for i in 2..5 {
                // Keep the first unit coefficient away from multiples of 5.
                if z.is_unit(&u.coeff(i)) {
                    u.set_coeff(i, z.mul_int(&u.coeff(i), 5));
                }
            }
            u.set_coeff(2 + rng.random_range(0..3usize), z.from_i64(1 + rng.random_range(0..4)));
            let Ok(c) = canonicalize_dvr(&u) else { return Ok(()); };
            prop_assert_eq!(u.compose(&c.witness).unwrap(), c.form.clone());
            prop_assert_eq!(&canonicalize_dvr(&c.form).unwrap().form, &c.form);
            let f = random_substitution(&mut rng, &z, 9, |_| true);
            let moved = u.compose(&f).unwrap();
            prop_assert!(canonicalize_dvr(&moved).unwrap().agrees_with(&c).unwrap());
        }
    }
}

//! Truncated one-variable power series `Σ_{i≤N} c_i t^i` over a [`CoeffRing`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rings::{parse_tpoly, CoeffRing, RingElem};

/// A power series known modulo `t^{N+1}`, where `N` is [`trunc`](Self::trunc).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerSeries {
    ring: CoeffRing,
    coeffs: Vec<RingElem>,
}

impl PowerSeries {
    pub fn zero(ring: &CoeffRing, trunc: usize) -> Self {
        PowerSeries {
            ring: ring.clone(),
            coeffs: vec![RingElem::zero(); trunc + 1],
        }
    }

    /// The series `t`.
    pub fn identity(ring: &CoeffRing, trunc: usize) -> Self {
        Self::monomial(ring, trunc, 1, ring.one())
    }

    /// `c·t^k` (zero if `k > trunc`).
    pub fn monomial(ring: &CoeffRing, trunc: usize, k: usize, c: RingElem) -> Self {
        let mut s = Self::zero(ring, trunc);
        if k <= trunc {
            s.coeffs[k] = c;
        }
        s
    }

    /// Build from coefficients `c_0, c_1, …`; the truncation is `trunc`, with
    /// missing coefficients zero and extra ones dropped.
    pub fn from_coeffs(ring: &CoeffRing, trunc: usize, coeffs: Vec<RingElem>) -> Self {
        let mut s = Self::zero(ring, trunc);
        for (i, c) in coeffs.into_iter().enumerate().take(trunc + 1) {
            s.coeffs[i] = c;
        }
        s
    }

    pub fn from_i64s(ring: &CoeffRing, trunc: usize, coeffs: &[i64]) -> Self {
        Self::from_coeffs(
            ring,
            trunc,
            coeffs.iter().map(|&c| ring.from_i64(c)).collect(),
        )
    }

    /// Parse text such as `5*t + v*t^2`. Terms above `trunc` are dropped.
    pub fn parse(ring: &CoeffRing, s: &str, trunc: usize) -> Result<Self> {
        let poly = parse_tpoly(ring, s, true)?;
        let mut out = Self::zero(ring, trunc);
        for (k, c) in poly {
            if (k as usize) <= trunc {
                out.coeffs[k as usize] = c;
            }
        }
        Ok(out)
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `t^i`; zero above the truncation.
    pub fn coeff(&self, i: usize) -> RingElem {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn coeff_ref(&self, i: usize) -> Option<&RingElem> {
        self.coeffs.get(i)
    }

    pub fn coeffs(&self) -> &[RingElem] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, i: usize, c: RingElem) {
        if i <= self.trunc() {
            self.coeffs[i] = c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RingElem::is_zero)
    }

    /// Drop terms above degree `n` (no-op if `n ≥ trunc`).
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.trunc());
        PowerSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs[..=n].to_vec(),
        }
    }

    /// Treat the series as a polynomial and pad it with zeros up to degree
    /// `n`. Only meaningful when the higher coefficients really are zero.
    pub fn extend_by_zero(&self, n: usize) -> Self {
        let mut c = self.coeffs.clone();
        if n > self.trunc() {
            c.resize(n + 1, RingElem::zero());
        }
        PowerSeries {
            ring: self.ring.clone(),
            coeffs: c,
        }
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::IncompatibleRing);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.trunc().min(other.trunc());
        let coeffs = (0..=n)
            .map(|i| self.ring.add(&self.coeffs[i], &other.coeffs[i]))
            .collect();
        Ok(PowerSeries {
            ring: self.ring.clone(),
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        PowerSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|c| self.ring.neg(c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.trunc().min(other.trunc());
        let r = &self.ring;
        let mut coeffs = vec![RingElem::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] = r.add(&coeffs[i + j], &r.mul(a, b));
                }
            }
        }
        PowerSeries {
            ring: r.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, c: &RingElem) -> Self {
        PowerSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|x| self.ring.mul(x, c)).collect(),
        }
    }

    /// Multiply by `t^k`, keeping the truncation.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut s = Self::zero(&self.ring, self.trunc());
        for i in 0..=self.trunc() {
            if i + k <= self.trunc() {
                s.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        s
    }

    /// Divide by `t^k`, dropping the low terms; the truncation drops by `k`.
    pub fn shift_down(&self, k: usize) -> Self {
        if k > self.trunc() {
            return Self::zero(&self.ring, 0);
        }
        PowerSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs[k..].to_vec(),
        }
    }

    /// `u(f(t))`, exact to the common truncation.
    pub fn compose(&self, f: &Self) -> Result<Self> {
        self.check_ring(f)?;
        if !f.coeffs[0].is_zero() {
            return Err(Error::CompositionUndefined);
        }
        let n = self.trunc().min(f.trunc());
        let f = f.truncate(n);
        let mut acc = Self::monomial(&self.ring, n, 0, self.coeffs[n].clone());
        for i in (0..n).rev() {
            acc = acc.mul_unchecked(&f);
            acc.coeffs[0] = self.ring.add(&acc.coeffs[0], &self.coeffs[i]);
        }
        Ok(acc)
    }

    /// Compositional inverse `g` with `f(g(t)) = g(f(t)) = t`.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::CompositionUndefined);
        }
        let r = &self.ring;
        let n = self.trunc();
        let f1 = self.coeff(1);
        let inv = r
            .inverse(&f1)
            .map_err(|_| Error::NotInvertible(format!("linear coefficient {}", r.format(&f1))))?;
        let t = Self::identity(r, n);
        // g ← g − f₁⁻¹ (f∘g − t); each pass fixes one more coefficient.
        let mut g = t.scale(&inv);
        for _ in 0..n {
            let err = self.compose(&g)?.sub(&t)?;
            if err.is_zero() {
                break;
            }
            g = g.sub(&err.scale(&inv))?;
        }
        Ok(g)
    }

    /// `du/dt`; the truncation drops by one.
    pub fn derivative(&self) -> Self {
        let n = self.trunc();
        if n == 0 {
            return Self::zero(&self.ring, 0);
        }
        let coeffs = (1..=n)
            .map(|i| self.ring.mul_int(&self.coeffs[i], i as i64))
            .collect::<Vec<_>>();
        PowerSeries {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    /// Index of the first nonzero coefficient.
    pub fn height(&self) -> Result<usize> {
        self.order().ok_or(Error::HeightUndefined(self.trunc()))
    }

    /// Index of the first nonzero coefficient, `None` if zero to truncation.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Only even powers of `t` occur.
    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| i % 2 == 0 || c.is_zero())
    }

    /// Only odd powers of `t` occur.
    pub fn is_odd(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| i % 2 == 1 || c.is_zero())
    }

    pub fn map_into(&self, target: &CoeffRing) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| self.ring.map_into(target, c))
            .collect::<Result<_>>()?;
        Ok(PowerSeries {
            ring: target.clone(),
            coeffs,
        })
    }

    /// Coefficientwise [`CoeffRing::lift_into`] a finer residue ring.
    pub fn lift_into(&self, target: &CoeffRing) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| self.ring.lift_into(target, c))
            .collect::<Result<_>>()?;
        Ok(PowerSeries {
            ring: target.clone(),
            coeffs,
        })
    }

    /// Image in `(R/π)[[t]]`.
    pub fn reduce_mod_uniformizer(&self) -> Result<Self> {
        let target = self.ring.residue_ring()?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| self.ring.reduce_mod_uniformizer(c))
            .collect::<Result<_>>()?;
        Ok(PowerSeries {
            ring: target,
            coeffs,
        })
    }

    /// `u = πt` exactly.
    pub fn is_trivial(&self) -> Result<bool> {
        let pi = self.ring.uniformizer()?;
        Ok(self.coeffs.iter().enumerate().all(|(i, c)| match i {
            1 => *c == pi,
            _ => c.is_zero(),
        }))
    }

    /// `Some(n)` when `u₁ = π`, `π | u₂..u_{n−1}`, `u_n` is a unit and
    /// nothing above degree `n` survives.
    pub fn canonical_degree(&self) -> Result<Option<usize>> {
        let r = &self.ring;
        let pi = r.uniformizer()?;
        if !self.coeffs[0].is_zero() || self.coeff(1) != pi {
            return Ok(None);
        }
        for i in 2..=self.trunc() {
            let c = &self.coeffs[i];
            if r.is_unit(c) {
                let tail_zero = self.coeffs[i + 1..].iter().all(RingElem::is_zero);
                return Ok(tail_zero.then_some(i));
            }
            if !r.divisible_by_uniformizer(c)? {
                return Ok(None);
            }
        }
        Ok(None)
    }

    pub fn is_canonical(&self) -> Result<bool> {
        Ok(self.canonical_degree()?.is_some())
    }

    /// Least `m` with `f_m` a unit: the rank of `R[[t]]/(f)` as a free module.
    pub fn weierstrass_rank(&self) -> Result<usize> {
        self.ring.dvr_params()?;
        self.coeffs
            .iter()
            .position(|c| self.ring.is_unit(c))
            .ok_or(Error::RankUndetermined(self.trunc()))
    }

    /// The distinguished polynomial `P` of degree `m` = rank with
    /// `f = unit · P`, valid modulo `π^K`. Returns `None` when the stored
    /// truncation is too short for every coefficient of `P` to be exact,
    /// which needs `N ≥ (K+1)·m`.
    pub fn distinguished_polynomial(&self) -> Result<Option<Self>> {
        let (_, k) = self.ring.dvr_params()?;
        let m = self.weierstrass_rank()?;
        let n = self.trunc();
        if n < (k as usize + 1) * m {
            return Ok(None);
        }
        let r = &self.ring;
        // t^m = q·f + rem with deg rem < m; then P = t^m − rem = q·f.
        let unit_part = self.shift_down(m);
        let unit_inv = unit_part.inverse()?;
        let target = Self::monomial(r, n, m, r.one());
        let mut q = Self::zero(r, n - m);
        for _ in 0..=k {
            let h = target.sub(&q.extend_by_zero(n).mul(self)?)?;
            let hi = h.shift_down(m);
            if hi.is_zero() {
                break;
            }
            q = q.add(&hi.mul(&unit_inv)?)?;
        }
        let qf = q.extend_by_zero(n).mul(self)?;
        let mut p = Self::zero(r, m);
        for i in 0..m {
            p.coeffs[i] = qf.coeff(i);
        }
        p.coeffs[m] = r.one();
        Ok(Some(p))
    }

    /// Multiplicative inverse of a series with unit constant term.
    pub fn inverse(&self) -> Result<Self> {
        let r = &self.ring;
        let c0 = r.inverse(&self.coeffs[0])?;
        let n = self.trunc();
        let mut out = Self::zero(r, n);
        out.coeffs[0] = c0.clone();
        for i in 1..=n {
            let mut s = RingElem::zero();
            for j in 1..=i {
                s = r.add(&s, &r.mul(&self.coeffs[j], &out.coeffs[i - j]));
            }
            out.coeffs[i] = r.neg(&r.mul(&s, &c0));
        }
        Ok(out)
    }

    /// Same as the [`Display`](fmt::Display) output.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            ring: self.ring.to_string(),
            trunc: self.trunc(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i.to_string(), self.ring.format(c)))
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let ring: CoeffRing = j.ring.parse()?;
        let mut s = Self::zero(&ring, j.trunc);
        for (k, v) in &j.coeffs {
            let i: usize = k
                .parse()
                .map_err(|_| Error::parse(0, format!("bad exponent {k:?}")))?;
            if i > j.trunc {
                return Err(Error::parse(0, format!("exponent {i} above truncation")));
            }
            s.coeffs[i] = ring.parse_elem(v)?;
        }
        Ok(s)
    }
}

/// JSON form of a [`PowerSeries`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub ring: String,
    pub trunc: usize,
    pub coeffs: BTreeMap<String, String>,
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = self.ring.format(c);
            let multi = c.terms().len() > 1;
            let tpow = match k {
                0 => String::new(),
                1 => "t".into(),
                k => format!("t^{k}"),
            };
            let mut term = if k == 0 {
                if multi {
                    format!("({cs})")
                } else {
                    cs
                }
            } else if multi {
                format!("({cs})*{tpow}")
            } else if cs == "1" {
                tpow
            } else if cs == "-1" {
                format!("-{tpow}")
            } else {
                format!("{cs}*{tpow}")
            };
            if !first {
                term = match term.strip_prefix('-') {
                    Some(rest) => format!(" - {rest}"),
                    None => format!(" + {term}"),
                };
            }
            f.write_str(&term)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for PowerSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PowerSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SeriesJson::deserialize(d)?;
        Self::from_json(&j).map_err(serde::de::Error::custom)
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    const N: usize = 7;

    fn f7() -> CoeffRing {
        CoeffRing::prime_field(7).unwrap()
    }

    fn series(lo: usize) -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-6i64..7, N + 1).prop_map(move |mut v| {
            for c in v.iter_mut().take(lo) {
                *c = 0;
            }
            v
        })
    }

    fn unit_linear() -> impl Strategy<Value = Vec<i64>> {
        (series(2), 1i64..7).prop_map(|(mut v, a)| {
            v[1] = a;
            v
        })
    }

    fn mk(r: &CoeffRing, c: &[i64]) -> PowerSeries {
        PowerSeries::from_i64s(r, N, c)
    }

    proptest! {
        #[test]
        fn compose_is_associative(u in series(1), f in series(1), g in series(1)) {
            let r = f7();
            let (u, f, g) = (mk(&r, &u), mk(&r, &f), mk(&r, &g));
            let lhs = u.compose(&f).unwrap().compose(&g).unwrap();
            let rhs = u.compose(&f.compose(&g).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn reversion_round_trips(f in unit_linear()) {
            let r = f7();
            let f = mk(&r, &f);
            let g = f.reversion().unwrap();
            let t = PowerSeries::identity(&r, N);
            prop_assert_eq!(f.compose(&g).unwrap(), t.clone());
            prop_assert_eq!(g.compose(&f).unwrap(), t);
            prop_assert_eq!(g.reversion().unwrap(), f);
        }

        #[test]
        fn derivative_leibniz(a in series(0), b in series(0)) {
            let r = CoeffRing::rationals();
            let (a, b) = (mk(&r, &a), mk(&r, &b));
            let lhs = a.mul(&b).unwrap().derivative();
            let rhs = a.derivative().mul(&b.truncate(N - 1)).unwrap()
                .add(&a.truncate(N - 1).mul(&b.derivative()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let sum = a.add(&b).unwrap().derivative();
            prop_assert_eq!(sum, a.derivative().add(&b.derivative()).unwrap());
        }

        #[test]
        fn height_is_orbit_invariant(u in series(1), f in unit_linear()) {
            let r = f7();
            let (u, f) = (mk(&r, &u), mk(&r, &f));
            prop_assert_eq!(u.compose(&f).unwrap().height().ok(), u.height().ok());
        }

        #[test]
        fn inverse_is_inverse(mut a in series(0), c in 1i64..7) {
            let r = f7();
            a[0] = c;
            let a = mk(&r, &a);
            let one = PowerSeries::monomial(&r, N, 0, r.one());
            prop_assert_eq!(a.mul(&a.inverse().unwrap()).unwrap(), one);
        }
    }
}

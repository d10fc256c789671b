//! Hochschild cohomology of even Moore algebras.
//!
//! On normalized derivations `A(t)∂_τ + B(t)∂_t` the Hochschild
//! differential is `ξ ↦ [ξ, m*]`, which kills `A∂_τ` and sends `B∂_t` to
//! `u′(t)B(t)∂_τ`. When `u₁` is not a zero divisor this leaves
//! `HH*(A,A) ≅ R[[t]]/(u′(t))`. [`hh_closed_form`] analyses that quotient
//! and [`hh_bruteforce`] recomputes it from the bracket by linear algebra.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::moduli::MooreAlgebra;
use crate::noncomm::{Derivation, GradingContext, NCSeries, Word};
use crate::rings::RingElem;
use crate::series::PowerSeries;

/// Free rank of `HH*` over `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(n) => write!(f, "{n}"),
            Rank::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rank::Finite(n) => s.serialize_u64(*n as u64),
            Rank::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Rank::Finite(n)),
            Raw::Text(s) if s == "infinite" => Ok(Rank::Infinite),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("bad rank {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Torsion {
    /// `u′ ≡ 0 mod π`: `HH*` is an `R/π`-algebra.
    ResidueAlgebra,
    TorsionFree,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HHReport {
    /// `u′(t)`.
    pub presentation: String,
    pub quotient: String,
    pub rank: Rank,
    pub torsion: Torsion,
    /// The computed index, equal to the rank in the torsion-free case.
    pub ramification_index: Option<usize>,
    /// Distinguished polynomial of `u′`, when the precision pins it down.
    pub eisenstein: Option<String>,
    /// Height of `u mod π`.
    pub mod_p_height: Option<usize>,
    /// The computed rank differs from `mod_p_height`.
    pub index_discrepancy: bool,
    /// `u ≡ v(t^p) mod π`, decided from the coefficients of `u` alone.
    pub frobenius_form: Option<bool>,
}

fn check_even_hypotheses(m: &MooreAlgebra) -> Result<&PowerSeries> {
    let u = m.u()?;
    if u.trunc() < 1 || u.coeff(1).is_zero() {
        return Err(Error::ZeroDivisor("u₁ = 0".into()));
    }
    Ok(u)
}

/// Order of `s` when its leading coefficient is a unit.
fn unit_order(s: &PowerSeries) -> Result<Option<usize>> {
    let Some(e) = s.order() else { return Ok(None) };
    let r = s.ring();
    if !r.is_unit(&s.coeff(e)) {
        return Err(Error::UnsupportedCase(format!(
            "leading coefficient {} of u′ is not a unit",
            r.format(&s.coeff(e))
        )));
    }
    Ok(Some(e))
}

/// `HH*(A,A) ≅ R[[t]]/(u′)` with its invariants.
///
/// Over ℤ/p^K: residue algebra when `u′ ≡ 0 mod π`, otherwise free of rank
/// equal to the Weierstrass degree of `u′`. Over a field (or a ring whose
/// `u′` has a unit leading coefficient) the rank is the order of `u′`.
pub fn hh_closed_form(m: &MooreAlgebra) -> Result<HHReport> {
    let u = check_even_hypotheses(m)?;
    let r = u.ring();
    let du = u.derivative();
    let presentation = du.to_text();
    if !r.has_uniformizer() {
        let rank = match unit_order(&du)? {
            Some(e) => Rank::Finite(e),
            None => Rank::Infinite,
        };
        let quotient = match rank {
            Rank::Finite(0) => "0".to_string(),
            Rank::Finite(1) => format!("{r}"),
            Rank::Finite(e) => format!("{r}[[t]]/(t^{e})"),
            Rank::Infinite => format!("{r}[[t]]"),
        };
        return Ok(HHReport {
            presentation,
            quotient,
            rank,
            torsion: Torsion::NotApplicable,
            ramification_index: None,
            eisenstein: None,
            mod_p_height: None,
            index_discrepancy: false,
            frobenius_form: None,
        });
    }

    let (p, _) = r.dvr_params()?;
    let residue = r.residue_ring()?;
    let u_bar = u.reduce_mod_uniformizer()?;
    let du_bar = du.reduce_mod_uniformizer()?;
    let frobenius = u_bar
        .coeffs()
        .iter()
        .enumerate()
        .all(|(i, c)| (i as u64).is_multiple_of(p) || c.is_zero());
    let mod_p_height = u_bar.order();
    if du_bar.is_zero() != frobenius {
        return Err(Error::Invariant(format!(
            "u′ ≡ 0 mod π is {} but u ≡ v(t^p) mod π is {frobenius}",
            du_bar.is_zero()
        )));
    }
    if du_bar.is_zero() {
        return Ok(HHReport {
            presentation,
            quotient: format!("{residue}[[t]]"),
            rank: Rank::Infinite,
            torsion: Torsion::ResidueAlgebra,
            ramification_index: None,
            eisenstein: None,
            mod_p_height,
            index_discrepancy: false,
            frobenius_form: Some(frobenius),
        });
    }
    // The first coefficient of u′ off π must be a unit for Weierstrass.
    let first = du_bar.order().expect("nonzero");
    if !residue.is_unit(&du_bar.coeff(first)) {
        return Err(Error::UnsupportedCase(format!(
            "coefficient {} of u′ is neither a unit nor divisible by π",
            r.format(&du.coeff(first))
        )));
    }
    let rank = du.weierstrass_rank()?;
    let eisenstein = du.distinguished_polynomial()?.map(|q| q.to_text());
    let quotient = if rank == 0 {
        "0".to_string()
    } else {
        format!("{r}[[t]]/({presentation})")
    };
    Ok(HHReport {
        presentation,
        quotient,
        rank: Rank::Finite(rank),
        torsion: Torsion::TorsionFree,
        ramification_index: Some(rank),
        eisenstein,
        mod_p_height,
        index_discrepancy: mod_p_height != Some(rank),
        frobenius_form: Some(frobenius),
    })
}

/// The DVR analysis for `u₁ = π·unit`: residue algebra or a totally
/// ramified extension, with the computed rank and the height of `u mod π`
/// both reported.
pub fn hh_structure(m: &MooreAlgebra) -> Result<HHReport> {
    let u = m.u()?;
    let r = u.ring();
    r.dvr_params()?;
    let u1 = u.coeff(1);
    if r.valuation(&u1)? != 1 {
        return Err(Error::UnsupportedCase("u₁ must be π times a unit".into()));
    }
    hh_closed_form(m)
}

/// Per-t-degree dimensions of the brute-force complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HHBruteForce {
    pub maxdeg: usize,
    /// Classes represented by `A(t)∂_τ`, graded by the t-adic filtration.
    pub a_dims: Vec<usize>,
    /// Classes represented by `B(t)∂_t`.
    pub b_dims: Vec<usize>,
    /// The assembled differential squares to zero.
    pub square_zero: bool,
}

/// Recompute `HH*` from `ξ ↦ [ξ, m*]` on derivations with polynomial
/// coefficients of degree at most `maxdeg`, working modulo `t^{maxdeg+1}`.
/// Dimensions are those of the associated graded for the t-adic filtration.
pub fn hh_bruteforce(m: &MooreAlgebra, maxdeg: usize) -> Result<HHBruteForce> {
    let u = m.u()?;
    let r = u.ring().clone();
    if !r.is_graded_field() || !r.formal_names().is_empty() {
        return Err(Error::NotAField(r.spec()));
    }
    if u.trunc() < maxdeg + 1 {
        return Err(Error::NeedsHigherPrecision(format!(
            "truncation {} below maxdeg + 1 = {}",
            u.trunc(),
            maxdeg + 1
        )));
    }
    let dim = maxdeg + 1;
    let len = maxdeg + 1;
    let ctx = GradingContext::new(m.d());
    let mstar = m.mstar(len)?;

    // Columns 0..dim are t^j∂_τ, dim..2·dim are t^j∂_t.
    let mut cols = Vec::with_capacity(2 * dim);
    for sector in 0..2 {
        for j in 0..dim {
            let mono = PowerSeries::monomial(&r, maxdeg, j, r.one());
            let zero = PowerSeries::zero(&r, maxdeg);
            let (a, b, odd) = if sector == 0 {
                (&mono, &zero, !(ctx.t_odd() && j % 2 == 1))
            } else {
                (&zero, &mono, ctx.t_odd() && j % 2 == 0)
            };
            let xi = Derivation::from_series(ctx, odd, a, b, len)?;
            cols.push(coordinates(&xi.commutator(&mstar)?, dim)?);
        }
    }
    let delta = Matrix::from_columns(&r, 2 * dim, &cols);
    let square_zero = delta.mul(&delta)?.is_zero();

    let mut dims = [Vec::new(), Vec::new()];
    for (sector, out) in dims.iter_mut().enumerate() {
        let rows = sector * dim..(sector + 1) * dim;
        let boundaries: Vec<Vec<RingElem>> = cols
            .iter()
            .filter(|c| {
                let inside = c
                    .iter()
                    .enumerate()
                    .all(|(i, x)| rows.contains(&i) || x.is_zero());
                inside && c.iter().any(|x| !x.is_zero())
            })
            .cloned()
            .collect();
        let span = |k: usize| -> Result<usize> {
            // Cycles supported on t^j, j ≥ k, plus all boundaries.
            let idx: Vec<usize> = (sector * dim + k..(sector + 1) * dim).collect();
            let mut vecs = boundaries.clone();
            if !idx.is_empty() {
                for kv in delta.select_columns(&idx).kernel()? {
                    let mut full = vec![RingElem::zero(); 2 * dim];
                    for (x, &i) in kv.into_iter().zip(&idx) {
                        full[i] = x;
                    }
                    vecs.push(full);
                }
            }
            if vecs.is_empty() {
                return Ok(0);
            }
            Matrix::from_columns(&r, 2 * dim, &vecs).rank()
        };
        let mut prev = span(0)?;
        for k in 0..dim {
            let next = span(k + 1)?;
            out.push(prev - next);
            prev = next;
        }
    }
    let [a_dims, b_dims] = dims;
    Ok(HHBruteForce {
        maxdeg,
        a_dims,
        b_dims,
        square_zero,
    })
}

/// Coefficients of `t^k`, `k < dim`, in both generator values; anything
/// involving `τ` means the bracket left the normalized derivations.
fn coordinates(xi: &Derivation, dim: usize) -> Result<Vec<RingElem>> {
    let mut v = vec![RingElem::zero(); 2 * dim];
    for (sector, val) in [&xi.on_tau, &xi.on_t].into_iter().enumerate() {
        check_normalized(val)?;
        for k in 0..dim {
            v[sector * dim + k] = val.coeff(&Word::t_pow(k));
        }
    }
    Ok(v)
}

fn check_normalized(s: &NCSeries) -> Result<()> {
    if s.involves_tau() {
        return Err(Error::Invariant(format!(
            "bracket with m* is not normalized: {s}"
        )));
    }
    Ok(())
}

/// Closed-form prediction for [`hh_bruteforce`] over a field: `A`-classes
/// are `R[t]/(t^{D+1}, u′)`, one per degree below `e = ord u′`; `B`-classes
/// are the kernel of multiplication by `u′` modulo `t^{D+1}`, one per degree
/// from `D+1−e` on.
pub fn closed_form_dims(u: &PowerSeries, maxdeg: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let du = u
        .derivative()
        .truncate(maxdeg.min(u.trunc().saturating_sub(1)));
    let e = unit_order(&du)?.unwrap_or(usize::MAX).min(maxdeg + 1);
    let a = (0..=maxdeg).map(|k| usize::from(k < e)).collect();
    let b = (0..=maxdeg).map(|k| usize::from(k + e > maxdeg)).collect();
    Ok((a, b))
}

/// Rank of `HH*` over the field read off the brute-force `A`-classes.
pub fn bruteforce_rank(b: &HHBruteForce) -> usize {
    b.a_dims.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::act;
    use crate::rings::CoeffRing;
    use proptest::prelude::*;

    fn even(r: &CoeffRing, s: &str, n: usize) -> MooreAlgebra {
        MooreAlgebra::even(PowerSeries::parse(r, s, n).unwrap(), 0).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let z: CoeffRing = "Zp:5:6[v]".parse().unwrap();
        let rep = hh_closed_form(&even(&z, "5*t", 12)).unwrap();
        assert_eq!(
            (rep.torsion, rep.rank),
            (Torsion::ResidueAlgebra, Rank::Infinite)
        );
        assert_eq!(rep.quotient, "F5[v][[t]]");

        let rep = hh_closed_form(&even(&z, "5*t + v*t^2", 12)).unwrap();
        assert_eq!(
            (rep.torsion, rep.rank),
            (Torsion::TorsionFree, Rank::Finite(1))
        );
        assert_eq!(rep.mod_p_height, Some(2));
        assert!(rep.index_discrepancy);
        assert!(rep.eisenstein.is_some());

        for n in 2..5usize {
            let s = format!("5*t + v^{n}*t^{n}");
            let rep = hh_structure(&even(&z, &s, 12)).unwrap();
            assert_eq!(rep.rank, Rank::Finite(n - 1), "{s}");
            assert_eq!(rep.mod_p_height, Some(n));
            assert!(rep.index_discrepancy);
        }

        let q = CoeffRing::rationals();
        let rep = hh_closed_form(&even(&q, "t", 6)).unwrap();
        assert_eq!((rep.rank, rep.quotient.as_str()), (Rank::Finite(0), "0"));
        let f7 = CoeffRing::prime_field(7).unwrap();
        let rep = hh_closed_form(&even(&f7, "3*t + t^4", 6)).unwrap();
        assert_eq!(rep.rank, Rank::Finite(0));
        let qa: CoeffRing = "Q{a}".parse().unwrap();
        assert!(matches!(
            hh_closed_form(&even(&qa, "a*t + t^2", 6)),
            Err(Error::UnsupportedCase(_))
        ));
        assert!(matches!(
            hh_closed_form(&even(&q, "t^2", 6)),
            Err(Error::ZeroDivisor(_))
        ));
    }

    #[test]
    fn frobenius_criterion() {
        let z = CoeffRing::padic(5, 6).unwrap();
        let rep = hh_structure(&even(&z, "5*t + t^5", 12)).unwrap();
        assert_eq!(rep.torsion, Torsion::ResidueAlgebra);
        assert_eq!(
            (rep.frobenius_form, rep.mod_p_height),
            (Some(true), Some(5))
        );
        let rep = hh_structure(&even(&z, "5*t + t^5 + 10*t^7", 12)).unwrap();
        assert_eq!(rep.torsion, Torsion::ResidueAlgebra);
        let rep = hh_structure(&even(&z, "5*t + t^5 + t^7", 12)).unwrap();
        assert_eq!(
            (rep.torsion, rep.frobenius_form),
            (Torsion::TorsionFree, Some(false))
        );
        assert!(hh_structure(&even(&z, "t", 12)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let z: CoeffRing = "Zp:5:6[v]".parse().unwrap();
        for s in ["5*t", "5*t + v*t^2"] {
            let rep = hh_closed_form(&even(&z, s, 12)).unwrap();
            let text = serde_json::to_string(&rep).unwrap();
            assert_eq!(serde_json::from_str::<HHReport>(&text).unwrap(), rep);
        }
    }

    #[test]
    fn bruteforce_examples() {
        let f5 = CoeffRing::prime_field(5).unwrap();
        let b = hh_bruteforce(&even(&f5, "t^2", 8), 6).unwrap();
        assert!(b.square_zero);
        assert_eq!(b.a_dims, vec![1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(b.b_dims, vec![0, 0, 0, 0, 0, 0, 1]);

        let f3 = CoeffRing::prime_field(3).unwrap();
        let b = hh_bruteforce(&even(&f3, "t^3", 8), 6).unwrap();
        assert_eq!(b.a_dims, vec![1; 7]);
        assert_eq!(b.b_dims, vec![1; 7]);

        let fv: CoeffRing = "F5[v]".parse().unwrap();
        let b = hh_bruteforce(&even(&fv, "v*t^2 + t^3", 8), 5).unwrap();
        assert_eq!(b.a_dims, vec![1, 0, 0, 0, 0, 0]);
        assert!(hh_bruteforce(&even(&CoeffRing::padic(5, 2).unwrap(), "5*t", 8), 4).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn bruteforce_matches_quotient(
            p in prop::sample::select(vec![3u64, 5, 7]),
            coeffs in proptest::collection::vec(0i64..7, 8),
            maxdeg in 0usize..6,
        ) {
            let r = CoeffRing::prime_field(p).unwrap();
            let mut cs = vec![0i64];
            cs.extend(coeffs);
            let u = PowerSeries::from_i64s(&r, 8, &cs);
            let m = MooreAlgebra::even(u.clone(), 0).unwrap();
            let b = hh_bruteforce(&m, maxdeg).unwrap();
            prop_assert!(b.square_zero);
            let (a, bb) = closed_form_dims(&u, maxdeg).unwrap();
            prop_assert_eq!(b.a_dims, a);
            prop_assert_eq!(b.b_dims, bb);
        }

        #[test]
        fn invariants_stable_on_orbits(
            coeffs in proptest::collection::vec(0i64..25, 7),
            f in proptest::collection::vec(0i64..25, 7),
            f1 in 1i64..5,
        ) {
            let z = CoeffRing::padic(5, 3).unwrap();
            let mut cs = vec![0i64, 5];
            cs.extend(coeffs);
            let m = MooreAlgebra::even(PowerSeries::from_i64s(&z, 8, &cs), 0).unwrap();
            let mut fs = vec![0i64, f1];
            fs.extend(f);
            let moved = act(&m, &PowerSeries::from_i64s(&z, 8, &fs)).unwrap();
            let (Ok(x), Ok(y)) = (hh_structure(&m), hh_structure(&moved)) else {
                return Ok(());
            };
            prop_assert_eq!(x.rank, y.rank);
            prop_assert_eq!(x.torsion, y.torsion);
            prop_assert_eq!(x.mod_p_height, y.mod_p_height);
        }
    }
}

//! Fixed inputs shared by the benchmarks, so every run measures the same
//! work.

use moore_core::{CoeffRing, PowerSeries};

/// `t + 2t² + 3t³ + ⋯ + n tⁿ` over `r`, truncated at `n`.
pub fn ramp(r: &CoeffRing, n: usize) -> PowerSeries {
    let mut s = PowerSeries::zero(r, n);
    for i in 1..=n {
        s.set_coeff(i, r.from_i64(i as i64));
    }
    s
}

/// A canonical-degree-3 input over ℤ/5^K with nonzero tail, truncated at `n`.
pub fn dvr_input(k: u32, n: usize) -> PowerSeries {
    let r = CoeffRing::padic(5, k).expect("valid precision");
    let mut u = PowerSeries::zero(&r, n);
    u.set_coeff(1, r.from_i64(5));
    u.set_coeff(2, r.from_i64(10));
    for i in 3..=n {
        u.set_coeff(i, r.from_i64(i as i64 + 1));
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_well_formed() {
        let q = CoeffRing::rationals();
        assert_eq!(ramp(&q, 5).height().unwrap(), 1);
        let u = dvr_input(6, 10);
        assert_eq!(
            moore_core::moduli::canonicalize_dvr(&u)
                .unwrap()
                .form
                .canonical_degree()
                .unwrap(),
            Some(3)
        );
    }
}

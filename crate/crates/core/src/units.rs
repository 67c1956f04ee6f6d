//! The unit group `K^x = F_p^x * X^Z * (1 + XO)`.
//!
//! Principal units `1 + h` with `v(h) >= 1` carry a `Z_p`-action: in
//! characteristic p, `(1 + h)^(p^k) = 1 + h^(p^k)`, so `u^t` only depends on
//! `t mod p^k` up to `X^(p^k v(h))`.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{FpElement, Prime};
use crate::padic::{PadicForm, PadicInt};
use crate::series::{LaurentSeries, Valuation};
use crate::subgroups::{member, ExponentSet};

/// Largest precision a truncated exponent may imply without an explicit
/// request.
const IMPLICIT_PRECISION_LIMIT: i64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitDecomposition {
    pub leading: FpElement,
    pub exponent: i64,
    pub principal: LaurentSeries,
}

impl UnitDecomposition {
    /// `leading * X^exponent * principal`.
    pub fn recompose(&self) -> LaurentSeries {
        self.principal.scale(self.leading).shift(self.exponent)
    }
}

/// Splits `z = c X^v u` with `c` in `F_p^x` and `u` a principal unit.
pub fn decompose(z: &LaurentSeries) -> Result<UnitDecomposition> {
    let (Some(leading), Valuation::Finite(exponent)) = (z.leading_coefficient(), z.valuation())
    else {
        return Err(Error::NotInvertible);
    };
    let principal = z.shift(-exponent).scale(leading.inv()?);
    Ok(UnitDecomposition {
        leading,
        exponent,
        principal,
    })
}

/// `v(u - 1)` as a lower bound, `None` when `u = 1` exactly.
fn principal_level(u: &LaurentSeries) -> Result<Option<i64>> {
    let h = u.sub(&LaurentSeries::one(u.prime()));
    if !h.known_valuation_at_least(1) {
        return Err(Error::NotPrincipal(u.to_string()));
    }
    Ok(h.valuation().lower_bound())
}

fn truncate_to(f: LaurentSeries, target: Option<i64>) -> LaurentSeries {
    match target {
        Some(n) => f.truncate(n),
        None => f,
    }
}

/// `u^r` for `r >= 0`, walking the base-p digits of `r` with
/// `u^(p^(i+1)) = frobenius(u^(p^i))`.
fn pow_by_digits(u: &LaurentSeries, r: &BigUint, target: Option<i64>) -> Result<LaurentSeries> {
    let p = u.prime();
    let one = LaurentSeries::one(p);
    let base = BigUint::from(p.get());
    let mut acc = one.clone();
    let mut frob = truncate_to(u.clone(), target);
    let mut rest = r.clone();
    while !rest.is_zero() {
        let (q, d) = rest.div_rem(&base);
        let d = d.to_u64().unwrap();
        if d != 0 {
            acc = truncate_to(acc.mul(&truncate_to(frob.pow(d), target)), target);
        }
        rest = q;
        if rest.is_zero() {
            break;
        }
        if let Some(n) = target {
            // every later factor is 1 modulo X^n
            if frob.sub(&one).known_valuation_at_least(n) {
                break;
            }
        }
        frob = truncate_to(frob.frobenius_embed(p.get())?, target);
    }
    Ok(truncate_to(acc, target))
}

fn inverse_of(u: &LaurentSeries, target: Option<i64>) -> Result<LaurentSeries> {
    match (u.is_exact(), target) {
        (true, Some(n)) => u.inv_with_precision(n),
        _ => u.inv(),
    }
}

/// `u^t` for a principal unit `u` and `t` in `Z_p`.
///
/// `precision` caps the result at `X^precision`. For `t` known modulo `p^k`
/// the result is only determined modulo `X^(p^k v(u - 1))`; asking for more is
/// an error.
pub fn padic_pow(u: &LaurentSeries, t: &PadicInt, precision: Option<i64>) -> Result<LaurentSeries> {
    let p = u.prime();
    assert_eq!(p, t.prime(), "unit and exponent over different primes");
    let level = principal_level(u)?;
    match t.form() {
        PadicForm::Exact(n) => {
            if n.is_zero() || level.is_none() {
                return Ok(truncate_to(LaurentSeries::one(p), precision));
            }
            let magnitude = n.magnitude();
            if n.sign() == Sign::Minus {
                let inv = inverse_of(u, precision)?;
                pow_by_digits(&inv, magnitude, precision)
            } else {
                pow_by_digits(u, magnitude, precision)
            }
        }
        PadicForm::Truncated { residue, precision: k } => {
            let Some(v) = level else {
                return Ok(truncate_to(LaurentSeries::one(p), precision));
            };
            let cap = p
                .get()
                .checked_pow(*k)
                .and_then(|q| i64::try_from(q).ok())
                .and_then(|q| q.checked_mul(v));
            let target = match (precision, cap) {
                (Some(n), Some(c)) if n > c => {
                    return Err(Error::PrecisionExceedsCap {
                        requested: n,
                        cap: c,
                    })
                }
                (Some(n), _) => n,
                (None, Some(c)) if c <= IMPLICIT_PRECISION_LIMIT => c,
                (None, _) => return Err(Error::PrecisionRequired),
            };
            pow_by_digits(u, residue, Some(target))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub p: u64,
    pub ell: u64,
    pub precision: i64,
    pub level: u32,
    pub residues: Vec<LaurentSeries>,
    pub all_supported: bool,
    pub all_distinct: bool,
}

/// Enumerates `(1 + X^ell)^t mod X^N` for `t = 0 .. p^k - 1`, with `k` the
/// least level such that `ell p^k >= N`.
pub fn closure_enum(p: Prime, ell: u64, n: i64) -> Result<ClosureReport> {
    if ell < 2 {
        return Err(Error::InvalidArgument(format!("l = {ell} must be at least 2")));
    }
    if ell.gcd(&p.get()) != 1 {
        return Err(Error::NotCoprime { ell, p: p.get() });
    }
    if n < 1 {
        return Err(Error::InvalidArgument(format!("precision {n} must be at least 1")));
    }
    let mut level = 0u32;
    let mut reach = BigInt::from(ell);
    while reach < BigInt::from(n) {
        reach *= p.get();
        level += 1;
    }
    let count = p.get().pow(level);
    let generator = LaurentSeries::from_terms(p, &[(0, 1), (ell as i64, 1)], Some(n));
    let mut residues = Vec::with_capacity(count as usize);
    let mut current = LaurentSeries::one(p).truncate(n);
    for _ in 0..count {
        let next = current.mul(&generator);
        residues.push(current);
        current = next;
    }
    let set = ExponentSet::MultiplesOf(ell);
    let all_supported = residues.iter().all(|r| member(r, &set).is_member());
    let all_distinct = residues.iter().collect::<HashSet<_>>().len() == residues.len();
    Ok(ClosureReport {
        p: p.get(),
        ell,
        precision: n,
        level,
        residues,
        all_supported,
        all_distinct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn s(q: u64, text: &str) -> LaurentSeries {
        LaurentSeries::parse(p(q), text).unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose(&s(3, "2*X^2 + 2*X^3")).unwrap();
        assert_eq!((d.leading, d.exponent), (p(3).element(2), 2));
        assert_eq!(d.principal, s(3, "1 + X^1"));
        let d = decompose(&s(5, "1")).unwrap();
        assert_eq!((d.leading, d.exponent, d.principal.clone()), (p(5).one(), 0, s(5, "1")));
        let d = decompose(&s(5, "3*X^-1 + X^2 + O(X^4)")).unwrap();
        assert_eq!(d.principal, s(5, "1 + 2*X^3 + O(X^5)"));
        assert_eq!(d.recompose(), s(5, "3*X^-1 + X^2 + O(X^4)"));
        assert_eq!(decompose(&LaurentSeries::zero(p(5))), Err(Error::NotInvertible));
        assert_eq!(decompose(&s(5, "O(X^3)")), Err(Error::NotInvertible));
    }

    #[test]
    fn power_examples() {
        let u = s(2, "1 + X^1");
        let zero = PadicInt::exact(p(2), 0);
        assert_eq!(padic_pow(&u, &zero, None).unwrap(), LaurentSeries::one(p(2)));
        let inv = padic_pow(&u, &PadicInt::exact(p(2), -1), Some(5)).unwrap();
        assert_eq!(inv, s(2, "1 + X^1 + X^2 + X^3 + X^4 + O(X^5)"));
        assert!(matches!(
            padic_pow(&u, &PadicInt::exact(p(2), -1), None),
            Err(Error::PrecisionRequired)
        ));
        let u = s(3, "1 + X^2");
        for k in 0..5u32 {
            let t = PadicInt::exact(p(3), 3i64.pow(k));
            let expected = LaurentSeries::from_terms(p(3), &[(0, 1), (2 * 3i64.pow(k), 1)], None);
            assert_eq!(padic_pow(&u, &t, None).unwrap(), expected);
        }
        assert_eq!(
            padic_pow(&u, &PadicInt::exact(p(3), 2), None).unwrap(),
            s(3, "1 + 2*X^2 + X^4")
        );
    }

    #[test]
    fn truncated_exponents() {
        let u = s(3, "1 + X^2");
        // 7 mod 9: determined modulo X^(9 * 2)
        let t = PadicInt::truncated(p(3), 7, 2).unwrap();
        let r = padic_pow(&u, &t, None).unwrap();
        assert_eq!(r.precision(), Some(18));
        for lift in [7i64, 16, 25, 7 + 81] {
            let exact = padic_pow(&u, &PadicInt::exact(p(3), lift), Some(18)).unwrap();
            assert_eq!(exact, r, "lift {lift}");
        }
        assert_eq!(
            padic_pow(&u, &t, Some(19)),
            Err(Error::PrecisionExceedsCap {
                requested: 19,
                cap: 18
            })
        );
        assert_eq!(padic_pow(&u, &t, Some(5)).unwrap(), r.truncate(5));
    }

    #[test]
    fn non_principal_units_are_rejected() {
        let t = PadicInt::exact(p(3), 2);
        for bad in ["2 + X^1", "X^1", "1 + X^-1", "O(X^0)"] {
            assert!(matches!(padic_pow(&s(3, bad), &t, None), Err(Error::NotPrincipal(_))), "{bad}");
        }
        // 1 + O(X^3) is principal
        assert_eq!(padic_pow(&s(3, "1 + O(X^3)"), &t, None).unwrap(), s(3, "1 + O(X^3)"));
    }

    #[test]
    fn closure_examples() {
        let r = closure_enum(p(3), 2, 7).unwrap();
        assert_eq!((r.level, r.residues.len()), (2, 9));
        assert!(r.all_supported && r.all_distinct);
        let r = closure_enum(p(2), 3, 4).unwrap();
        assert_eq!(r.level, 1);
        assert_eq!(r.residues, vec![s(2, "1 + O(X^4)"), s(2, "1 + X^3 + O(X^4)")]);
        for n in 1..=5 {
            let r = closure_enum(p(5), 7, n).unwrap();
            assert_eq!(r.residues, vec![s(5, "1").truncate(n)]);
        }
        assert_eq!(closure_enum(p(3), 3, 7), Err(Error::NotCoprime { ell: 3, p: 3 }));
        assert!(closure_enum(p(3), 1, 7).is_err());
        assert!(closure_enum(p(3), 2, 0).is_err());
    }

    #[test]
    fn closure_residues_form_a_group() {
        for (q, ell, n) in [(3, 2, 7), (2, 3, 4), (2, 3, 13), (5, 2, 11)] {
            let r = closure_enum(p(q), ell, n).unwrap();
            assert_eq!(r.residues.len() as u64, q.pow(r.level));
            let set: HashSet<_> = r.residues.iter().collect();
            for a in &r.residues {
                for b in &r.residues {
                    assert!(set.contains(&a.mul(b)));
                }
                let inv = a.inv().unwrap();
                assert!(set.contains(&inv));
            }
        }
    }

    fn arb_unit(q: u64) -> impl Strategy<Value = LaurentSeries> {
        (
            1..q as i64,
            -4i64..5,
            prop::collection::vec(0..q as i64, 0..10),
        )
            .prop_map(move |(c, e, tail)| {
                let mut coeffs = vec![c];
                coeffs.extend(tail);
                LaurentSeries::from_coefficients(p(q), e, &coeffs, None)
            })
    }

    fn arb_principal(q: u64) -> impl Strategy<Value = LaurentSeries> {
        (1i64..4, prop::collection::vec(0..q as i64, 0..6)).prop_map(move |(v, tail)| {
            let mut coeffs = vec![1];
            coeffs.extend(tail);
            let h = LaurentSeries::from_coefficients(p(q), v, &coeffs, None);
            LaurentSeries::one(p(q)).add(&h)
        })
    }

    proptest! {
        #[test]
        fn recomposition_round_trips(z in arb_unit(5)) {
            let d = decompose(&z).unwrap();
            prop_assert_eq!(d.recompose(), z);
            prop_assert_eq!(d.principal.coefficient(0), Some(p(5).one()));
            prop_assert!(d.principal.sub(&LaurentSeries::one(p(5))).known_valuation_at_least(1));
        }

        #[test]
        fn powers_are_homomorphic(u in arb_principal(3), a in -30i64..30, b in -30i64..30) {
            let n = 40;
            let pw = |t: i64| padic_pow(&u, &PadicInt::exact(p(3), t), Some(n)).unwrap();
            prop_assert_eq!(pw(a + b), pw(a).mul(&pw(b)).truncate(n));
        }

        #[test]
        fn powers_compose(u in arb_principal(2), a in 0i64..20, b in 0i64..20) {
            let n = 40;
            let pw = |x: &LaurentSeries, t: i64| padic_pow(x, &PadicInt::exact(p(2), t), Some(n)).unwrap();
            prop_assert_eq!(pw(&u, a * b), pw(&pw(&u, a), b));
        }

        #[test]
        fn frobenius_contracts(u in arb_principal(3), k in 0u32..5) {
            let one = LaurentSeries::one(p(3));
            let v = u.sub(&one).valuation().finite().unwrap();
            let t = PadicInt::exact(p(3), 3i64.pow(k));
            let w = padic_pow(&u, &t, None).unwrap();
            prop_assert_eq!(w.sub(&one).valuation(), Valuation::Finite(3i64.pow(k) * v));
        }
    }
}

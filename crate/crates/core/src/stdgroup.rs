//! One-dimensional standard groups: formal group laws `F(z, w)` with
//! coefficients in F_p, their p-th power maps, the contraction bound on small
//! balls, and ball indices.
//!
//! [`demo_index_contradiction`] runs the whole chain for the multiplicative
//! law: the p-th power map has no linear term, so it squeezes
//! `B(q^-(l+1))` into `B(q^-(l+3))`, an index-`p^2` sub-ball, while a closed
//! subgroup isomorphic to `Z_p` only has `[W : pW] = p`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::Prime;
use crate::padic::{prime_power, zp_index};
use crate::series::{prime_power_rational, LaurentSeries};
use crate::units::closure_enum;

/// Working precision for the p-th power map in the demonstration.
pub const DEMO_PRECISION: i64 = 16;

/// Largest number of cosets the demonstration is willing to enumerate.
const COSET_LIMIT: u64 = 1 << 24;

/// A group law `F(z, w) = sum c_ij z^i w^j`, known up to total degree
/// `precision` (exact when `None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLaw1D {
    p: Prime,
    name: String,
    coeffs: BTreeMap<(u32, u32), u64>,
    precision: Option<u32>,
}

impl GroupLaw1D {
    /// `z + w`
    pub fn additive(p: Prime) -> Self {
        Self::custom(p, "additive", &[((1, 0), 1), ((0, 1), 1)], None)
    }

    /// `z + w + zw`, the law of principal units `(1 + z)(1 + w) - 1`.
    pub fn multiplicative(p: Prime) -> Self {
        Self::custom(p, "multiplicative", &[((1, 0), 1), ((0, 1), 1), ((1, 1), 1)], None)
    }

    /// Terms of total degree at or above `precision` are dropped.
    pub fn custom(p: Prime, name: &str, terms: &[((u32, u32), i64)], precision: Option<u32>) -> Self {
        let mut coeffs = BTreeMap::new();
        for &((i, j), c) in terms {
            if precision.is_some_and(|t| i + j >= t) {
                continue;
            }
            let slot = coeffs.entry((i, j)).or_insert(0);
            *slot = p.add(*slot, p.reduce_signed(c));
        }
        coeffs.retain(|_, c| *c != 0);
        GroupLaw1D {
            p,
            name: name.to_string(),
            coeffs,
            precision,
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn precision(&self) -> Option<u32> {
        self.precision
    }

    /// `F(a, b)` for `a`, `b` of positive valuation. A law known to total
    /// degree `T` contributes `O(X^(T min(v(a), v(b))))`.
    pub fn eval(&self, a: &LaurentSeries, b: &LaurentSeries) -> LaurentSeries {
        let p = self.p;
        let mut a_pows = vec![LaurentSeries::one(p)];
        let mut b_pows = vec![LaurentSeries::one(p)];
        let mut acc = LaurentSeries::zero(p);
        for (&(i, j), &c) in &self.coeffs {
            while a_pows.len() <= i as usize {
                let next = a_pows.last().unwrap().mul(a);
                a_pows.push(next);
            }
            while b_pows.len() <= j as usize {
                let next = b_pows.last().unwrap().mul(b);
                b_pows.push(next);
            }
            let term = a_pows[i as usize].mul(&b_pows[j as usize]);
            acc = acc.add(&term.scale(p.element(c as i64)));
        }
        if let Some(t) = self.precision {
            let v = [a, b]
                .iter()
                .filter_map(|s| s.valuation().lower_bound())
                .min();
            if let Some(v) = v {
                acc = acc.add(&LaurentSeries::indeterminate(p, t as i64 * v));
            }
        }
        acc
    }
}

/// Polynomials in three variables with F_p coefficients, truncated below a
/// total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Poly3 {
    p: Prime,
    terms: HashMap<[u32; 3], u64>,
    bound: Option<u32>,
}

impl Poly3 {
    fn constant(p: Prime, c: u64, bound: Option<u32>) -> Self {
        let mut terms = HashMap::new();
        if !c.is_multiple_of(p.get()) {
            terms.insert([0, 0, 0], c % p.get());
        }
        Poly3 { p, terms, bound }
    }

    fn var(p: Prime, i: usize, bound: Option<u32>) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        let mut out = Poly3::constant(p, 0, bound);
        if bound.is_none_or(|b| b > 1) {
            out.terms.insert(e, 1);
        }
        out
    }

    fn add_scaled(&mut self, other: &Poly3, c: u64) {
        for (e, &x) in &other.terms {
            let slot = self.terms.entry(*e).or_insert(0);
            *slot = self.p.add(*slot, self.p.mul(x, c));
        }
        self.terms.retain(|_, c| *c != 0);
    }

    fn mul(&self, other: &Poly3) -> Poly3 {
        let mut out = Poly3::constant(self.p, 0, self.bound);
        for (a, &x) in &self.terms {
            for (b, &y) in &other.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if self.bound.is_some_and(|t| e.iter().sum::<u32>() >= t) {
                    continue;
                }
                let slot = out.terms.entry(e).or_insert(0);
                *slot = self.p.add(*slot, self.p.mul(x, y));
            }
        }
        out.terms.retain(|_, c| *c != 0);
        out
    }

    /// `F(a, b)`.
    fn compose(law: &GroupLaw1D, a: &Poly3, b: &Poly3) -> Poly3 {
        let p = law.p;
        let mut a_pows = vec![Poly3::constant(p, 1, a.bound)];
        let mut b_pows = vec![Poly3::constant(p, 1, a.bound)];
        let mut out = Poly3::constant(p, 0, a.bound);
        for (&(i, j), &c) in &law.coeffs {
            while a_pows.len() <= i as usize {
                let next = a_pows.last().unwrap().mul(a);
                a_pows.push(next);
            }
            while b_pows.len() <= j as usize {
                let next = b_pows.last().unwrap().mul(b);
                b_pows.push(next);
            }
            out.add_scaled(&a_pows[i as usize].mul(&b_pows[j as usize]), c);
        }
        out
    }
}

/// Checks `F(z, 0) = z`, `F(0, w) = w` and `F(F(z, w), u) = F(z, F(w, u))`
/// up to the law's total-degree precision.
pub fn law_check(law: &GroupLaw1D) -> bool {
    let coeff = |i: u32, j: u32| law.coeffs.get(&(i, j)).copied().unwrap_or(0);
    let in_range = |d: u32| law.precision.is_none_or(|t| d < t);
    let max_deg = law.coeffs.keys().map(|&(i, j)| i.max(j)).max().unwrap_or(0);
    for d in (0..=max_deg.max(1)).filter(|&d| in_range(d)) {
        let expected = u64::from(d == 1);
        if coeff(d, 0) != expected || coeff(0, d) != expected {
            return false;
        }
    }
    let (p, t) = (law.p, law.precision);
    let (z, w, u) = (Poly3::var(p, 0, t), Poly3::var(p, 1, t), Poly3::var(p, 2, t));
    let left = Poly3::compose(law, &Poly3::compose(law, &z, &w), &u);
    let right = Poly3::compose(law, &z, &Poly3::compose(law, &w, &u));
    left == right
}

/// Keeps exact series exact while their degree stays below `n`.
fn cap(f: LaurentSeries, n: i64) -> LaurentSeries {
    if f.is_exact() && f.degree().is_none_or(|d| d < n) {
        f
    } else {
        f.truncate(n)
    }
}

/// The p-fold iterate `z * z * ... * z` as a series in `z`, known modulo
/// `z^n` (exact when the law is exact and the result has degree below `n`).
pub fn pth_power(law: &GroupLaw1D, n: i64) -> Result<LaurentSeries> {
    if !law_check(law) {
        return Err(Error::LawCheckFailed(law.name.clone()));
    }
    if let Some(t) = law.precision {
        if (t as i64) < n {
            return Err(Error::precision(format!(
                "law known to total degree {t}, p-th power requested modulo z^{n}"
            )));
        }
    }
    let p = law.p;
    // square-and-multiply in the group; 0 is the identity
    let mut acc = LaurentSeries::zero(p);
    let mut base = LaurentSeries::monomial(p, 1, 1);
    let mut e = p.get();
    while e > 0 {
        if e & 1 == 1 {
            acc = cap(law.eval(&acc, &base), n);
        }
        e >>= 1;
        if e > 0 {
            base = cap(law.eval(&base, &base), n);
        }
    }
    Ok(acc)
}

/// `C = M / r^2` with `M = sum |a_k| r^k` over the terms of `f`, plus
/// `r^N / (1 - r)` for the unknown tail of a series known modulo `z^N`.
/// `r` defaults to `1/p`.
pub fn contraction_constant(f: &LaurentSeries, r: Option<&BigRational>) -> Result<BigRational> {
    let p = f.prime();
    let r = r.cloned().unwrap_or_else(|| prime_power_rational(p, -1));
    if r <= BigRational::zero() || r >= BigRational::one() {
        return Err(Error::InvalidArgument(format!("radius {r} must lie in (0, 1)")));
    }
    if f.terms().any(|(e, _)| e < 2) || f.precision().is_some_and(|n| n < 2) {
        return Err(Error::LowOrderTerms);
    }
    let pow = |e: i64| num_traits::pow(r.clone(), e as usize);
    let mut m = BigRational::zero();
    for (e, _) in f.terms() {
        m += pow(e);
    }
    if let Some(n) = f.precision() {
        m += pow(n) / (BigRational::one() - &r);
    }
    Ok(m / pow(2))
}

/// `[B(q^-k)^n : B(q^-l)^n] = p^(n (l - k))` over the prime field.
pub fn ball_index(p: Prime, n: u32, k: i64, l: i64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if l < k {
        return Err(Error::InvalidRange(format!("l = {l} < k = {k}")));
    }
    let e = u32::try_from((l - k) as u64 * n as u64)
        .map_err(|_| Error::InvalidArgument("index exponent too large".into()))?;
    Ok(prime_power(p, e))
}

fn serialize_display<T: std::fmt::Display, S: Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContradictionReport {
    pub law: String,
    pub p: u64,
    /// `l` of the generator `1 + X^l` of the closed subgroup `W ≅ Z_p`.
    pub generator_ell: u64,
    pub pth_power: LaurentSeries,
    pub linear_term_zero: bool,
    #[serde(serialize_with = "serialize_display")]
    pub contraction_constant: BigRational,
    /// Least `l >= 1` with `C p^-l <= p^-2` and `p^-l <= r`.
    pub radius_level: i64,
    pub cosets_checked: u64,
    pub inclusion_verified: bool,
    pub ambient_index: u64,
    pub zp_index: u64,
    /// Closure residue counts at the two levels whose ratio is `[W : pW]`.
    pub closure_counts: [u64; 2],
    pub inequality: String,
    pub refuted: bool,
}

fn to_u64(n: &BigUint) -> Result<u64> {
    n.to_u64()
        .ok_or_else(|| Error::InvalidArgument(format!("{n} does not fit in 64 bits")))
}

/// Runs the index argument against a compatible Lie structure for the
/// multiplicative law and the subgroup generated by `1 + X^generator_ell`.
pub fn demo_index_contradiction(p: Prime, generator_ell: u64) -> Result<ContradictionReport> {
    if generator_ell < 2 {
        return Err(Error::InvalidArgument(format!(
            "l = {generator_ell} must be at least 2"
        )));
    }
    if generator_ell.gcd(&p.get()) != 1 {
        return Err(Error::NotCoprime {
            ell: generator_ell,
            p: p.get(),
        });
    }
    let q = p.get();
    let cosets = q
        .checked_pow(3)
        .filter(|&c| c <= COSET_LIMIT)
        .ok_or_else(|| Error::InvalidArgument(format!("p = {q} is too large to enumerate p^3 cosets")))?;

    let law = GroupLaw1D::multiplicative(p);
    let f = pth_power(&law, DEMO_PRECISION.max(q as i64 + 1))?;
    let linear_term_zero = f.coefficient(0).is_some_and(|c| c.is_zero())
        && f.coefficient(1).is_some_and(|c| c.is_zero());
    let r = prime_power_rational(p, -1);
    let c = contraction_constant(&f, Some(&r))?;

    let target = prime_power_rational(p, -2);
    let mut ell = 1i64;
    while &c * prime_power_rational(p, -ell) > target || prime_power_rational(p, -ell) > r {
        ell += 1;
    }

    // every coset of B(q^-(l+4)) inside B(q^-(l+1)) lands in B(q^-(l+3))
    let mut inclusion_verified = true;
    for index in 0..cosets {
        let digits = [index % q, (index / q) % q, index / (q * q)];
        let terms: Vec<(i64, i64)> = digits
            .iter()
            .enumerate()
            .map(|(i, &d)| (ell + 1 + i as i64, d as i64))
            .collect();
        let z = LaurentSeries::from_terms(p, &terms, Some(ell + 4));
        if !f.compose(&z)?.known_valuation_at_least(ell + 3) {
            inclusion_verified = false;
            break;
        }
    }

    let ambient_index = to_u64(&ball_index(p, 1, ell + 1, ell + 3)?)?;
    let zp = to_u64(&zp_index(p, 0, 1)?)?;
    let g = generator_ell as i64;
    let coarse = closure_enum(p, generator_ell, g + 1)?.residues.len() as u64;
    let fine = closure_enum(p, generator_ell, g * q as i64 + 1)?.residues.len() as u64;
    if fine != coarse * zp {
        return Err(Error::Verification(format!(
            "closure counts {coarse} and {fine} do not have ratio {zp}"
        )));
    }

    let refuted = inclusion_verified && linear_term_zero && zp < ambient_index;
    let inequality = format!(
        "{zp} = [W : pW] >= [B(q^-{}) : B(q^-{})] = {ambient_index} >= {q}^2 fails since {zp} < {ambient_index}",
        ell + 1,
        ell + 3
    );
    Ok(ContradictionReport {
        law: law.name.clone(),
        p: q,
        generator_ell,
        pth_power: f,
        linear_term_zero,
        contraction_constant: c,
        radius_level: ell,
        cosets_checked: cosets,
        inclusion_verified,
        ambient_index,
        zp_index: zp,
        closure_counts: [coarse, fine],
        inequality,
        refuted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn s(q: u64, text: &str) -> LaurentSeries {
        LaurentSeries::parse(p(q), text).unwrap()
    }

    /// `|f|`, with `0` for exact zero.
    fn norm(f: &LaurentSeries) -> Option<BigRational> {
        if f.is_exact_zero() {
            return Some(BigRational::zero());
        }
        f.abs()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn law_checks() {
        assert!(law_check(&GroupLaw1D::additive(p(3))));
        assert!(law_check(&GroupLaw1D::multiplicative(p(3))));
        let corrupted = GroupLaw1D::custom(p(3), "corrupted", &[((1, 0), 1), ((0, 1), 1), ((2, 0), 1)], None);
        assert!(!law_check(&corrupted));
        // units hold, associativity fails
        let skew = GroupLaw1D::custom(p(5), "skew", &[((1, 0), 1), ((0, 1), 1), ((1, 2), 1)], None);
        assert!(!law_check(&skew));
        // the multiplicative law known only to degree 2 is the additive one
        let short = GroupLaw1D::custom(p(5), "short", &[((1, 0), 1), ((0, 1), 1), ((1, 1), 1)], Some(2));
        assert!(law_check(&short));
        let short = GroupLaw1D::custom(p(5), "short", &[((1, 0), 1), ((0, 1), 1), ((1, 1), 1)], Some(6));
        assert!(law_check(&short));
    }

    #[test]
    fn pth_powers() {
        for q in [2, 3, 5, 7] {
            let f = pth_power(&GroupLaw1D::multiplicative(p(q)), 16).unwrap();
            assert_eq!(f, LaurentSeries::monomial(p(q), 1, q as i64));
            let f = pth_power(&GroupLaw1D::additive(p(q)), 16).unwrap();
            assert!(f.is_exact_zero());
        }
        // z^11 lies beyond z^8
        let f = pth_power(&GroupLaw1D::multiplicative(p(11)), 8).unwrap();
        assert_eq!(f, s(11, "O(X^8)"));
        let bad = GroupLaw1D::custom(p(3), "bad", &[((1, 0), 1), ((2, 0), 1)], None);
        assert!(matches!(pth_power(&bad, 8), Err(Error::LawCheckFailed(_))));
        let short = GroupLaw1D::custom(p(3), "short", &[((1, 0), 1), ((0, 1), 1), ((1, 1), 1)], Some(5));
        assert!(pth_power(&short, 8).unwrap_err().is_precision());
        assert_eq!(pth_power(&short, 5).unwrap(), s(3, "X^3 + O(X^5)"));
    }

    #[test]
    fn contraction_constants() {
        for q in [2u64, 3, 5] {
            let f = LaurentSeries::monomial(p(q), 1, q as i64);
            let c = contraction_constant(&f, None).unwrap();
            assert_eq!(c, prime_power_rational(p(q), 2 - q as i64));
        }
        assert!(contraction_constant(&LaurentSeries::zero(p(3)), None).unwrap().is_zero());
        // tail r^N / (1 - r) = (1/4) / (1/2)
        assert_eq!(contraction_constant(&s(2, "O(X^2)"), None).unwrap(), rat(2, 1));
        assert_eq!(
            contraction_constant(&s(3, "X^2 + X^3"), Some(&rat(1, 2))).unwrap(),
            rat(3, 2)
        );
        assert_eq!(contraction_constant(&s(3, "X^1 + X^3"), None), Err(Error::LowOrderTerms));
        assert_eq!(contraction_constant(&s(3, "1"), None), Err(Error::LowOrderTerms));
        assert!(contraction_constant(&s(3, "X^3"), Some(&rat(1, 1))).is_err());
    }

    #[test]
    fn contraction_bound_holds_on_small_elements() {
        for q in [2u64, 3] {
            let f = pth_power(&GroupLaw1D::multiplicative(p(q)), 16).unwrap();
            let c = contraction_constant(&f, None).unwrap();
            for v in 1..=4i64 {
                for tail in 0..q * q {
                    let z = LaurentSeries::from_terms(
                        p(q),
                        &[(v, 1), (v + 1, (tail % q) as i64), (v + 2, (tail / q) as i64)],
                        None,
                    );
                    let lhs = norm(&f.compose(&z).unwrap()).unwrap();
                    let rhs = &c * norm(&z).unwrap() * norm(&z).unwrap();
                    assert!(lhs <= rhs, "p = {q}, z = {z}");
                }
            }
        }
    }

    /// Counts classes of `(X^k O / X^(l+1) O)^n` modulo `X^l`.
    fn ball_index_by_enumeration(q: u64, n: u32, k: i64, l: i64) -> u64 {
        let width = (l + 1 - k) as u32;
        let per = q.pow(width);
        let mut classes = HashSet::new();
        for index in 0..per.pow(n) {
            let mut rest = index;
            let mut tuple = Vec::new();
            for _ in 0..n {
                let mut digits = rest % per;
                rest /= per;
                let mut terms = Vec::new();
                for e in k..=l {
                    terms.push((e, (digits % q) as i64));
                    digits /= q;
                }
                tuple.push(LaurentSeries::from_terms(p(q), &terms, Some(l)));
            }
            classes.insert(tuple);
        }
        classes.len() as u64
    }

    #[test]
    fn ball_indices() {
        for q in [2u64, 3, 5] {
            assert_eq!(ball_index(p(q), 1, 0, 1).unwrap(), BigUint::from(q));
            assert_eq!(ball_index(p(q), 2, 4, 4).unwrap(), BigUint::one());
        }
        assert_eq!(ball_index(p(2), 2, 0, 3).unwrap(), BigUint::from(64u32));
        assert_eq!(ball_index_by_enumeration(2, 2, 0, 3), 64);
        assert_eq!(ball_index_by_enumeration(3, 1, 2, 4), 9);
        assert!(matches!(ball_index(p(2), 1, 3, 2), Err(Error::InvalidRange(_))));
        assert!(ball_index(p(2), 0, 0, 2).is_err());
    }

    #[test]
    fn demonstrations() {
        let r = demo_index_contradiction(p(2), 3).unwrap();
        assert_eq!(r.pth_power, s(2, "X^2"));
        assert!(r.linear_term_zero && r.inclusion_verified && r.refuted);
        assert_eq!(r.contraction_constant, rat(1, 1));
        assert_eq!(r.radius_level, 2);
        assert_eq!((r.ambient_index, r.zp_index), (4, 2));
        assert_eq!(r.closure_counts, [2, 4]);
        assert_eq!(r.cosets_checked, 8);

        let r = demo_index_contradiction(p(3), 2).unwrap();
        assert_eq!(r.contraction_constant, rat(1, 3));
        assert_eq!(r.radius_level, 1);
        assert_eq!((r.ambient_index, r.zp_index), (9, 3));
        assert!(r.refuted);

        let r = demo_index_contradiction(p(5), 3).unwrap();
        assert_eq!(r.ambient_index, r.zp_index * r.zp_index);

        assert_eq!(demo_index_contradiction(p(3), 3), Err(Error::NotCoprime { ell: 3, p: 3 }));
        assert!(demo_index_contradiction(p(3), 1).is_err());
    }

    #[test]
    fn report_serializes_rationals_as_strings() {
        let r = demo_index_contradiction(p(3), 2).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["contraction_constant"], "1/3");
        assert_eq!(json["pth_power"], "X^3");
    }
}

//! Non-membership certificates for analytic maps into support subgroups.
//!
//! A nonconstant map `f` on the open unit disk cannot take all its values in
//! `f(0) + S` when `S` is `H` (support on powers of two) or `F[[X^l]]` with
//! `gcd(l, p) = 1`. The engine makes that concrete: it normalizes `f`, then
//! finds evaluation points whose values carry a nonzero coefficient at an
//! exponent outside `S`.
//!
//! * For `H`, evaluate `g(X^n)`: its leading exponent is `l n + m`, and the
//!   least `n > m` with `l n + m` not a power of two gives the witness.
//! * For `F[[X^l]]`, write `g(z) = h(w)^q` over `F_p((Y))`, `Y^q = X`, with
//!   `q = p^n` maximal. Then `h' != 0`, and for a base point `z0` with
//!   `v_Y(h'(z0)) = tau` the difference `g(z0 + X^j) - g(z0)` has valuation
//!   `tau + q j` for every `j > tau / q`. Two consecutive shifts differ by
//!   `q`, which is prime to `l`, so one of them leaves `l N_0`.
//!
//! Every report is re-checked by [`verify`] along an independent evaluation
//! route before it is returned by the `certify_*` entry points.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::Prime;
use crate::series::{AnalyticMap, LaurentSeries, Valuation};
use crate::subgroups::{member, ExponentSet, MembershipVerdict};

/// Upper end of the `n` search for the powers-of-two witness.
pub const SEARCH_CAP: u64 = 1_000_000;

/// Upper end of the monomial base point search `z0 = X^i`.
const BASE_POINT_CAP: i64 = 256;

/// How `g(z) = f(X^s z) - f(0)` was obtained from `f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizationTrace {
    pub subtracted_constant: LaurentSeries,
    pub scale_exponent: i64,
}

impl NormalizationTrace {
    /// Re-applies the recorded steps to `f`.
    pub fn apply(&self, f: &AnalyticMap) -> AnalyticMap {
        f.without_constant().rescale(self.scale_exponent)
    }
}

/// Removes the constant term and rescales the argument by `X^s`, with `s` the
/// least nonnegative integer making every known coefficient integral.
///
/// Coefficients beyond the known precision are assumed to become integral
/// under the same scale.
pub fn normalize(f: &AnalyticMap) -> Result<(NormalizationTrace, AnalyticMap)> {
    if f.precision() == Some(0) {
        return Err(Error::precision("no coefficient of the map is known"));
    }
    let mut s = 0i64;
    for (k, a) in f.coefficients().iter().enumerate().skip(1) {
        if let Some(v) = a.valuation().lower_bound() {
            if v < 0 {
                s = s.max(Integer::div_ceil(&-v, &(k as i64)));
            }
        }
    }
    let trace = NormalizationTrace {
        subtracted_constant: f.coefficient(0).expect("a_0 is known"),
        scale_exponent: s,
    };
    let g = trace.apply(f);
    Ok((trace, g))
}

/// `a_l = b X^m` for the least `l >= 1` with `a_l != 0`, `v(b) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeadingTerm {
    pub ell: usize,
    pub m: i64,
    pub b: LaurentSeries,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Leading {
    Term(LeadingTerm),
    /// Every known coefficient vanishes; `None` when `g` is exactly zero.
    ZeroAtPrecision(Option<usize>),
}

pub fn leading_term(g: &AnalyticMap) -> Result<Leading> {
    for (k, a) in g.coefficients().iter().enumerate().skip(1) {
        if a.is_exact_zero() {
            continue;
        }
        let Valuation::Finite(m) = a.valuation() else {
            return Err(Error::precision(format!(
                "coefficient a_{k} = {a} is not known to be zero or nonzero"
            )));
        };
        if m < 0 {
            return Err(Error::NonIntegralCoefficient {
                index: k as i64,
                valuation: m,
            });
        }
        return Ok(Leading::Term(LeadingTerm {
            ell: k,
            m,
            b: a.shift(-m),
        }));
    }
    Ok(Leading::ZeroAtPrecision(g.precision()))
}

fn vp(p: Prime, mut k: usize) -> u32 {
    let p = p.get() as usize;
    let mut n = 0;
    while k.is_multiple_of(p) {
        k /= p;
        n += 1;
    }
    n
}

/// The largest `n` such that every known nonzero coefficient `a_k`, `k >= 1`,
/// sits at an index divisible by `p^n`; 0 when there is none.
pub fn support_p_level(g: &AnalyticMap) -> u32 {
    g.support()
        .filter(|&k| k >= 1)
        .map(|k| vp(g.prime(), k))
        .min()
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `q = 1`: the derivative of `g` itself is nonzero.
    Derivative,
    /// `q > 1`: `g` is a `q`-th power and the root carries the derivative.
    QthRoot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessReport {
    ZeroAtPrecision {
        precision: Option<usize>,
    },
    /// `g(X^n)` has a nonzero coefficient at the exponent `l n + m`, which
    /// is not a power of two.
    Substitution {
        leading: LeadingTerm,
        n: i64,
        offending_exponent: i64,
        evaluated: LaurentSeries,
        verdict: MembershipVerdict,
    },
    /// `g(z0 + X^j) - g(z0)` has valuation `tau + q j`, not a multiple of `l`.
    Shift {
        ell: u64,
        branch: Branch,
        root_level: u32,
        q: u64,
        /// Least support index `k` of `g` with `v_p(k) = root_level`.
        coprime_index: usize,
        base_point: LaurentSeries,
        tau: i64,
        shift: i64,
        delta: LaurentSeries,
        offending_valuation: i64,
        verdict: MembershipVerdict,
    },
}

fn nonzero(g: &AnalyticMap) -> Result<Option<LeadingTerm>> {
    match leading_term(g)? {
        Leading::Term(t) => Ok(Some(t)),
        Leading::ZeroAtPrecision(_) => Ok(None),
    }
}

/// Witness against `g(D) ⊆ H` for a normalized `g`.
pub fn witness_powers_of_two(g: &AnalyticMap) -> Result<WitnessReport> {
    let Some(leading) = nonzero(g)? else {
        return Ok(WitnessReport::ZeroAtPrecision {
            precision: g.precision(),
        });
    };
    let ell = leading.ell as i64;
    let m = leading.m;
    let (n, e) = (m + 1..)
        .take_while(|&n| n as u64 <= SEARCH_CAP)
        .map(|n| (n, ell * n + m))
        .find(|&(_, e)| !(e as u64).is_power_of_two())
        .ok_or(Error::SearchCapExceeded(SEARCH_CAP))?;
    let evaluated = g.eval(&LaurentSeries::monomial(g.prime(), 1, n))?;
    match evaluated.valuation() {
        Valuation::Finite(v) if v == e => {}
        Valuation::Finite(v) => {
            return Err(Error::Verification(format!(
                "g(X^{n}) has valuation {v}, expected {e}"
            )))
        }
        _ => {
            return Err(Error::precision(format!(
                "g(X^{n}) = {evaluated} does not resolve the exponent {e}"
            )))
        }
    }
    let verdict = member(&evaluated, &ExponentSet::PowersOfTwo);
    Ok(WitnessReport::Substitution {
        leading,
        n,
        offending_exponent: e,
        evaluated,
        verdict,
    })
}

/// Least `i >= 1` such that `h'(Y^(q i))` has a resolved valuation `tau`.
fn base_point(dh: &AnalyticMap, q: u64) -> Result<(i64, i64)> {
    for i in 1..=BASE_POINT_CAP {
        let w = LaurentSeries::monomial(dh.prime(), 1, q as i64 * i);
        if let Valuation::Finite(tau) = dh.eval(&w)?.valuation() {
            return Ok((i, tau));
        }
    }
    Err(Error::precision(format!(
        "no base point X^i with i <= {BASE_POINT_CAP} resolves the derivative"
    )))
}

/// `g(z0 + X^j) - g(z0)` by direct evaluation.
fn shift_difference(g: &AnalyticMap, z0: &LaurentSeries, j: i64) -> Result<LaurentSeries> {
    let moved = z0.add(&LaurentSeries::monomial(g.prime(), 1, j));
    Ok(g.eval(&moved)?.sub(&g.eval(z0)?))
}

/// The same difference as `sum_{i >= 1} c_i X^(i j)` from the Taylor
/// coefficients of `g` at `z0`.
fn shift_difference_by_taylor(g: &AnalyticMap, z0: &LaurentSeries, j: i64) -> Result<LaurentSeries> {
    let p = g.prime();
    let count = g.precision().unwrap_or(g.coefficients().len());
    let c = g.taylor_shift(z0, count)?;
    let step = LaurentSeries::monomial(p, 1, j);
    let mut acc = LaurentSeries::zero(p);
    let mut power = LaurentSeries::one(p);
    for ci in c.iter().skip(1) {
        power = power.mul(&step);
        acc = acc.add(&ci.mul(&power));
    }
    if let Some(t) = g.precision() {
        acc = acc.add(&LaurentSeries::indeterminate(p, t as i64 * j));
    }
    Ok(acc)
}

/// Witness against `g(D) ⊆ F[[X^l]]` for a normalized `g`; needs
/// `gcd(l, p) = 1` and `l >= 2`.
pub fn witness_multiples(g: &AnalyticMap, ell: u64) -> Result<WitnessReport> {
    let p = g.prime();
    if ell < 2 {
        return Err(Error::InvalidArgument(format!("l = {ell} must be at least 2")));
    }
    if ell.gcd(&p.get()) != 1 {
        return Err(Error::NotCoprime { ell, p: p.get() });
    }
    if nonzero(g)?.is_none() {
        return Ok(WitnessReport::ZeroAtPrecision {
            precision: g.precision(),
        });
    }
    let root_level = support_p_level(g);
    let q = p
        .get()
        .checked_pow(root_level)
        .ok_or_else(|| Error::InvalidArgument("root level overflows".into()))?;
    let coprime_index = g
        .support()
        .find(|&k| k >= 1 && vp(p, k) == root_level)
        .expect("support is nonempty");
    let dh = g.qth_root(q)?.derivative();
    if dh.support().next().is_none() {
        return Err(Error::precision("the derivative of the root is not resolved"));
    }
    let (i, tau) = base_point(&dh, q)?;
    let z0 = LaurentSeries::monomial(p, 1, i);
    let qi = q as i64;
    let set = ExponentSet::MultiplesOf(ell);
    let first = tau.div_euclid(qi) + 1;
    for j in [first, first + 1] {
        let expected = tau + qi * j;
        let delta = shift_difference(g, &z0, j)?;
        let via_taylor = shift_difference_by_taylor(g, &z0, j)?;
        if !delta.agrees_with(&via_taylor) {
            return Err(Error::Verification(format!(
                "direct difference {delta} disagrees with the Taylor expansion {via_taylor}"
            )));
        }
        match delta.valuation() {
            Valuation::Finite(v) if v == expected => {}
            Valuation::Finite(v) => {
                return Err(Error::Verification(format!(
                    "shift {j}: valuation {v}, expected {expected}"
                )))
            }
            _ => {
                return Err(Error::precision(format!(
                    "shift {j}: {delta} does not resolve the exponent {expected}"
                )))
            }
        }
        if set.contains(expected) == Some(false) {
            let verdict = member(&delta, &set);
            return Ok(WitnessReport::Shift {
                ell,
                branch: if q == 1 { Branch::Derivative } else { Branch::QthRoot },
                root_level,
                q,
                coprime_index,
                base_point: z0,
                tau,
                shift: j,
                delta,
                offending_valuation: expected,
                verdict,
            });
        }
    }
    Err(Error::Verification(format!(
        "both shift valuations lie in {set}"
    )))
}

fn check_offending(value: &LaurentSeries, e: i64, set: &ExponentSet) -> Result<()> {
    if value.valuation() != Valuation::Finite(e) {
        return Err(Error::Verification(format!(
            "{value} does not have leading exponent {e}"
        )));
    }
    if set.contains(e) != Some(false) {
        return Err(Error::Verification(format!("exponent {e} lies in {set}")));
    }
    Ok(())
}

fn check_recorded(recorded: &LaurentSeries, recomputed: &LaurentSeries) -> Result<()> {
    if recorded.agrees_with(recomputed) {
        Ok(())
    } else {
        Err(Error::Verification(format!(
            "recorded value {recorded} disagrees with re-evaluation {recomputed}"
        )))
    }
}

/// Re-checks a report against the normalized map `g`, evaluating by Horner's
/// scheme rather than the power accumulation used to build it.
pub fn verify(g: &AnalyticMap, report: &WitnessReport) -> Result<()> {
    let p = g.prime();
    match report {
        WitnessReport::ZeroAtPrecision { precision } => match leading_term(g)? {
            Leading::ZeroAtPrecision(n) if n == *precision => Ok(()),
            _ => Err(Error::Verification("the map is not zero at precision".into())),
        },
        WitnessReport::Substitution {
            n,
            offending_exponent,
            evaluated,
            verdict,
            ..
        } => {
            let again = g.eval_horner(&LaurentSeries::monomial(p, 1, *n))?;
            check_recorded(evaluated, &again)?;
            let set = ExponentSet::PowersOfTwo;
            check_offending(&again, *offending_exponent, &set)?;
            if *verdict != member(&again, &set) {
                return Err(Error::Verification("membership verdict changed".into()));
            }
            Ok(())
        }
        WitnessReport::Shift {
            ell,
            base_point,
            shift,
            delta,
            offending_valuation,
            verdict,
            ..
        } => {
            let moved = base_point.add(&LaurentSeries::monomial(p, 1, *shift));
            let again = g.eval_horner(&moved)?.sub(&g.eval_horner(base_point)?);
            check_recorded(delta, &again)?;
            let set = ExponentSet::MultiplesOf(*ell);
            check_offending(&again, *offending_valuation, &set)?;
            if *verdict != member(&again, &set) {
                return Err(Error::Verification("membership verdict changed".into()));
            }
            Ok(())
        }
    }
}

/// `f(X^s pt)` summed term by term, without requiring integral coefficients.
/// The unknown tail contributes `O(X^(T v(pt)))`.
fn substitute(f: &AnalyticMap, s: i64, pt: &LaurentSeries) -> LaurentSeries {
    let p = f.prime();
    let x = pt.shift(s);
    let mut acc = LaurentSeries::zero(p);
    let mut power = LaurentSeries::one(p);
    for (k, a) in f.coefficients().iter().enumerate() {
        if k > 0 {
            power = power.mul(&x);
        }
        acc = acc.add(&a.mul(&power));
    }
    if let (Some(t), Some(v)) = (f.precision(), pt.valuation().lower_bound()) {
        acc = acc.add(&LaurentSeries::indeterminate(p, (t as i64).saturating_mul(v)));
    }
    acc
}

/// A report together with the normalization that produced it and the same
/// witness read back on the original map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub normalization: NormalizationTrace,
    pub witness: WitnessReport,
    /// Evaluation points for the original map: `X^s` times the points of the
    /// report.
    pub original_points: Vec<LaurentSeries>,
    /// `f(pt) - f(0)`, or `f(pt1) - f(pt0)` for a shift witness.
    pub original_value: Option<LaurentSeries>,
}

impl Certificate {
    pub fn is_zero_at_precision(&self) -> bool {
        matches!(self.witness, WitnessReport::ZeroAtPrecision { .. })
    }
}

fn transport(f: &AnalyticMap, trace: &NormalizationTrace, report: &WitnessReport) -> Result<Certificate> {
    let p = f.prime();
    let s = trace.scale_exponent;
    let (points, value, check) = match report {
        WitnessReport::ZeroAtPrecision { .. } => (Vec::new(), None, None),
        WitnessReport::Substitution {
            n,
            offending_exponent,
            ..
        } => {
            let pt = LaurentSeries::monomial(p, 1, *n);
            let value = substitute(f, s, &pt).sub(&trace.subtracted_constant);
            let set = ExponentSet::PowersOfTwo;
            (vec![pt.shift(s)], Some(value), Some((*offending_exponent, set)))
        }
        WitnessReport::Shift {
            ell,
            base_point,
            shift,
            offending_valuation,
            ..
        } => {
            let moved = base_point.add(&LaurentSeries::monomial(p, 1, *shift));
            let value = substitute(f, s, &moved).sub(&substitute(f, s, base_point));
            let set = ExponentSet::MultiplesOf(*ell);
            (
                vec![base_point.shift(s), moved.shift(s)],
                Some(value),
                Some((*offending_valuation, set)),
            )
        }
    };
    if let (Some(value), Some((e, set))) = (&value, check) {
        match value.valuation() {
            Valuation::Finite(_) => check_offending(value, e, &set)?,
            _ => {
                return Err(Error::precision(format!(
                    "the original map's value {value} does not resolve the exponent {e}"
                )))
            }
        }
    }
    Ok(Certificate {
        normalization: trace.clone(),
        witness: report.clone(),
        original_points: points,
        original_value: value,
    })
}

fn certify(f: &AnalyticMap, find: impl Fn(&AnalyticMap) -> Result<WitnessReport>) -> Result<Certificate> {
    let (trace, g) = normalize(f)?;
    let report = find(&g)?;
    verify(&g, &report)?;
    transport(f, &trace, &report)
}

/// Normalizes `f`, finds a witness against `f(D) ⊆ f(0) + H`, and re-checks
/// it on both the normalized and the original map.
pub fn certify_powers_of_two(f: &AnalyticMap) -> Result<Certificate> {
    certify(f, witness_powers_of_two)
}

/// As [`certify_powers_of_two`], for the target `f(0) + F[[X^l]]`.
pub fn certify_multiples(f: &AnalyticMap, ell: u64) -> Result<Certificate> {
    certify(f, |g| witness_multiples(g, ell))
}

/// Independently re-checks a certificate against the original map.
pub fn verify_certificate(f: &AnalyticMap, cert: &Certificate) -> Result<()> {
    let (trace, g) = normalize(f)?;
    if trace != cert.normalization {
        return Err(Error::Verification("normalization does not match".into()));
    }
    verify(&g, &cert.witness)?;
    let again = transport(f, &trace, &cert.witness)?;
    match (&again.original_value, &cert.original_value) {
        (Some(a), Some(b)) => check_recorded(b, a),
        (None, None) => Ok(()),
        _ => Err(Error::Verification("transported value missing".into())),
    }
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

    fn lift(q: u64, text: &str) -> AnalyticMap {
        AnalyticMap::from_series(&s(q, text)).unwrap()
    }

    fn map(q: u64, coeffs: &[&str], precision: Option<usize>) -> AnalyticMap {
        let coeffs = coeffs.iter().map(|c| s(q, c)).collect();
        AnalyticMap::new(p(q), coeffs, precision).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let (trace, g) = normalize(&lift(5, "3 + X^1")).unwrap();
        assert_eq!(trace.subtracted_constant, s(5, "3"));
        assert_eq!(trace.scale_exponent, 0);
        assert_eq!(g, lift(5, "X^1"));

        let f = map(5, &["0", "X^-2"], None);
        let (trace, g) = normalize(&f).unwrap();
        assert_eq!(trace.scale_exponent, 2);
        assert_eq!(g, map(5, &["0", "1"], None));

        // ceil(3 / 2) = 2 from a_2, ceil(1 / 1) = 1 from a_1
        let f = map(3, &["1", "X^-1", "X^-3 + O(X^0)"], Some(5));
        let (trace, g) = normalize(&f).unwrap();
        assert_eq!(trace.scale_exponent, 2);
        assert_eq!(g.coefficient(1), Some(s(3, "X^1")));
        assert_eq!(g.coefficient(2), Some(s(3, "X^1 + O(X^4)")));

        let (again, h) = normalize(&g).unwrap();
        assert_eq!(again.scale_exponent, 0);
        assert!(again.subtracted_constant.is_exact_zero());
        assert_eq!(h, g);

        assert!(normalize(&map(3, &[], Some(0))).unwrap_err().is_precision());
    }

    #[test]
    fn leading_terms() {
        let Leading::Term(t) = leading_term(&lift(2, "X^3 + X^5")).unwrap() else { panic!() };
        assert_eq!((t.ell, t.m, t.b), (3, 0, s(2, "1")));
        let g = map(3, &["0", "0", "X^2", "0", "1"], None);
        let Leading::Term(t) = leading_term(&g).unwrap() else { panic!() };
        assert_eq!((t.ell, t.m, t.b), (2, 2, s(3, "1")));
        assert_eq!(
            leading_term(&lift(3, "O(X^9)")).unwrap(),
            Leading::ZeroAtPrecision(Some(9))
        );
        assert!(leading_term(&map(3, &["0", "O(X^4)", "1"], None)).unwrap_err().is_precision());
    }

    #[test]
    fn support_levels() {
        assert_eq!(support_p_level(&lift(3, "X^3 + X^6")), 1);
        assert_eq!(support_p_level(&lift(2, "X^4 + X^8")), 2);
        assert_eq!(support_p_level(&lift(5, "X^1")), 0);
        assert_eq!(support_p_level(&lift(2, "X^4 + X^6")), 1);
    }

    fn substitution_n(report: &WitnessReport) -> (i64, i64) {
        match report {
            WitnessReport::Substitution {
                n,
                offending_exponent,
                ..
            } => (*n, *offending_exponent),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn powers_of_two_examples() {
        let g = lift(2, "X^1");
        let r = witness_powers_of_two(&g).unwrap();
        assert_eq!(substitution_n(&r), (3, 3));
        match &r {
            WitnessReport::Substitution { evaluated, verdict, .. } => {
                assert_eq!(evaluated, &s(2, "X^3"));
                assert!(!verdict.is_member());
            }
            _ => unreachable!(),
        }
        verify(&g, &r).unwrap();

        assert_eq!(substitution_n(&witness_powers_of_two(&lift(2, "X^2")).unwrap()), (3, 6));

        // a_1 = X, so n starts at 2: 1*2+1 = 3 is not a power of two
        let g = map(2, &["0", "X^1", "1"], None);
        assert_eq!(substitution_n(&witness_powers_of_two(&g).unwrap()), (2, 3));
        // a_3 = X: 3*2+1 = 7
        let g = map(3, &["0", "0", "0", "X^1", "1"], None);
        assert_eq!(substitution_n(&witness_powers_of_two(&g).unwrap()), (2, 7));

        assert_eq!(
            witness_powers_of_two(&lift(3, "O(X^4)")).unwrap(),
            WitnessReport::ZeroAtPrecision { precision: Some(4) }
        );
        // the tail O(X^(T n)) always clears l n + m once a_l is known
        let r = witness_powers_of_two(&lift(2, "X^1 + O(X^2)")).unwrap();
        match r {
            WitnessReport::Substitution { evaluated, .. } => assert_eq!(evaluated, s(2, "X^3 + O(X^6)")),
            _ => unreachable!(),
        }
    }

    fn shift_data(report: &WitnessReport) -> (Branch, i64, i64, i64, LaurentSeries) {
        match report {
            WitnessReport::Shift {
                branch,
                tau,
                shift,
                offending_valuation,
                delta,
                ..
            } => (*branch, *tau, *shift, *offending_valuation, delta.clone()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multiples_examples() {
        let g = lift(2, "X^1");
        let r = witness_multiples(&g, 3).unwrap();
        assert_eq!(shift_data(&r), (Branch::Derivative, 0, 1, 1, s(2, "X^1")));
        verify(&g, &r).unwrap();

        let g = lift(2, "X^2");
        let r = witness_multiples(&g, 3).unwrap();
        assert_eq!(shift_data(&r), (Branch::QthRoot, 0, 1, 2, s(2, "X^2")));
        verify(&g, &r).unwrap();

        let g = lift(3, "X^3");
        let r = witness_multiples(&g, 2).unwrap();
        assert_eq!(shift_data(&r), (Branch::QthRoot, 0, 1, 3, s(3, "X^3")));

        // q = 4, tau = 0: candidates 4 and 8, neither divisible by 3
        let r = witness_multiples(&lift(2, "X^4"), 3).unwrap();
        assert_eq!(shift_data(&r).3, 4);

        // p = 2, l = 3, g = z^2 + z^3: branch A with tau = 2 (3 z0^2 at z0 = X)
        let r = witness_multiples(&lift(2, "X^2 + X^3"), 3).unwrap();
        let (branch, tau, j, e, _) = shift_data(&r);
        assert_eq!((branch, tau), (Branch::Derivative, 2));
        assert_eq!(e, tau + j);
        assert!(e % 3 != 0);

        assert_eq!(witness_multiples(&g, 3), Err(Error::NotCoprime { ell: 3, p: 3 }));
        assert!(witness_multiples(&g, 1).is_err());
        assert_eq!(
            witness_multiples(&AnalyticMap::new(p(5), Vec::new(), None).unwrap(), 2).unwrap(),
            WitnessReport::ZeroAtPrecision { precision: None }
        );
    }

    #[test]
    fn field_valued_coefficients() {
        // g = X^2 z^2 + z^4 over p = 3: support not all in 3N, branch A
        let g = map(3, &["0", "0", "X^2", "0", "1"], None);
        let r = witness_multiples(&g, 2).unwrap();
        verify(&g, &r).unwrap();
        let r = witness_powers_of_two(&g).unwrap();
        verify(&g, &r).unwrap();

        // g = X z^2 over p = 2 is a square: h(w) = Y w
        let g = map(2, &["0", "0", "X^1"], Some(10));
        let r = witness_multiples(&g, 3).unwrap();
        assert_eq!(shift_data(&r).0, Branch::QthRoot);
        verify(&g, &r).unwrap();
    }

    #[test]
    fn tampered_reports_fail_verification() {
        let g = lift(2, "X^1 + X^5");
        let mut r = witness_multiples(&g, 3).unwrap();
        if let WitnessReport::Shift { delta, .. } = &mut r {
            *delta = delta.add(&s(2, "X^2"));
        }
        assert!(matches!(verify(&g, &r), Err(Error::Verification(_))));

        let mut r = witness_powers_of_two(&g).unwrap();
        if let WitnessReport::Substitution { offending_exponent, .. } = &mut r {
            *offending_exponent = 4;
        }
        assert!(matches!(verify(&g, &r), Err(Error::Verification(_))));
    }

    #[test]
    fn certificates_transport_to_the_original_map() {
        let f = map(5, &["2 + X^1", "X^-2", "3", "X^-1 + X^4"], None);
        for cert in [certify_powers_of_two(&f).unwrap(), certify_multiples(&f, 2).unwrap()] {
            assert_eq!(cert.normalization.scale_exponent, 2);
            verify_certificate(&f, &cert).unwrap();
            let value = cert.original_value.clone().unwrap();
            assert!(value.has_leading_term());
        }
        let c = certify_powers_of_two(&lift(3, "1 + X^2 + X^7")).unwrap();
        assert_eq!(c.original_points, vec![s(3, "X^3")]);
        assert_eq!(c.original_value, Some(s(3, "X^6 + X^21")));
        assert!(certify_powers_of_two(&lift(3, "2")).unwrap().is_zero_at_precision());
    }

    fn arb_normalized(q: u64, forced_level: u32) -> impl Strategy<Value = AnalyticMap> {
        let step = q.pow(forced_level) as usize;
        prop::collection::vec(0..q as i64, 31 / step)
            .prop_filter("nonzero", |c| c.iter().any(|&x| x != 0))
            .prop_map(move |c| {
                let terms: Vec<(i64, i64)> = c
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (((i + 1) * step) as i64, x))
                    .collect();
                AnalyticMap::from_series(&LaurentSeries::from_terms(p(q), &terms, Some(64))).unwrap()
            })
    }

    proptest! {
        #[test]
        fn powers_of_two_witnesses_are_sound(g in arb_normalized(2, 0)) {
            let r = witness_powers_of_two(&g).unwrap();
            prop_assert!(verify(&g, &r).is_ok());
        }

        #[test]
        fn multiples_witnesses_are_sound(g in arb_normalized(3, 0), h in arb_normalized(2, 1)) {
            let r = witness_multiples(&g, 2).unwrap();
            prop_assert!(verify(&g, &r).is_ok());
            let r = witness_multiples(&h, 5).unwrap();
            prop_assert!(verify(&h, &r).is_ok());
            prop_assert_eq!(shift_data(&r).0, Branch::QthRoot);
        }

        #[test]
        fn derivative_branch_valuation_law(g in arb_normalized(2, 0), j in 1i64..6) {
            // v(g(X + X^j) - g(X)) = tau + j once j > tau
            let dg = g.derivative();
            let x = LaurentSeries::monomial(p(2), 1, 1);
            if let Valuation::Finite(tau) = dg.eval(&x).unwrap().valuation() {
                let j = tau + j;
                let direct = shift_difference(&g, &x, j).unwrap();
                if direct.precision().is_some_and(|n| n > tau + j) {
                    prop_assert_eq!(direct.valuation(), Valuation::Finite(tau + j));
                }
            }
        }
    }
}

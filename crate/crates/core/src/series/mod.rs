//! Laurent series over F_p with explicit precision.
//!
//! A [`LaurentSeries`] is either exact (finitely many nonzero terms, nothing
//! unknown) or known modulo `X^N`. Every operation propagates the `O(X^N)`
//! error term with min-style rules, so a result never claims a coefficient
//! its inputs do not determine.
//!
//! The same representation serves for elements of `K = F_p((X))`, for power
//! series in an auxiliary variable `z` with F_p coefficients, and for elements
//! of the extension `F_p((Y))` with `Y^q = X` (exponents reinterpreted, see
//! [`LaurentSeries::frobenius_embed`]).

mod map;
mod parse;

use std::cmp::{min, Ordering};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::{FpElement, Prime};

pub use map::AnalyticMap;

/// Valuation of a series: `v(f)` with `|f| = p^(-v(f))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Valuation {
    Finite(i64),
    /// The exact zero series.
    Infinite,
    /// Indeterminate series: only `v >= N` is known.
    AtLeast(i64),
}

impl Valuation {
    /// A lower bound usable in precision arithmetic; `None` means `+inf`.
    pub fn lower_bound(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Borrowed view of the four representation forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form<'a> {
    ExactZero,
    Exact { valuation: i64, coefficients: &'a [u64] },
    Truncated { valuation: i64, coefficients: &'a [u64], precision: i64 },
    Indeterminate { precision: i64 },
}

/// Outcome of comparing two series that may only be known to finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    /// Equal modulo `X^N`, or exactly equal when `precision` is `None`.
    Equal { precision: Option<i64> },
    /// The coefficients at `exponent` are known and differ.
    Unequal { exponent: i64 },
    /// No coefficient of either side lies below the common precision.
    Undecidable { precision: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    p: Prime,
    /// Exponent of `coeffs[0]`.
    start: i64,
    /// Dense coefficients; first and last entries are nonzero when nonempty.
    coeffs: Vec<u64>,
    /// `None` for exact series, otherwise everything at `X^N` and above is unknown.
    precision: Option<i64>,
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(min(x, y)),
    }
}

impl LaurentSeries {
    /// Builds a series from dense residues starting at `start`; entries at or
    /// above `precision` are dropped.
    pub fn from_dense(p: Prime, start: i64, coeffs: Vec<u64>, precision: Option<i64>) -> Self {
        let mut s = LaurentSeries {
            p,
            start,
            coeffs: coeffs.into_iter().map(|c| p.reduce(c)).collect(),
            precision,
        };
        s.normalize();
        s
    }

    /// Builds a series from signed integer coefficients starting at `start`.
    pub fn from_coefficients(p: Prime, start: i64, coeffs: &[i64], precision: Option<i64>) -> Self {
        Self::from_dense(
            p,
            start,
            coeffs.iter().map(|&c| p.reduce_signed(c)).collect(),
            precision,
        )
    }

    /// Builds a series from `(exponent, coefficient)` pairs; repeated exponents add up.
    pub fn from_terms(p: Prime, terms: &[(i64, i64)], precision: Option<i64>) -> Self {
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return Self::from_dense(p, 0, Vec::new(), precision);
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![0u64; (hi - lo + 1) as usize];
        for &(e, c) in terms {
            let slot = &mut coeffs[(e - lo) as usize];
            *slot = p.add(*slot, p.reduce_signed(c));
        }
        Self::from_dense(p, lo, coeffs, precision)
    }

    pub fn zero(p: Prime) -> Self {
        Self::from_dense(p, 0, Vec::new(), None)
    }

    pub fn one(p: Prime) -> Self {
        Self::monomial(p, 1, 0)
    }

    /// `c * X^e`, exact.
    pub fn monomial(p: Prime, c: i64, e: i64) -> Self {
        Self::from_dense(p, e, vec![p.reduce_signed(c)], None)
    }

    /// `O(X^n)`: known to vanish modulo `X^n`, nothing more.
    pub fn indeterminate(p: Prime, n: i64) -> Self {
        Self::from_dense(p, 0, Vec::new(), Some(n))
    }

    pub fn constant(c: FpElement) -> Self {
        Self::from_dense(c.modulus(), 0, vec![c.residue()], None)
    }

    fn normalize(&mut self) {
        if let Some(n) = self.precision {
            let keep = (n - self.start).clamp(0, self.coeffs.len() as i64) as usize;
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|&&c| c == 0).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.start += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.start = 0;
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// `None` when exact.
    pub fn precision(&self) -> Option<i64> {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.precision.is_none() && self.coeffs.is_empty()
    }

    pub fn is_indeterminate(&self) -> bool {
        self.precision.is_some() && self.coeffs.is_empty()
    }

    /// True when a nonzero coefficient is known, i.e. the leading term is determined.
    pub fn has_leading_term(&self) -> bool {
        !self.coeffs.is_empty()
    }

    pub fn form(&self) -> Form<'_> {
        match (self.coeffs.is_empty(), self.precision) {
            (true, None) => Form::ExactZero,
            (true, Some(precision)) => Form::Indeterminate { precision },
            (false, None) => Form::Exact {
                valuation: self.start,
                coefficients: &self.coeffs,
            },
            (false, Some(precision)) => Form::Truncated {
                valuation: self.start,
                coefficients: &self.coeffs,
                precision,
            },
        }
    }

    pub fn valuation(&self) -> Valuation {
        match (self.coeffs.is_empty(), self.precision) {
            (false, _) => Valuation::Finite(self.start),
            (true, None) => Valuation::Infinite,
            (true, Some(n)) => Valuation::AtLeast(n),
        }
    }

    /// `|f| = p^(-v(f))`; `None` for indeterminate series.
    pub fn abs(&self) -> Option<BigRational> {
        match self.valuation() {
            Valuation::Infinite => Some(BigRational::zero()),
            Valuation::AtLeast(_) => None,
            Valuation::Finite(v) => Some(prime_power_rational(self.p, -v)),
        }
    }

    /// One past the largest stored exponent.
    fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64
    }

    /// Largest exponent with a stored nonzero coefficient.
    pub fn degree(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then(|| self.end() - 1)
    }

    /// Coefficient of `X^e`, or `None` if it lies at or above the precision.
    pub fn coefficient(&self, e: i64) -> Option<FpElement> {
        if self.precision.is_some_and(|n| e >= n) {
            return None;
        }
        Some(self.p.element(self.raw(e) as i64))
    }

    #[inline]
    fn raw(&self, e: i64) -> u64 {
        if e < self.start || e >= self.end() {
            0
        } else {
            self.coeffs[(e - self.start) as usize]
        }
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, FpElement)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (self.start + i as i64, self.p.element(c as i64)))
    }

    /// Leading coefficient, when known.
    pub fn leading_coefficient(&self) -> Option<FpElement> {
        self.coeffs.first().map(|&c| self.p.element(c as i64))
    }

    /// True when the series is known to have valuation at least `e`.
    pub fn known_valuation_at_least(&self, e: i64) -> bool {
        match self.valuation() {
            Valuation::Infinite => true,
            Valuation::Finite(v) | Valuation::AtLeast(v) => v >= e,
        }
    }

    /// Forgets everything at and above `X^n`.
    pub fn truncate(&self, n: i64) -> Self {
        Self::from_dense(
            self.p,
            self.start,
            self.coeffs.clone(),
            min_prec(self.precision, Some(n)),
        )
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            p: self.p,
            start: if self.coeffs.is_empty() { 0 } else { self.start + k },
            coeffs: self.coeffs.clone(),
            precision: self.precision.map(|n| n + k),
        }
    }

    pub fn scale(&self, c: FpElement) -> Self {
        self.assert_same(c.modulus());
        let p = self.p;
        Self::from_dense(
            p,
            self.start,
            self.coeffs.iter().map(|&a| p.mul(a, c.residue())).collect(),
            self.precision,
        )
    }

    fn assert_same(&self, q: Prime) {
        assert_eq!(self.p, q, "series over different primes");
    }

    /// Coefficientwise sum; precision is the minimum of the operands'.
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, negate_other: bool) -> Self {
        self.assert_same(other.p);
        let p = self.p;
        let precision = min_prec(self.precision, other.precision);
        let nonempty: Vec<&Self> = [self, other]
            .into_iter()
            .filter(|s| !s.coeffs.is_empty())
            .collect();
        if nonempty.is_empty() {
            return Self::from_dense(p, 0, Vec::new(), precision);
        }
        let lo = nonempty.iter().map(|s| s.start).min().unwrap();
        let mut hi = nonempty.iter().map(|s| s.end()).max().unwrap();
        if let Some(n) = precision {
            hi = min(hi, n);
        }
        if hi <= lo {
            return Self::from_dense(p, 0, Vec::new(), precision);
        }
        let mut out = vec![0u64; (hi - lo) as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let e = self.start + i as i64;
            if e >= hi {
                break;
            }
            out[(e - lo) as usize] = c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            let e = other.start + i as i64;
            if e >= hi {
                break;
            }
            let slot = &mut out[(e - lo) as usize];
            *slot = if negate_other { p.sub(*slot, c) } else { p.add(*slot, c) };
        }
        Self::from_dense(p, lo, out, precision)
    }

    pub fn neg(&self) -> Self {
        let p = self.p;
        LaurentSeries {
            p,
            start: self.start,
            coeffs: self.coeffs.iter().map(|&c| p.neg(c)).collect(),
            precision: self.precision,
        }
    }

    /// Cauchy product. Precision is `min(prec(f) + v(g), prec(g) + v(f))`,
    /// with the lower bound standing in for the valuation of an
    /// indeterminate factor.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same(other.p);
        let p = self.p;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero(p);
        }
        let vf = self.valuation().lower_bound().unwrap();
        let vg = other.valuation().lower_bound().unwrap();
        let precision = min_prec(
            self.precision.map(|n| n + vg),
            other.precision.map(|n| n + vf),
        );
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::from_dense(p, 0, Vec::new(), precision);
        }
        let start = self.start + other.start;
        let mut len = self.coeffs.len() + other.coeffs.len() - 1;
        if let Some(n) = precision {
            len = (n - start).clamp(0, len as i64) as usize;
        }
        let mut out = vec![0u64; len];
        // iterate the sparser side in the outer loop
        let (a, b) = if nnz(&self.coeffs) <= nnz(&other.coeffs) {
            (&self.coeffs, &other.coeffs)
        } else {
            (&other.coeffs, &self.coeffs)
        };
        for (i, &x) in a.iter().enumerate() {
            if x == 0 || i >= len {
                continue;
            }
            let upper = min(b.len(), len - i);
            for (j, &y) in b[..upper].iter().enumerate() {
                if y != 0 {
                    let slot = &mut out[i + j];
                    *slot = (*slot + x * y) % p.get();
                }
            }
        }
        Self::from_dense(p, start, out, precision)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.p);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse of a series with a known leading term.
    ///
    /// A truncated `f` known modulo `X^N` with valuation `v` yields an inverse
    /// known modulo `X^(N - 2v)`. Exact monomials invert exactly; other exact
    /// series have infinite inverses and need [`inv_with_precision`].
    ///
    /// [`inv_with_precision`]: LaurentSeries::inv_with_precision
    pub fn inv(&self) -> Result<Self> {
        match self.form() {
            Form::ExactZero | Form::Indeterminate { .. } => Err(Error::NotInvertible),
            Form::Exact { coefficients, .. } if coefficients.len() > 1 => {
                Err(Error::PrecisionRequired)
            }
            _ => self.inverse_to(None),
        }
    }

    /// Like [`inv`](LaurentSeries::inv), but exact non-monomial inputs are
    /// inverted modulo `X^precision`, and truncated results are additionally
    /// capped there.
    pub fn inv_with_precision(&self, precision: i64) -> Result<Self> {
        self.inverse_to(Some(precision))
    }

    fn inverse_to(&self, cap: Option<i64>) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(Error::NotInvertible);
        }
        let p = self.p;
        let v = self.start;
        let u0_inv = p.inv(self.coeffs[0]).expect("leading coefficient is nonzero");
        if self.precision.is_none() && self.coeffs.len() == 1 {
            return Ok(Self::from_dense(p, -v, vec![u0_inv], None));
        }
        let target = match (self.precision, cap) {
            (Some(n), c) => min_prec(Some(n - 2 * v), c).unwrap(),
            (None, Some(c)) => c,
            (None, None) => return Err(Error::PrecisionRequired),
        };
        let len = target + v;
        if len <= 0 {
            return Ok(Self::indeterminate(p, target));
        }
        let len = len as usize;
        let u = &self.coeffs;
        let neg_inv = p.neg(u0_inv);
        let mut w = vec![0u64; len];
        w[0] = u0_inv;
        for n in 1..len {
            let mut acc = 0u64;
            for k in 1..=min(n, u.len() - 1) {
                if u[k] != 0 && w[n - k] != 0 {
                    acc = (acc + u[k] * w[n - k]) % p.get();
                }
            }
            w[n] = p.mul(acc, neg_inv);
        }
        Ok(Self::from_dense(p, -v, w, Some(target)))
    }

    /// Formal derivative `sum k a_k X^(k-1)`; precision drops by one.
    pub fn derivative(&self) -> Self {
        let p = self.p;
        if self.coeffs.is_empty() {
            return Self::from_dense(p, 0, Vec::new(), self.precision.map(|n| n - 1));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| p.mul(c, p.reduce_signed(self.start + i as i64)))
            .collect();
        Self::from_dense(p, self.start - 1, coeffs, self.precision.map(|n| n - 1))
    }

    fn check_power_of_p(&self, q: u64) -> Result<u32> {
        self.p.log_of_power(q).ok_or(Error::NotPowerOfP {
            q,
            p: self.p.get(),
        })
    }

    /// `sum c_j X^j  ->  sum c_j Y^(qj)`: every exponent is multiplied by `q`.
    ///
    /// The result is read as an element of `F_p((Y))` with `Y^q = X`, so the
    /// embedding is the identity on `K` seen inside the extension.
    pub fn frobenius_embed(&self, q: u64) -> Result<Self> {
        self.check_power_of_p(q)?;
        let q = q as i64;
        if self.coeffs.is_empty() {
            return Ok(Self::from_dense(self.p, 0, Vec::new(), self.precision.map(|n| n * q)));
        }
        let mut coeffs = vec![0u64; (self.coeffs.len() - 1) * q as usize + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i * q as usize] = c;
        }
        Ok(Self::from_dense(
            self.p,
            self.start * q,
            coeffs,
            self.precision.map(|n| n * q),
        ))
    }

    /// The `g` with `g^q = self`, for series supported on multiples of `q`.
    ///
    /// Over the prime field every coefficient is its own `q`-th root, so this
    /// only divides exponents. Precision becomes `floor(N / q)`.
    pub fn qth_root(&self, q: u64) -> Result<Self> {
        self.check_power_of_p(q)?;
        let qi = q as i64;
        if let Some((e, _)) = self.terms().find(|(e, _)| e.rem_euclid(qi) != 0) {
            return Err(Error::SupportNotDivisible { exponent: e, q });
        }
        let precision = self.precision.map(|n| n.div_euclid(qi));
        if self.coeffs.is_empty() {
            return Ok(Self::from_dense(self.p, 0, Vec::new(), precision));
        }
        let coeffs = self.coeffs.iter().step_by(q as usize).copied().collect();
        Ok(Self::from_dense(self.p, self.start / qi, coeffs, precision))
    }

    fn check_power_series(&self) -> Result<()> {
        match self.terms().next() {
            Some((e, _)) if e < 0 => Err(Error::NegativeExponent(e)),
            _ => match self.precision {
                Some(n) if n < 0 => Err(Error::NegativeExponent(n)),
                _ => Ok(()),
            },
        }
    }

    fn check_in_disk(z: &Self) -> Result<()> {
        if z.known_valuation_at_least(1) {
            Ok(())
        } else {
            Err(Error::NotInDisk(z.to_string()))
        }
    }

    /// Substitution `f(g) = sum a_k g^k` for `f` a power series in the
    /// auxiliary variable and `g` in the open unit disk, by Horner's scheme.
    ///
    /// Precision is `min(prec(g), prec(f) * v(g))`: the unknown tail of `f`
    /// is a power series with integral coefficients times `g^prec(f)`.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.assert_same(g.p);
        self.check_power_series()?;
        Self::check_in_disk(g)?;
        let top = match self.precision {
            Some(n) => n,
            None => self.end(),
        };
        // the unknown tail sum_{k >= N} a_k g^(k-N) is only known to lie in O
        let mut acc = match self.precision {
            Some(_) => Self::indeterminate(self.p, 0),
            None => Self::zero(self.p),
        };
        for k in (0..top).rev() {
            acc = acc.mul(g);
            let c = self.raw(k);
            if c != 0 {
                acc = acc.add(&Self::monomial(self.p, c as i64, 0));
            }
        }
        Ok(acc)
    }

    /// Evaluation at a point of the open unit disk, summing `a_k z0^k` term by
    /// term (see [`AnalyticMap::eval`]).
    pub fn eval(&self, z0: &Self) -> Result<Self> {
        AnalyticMap::from_series(self)?.eval(z0)
    }

    /// Re-expansion `f(z0 + h) = sum_i c_i h^i`, returning `c_0 .. c_{count-1}`.
    pub fn taylor_shift(&self, z0: &Self, count: usize) -> Result<Vec<Self>> {
        AnalyticMap::from_series(self)?.taylor_shift(z0, count)
    }

    /// Three-valued comparison at the common precision.
    pub fn compare(&self, other: &Self) -> Agreement {
        self.assert_same(other.p);
        let precision = min_prec(self.precision, other.precision);
        let diff = self.sub(other);
        match (diff.coeffs.first(), precision) {
            (Some(_), _) => Agreement::Unequal {
                exponent: diff.start,
            },
            (None, None) => Agreement::Equal { precision: None },
            (None, Some(n)) => {
                let informative = [self, other].iter().any(|s| match s.valuation() {
                    Valuation::Finite(v) => v < n,
                    _ => false,
                }) || [self, other].iter().any(|s| s.is_exact_zero());
                if informative {
                    Agreement::Equal { precision: Some(n) }
                } else {
                    Agreement::Undecidable { precision: n }
                }
            }
        }
    }

    /// True when `self` and `other` agree on every coefficient both determine.
    pub fn agrees_with(&self, other: &Self) -> bool {
        !matches!(self.compare(other), Agreement::Unequal { .. })
    }
}

fn nnz(c: &[u64]) -> usize {
    c.iter().filter(|&&x| x != 0).count()
}

pub(crate) fn prime_power_rational(p: Prime, e: i64) -> BigRational {
    let base = BigInt::from(p.get());
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    match e.cmp(&0) {
        Ordering::Less => BigRational::new(BigInt::one(), mag),
        _ => BigRational::from_integer(mag),
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match (c.residue(), e) {
                (c, 0) => write!(f, "{c}")?,
                (1, e) => write!(f, "X^{e}")?,
                (c, e) => write!(f, "{c}*X^{e}")?,
            }
        }
        match (self.precision, first) {
            (Some(n), true) => write!(f, "O(X^{n})"),
            (Some(n), false) => write!(f, " + O(X^{n})"),
            (None, true) => f.write_str("0"),
            (None, false) => Ok(()),
        }
    }
}

impl Serialize for LaurentSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

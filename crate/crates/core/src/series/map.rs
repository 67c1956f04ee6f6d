use std::fmt;

use serde::{Serialize, Serializer};

use super::{min_prec, LaurentSeries, Valuation};
use crate::error::{Error, Result};
use crate::ff::Prime;

/// A power series `f(z) = sum_k a_k z^k` with coefficients `a_k` in
/// `K = F_p((X))`, read as an analytic map on the open unit disk `D = XO`.
///
/// Coefficients with index at or above `precision` are unknown; each known
/// coefficient carries its own `X`-adic precision. Evaluation and re-expansion
/// require every coefficient to be integral (`|a_k| <= 1`), and assume the
/// unknown tail is integral as well.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyticMap {
    p: Prime,
    coeffs: Vec<LaurentSeries>,
    precision: Option<usize>,
}

impl AnalyticMap {
    pub fn new(p: Prime, coeffs: Vec<LaurentSeries>, precision: Option<usize>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| c.prime() != p) {
            return Err(Error::ModulusMismatch(p.get(), c.prime().get()));
        }
        let mut map = AnalyticMap {
            p,
            coeffs,
            precision,
        };
        map.trim();
        Ok(map)
    }

    fn trim(&mut self) {
        if let Some(t) = self.precision {
            self.coeffs.truncate(t);
        }
        while self.coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            self.coeffs.pop();
        }
    }

    /// Lifts a power series with F_p coefficients: `a_k` is the constant
    /// coefficient of `X^k` in `f`, and `X` plays the role of `z`.
    pub fn from_series(f: &LaurentSeries) -> Result<Self> {
        f.check_power_series()?;
        let p = f.prime();
        let len = f.degree().map_or(0, |d| d as usize + 1);
        let coeffs = (0..len as i64)
            .map(|k| LaurentSeries::monomial(p, f.raw(k) as i64, 0))
            .collect();
        Self::new(p, coeffs, f.precision().map(|n| n as usize))
    }

    /// Inverse of [`from_series`](AnalyticMap::from_series) when every known
    /// coefficient is an exact constant.
    pub fn to_series(&self) -> Option<LaurentSeries> {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_exact() || c.terms().any(|(e, _)| e != 0) {
                return None;
            }
            terms.push((k as i64, c.raw(0) as i64));
        }
        Some(LaurentSeries::from_terms(
            self.p,
            &terms,
            self.precision.map(|t| t as i64),
        ))
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Number of known leading coefficients; `None` when the map is a polynomial.
    pub fn precision(&self) -> Option<usize> {
        self.precision
    }

    /// `a_k`, or `None` if `k` is at or above the precision.
    pub fn coefficient(&self, k: usize) -> Option<LaurentSeries> {
        if self.precision.is_some_and(|t| k >= t) {
            return None;
        }
        Some(
            self.coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| LaurentSeries::zero(self.p)),
        )
    }

    /// Stored coefficients `a_0, a_1, ...` (trailing exact zeros removed).
    pub fn coefficients(&self) -> &[LaurentSeries] {
        &self.coeffs
    }

    /// Indices whose coefficient has a known nonzero leading term.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.has_leading_term())
            .map(|(k, _)| k)
    }

    pub fn check_integral(&self) -> Result<()> {
        for (k, c) in self.coeffs.iter().enumerate() {
            match c.valuation().lower_bound() {
                Some(v) if v < 0 => {
                    return Err(Error::NonIntegralCoefficient {
                        index: k as i64,
                        valuation: v,
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The same map with `a_0` replaced by an exact zero.
    pub fn without_constant(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        if let Some(c) = coeffs.first_mut() {
            *c = LaurentSeries::zero(self.p);
        }
        AnalyticMap::new(self.p, coeffs, self.precision).unwrap()
    }

    /// `z -> f(X^s z)`: coefficient `a_k` becomes `a_k X^(sk)`.
    pub fn rescale(&self, s: i64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.shift(s * k as i64))
            .collect();
        AnalyticMap::new(self.p, coeffs, self.precision).unwrap()
    }

    fn tail(&self, z0: &LaurentSeries) -> Option<LaurentSeries> {
        let t = self.precision?;
        let v = z0.valuation().lower_bound()?;
        Some(LaurentSeries::indeterminate(
            self.p,
            (t as i64).saturating_mul(v),
        ))
    }

    fn check_point(&self, z0: &LaurentSeries) -> Result<()> {
        assert_eq!(self.p, z0.prime(), "series over different primes");
        self.check_integral()?;
        LaurentSeries::check_in_disk(z0)
    }

    /// `f(z0)` for `z0` in the open unit disk, as `sum a_k z0^k` accumulated
    /// term by term, plus the tail bound `O(X^(T v(z0)))` for a map known to
    /// `T` coefficients.
    pub fn eval(&self, z0: &LaurentSeries) -> Result<LaurentSeries> {
        self.check_point(z0)?;
        let mut acc = LaurentSeries::zero(self.p);
        let mut power = LaurentSeries::one(self.p);
        for (k, a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                power = power.mul(z0);
            }
            if !a.is_exact_zero() {
                acc = acc.add(&a.mul(&power));
            }
        }
        match self.tail(z0) {
            Some(tail) => Ok(acc.add(&tail)),
            None => Ok(acc),
        }
    }

    /// `f(z0)` by Horner's scheme; the unknown tail enters as `O(1)`, which the
    /// product rule turns into the same `O(X^(T v(z0)))` bound as [`eval`].
    ///
    /// [`eval`]: AnalyticMap::eval
    pub fn eval_horner(&self, z0: &LaurentSeries) -> Result<LaurentSeries> {
        self.check_point(z0)?;
        let top = self.precision.unwrap_or(self.coeffs.len());
        let mut acc = match self.precision {
            Some(_) => LaurentSeries::indeterminate(self.p, 0),
            None => LaurentSeries::zero(self.p),
        };
        for k in (0..top).rev() {
            acc = acc.mul(z0);
            if let Some(a) = self.coeffs.get(k) {
                acc = acc.add(a);
            }
        }
        Ok(acc)
    }

    /// `f'(z) = sum k a_k z^(k-1)`; one fewer coefficient is known.
    pub fn derivative(&self) -> Self {
        let p = self.p;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a.scale(p.element((k as u64 % p.get()) as i64)))
            .collect();
        AnalyticMap::new(p, coeffs, self.precision.map(|t| t.saturating_sub(1))).unwrap()
    }

    /// Coefficients `c_0 .. c_{count-1}` of `f(z0 + h) = sum_i c_i h^i`, with
    /// `c_i = sum_k a_k C(k, i) z0^(k-i)` and binomials reduced mod p.
    ///
    /// For a map known to `T` coefficients, `c_i` is known modulo
    /// `X^((T - i) v(z0))` and undetermined for `i >= T`.
    pub fn taylor_shift(&self, z0: &LaurentSeries, count: usize) -> Result<Vec<LaurentSeries>> {
        self.check_point(z0)?;
        if let Some(t) = self.precision {
            if count > t {
                return Err(Error::precision(format!(
                    "shift coefficient c_{} needs more than the {t} known terms",
                    count - 1
                )));
            }
        }
        let p = self.p;
        let len = self.coeffs.len();
        let mut powers = Vec::with_capacity(len);
        powers.push(LaurentSeries::one(p));
        for k in 1..len {
            let next = powers[k - 1].mul(z0);
            powers.push(next);
        }
        let v0 = z0.valuation().lower_bound();
        (0..count)
            .map(|i| {
                let mut c = LaurentSeries::zero(p);
                for k in i..len {
                    let a = &self.coeffs[k];
                    if a.is_exact_zero() {
                        continue;
                    }
                    let b = p.binomial(k as u64, i as u64);
                    if b != 0 {
                        c = c.add(&a.mul(&powers[k - i]).scale(p.element(b as i64)));
                    }
                }
                if let (Some(t), Some(v)) = (self.precision, v0) {
                    let n = ((t - i) as i64).saturating_mul(v);
                    c = c.add(&LaurentSeries::indeterminate(p, n));
                }
                Ok(c)
            })
            .collect()
    }

    /// `h` with `h(w)^q = f(w)` read in `F_p((Y))`, `Y^q = X`, for maps whose
    /// known nonzero coefficients sit at indices divisible by `q`.
    ///
    /// A coefficient `a_(qk)` in `K` has the `q`-th root `b_k` in `F_p((Y))`
    /// with the same digits, so `b_k` is returned as `a_(qk)` reinterpreted in
    /// `Y`. Precision becomes `floor(T / q)`.
    pub fn qth_root(&self, q: u64) -> Result<Self> {
        self.p.log_of_power(q).ok_or(Error::NotPowerOfP {
            q,
            p: self.p.get(),
        })?;
        let q = q as usize;
        if let Some(k) = self.support().find(|k| k % q != 0) {
            return Err(Error::SupportNotDivisible {
                exponent: k as i64,
                q: q as u64,
            });
        }
        let coeffs = self.coeffs.iter().step_by(q).cloned().collect();
        AnalyticMap::new(self.p, coeffs, self.precision.map(|t| t / q))
    }

    /// Re-reads every coefficient through [`LaurentSeries::frobenius_embed`].
    pub fn frobenius_embed_coefficients(&self, q: u64) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.frobenius_embed(q))
            .collect::<Result<Vec<_>>>()?;
        AnalyticMap::new(self.p, coeffs, self.precision)
    }

    /// Smallest known X-adic precision among stored coefficients.
    pub fn coefficient_precision(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .fold(None, |acc, c| min_prec(acc, c.precision()))
    }

    /// Lower bound on `v(a_k)` over all known coefficients, `None` if all vanish.
    pub fn min_coefficient_valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .filter_map(|c| match c.valuation() {
                Valuation::Infinite => None,
                v => v.lower_bound(),
            })
            .min()
    }
}

impl fmt::Display for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                _ => write!(f, "({c})*z^{k}")?,
            }
        }
        match (self.precision, first) {
            (Some(t), true) => write!(f, "O(z^{t})"),
            (Some(t), false) => write!(f, " + O(z^{t})"),
            (None, true) => f.write_str("0"),
            (None, false) => Ok(()),
        }
    }
}

impl Serialize for AnalyticMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.to_series() {
            Some(series) => s.collect_str(&series),
            None => s.collect_str(self),
        }
    }
}

//! p-adic integers at finite precision.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::Prime;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PadicForm {
    Exact(BigInt),
    /// Canonical residue in `[0, p^precision)`.
    Truncated { residue: BigUint, precision: u32 },
}

/// An element of `Z_p`, either an exact integer or known modulo `p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: Prime,
    form: PadicForm,
}

pub(crate) fn prime_power(p: Prime, k: u32) -> BigUint {
    num_traits::pow(BigUint::from(p.get()), k as usize)
}

fn reduce_to(p: Prime, n: &BigInt, k: u32) -> BigUint {
    let m = BigInt::from(prime_power(p, k));
    n.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative")
}

impl PadicInt {
    pub fn exact(p: Prime, n: impl Into<BigInt>) -> Self {
        PadicInt {
            p,
            form: PadicForm::Exact(n.into()),
        }
    }

    /// `n mod p^k`; requires `k >= 1`.
    pub fn truncated(p: Prime, n: impl Into<BigInt>, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidArgument(
                "p-adic precision must be at least 1".into(),
            ));
        }
        Ok(PadicInt {
            p,
            form: PadicForm::Truncated {
                residue: reduce_to(p, &n.into(), precision),
                precision,
            },
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn form(&self) -> &PadicForm {
        &self.form
    }

    /// `None` when exact.
    pub fn precision(&self) -> Option<u32> {
        match self.form {
            PadicForm::Exact(_) => None,
            PadicForm::Truncated { precision, .. } => Some(precision),
        }
    }

    /// Image in `Z / p^k`.
    pub fn reduce(&self, k: u32) -> Result<Self> {
        match &self.form {
            PadicForm::Exact(n) => Self::truncated(self.p, n.clone(), k),
            PadicForm::Truncated { residue, precision } => Self::truncated(
                self.p,
                BigInt::from(residue.clone()),
                k.min(*precision),
            ),
        }
    }

    /// A representative integer: the exact value, or the canonical residue.
    pub fn representative(&self) -> BigInt {
        match &self.form {
            PadicForm::Exact(n) => n.clone(),
            PadicForm::Truncated { residue, .. } => BigInt::from(residue.clone()),
        }
    }

    fn combine(&self, other: &Self, op: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        assert_eq!(self.p, other.p, "p-adic integers over different primes");
        let value = op(&self.representative(), &other.representative());
        match (self.precision(), other.precision()) {
            (None, None) => Self::exact(self.p, value),
            (a, b) => {
                let k = a.unwrap_or(u32::MAX).min(b.unwrap_or(u32::MAX));
                Self::truncated(self.p, value, k).unwrap()
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        // 0 * t = 0 exactly, whatever is known about t
        if matches!(&self.form, PadicForm::Exact(n) if n.is_zero())
            || matches!(&other.form, PadicForm::Exact(n) if n.is_zero())
        {
            return Self::exact(self.p, 0);
        }
        self.combine(other, |a, b| a * b)
    }

    pub fn neg(&self) -> Self {
        Self::exact(self.p, 0).sub(self)
    }

    /// Largest `k` with `p^k | t`; `None` means `+inf` (exact zero).
    pub fn vp(&self) -> Result<Option<u64>> {
        let mut n = match &self.form {
            PadicForm::Exact(n) if n.is_zero() => return Ok(None),
            PadicForm::Exact(n) => n.abs().to_biguint().unwrap(),
            PadicForm::Truncated { residue, precision } => {
                if residue.is_zero() {
                    return Err(Error::UndecidableValuation(*precision));
                }
                residue.clone()
            }
        };
        let p = BigUint::from(self.p.get());
        let mut k = 0;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                return Ok(Some(k));
            }
            n = q;
            k += 1;
        }
    }

    /// Base-p digits of the representative, least significant first. Only
    /// defined for nonnegative representatives.
    pub fn digits(&self) -> Option<Vec<u64>> {
        let n = self.representative();
        if n.sign() == Sign::Minus {
            return None;
        }
        let p = BigUint::from(self.p.get());
        let mut n = n.to_biguint().unwrap();
        let mut out = Vec::new();
        while !n.is_zero() {
            let (q, r) = n.div_rem(&p);
            out.push(r.to_u64().unwrap());
            n = q;
        }
        Some(out)
    }

    /// Accepts a decimal integer or `r mod p^k` (the base must equal `p`).
    pub fn parse(p: Prime, text: &str) -> Result<Self> {
        let bad = |message: String| Error::Parse {
            position: 0,
            message,
        };
        let text = text.trim();
        match text.split_once("mod") {
            None => text
                .parse::<BigInt>()
                .map(|n| Self::exact(p, n))
                .map_err(|e| bad(format!("invalid integer {text:?}: {e}"))),
            Some((r, m)) => {
                let r: BigInt = r
                    .trim()
                    .parse()
                    .map_err(|e| bad(format!("invalid residue {r:?}: {e}")))?;
                let (base, k) = m
                    .trim()
                    .split_once('^')
                    .ok_or_else(|| bad(format!("expected p^k, found {m:?}")))?;
                if base.trim().parse::<u64>().ok() != Some(p.get()) {
                    return Err(bad(format!("modulus base {base:?} is not {p}")));
                }
                let k: u32 = k
                    .trim()
                    .parse()
                    .map_err(|e| bad(format!("invalid precision {k:?}: {e}")))?;
                Self::truncated(p, r, k)
            }
        }
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            PadicForm::Exact(n) => write!(f, "{n}"),
            PadicForm::Truncated { residue, precision } => {
                write!(f, "{residue} mod {}^{precision}", self.p)
            }
        }
    }
}

impl Serialize for PadicInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The index `[p^a Z_p : p^b Z_p] = p^(b - a)`.
pub fn zp_index(p: Prime, a: u32, b: u32) -> Result<BigUint> {
    if b < a {
        return Err(Error::InvalidRange(format!("b = {b} < a = {a}")));
    }
    Ok(prime_power(p, b - a))
}

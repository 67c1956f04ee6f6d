//! The prime field F_p.
//!
//! [`Prime`] carries the raw residue arithmetic on `u64` values in `[0, p)`;
//! the series code works on those directly. [`FpElement`] is the checked
//! public element type that remembers its modulus.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest modulus accepted, so that residue products fit in a `u64`.
pub const MAX_PRIME: u64 = u32::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    /// Checks primality by trial division.
    pub fn new(p: u64) -> Result<Self> {
        if !(2..=MAX_PRIME).contains(&p) {
            return Err(Error::NotPrime(p));
        }
        let mut d = 2u64;
        while d * d <= p {
            if p.is_multiple_of(d) {
                return Err(Error::NotPrime(p));
            }
            d += 1;
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u64 {
        a % self.0
    }

    /// Reduces a signed integer into `[0, p)`.
    #[inline]
    pub fn reduce_signed(self, a: i64) -> u64 {
        (a as i128).rem_euclid(self.0 as i128) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.0
    }

    pub fn pow(self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.0;
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse via Fermat; `None` for zero.
    pub fn inv(self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.0) {
            None
        } else {
            Some(self.pow(a, self.0 - 2))
        }
    }

    /// `n` choose `k` mod p, by Lucas' theorem.
    pub fn binomial(self, mut n: u64, mut k: u64) -> u64 {
        let p = self.0;
        let mut acc = 1u64;
        while k > 0 || n > 0 {
            let (nd, kd) = (n % p, k % p);
            if kd > nd {
                return 0;
            }
            acc = self.mul(acc, self.small_binomial(nd, kd));
            n /= p;
            k /= p;
        }
        acc
    }

    fn small_binomial(self, n: u64, k: u64) -> u64 {
        let k = k.min(n - k);
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..k {
            num = self.mul(num, (n - i) % self.0);
            den = self.mul(den, (i + 1) % self.0);
        }
        self.mul(num, self.inv(den).expect("digits below p have invertible factorials"))
    }

    /// Returns `n` with `q = p^n`, or `None` if `q` is not a power of p.
    pub fn log_of_power(self, q: u64) -> Option<u32> {
        if q == 0 {
            return None;
        }
        let mut n = 0;
        let mut r = q;
        while r.is_multiple_of(self.0) {
            r /= self.0;
            n += 1;
        }
        (r == 1).then_some(n)
    }

    pub fn element(self, residue: i64) -> FpElement {
        FpElement {
            residue: self.reduce_signed(residue),
            modulus: self,
        }
    }

    pub fn zero(self) -> FpElement {
        self.element(0)
    }

    pub fn one(self) -> FpElement {
        self.element(1)
    }

    /// All elements of the field in increasing residue order.
    pub fn elements(self) -> impl Iterator<Item = FpElement> {
        (0..self.0).map(move |r| FpElement {
            residue: r,
            modulus: self,
        })
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A canonical residue modulo a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpElement {
    residue: u64,
    modulus: Prime,
}

impl FpElement {
    pub fn residue(self) -> u64 {
        self.residue
    }

    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.residue == 0
    }

    fn check(self, other: FpElement) -> Result<Prime> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus.0, other.modulus.0));
        }
        Ok(self.modulus)
    }

    pub fn try_add(self, other: FpElement) -> Result<FpElement> {
        let p = self.check(other)?;
        Ok(FpElement {
            residue: p.add(self.residue, other.residue),
            modulus: p,
        })
    }

    pub fn try_sub(self, other: FpElement) -> Result<FpElement> {
        let p = self.check(other)?;
        Ok(FpElement {
            residue: p.sub(self.residue, other.residue),
            modulus: p,
        })
    }

    pub fn try_mul(self, other: FpElement) -> Result<FpElement> {
        let p = self.check(other)?;
        Ok(FpElement {
            residue: p.mul(self.residue, other.residue),
            modulus: p,
        })
    }

    pub fn inv(self) -> Result<FpElement> {
        let residue = self.modulus.inv(self.residue).ok_or(Error::DivisionByZero)?;
        Ok(FpElement {
            residue,
            modulus: self.modulus,
        })
    }

    pub fn pow(self, e: u64) -> FpElement {
        FpElement {
            residue: self.modulus.pow(self.residue, e),
            modulus: self.modulus,
        }
    }
}

// The operator impls panic on mismatched moduli; use the `try_*` methods when
// the moduli are not known to agree.
impl Add for FpElement {
    type Output = FpElement;
    fn add(self, rhs: FpElement) -> FpElement {
        self.try_add(rhs).expect("modulus mismatch")
    }
}

impl Sub for FpElement {
    type Output = FpElement;
    fn sub(self, rhs: FpElement) -> FpElement {
        self.try_sub(rhs).expect("modulus mismatch")
    }
}

impl Mul for FpElement {
    type Output = FpElement;
    fn mul(self, rhs: FpElement) -> FpElement {
        self.try_mul(rhs).expect("modulus mismatch")
    }
}

impl Neg for FpElement {
    type Output = FpElement;
    fn neg(self) -> FpElement {
        FpElement {
            residue: self.modulus.neg(self.residue),
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for FpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

impl Serialize for FpElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.residue)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn rejects_composites() {
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
        assert_eq!(Prime::new(9), Err(Error::NotPrime(9)));
        assert_eq!(Prime::new(0), Err(Error::NotPrime(0)));
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(65537).is_ok());
    }

    #[test]
    fn small_examples() {
        assert_eq!((p(5).element(3) + p(5).element(4)).residue(), 2);
        assert_eq!((p(2).element(1) + p(2).element(1)).residue(), 0);
        for x in p(3).elements() {
            assert_eq!(p(3).zero() + x, x);
        }
        assert_eq!(p(5).element(2).inv().unwrap().residue(), 3);
        assert_eq!(p(7).element(3).pow(6).residue(), 1);
        assert_eq!((p(2).one() * p(2).one()).residue(), 1);
    }

    #[test]
    fn errors() {
        assert_eq!(p(5).zero().inv(), Err(Error::DivisionByZero));
        assert_eq!(
            p(5).one().try_add(p(7).one()),
            Err(Error::ModulusMismatch(5, 7))
        );
        assert!(p(5).one().try_mul(p(3).one()).is_err());
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2, 3, 5, 7] {
            let f = p(q);
            for a in f.elements() {
                assert_eq!(a.pow(q), a, "Frobenius fixes F_p");
                assert_eq!(a + (-a), f.zero());
                if !a.is_zero() {
                    assert_eq!(a * a.inv().unwrap(), f.one());
                }
                for b in f.elements() {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    assert_eq!(a - b, a + (-b));
                    for c in f.elements() {
                        assert_eq!((a + b) + c, a + (b + c));
                        assert_eq!((a * b) * c, a * (b * c));
                        assert_eq!(a * (b + c), a * b + a * c);
                    }
                }
            }
        }
    }

    #[test]
    fn large_residues() {
        let f = p(4_294_967_291);
        let a = f.element(4_294_967_290);
        assert_eq!((a * a).residue(), 1);
        assert_eq!(a.inv().unwrap(), a);
        let b = f.element(123_456_789);
        assert_eq!(b * b.inv().unwrap(), f.one());
        assert_eq!(b.pow(f.get()), b);
    }

    #[test]
    fn lucas_binomials() {
        let f = p(5);
        for n in 0..=40u64 {
            let mut row = vec![1u128];
            for k in 1..=n {
                let prev = row[k as usize - 1];
                row.push(prev * (n - k + 1) as u128 / k as u128);
            }
            for k in 0..=n {
                assert_eq!(f.binomial(n, k), (row[k as usize] % 5) as u64, "C({n},{k})");
            }
        }
        assert_eq!(f.binomial(3, 5), 0);
    }

    #[test]
    fn powers_of_p() {
        assert_eq!(p(3).log_of_power(27), Some(3));
        assert_eq!(p(3).log_of_power(1), Some(0));
        assert_eq!(p(3).log_of_power(6), None);
        assert_eq!(p(2).log_of_power(0), None);
    }
}

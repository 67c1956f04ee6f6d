//! Subgroups of `(K, +)` cut out by coefficient support.
//!
//! Two families matter here: `H`, the series supported on powers of two
//! (`sum a_k X^(2^k)`, no constant term), and `F[[X^l]]`, the power series in
//! `X^l` (constant term allowed).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::FpElement;
use crate::series::LaurentSeries;

pub const DEFAULT_REINDEX_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExponentSet {
    /// `{1, 2, 4, 8, ...}`
    PowersOfTwo,
    /// `{0, l, 2l, ...}`
    MultiplesOf(u64),
    /// A finite list, authoritative only for exponents below `bound`.
    Explicit { exponents: BTreeSet<i64>, bound: i64 },
}

impl ExponentSet {
    pub fn multiples_of(ell: u64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidArgument("l must be at least 1".into()));
        }
        Ok(ExponentSet::MultiplesOf(ell))
    }

    /// `Some(true/false)` when membership of `e` is decided, `None` past the
    /// bound of an explicit set.
    pub fn contains(&self, e: i64) -> Option<bool> {
        match self {
            ExponentSet::PowersOfTwo => Some(e > 0 && (e & (e - 1)) == 0),
            ExponentSet::MultiplesOf(ell) => Some(e >= 0 && e % *ell as i64 == 0),
            ExponentSet::Explicit { exponents, bound } => {
                (e < *bound).then(|| exponents.contains(&e))
            }
        }
    }
}

impl fmt::Display for ExponentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentSet::PowersOfTwo => f.write_str("H"),
            ExponentSet::MultiplesOf(ell) => write!(f, "ell:{ell}"),
            ExponentSet::Explicit { exponents, bound } => {
                let list: Vec<String> = exponents.iter().map(|e| e.to_string()).collect();
                write!(f, "{{{}}} below {bound}", list.join(","))
            }
        }
    }
}

/// Parses the set name `H` or `ell:L`.
impl FromStr for ExponentSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "H" {
            return Ok(ExponentSet::PowersOfTwo);
        }
        let bad = || Error::Parse {
            position: 0,
            message: format!("unknown set {s:?}; expected \"H\" or \"ell:L\""),
        };
        let ell = s.strip_prefix("ell:").ok_or_else(bad)?;
        let ell: u64 = ell.trim().parse().map_err(|_| bad())?;
        ExponentSet::multiples_of(ell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MembershipVerdict {
    MemberExact,
    MemberAtPrecision { precision: i64 },
    NonMember {
        witness_exponent: i64,
        coefficient: FpElement,
    },
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        !matches!(self, MembershipVerdict::NonMember { .. })
    }
}

/// Decides membership of `f` in the subgroup with support `set`.
///
/// The witness of a [`MembershipVerdict::NonMember`] is the smallest known
/// nonzero coefficient outside the set.
pub fn member(f: &LaurentSeries, set: &ExponentSet) -> MembershipVerdict {
    let mut undecided_from = None;
    for (e, c) in f.terms() {
        match set.contains(e) {
            Some(false) => {
                return MembershipVerdict::NonMember {
                    witness_exponent: e,
                    coefficient: c,
                }
            }
            Some(true) => {}
            None => {
                undecided_from.get_or_insert(e);
            }
        }
    }
    let bound = match set {
        ExponentSet::Explicit { bound, .. } if undecided_from.is_some() => Some(*bound),
        ExponentSet::Explicit { bound, .. } if f.precision().is_some() => Some(*bound),
        _ => None,
    };
    match (f.precision(), bound) {
        (None, None) => MembershipVerdict::MemberExact,
        (Some(n), None) | (None, Some(n)) => MembershipVerdict::MemberAtPrecision { precision: n },
        (Some(n), Some(b)) => MembershipVerdict::MemberAtPrecision {
            precision: n.min(b),
        },
    }
}

/// The bijection `sum a_k X^k -> sum a_k X^(2^k)` from `F[[X]]` onto `H`.
///
/// A series known modulo `X^N` maps to one known modulo `X^(2^N)`, lowered to
/// `cap` if that is smaller. A nonzero coefficient landing at or beyond `cap`
/// is an error.
pub fn reindex_to_h(g: &LaurentSeries, cap: u64) -> Result<LaurentSeries> {
    if let Some((e, _)) = g.terms().next() {
        if e < 0 {
            return Err(Error::NegativeExponent(e));
        }
    }
    if let Some(n) = g.precision() {
        if n < 0 {
            return Err(Error::NegativeExponent(n));
        }
    }
    let target = |k: i64| -> Option<u64> { (k < 63).then(|| 1u64 << k) };
    let mut terms = Vec::new();
    for (k, c) in g.terms() {
        match target(k) {
            Some(e) if e < cap => terms.push((e as i64, c.residue() as i64)),
            Some(e) => return Err(Error::CapExceeded { exponent: e, cap }),
            None => return Err(Error::CapExceeded { exponent: u64::MAX, cap }),
        }
    }
    let precision = g
        .precision()
        .map(|n| target(n).map_or(cap, |e| e.min(cap)) as i64);
    Ok(LaurentSeries::from_terms(g.prime(), &terms, precision))
}

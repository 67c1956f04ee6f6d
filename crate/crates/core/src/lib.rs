//! Exact arithmetic in the local field `F_p((X))` of formal Laurent series,
//! and a certificate engine for subgroups of `(K, +)` defined by coefficient
//! support.
//!
//! The certificate engine takes a (truncated) power series `f` on the open
//! unit disk that supposedly maps into such a subgroup, and returns a concrete
//! evaluation point where it does not, together with the offending exponent.
//! Every certificate can be re-checked independently with
//! [`witness::verify`].

pub mod cli;
pub mod error;
pub mod ff;
pub mod padic;
pub mod series;
pub mod stdgroup;
pub mod subgroups;
pub mod units;
pub mod witness;

pub use error::{Error, Result};
pub use ff::{FpElement, Prime};
pub use padic::PadicInt;
pub use series::{Agreement, AnalyticMap, LaurentSeries, Valuation};
pub use subgroups::{ExponentSet, MembershipVerdict};

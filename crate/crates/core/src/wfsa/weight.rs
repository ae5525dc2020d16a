//! Tropical semiring weights.
//!
//! `(R+ ∪ {+inf}, min, +, +inf, 0)`. Weights are negative-log scores, so the
//! best path is the one with the smallest total weight.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A weight in the tropical semiring.
///
/// `plus` is `min`, `times` is `+`, `Weight::ZERO` (positive infinity) is the
/// additive identity and marks rejection, `Weight::ONE` (0.0) is the
/// multiplicative identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight(f64);

impl Weight {
    pub const ZERO: Weight = Weight(f64::INFINITY);
    pub const ONE: Weight = Weight(0.0);

    /// Wraps a raw value. Negative or NaN values are not valid tropical
    /// weights; callers constructing automata go through
    /// [`WfsaBuilder`](super::WfsaBuilder), which rejects them.
    #[inline]
    pub const fn new(value: f64) -> Self {
        Weight(value)
    }

    /// `-ln(p)` for a probability-like ratio `p` in `(0, 1]`.
    #[inline]
    pub fn from_prob(p: f64) -> Self {
        Weight(-p.ln())
    }

    #[inline]
    pub const fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn plus(self, other: Weight) -> Weight {
        Weight(self.0.min(other.0))
    }

    #[inline]
    pub fn times(self, other: Weight) -> Weight {
        Weight(self.0 + other.0)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::INFINITY
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Non-negative and finite: the only values allowed on arcs.
    #[inline]
    pub fn is_valid_arc_weight(self) -> bool {
        self.0.is_finite() && self.0 >= 0.0
    }

    pub fn approx_eq(self, other: Weight, tol: f64) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        (self.0 - other.0).abs() <= tol
    }
}

impl Default for Weight {
    fn default() -> Self {
        Weight::ZERO
    }
}

impl Eq for Weight {}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

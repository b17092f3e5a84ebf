//! Closed real intervals.
//!
//! Two arithmetics are provided. [`std_arith`] is classical interval
//! arithmetic: the result is the hull of every endpoint combination and
//! therefore encloses the exact range of the operation. [`mod_arith`] is
//! the limit-parameterized arithmetic used by the fuzzy finite element
//! procedure. Each operand is written as `lo + (hi - lo) / n` for
//! `n ∈ [1, ∞)`, and the operation is evaluated only at the two pairings
//! `(n → ∞, n → ∞)` and `(n → 1, n → 1)` (crossed for subtraction and
//! division). For sign-mixed products and quotients the result can be
//! narrower than the true range.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub const ALL: [ArithOp; 4] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];

    /// Scalar counterpart of the operation.
    pub fn apply(self, x: f64, y: f64) -> f64 {
        match self {
            ArithOp::Add => x + y,
            ArithOp::Sub => x - y,
            ArithOp::Mul => x * y,
            ArithOp::Div => x / y,
        }
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("interval endpoint"));
        }
        if lo > hi {
            return Err(Error::InvalidEndpoints { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[c, c]`.
    pub fn point(c: f64) -> Result<Self> {
        Self::new(c, c)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Centre and width of the interval.
    pub fn midpoint_width(&self) -> (f64, f64) {
        (self.midpoint(), self.width())
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self ⊆ other`, allowing each endpoint to stick out by `slack`.
    pub fn is_subset_within(&self, other: &Interval, slack: f64) -> bool {
        other.lo - slack <= self.lo && self.hi <= other.hi + slack
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Hull of a nonempty set of finite points.
    pub fn hull_of(values: impl IntoIterator<Item = f64>) -> Result<Interval> {
        let mut iter = values.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidArgument("hull of an empty set".into()))?;
        let (lo, hi) = iter.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Interval::new(lo, hi)
    }

    /// Point `lo + (hi - lo) / n` of the limit parameterization.
    ///
    /// `n = 1` selects `hi`; `n = f64::INFINITY` selects `lo` exactly.
    pub fn param_point(&self, n: f64) -> Result<f64> {
        if n.is_nan() || n < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "parameter n must satisfy n >= 1, got {n}"
            )));
        }
        if n == f64::INFINITY {
            return Ok(self.lo);
        }
        if n == 1.0 {
            return Ok(self.hi);
        }
        Ok((self.lo + self.width() / n).clamp(self.lo, self.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(value: [f64; 2]) -> Result<Self> {
        Interval::new(value[0], value[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(value: Interval) -> Self {
        [value.lo, value.hi]
    }
}

fn check_divisor(b: &Interval) -> Result<()> {
    if b.contains_zero() {
        Err(Error::DivisionByZeroInterval { lo: b.lo, hi: b.hi })
    } else {
        Ok(())
    }
}

/// Classical interval arithmetic.
pub fn std_arith(op: ArithOp, a: &Interval, b: &Interval) -> Result<Interval> {
    match op {
        ArithOp::Add => Interval::new(a.lo + b.lo, a.hi + b.hi),
        ArithOp::Sub => Interval::new(a.lo - b.hi, a.hi - b.lo),
        ArithOp::Mul | ArithOp::Div => {
            if op == ArithOp::Div {
                check_divisor(b)?;
            }
            Interval::hull_of([
                op.apply(a.lo, b.lo),
                op.apply(a.lo, b.hi),
                op.apply(a.hi, b.lo),
                op.apply(a.hi, b.hi),
            ])
        }
    }
}

/// Limit-parameterized interval arithmetic.
///
/// The first operand is always paired as `(n → ∞, n → 1)`; the second
/// operand follows the same order for `+` and `×` and the reversed order
/// for `−` and `÷`. The result is the min/max of the two pairings.
pub fn mod_arith(op: ArithOp, a: &Interval, b: &Interval) -> Result<Interval> {
    if op == ArithOp::Div {
        check_divisor(b)?;
    }
    let a_low = a.param_point(f64::INFINITY)?;
    let a_high = a.param_point(1.0)?;
    let b_low = b.param_point(f64::INFINITY)?;
    let b_high = b.param_point(1.0)?;
    let (first, second) = match op {
        ArithOp::Add | ArithOp::Mul => (op.apply(a_low, b_low), op.apply(a_high, b_high)),
        ArithOp::Sub | ArithOp::Div => (op.apply(a_low, b_high), op.apply(a_high, b_low)),
    };
    Interval::hull_of([first, second])
}

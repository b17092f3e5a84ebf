//! Triangular fuzzy numbers and α-indexed families of nested intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{mod_arith, ArithOp, Interval};

/// Absolute slack tolerated when checking that cuts nest.
pub const NESTING_SLACK: f64 = 1e-9;

/// Default number of uniformly spaced α levels, `{0, 0.1, ..., 1}`.
pub const DEFAULT_LEVEL_COUNT: usize = 11;

/// Fuzzy number `[left, peak, right]` with piecewise-linear membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TriangularFuzzyNumber {
    left: f64,
    peak: f64,
    right: f64,
}

impl TriangularFuzzyNumber {
    pub fn new(left: f64, peak: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && peak.is_finite() && right.is_finite()) {
            return Err(Error::NonFinite("fuzzy number"));
        }
        if !(left <= peak && peak <= right) {
            return Err(Error::InvalidFuzzyNumber { left, peak, right });
        }
        Ok(Self { left, peak, right })
    }

    /// Degenerate fuzzy number, a crisp value.
    pub fn crisp(value: f64) -> Result<Self> {
        Self::new(value, value, value)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn is_crisp(&self) -> bool {
        self.left == self.right
    }

    pub fn membership(&self, x: f64) -> f64 {
        if x == self.peak {
            1.0
        } else if x <= self.left || x >= self.right {
            0.0
        } else if x < self.peak {
            (x - self.left) / (self.peak - self.left)
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }

    /// Interval of values with membership at least `alpha`.
    pub fn alpha_cut(&self, alpha: f64) -> Result<Interval> {
        check_alpha(alpha)?;
        if alpha == 1.0 {
            return Interval::point(self.peak);
        }
        let lo = (self.left + (self.peak - self.left) * alpha).min(self.peak);
        let hi = (self.right - (self.right - self.peak) * alpha).max(self.peak);
        Interval::new(lo, hi)
    }
}

impl TryFrom<[f64; 3]> for TriangularFuzzyNumber {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<TriangularFuzzyNumber> for [f64; 3] {
    fn from(t: TriangularFuzzyNumber) -> Self {
        [t.left, t.peak, t.right]
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )))
    }
}

/// Modified interval arithmetic applied to the α-cuts of two fuzzy numbers.
pub fn level_arith(
    op: ArithOp,
    a: &TriangularFuzzyNumber,
    b: &TriangularFuzzyNumber,
    alpha: f64,
) -> Result<Interval> {
    mod_arith(op, &a.alpha_cut(alpha)?, &b.alpha_cut(alpha)?)
}

/// `count` uniformly spaced levels from 0 to 1 inclusive.
pub fn uniform_levels(count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::MalformedLevels(format!(
            "need at least 2 levels, got {count}"
        )));
    }
    let last = (count - 1) as f64;
    Ok((0..count).map(|i| i as f64 / last).collect())
}

pub fn validate_levels(levels: &[f64]) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::MalformedLevels(
            "need at least the levels 0 and 1".into(),
        ));
    }
    if levels[0] != 0.0 || levels[levels.len() - 1] != 1.0 {
        return Err(Error::MalformedLevels(
            "levels must start at 0 and end at 1".into(),
        ));
    }
    if levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::MalformedLevels(
            "levels must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Fuzzy quantity represented by its cuts at a finite set of α levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzyResult {
    levels: Vec<f64>,
    cuts: Vec<Interval>,
}

impl FuzzyResult {
    /// Validates the level grid and the nesting of the cuts.
    ///
    /// Cuts that fail to nest by at most [`NESTING_SLACK`] are clipped into
    /// their predecessor; larger violations are rejected.
    pub fn from_samples(levels: Vec<f64>, cuts: Vec<Interval>) -> Result<Self> {
        if levels.len() != cuts.len() {
            return Err(Error::MalformedLevels(format!(
                "{} levels but {} cuts",
                levels.len(),
                cuts.len()
            )));
        }
        validate_levels(&levels)?;
        let mut nested = Vec::with_capacity(cuts.len());
        nested.push(cuts[0]);
        for (i, cut) in cuts.iter().enumerate().skip(1) {
            let outer: Interval = nested[i - 1];
            if !cut.is_subset_within(&outer, NESTING_SLACK) {
                return Err(Error::NestingViolation {
                    outer: levels[i - 1],
                    inner: levels[i],
                });
            }
            let lo = cut.lo().max(outer.lo());
            let hi = cut.hi().min(outer.hi());
            let clipped = if lo <= hi {
                Interval::new(lo, hi)?
            } else {
                Interval::point(cut.midpoint().clamp(outer.lo(), outer.hi()))?
            };
            nested.push(clipped);
        }
        Ok(Self {
            levels,
            cuts: nested,
        })
    }

    /// Samples a triangular fuzzy number at the given levels.
    pub fn from_tfn(t: &TriangularFuzzyNumber, levels: &[f64]) -> Result<Self> {
        let cuts = levels
            .iter()
            .map(|&a| t.alpha_cut(a))
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(levels.to_vec(), cuts)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn cuts(&self) -> &[Interval] {
        &self.cuts
    }

    /// Cut at α = 0, the support.
    pub fn support(&self) -> Interval {
        self.cuts[0]
    }

    /// Cut at α = 1, the core.
    pub fn core(&self) -> Interval {
        self.cuts[self.cuts.len() - 1]
    }

    /// Closed membership polyline: left branch upward, then right branch
    /// downward, as `(value, membership)` pairs.
    pub fn to_polyline(&self) -> Vec<(f64, f64)> {
        let left = self
            .levels
            .iter()
            .zip(&self.cuts)
            .map(|(&a, c)| (c.lo(), a));
        let right = self
            .levels
            .iter()
            .zip(&self.cuts)
            .rev()
            .map(|(&a, c)| (c.hi(), a));
        left.chain(right).collect()
    }
}

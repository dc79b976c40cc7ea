//! Map definitions and the orbit engine.
//!
//! Every map in scope is a piecewise-affine function on a closed interval.
//! The closed-form evaluators below follow the branch inequalities
//! literally; [`PiecewiseAffineMap`] is the breakpoint-list form used by the
//! orbit engine, and evaluates bit-identically to the closed forms for the
//! ideal maps.

mod orbit;
mod piecewise;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use orbit::{iterate_orbit, EscapePolicy, Orbit, OrbitConfig, OrbitResult, DEFAULT_DITHER};
pub use piecewise::{build_piecewise, eval_piecewise, PiecewiseAffineMap, Segment};

/// Slopes with `|m|` at or above this bound need the escape-study flag.
pub const CONFINED_SLOPE_BOUND: f64 = 3.0;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };
    pub const SYMMETRIC: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Closed membership; NaN is never contained.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && self.hi >= other.hi
    }

    /// Largest absolute value in the interval.
    pub fn bound(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mirrors `x` back across whichever boundary it violates.
    pub fn reflect(&self, x: f64) -> f64 {
        if x > self.hi {
            2.0 * self.hi - x
        } else if x < self.lo {
            2.0 * self.lo - x
        } else {
            x
        }
    }

    pub(crate) fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Implementation errors applied on top of an ideal map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonidealParams {
    /// Relative gain error: every segment slope becomes `slope * (1 + slope_error)`.
    pub slope_error: f64,
    /// Additive output error.
    pub offset: f64,
    /// Output clamp, if any.
    pub saturation: Option<Interval>,
}

impl Default for NonidealParams {
    fn default() -> Self {
        NonidealParams {
            slope_error: 0.0,
            offset: 0.0,
            saturation: None,
        }
    }
}

impl NonidealParams {
    pub fn slope_error(slope_error: f64) -> Self {
        NonidealParams {
            slope_error,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.slope_error.is_finite() || self.slope_error <= -1.0 {
            return Err(Error::invalid(format!(
                "slope error must be finite and > -1, got {}",
                self.slope_error
            )));
        }
        if !self.offset.is_finite() {
            return Err(Error::invalid("offset must be finite"));
        }
        if let Some(sat) = self.saturation {
            if !(sat.lo.is_finite() && sat.hi.is_finite() && sat.lo < sat.hi) {
                return Err(Error::invalid(format!(
                    "saturation interval [{}, {}] is empty or not finite",
                    sat.lo, sat.hi
                )));
            }
        }
        Ok(())
    }

    /// True when the saturation clamp cuts into `domain`, i.e. it clips
    /// values the ideal map could legitimately produce.
    pub fn is_clipping(&self, domain: &Interval) -> bool {
        self.saturation
            .is_some_and(|sat| !sat.contains_interval(domain))
    }
}

/// The maps in scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    Tent,
    Bernoulli,
    /// Identical to `Generalized { m: -2.0 }`.
    ModifiedTent,
    Generalized {
        m: f64,
    },
    Perturbed {
        base: Box<MapKind>,
        nonideal: NonidealParams,
    },
}

impl MapKind {
    pub fn perturbed(base: MapKind, nonideal: NonidealParams) -> Self {
        MapKind::Perturbed {
            base: Box::new(base),
            nonideal,
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            MapKind::Tent | MapKind::Bernoulli => Interval::UNIT,
            MapKind::ModifiedTent | MapKind::Generalized { .. } => Interval::SYMMETRIC,
            MapKind::Perturbed { base, .. } => base.domain(),
        }
    }

    /// Slope parameter of the symmetric family, if this kind belongs to it.
    pub fn slope(&self) -> Option<f64> {
        match self {
            MapKind::ModifiedTent => Some(-2.0),
            MapKind::Generalized { m } => Some(*m),
            _ => None,
        }
    }

    /// Checks parameters. Slopes with `|m| >= 3` are rejected unless
    /// `escape_study` is set.
    pub fn validate(&self, escape_study: bool) -> Result<()> {
        match self {
            MapKind::Tent | MapKind::Bernoulli | MapKind::ModifiedTent => Ok(()),
            MapKind::Generalized { m } => {
                check_slope(*m)?;
                if !escape_study && m.abs() >= CONFINED_SLOPE_BOUND {
                    return Err(Error::invalid(format!(
                        "slope m = {m} outside (-3, 3); enable escape study to use it"
                    )));
                }
                Ok(())
            }
            MapKind::Perturbed { base, nonideal } => {
                nonideal.validate()?;
                base.validate(escape_study)
            }
        }
    }

    /// Closed-form evaluation. Perturbed kinds go through the breakpoint
    /// representation.
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            MapKind::Tent => eval_tent(x),
            MapKind::Bernoulli => eval_bernoulli(x),
            MapKind::ModifiedTent => eval_modified_tent(x),
            MapKind::Generalized { m } => eval_generalized(*m, x),
            MapKind::Perturbed { .. } => build_piecewise(self)?.eval(x, false),
        }
    }

    /// Short label, e.g. `tent`, `modtent`, `gen:-2.5`.
    pub fn label(&self) -> String {
        match self {
            MapKind::Tent => "tent".into(),
            MapKind::Bernoulli => "bernoulli".into(),
            MapKind::ModifiedTent => "modtent".into(),
            MapKind::Generalized { m } => format!("gen:{m}"),
            MapKind::Perturbed { base, nonideal } => format!(
                "{}[slope_error={},offset={}]",
                base.label(),
                nonideal.slope_error,
                nonideal.offset
            ),
        }
    }
}

fn check_slope(m: f64) -> Result<()> {
    if m == 0.0 || !m.is_finite() {
        return Err(Error::invalid(format!(
            "slope m must be finite and nonzero, got {m}"
        )));
    }
    Ok(())
}

// `y + 0.0` turns -0.0 into +0.0 and leaves every other value untouched.
#[inline]
fn positive_zero(y: f64) -> f64 {
    y + 0.0
}

/// Tent map on `[0, 1]`: `2x` up to the peak at 1/2, `2(1 - x)` after.
pub fn eval_tent(x: f64) -> Result<f64> {
    Interval::UNIT.check(x)?;
    Ok(positive_zero(if x <= 0.5 {
        2.0 * x
    } else {
        2.0 * (1.0 - x)
    }))
}

/// Bernoulli (doubling) map `2x mod 1` on `[0, 1)`.
pub fn eval_bernoulli(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain {
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(positive_zero(if x < 0.5 { 2.0 * x } else { 2.0 * x - 1.0 }))
}

/// Slope-`m` family on `[-1, 1]` with breakpoints at `±1/|m|`:
///
/// ```text
/// -m (x + 2/|m|)   x <= -1/|m|
///  m x             |x| < 1/|m|
/// -m (x - 2/|m|)   x >= 1/|m|
/// ```
pub fn eval_generalized(m: f64, x: f64) -> Result<f64> {
    check_slope(m)?;
    Interval::SYMMETRIC.check(x)?;
    let b = 1.0 / m.abs();
    let c = 2.0 / m.abs();
    let y = if x <= -b {
        -m * (x + c)
    } else if x < b {
        m * x
    } else {
        -m * (x - c)
    };
    Ok(positive_zero(y))
}

pub fn eval_modified_tent(x: f64) -> Result<f64> {
    eval_generalized(-2.0, x)
}

/// `|M'(x)|` of the affine segment containing `x`. Interior breakpoints
/// belong to the segment on their right, matching evaluation. Saturation
/// clamps are not reflected in the result.
pub fn derivative_magnitude(kind: &MapKind, x: f64) -> Result<f64> {
    let map = build_piecewise(kind)?;
    map.domain().check(x)?;
    Ok(map.slope_magnitude_at(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 4.0 * f64::EPSILON
    }

    #[test]
    fn tent_examples() {
        assert_eq!(eval_tent(0.3).unwrap(), 0.6);
        assert_eq!(eval_tent(0.5).unwrap(), 1.0);
        assert!(close(eval_tent(2.0 / 3.0).unwrap(), 2.0 / 3.0));
        assert_eq!(eval_tent(0.0).unwrap(), 0.0);
        assert_eq!(eval_tent(1.0).unwrap(), 0.0);
    }

    #[test]
    fn tent_rejects_out_of_domain() {
        assert_eq!(
            eval_tent(1.5),
            Err(Error::Domain {
                value: 1.5,
                lo: 0.0,
                hi: 1.0
            })
        );
        assert!(eval_tent(-1e-300).is_err());
        assert!(eval_tent(f64::NAN).is_err());
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(eval_bernoulli(0.3).unwrap(), 0.6);
        assert_eq!(eval_bernoulli(0.75).unwrap(), 0.5);
        assert_eq!(eval_bernoulli(0.0).unwrap(), 0.0);
        assert_eq!(eval_bernoulli(0.5).unwrap(), 0.0);
        assert!(eval_bernoulli(1.0).is_err());
    }

    #[test]
    fn generalized_examples() {
        assert_eq!(eval_generalized(-2.0, 0.3).unwrap(), -0.6);
        assert!(close(eval_generalized(-2.0, -0.6).unwrap(), 0.8));
        assert_eq!(eval_generalized(-2.0, 0.75).unwrap(), -0.5);
        assert!(close(eval_generalized(2.5, 1.0).unwrap(), -0.5));
        for m in [-2.9, -1.0, -0.3, 0.7, 1.5, 2.0, 2.99] {
            assert_eq!(eval_generalized(m, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn generalized_rejects_zero_slope_and_bad_domain() {
        assert!(matches!(
            eval_generalized(0.0, 0.1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            eval_generalized(f64::NAN, 0.1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            eval_generalized(2.0, 1.01),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn modified_tent_examples() {
        assert_eq!(eval_modified_tent(0.3).unwrap(), -0.6);
        assert_eq!(eval_modified_tent(-0.5).unwrap(), 1.0);
        assert_eq!(eval_modified_tent(0.5).unwrap(), -1.0);
        assert_eq!(eval_modified_tent(1.0).unwrap(), 0.0);
        assert_eq!(eval_modified_tent(-1.0).unwrap(), 0.0);
        assert!(eval_modified_tent(0.0).unwrap().is_sign_positive());
    }

    #[test]
    fn modified_tent_matches_generalized_minus_two() {
        assert_eq!(MapKind::ModifiedTent.slope(), Some(-2.0));
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            assert_eq!(
                MapKind::ModifiedTent.eval(x).unwrap().to_bits(),
                MapKind::Generalized { m: -2.0 }.eval(x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(derivative_magnitude(&MapKind::Tent, 0.3).unwrap(), 2.0);
        assert_eq!(
            derivative_magnitude(&MapKind::Generalized { m: -2.5 }, 0.1).unwrap(),
            2.5
        );
        assert_eq!(
            derivative_magnitude(&MapKind::Generalized { m: 0.5 }, 0.9).unwrap(),
            0.5
        );
        let p = MapKind::perturbed(MapKind::Tent, NonidealParams::slope_error(0.05));
        assert!(close(derivative_magnitude(&p, 0.7).unwrap(), 2.1));
        assert!(derivative_magnitude(&MapKind::Tent, 1.2).is_err());
    }

    #[test]
    fn validation_gates_slope_range() {
        assert!(MapKind::Generalized { m: 2.99 }.validate(false).is_ok());
        assert!(MapKind::Generalized { m: -3.0 }.validate(false).is_err());
        assert!(MapKind::Generalized { m: 3.2 }.validate(true).is_ok());
        assert!(MapKind::Generalized { m: 0.0 }.validate(true).is_err());
        let bad = MapKind::perturbed(MapKind::Tent, NonidealParams::slope_error(-1.0));
        assert!(bad.validate(true).is_err());
    }

    #[test]
    fn saturation_clipping_flag() {
        let mut p = NonidealParams::default();
        assert!(!p.is_clipping(&Interval::UNIT));
        p.saturation = Some(Interval::new(-0.1, 1.1));
        assert!(!p.is_clipping(&Interval::UNIT));
        p.saturation = Some(Interval::new(0.0, 0.9));
        assert!(p.is_clipping(&Interval::UNIT));
        p.saturation = Some(Interval::new(1.0, 0.0));
        assert!(p.validate().is_err());
    }

    #[test]
    fn reflection() {
        let d = Interval::SYMMETRIC;
        assert_eq!(d.reflect(1.25), 0.75);
        assert_eq!(d.reflect(-1.25), -0.75);
        assert_eq!(d.reflect(0.3), 0.3);
    }

    proptest! {
        #[test]
        fn conjugacy_is_exact(x in -1.0f64..=1.0) {
            let lhs = eval_modified_tent(x).unwrap().abs();
            let rhs = eval_tent(x.abs()).unwrap();
            prop_assert_eq!(lhs.to_bits(), rhs.to_bits());
        }

        #[test]
        fn sign_alternates(x in -1.0f64..=1.0) {
            prop_assume!(x != 0.0 && x != 1.0 && x != -1.0);
            let y = eval_modified_tent(x).unwrap();
            prop_assert!(y * x < 0.0, "x = {x}, M(x) = {y}");
        }

        #[test]
        fn confined_for_slopes_up_to_three(m in -3.0f64..=3.0, x in -1.0f64..=1.0) {
            prop_assume!(m != 0.0);
            prop_assert!(eval_generalized(m, x).unwrap().abs() <= 1.0);
        }

        #[test]
        fn endpoint_witness_escapes_above_three(m in 3.0f64..50.0, neg in any::<bool>()) {
            prop_assume!(m > 3.0);
            let m = if neg { -m } else { m };
            prop_assert!(eval_generalized(m, 1.0).unwrap().abs() > 1.0);
            prop_assert!(eval_generalized(m, -1.0).unwrap().abs() > 1.0);
        }

        #[test]
        fn generalized_continuous_at_breakpoints(m in -3.0f64..3.0) {
            prop_assume!(m.abs() > 1.0);
            let b = 1.0 / m.abs();
            let c = 2.0 / m.abs();
            prop_assert_eq!(m * b, -m * (b - c));
            prop_assert_eq!(m * -b, -m * (-b + c));
        }
    }
}

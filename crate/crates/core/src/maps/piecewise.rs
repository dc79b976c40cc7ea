use serde::{Deserialize, Serialize};

use super::{check_slope, positive_zero, Interval, MapKind};
use crate::error::{Error, Result};

/// One affine piece, stored as `value_at_pivot + slope * (x - pivot)`.
///
/// Ideal maps pivot each segment on its root, which reproduces the
/// closed-form arithmetic operation for operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub slope: f64,
    pub pivot: f64,
    pub value_at_pivot: f64,
}

impl Segment {
    const fn through_root(slope: f64, root: f64) -> Self {
        Segment {
            slope,
            pivot: root,
            value_at_pivot: 0.0,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.value_at_pivot + self.slope * (x - self.pivot)
    }

    /// Value of the affine extension at `x = 0`.
    pub fn intercept(&self) -> f64 {
        self.value_at_pivot - self.slope * self.pivot
    }
}

/// Breakpoint-list form of a piecewise-affine map.
///
/// Segment `i` covers `[breakpoints[i], breakpoints[i + 1])`; the last
/// segment is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffineMap {
    breakpoints: Vec<f64>,
    segments: Vec<Segment>,
    saturation: Option<Interval>,
    continuous: bool,
}

impl PiecewiseAffineMap {
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Segment>) -> Result<Self> {
        if breakpoints.len() < 2 || segments.len() != breakpoints.len() - 1 {
            return Err(Error::invalid(format!(
                "{} breakpoints need {} segments, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                segments.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::invalid(
                "breakpoints must be finite and strictly increasing",
            ));
        }
        let continuous = breakpoints[1..breakpoints.len() - 1]
            .iter()
            .enumerate()
            .all(|(i, &b)| segments[i].eval(b) == segments[i + 1].eval(b));
        Ok(PiecewiseAffineMap {
            breakpoints,
            segments,
            saturation: None,
            continuous,
        })
    }

    fn with_saturation(mut self, saturation: Option<Interval>) -> Self {
        self.saturation = saturation;
        self
    }

    pub fn domain(&self) -> Interval {
        Interval::new(
            self.breakpoints[0],
            self.breakpoints[self.breakpoints.len() - 1],
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn saturation(&self) -> Option<Interval> {
        self.saturation
    }

    /// Adjacent segments agree exactly at every interior breakpoint.
    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    /// Map value at each breakpoint, using the owning segment.
    pub fn breakpoint_values(&self) -> Vec<f64> {
        self.breakpoints
            .iter()
            .map(|&b| self.eval_extended(b))
            .collect()
    }

    #[inline]
    fn segment_index(&self, x: f64) -> usize {
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        interior.partition_point(|&b| b <= x)
    }

    /// Evaluates at `x`. Outside the domain the outer segments are extended
    /// affinely when `extrapolate` is set, otherwise a domain error results.
    pub fn eval(&self, x: f64, extrapolate: bool) -> Result<f64> {
        if x.is_nan() || (!extrapolate && !self.domain().contains(x)) {
            let d = self.domain();
            return Err(Error::Domain {
                value: x,
                lo: d.lo,
                hi: d.hi,
            });
        }
        Ok(self.eval_extended(x))
    }

    /// Unchecked evaluation with affine extension of the outer segments.
    #[inline]
    pub fn eval_extended(&self, x: f64) -> f64 {
        let y = self.segments[self.segment_index(x)].eval(x);
        let y = match self.saturation {
            Some(sat) => y.clamp(sat.lo, sat.hi),
            None => y,
        };
        positive_zero(y)
    }

    /// `|slope|` of the segment that owns `x`.
    pub fn slope_magnitude_at(&self, x: f64) -> f64 {
        self.segments[self.segment_index(x)].slope.abs()
    }
}

/// Builds the breakpoint representation of `kind`.
///
/// Perturbed kinds rescale each base segment's slope by `1 + slope_error`
/// about the segment's value at its left breakpoint, then add the offset;
/// breakpoints do not move.
pub fn build_piecewise(kind: &MapKind) -> Result<PiecewiseAffineMap> {
    match kind {
        MapKind::Tent => PiecewiseAffineMap::new(
            vec![0.0, 0.5, 1.0],
            vec![
                Segment::through_root(2.0, 0.0),
                Segment::through_root(-2.0, 1.0),
            ],
        ),
        MapKind::Bernoulli => PiecewiseAffineMap::new(
            vec![0.0, 0.5, 1.0],
            vec![
                Segment::through_root(2.0, 0.0),
                Segment::through_root(2.0, 0.5),
            ],
        ),
        MapKind::ModifiedTent => generalized(-2.0),
        MapKind::Generalized { m } => generalized(*m),
        MapKind::Perturbed { base, nonideal } => {
            nonideal.validate()?;
            let ideal = build_piecewise(base)?;
            let segments = ideal
                .segments
                .iter()
                .zip(&ideal.breakpoints)
                .map(|(seg, &left)| Segment {
                    slope: seg.slope * (1.0 + nonideal.slope_error),
                    pivot: left,
                    value_at_pivot: seg.eval(left) + nonideal.offset,
                })
                .collect();
            Ok(PiecewiseAffineMap::new(ideal.breakpoints, segments)?
                .with_saturation(nonideal.saturation))
        }
    }
}

fn generalized(m: f64) -> Result<PiecewiseAffineMap> {
    check_slope(m)?;
    let b = 1.0 / m.abs();
    let c = 2.0 / m.abs();
    if b < 1.0 {
        PiecewiseAffineMap::new(
            vec![-1.0, -b, b, 1.0],
            vec![
                Segment::through_root(-m, -c),
                Segment::through_root(m, 0.0),
                Segment::through_root(-m, c),
            ],
        )
    } else {
        // |m| <= 1: the middle branch covers the whole domain.
        PiecewiseAffineMap::new(vec![-1.0, 1.0], vec![Segment::through_root(m, 0.0)])
    }
}

/// Evaluates `map` at `x`; see [`PiecewiseAffineMap::eval`].
pub fn eval_piecewise(map: &PiecewiseAffineMap, x: f64, extrapolate: bool) -> Result<f64> {
    map.eval(x, extrapolate)
}

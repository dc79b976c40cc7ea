//! Piecewise-affine chaotic maps (tent, Bernoulli, modified tent and its
//! slope-`m` generalization), chaos diagnostics over their orbits, and
//! partition-based random bit generation with a small statistical battery.
//!
//! The modified tent map lives on `[-1, 1]`:
//!
//! ```text
//! M(x) = 2x + 2    for -1 <= x <= -1/2
//!        -2x       for -1/2 < x < 1/2
//!        2x - 2    for  1/2 <= x <= 1
//! ```
//!
//! Its absolute orbit is the tent orbit and its sign alternates every step,
//! yet a slope slightly above 2 does not push the state out of the domain.

pub mod analysis;
pub mod error;
pub mod maps;
pub mod seed;
pub mod trng;

pub use error::{Error, Result};
pub use maps::{
    derivative_magnitude, eval_bernoulli, eval_generalized, eval_modified_tent, eval_tent,
    iterate_orbit, EscapePolicy, Interval, MapKind, NonidealParams, Orbit, OrbitConfig,
    OrbitResult, PiecewiseAffineMap, Segment,
};

use rand::distr::{Distribution, Uniform};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_piecewise, Interval, MapKind, PiecewiseAffineMap};
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Default dither half-width, 2^-40.
pub const DEFAULT_DITHER: f64 = 9.094_947_017_729_282e-13;

/// Dither at or above this half-width would swamp the dynamics.
pub const MAX_DITHER: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EscapePolicy {
    /// Stop at the first state outside the domain.
    #[default]
    HaltOnEscape,
    /// Keep iterating, extending the outer segments affinely.
    Extrapolate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub x0: f64,
    pub n_steps: usize,
    /// Half-width `a` of the additive `Uniform(-a, a)` noise.
    pub dither_amplitude: f64,
    pub rng_seed: u64,
    pub escape_policy: EscapePolicy,
    /// Allows `x0` on or outside the domain boundary and `|m| >= 3`.
    pub escape_study: bool,
}

impl OrbitConfig {
    pub fn new(x0: f64, n_steps: usize) -> Self {
        OrbitConfig {
            x0,
            n_steps,
            dither_amplitude: DEFAULT_DITHER,
            rng_seed: 0,
            escape_policy: EscapePolicy::HaltOnEscape,
            escape_study: false,
        }
    }

    pub fn dither(mut self, amplitude: f64) -> Self {
        self.dither_amplitude = amplitude;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn policy(mut self, policy: EscapePolicy) -> Self {
        self.escape_policy = policy;
        self
    }

    pub fn escape_study(mut self, enabled: bool) -> Self {
        self.escape_study = enabled;
        self
    }

    pub fn validate(&self, domain: Interval) -> Result<()> {
        let a = self.dither_amplitude;
        if !(a.is_finite() && (0.0..MAX_DITHER).contains(&a)) {
            return Err(Error::invalid(format!(
                "dither amplitude must lie in [0, {MAX_DITHER}), got {a}"
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::invalid(format!(
                "x0 must be finite, got {}",
                self.x0
            )));
        }
        if !self.escape_study && !domain.contains_interior(self.x0) {
            return Err(Error::Domain {
                value: self.x0,
                lo: domain.lo,
                hi: domain.hi,
            });
        }
        Ok(())
    }
}

/// A finished orbit `x_1 .. x_n` (the initial state is not included).
///
/// Step indices are 1-based: step `k` is `states[k - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub states: Vec<f64>,
    /// First step whose undithered map value left the domain. Under
    /// halt-on-escape it is also the last step.
    pub escaped_at: Option<usize>,
    /// First step at which the state is exactly zero under zero dither.
    pub absorbed_at_zero: Option<usize>,
}

impl OrbitResult {
    pub fn state_at(&self, step: usize) -> Option<f64> {
        step.checked_sub(1)
            .and_then(|i| self.states.get(i).copied())
    }
}

/// Streaming orbit iterator yielding `x_1, x_2, ...`.
///
/// Each step computes `y = M(x)`. If `y` is outside the domain the step is
/// an escape: `y` is yielded as is and, under halt-on-escape, iteration
/// ends. Otherwise dither is added and a dithered value outside the domain
/// is reflected across the violated boundary.
pub struct Orbit {
    map: PiecewiseAffineMap,
    domain: Interval,
    state: f64,
    step: usize,
    n_steps: usize,
    policy: EscapePolicy,
    dither: Option<(Uniform<f64>, ChaCha8Rng)>,
    escaped_at: Option<usize>,
    absorbed_at_zero: Option<usize>,
    halted: bool,
}

impl Orbit {
    pub fn new(kind: &MapKind, cfg: &OrbitConfig) -> Result<Self> {
        kind.validate(cfg.escape_study)?;
        let domain = kind.domain();
        cfg.validate(domain)?;
        let map = build_piecewise(kind)?;
        let a = cfg.dither_amplitude;
        let dither = if a > 0.0 {
            let noise = Uniform::new(-a, a).map_err(|e| Error::invalid(e.to_string()))?;
            Some((noise, rng_from_seed(cfg.rng_seed)))
        } else {
            None
        };
        Ok(Orbit {
            map,
            domain,
            state: cfg.x0,
            step: 0,
            n_steps: cfg.n_steps,
            policy: cfg.escape_policy,
            dither,
            escaped_at: None,
            absorbed_at_zero: None,
            halted: false,
        })
    }

    pub fn piecewise(&self) -> &PiecewiseAffineMap {
        &self.map
    }

    /// Steps taken so far.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn escaped_at(&self) -> Option<usize> {
        self.escaped_at
    }

    pub fn absorbed_at_zero(&self) -> Option<usize> {
        self.absorbed_at_zero
    }

    fn noise(&mut self) -> f64 {
        match &mut self.dither {
            Some((dist, rng)) => dist.sample(rng),
            None => 0.0,
        }
    }

    /// Runs the orbit to completion, collecting every state.
    pub fn collect_result(mut self) -> OrbitResult {
        let states: Vec<f64> = self.by_ref().collect();
        OrbitResult {
            states,
            escaped_at: self.escaped_at,
            absorbed_at_zero: self.absorbed_at_zero,
        }
    }
}

impl Iterator for Orbit {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.halted || self.step >= self.n_steps {
            return None;
        }
        self.step += 1;
        let raw = self.map.eval_extended(self.state);

        let next = if self.escaped_at.is_some() {
            raw + self.noise()
        } else if !self.domain.contains(raw) {
            self.escaped_at = Some(self.step);
            if self.policy == EscapePolicy::HaltOnEscape {
                self.halted = true;
            }
            raw
        } else {
            let noise = self.noise();
            self.domain.reflect(raw + noise)
        };
        let next = next + 0.0;

        if next == 0.0 && self.dither.is_none() && self.absorbed_at_zero.is_none() {
            self.absorbed_at_zero = Some(self.step);
        }
        self.state = next;
        Some(next)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = if self.halted {
            0
        } else {
            self.n_steps - self.step
        };
        (0, Some(left))
    }
}

/// Iterates `kind` under `cfg`. Escape and zero-absorption are reported in
/// the result; only invalid configurations are errors.
pub fn iterate_orbit(kind: &MapKind, cfg: &OrbitConfig) -> Result<OrbitResult> {
    Ok(Orbit::new(kind, cfg)?.collect_result())
}

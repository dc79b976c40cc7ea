use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{MapKind, Orbit, OrbitConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Nats per iteration.
    pub lambda: f64,
    pub n_samples: usize,
    pub standard_error: f64,
}

/// Time average of `ln |M'(x_k)|` over the post-transient states of one
/// orbit.
///
/// An escape during the transient is an error. An escape afterwards ends
/// the average at the last in-domain state.
pub fn estimate_lyapunov(
    kind: &MapKind,
    cfg: &OrbitConfig,
    n_transient: usize,
) -> Result<LyapunovEstimate> {
    if cfg.n_steps <= n_transient {
        return Err(Error::invalid(format!(
            "n_steps ({}) must exceed n_transient ({n_transient})",
            cfg.n_steps
        )));
    }
    let mut orbit = Orbit::new(kind, cfg)?;
    let domain = kind.domain();

    // Welford accumulation.
    let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
    while let Some(x) = orbit.next() {
        if orbit.step() <= n_transient || !domain.contains(x) {
            continue;
        }
        let v = orbit.piecewise().slope_magnitude_at(x).ln();
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    if let Some(step) = orbit.escaped_at() {
        if step <= n_transient || n == 0 {
            return Err(Error::Escaped { step });
        }
    }
    let standard_error = if n > 1 {
        (m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Ok(LyapunovEstimate {
        lambda: mean,
        n_samples: n,
        standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::NonidealParams;
    use std::f64::consts::LN_2;

    #[test]
    fn tent_is_ln_two() {
        let cfg = OrbitConfig::new(0.3141, 1_000_000).seed(1);
        let est = estimate_lyapunov(&MapKind::Tent, &cfg, 1000).unwrap();
        assert!((est.lambda - LN_2).abs() < 1e-3);
        assert_eq!(est.n_samples, 999_000);
    }

    #[test]
    fn generalized_collapses_to_log_slope() {
        for m in [-2.5f64, -2.05, -1.5, 1.5, 2.05, 2.9] {
            let cfg = OrbitConfig::new(1e-3, 50_000).seed(11);
            let est = estimate_lyapunov(&MapKind::Generalized { m }, &cfg, 1000).unwrap();
            let tol = 3.0 * est.standard_error + 1e-12;
            assert!((est.lambda - m.abs().ln()).abs() <= tol, "m = {m}: {est:?}");
        }
    }

    #[test]
    fn contracting_slope_is_negative() {
        let cfg = OrbitConfig::new(0.5, 5000).seed(4);
        let est = estimate_lyapunov(&MapKind::Generalized { m: 0.8 }, &cfg, 100).unwrap();
        assert!((est.lambda - 0.8f64.ln()).abs() < 1e-12);
        assert!(est.lambda < 0.0);
        assert!((est.lambda + 0.2231).abs() < 1e-4);
    }

    #[test]
    fn early_escape_is_an_error() {
        let kind = MapKind::perturbed(MapKind::Tent, NonidealParams::slope_error(0.05));
        let cfg = OrbitConfig::new(0.49, 1000).dither(0.0);
        assert_eq!(
            estimate_lyapunov(&kind, &cfg, 10),
            Err(Error::Escaped { step: 1 })
        );
    }

    #[test]
    fn transient_must_be_shorter_than_run() {
        let cfg = OrbitConfig::new(0.3, 100);
        assert!(estimate_lyapunov(&MapKind::Tent, &cfg, 100).is_err());
    }
}

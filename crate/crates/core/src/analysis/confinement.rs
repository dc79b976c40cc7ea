use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{MapKind, Orbit, OrbitConfig, DEFAULT_DITHER};
use crate::seed::{derive_seed, uniform_interior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfinementConfig {
    pub trials: usize,
    pub steps_per_trial: usize,
    pub dither: f64,
    pub seed: u64,
}

impl Default for ConfinementConfig {
    fn default() -> Self {
        ConfinementConfig {
            trials: 100,
            steps_per_trial: 10_000,
            dither: DEFAULT_DITHER,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfinementReport {
    pub kind: MapKind,
    pub trials: usize,
    pub escapes: usize,
    /// Escape step of each trial, `None` for confined trials.
    pub escape_steps: Vec<Option<usize>>,
    /// Largest `|x|` seen in any trial, escaped states included.
    pub max_excursion: f64,
}

impl ConfinementReport {
    pub fn escape_rate(&self) -> f64 {
        self.escapes as f64 / self.trials as f64
    }

    /// Median over escaped trials (lower median for even counts).
    pub fn median_escape_step(&self) -> Option<usize> {
        let mut steps: Vec<usize> = self.escape_steps.iter().flatten().copied().collect();
        if steps.is_empty() {
            return None;
        }
        steps.sort_unstable();
        Some(steps[(steps.len() - 1) / 2])
    }
}

struct Trial {
    escaped_at: Option<usize>,
    max_abs: f64,
}

fn run_trial(kind: &MapKind, cfg: &ConfinementConfig, index: usize) -> Result<Trial> {
    let trial_seed = derive_seed(cfg.seed, index as u64);
    let x0 = uniform_interior(kind.domain(), derive_seed(trial_seed, 0));
    let orbit_cfg = OrbitConfig::new(x0, cfg.steps_per_trial)
        .dither(cfg.dither)
        .seed(derive_seed(trial_seed, 1))
        .escape_study(true);
    let mut orbit = Orbit::new(kind, &orbit_cfg)?;
    let max_abs = orbit.by_ref().fold(x0.abs(), |acc, x| acc.max(x.abs()));
    Ok(Trial {
        escaped_at: orbit.escaped_at(),
        max_abs,
    })
}

/// Runs `trials` independent orbits from random interior seeds and counts
/// those whose undithered map value leaves the domain.
///
/// Trial `t` draws its initial state and its dither from generators seeded
/// by `derive_seed(derive_seed(seed, t), 0)` and `.., 1)` respectively.
pub fn confinement_probe(kind: &MapKind, cfg: &ConfinementConfig) -> Result<ConfinementReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    kind.validate(true)?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(kind, cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let escape_steps: Vec<Option<usize>> = trials.iter().map(|t| t.escaped_at).collect();
    Ok(ConfinementReport {
        kind: kind.clone(),
        trials: cfg.trials,
        escapes: escape_steps.iter().filter(|s| s.is_some()).count(),
        escape_steps,
        max_excursion: trials.iter().map(|t| t.max_abs).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::NonidealParams;

    fn cfg(trials: usize, steps: usize) -> ConfinementConfig {
        ConfinementConfig {
            trials,
            steps_per_trial: steps,
            ..Default::default()
        }
    }

    #[test]
    fn slope_error_tent_always_escapes() {
        let kind = MapKind::perturbed(MapKind::Tent, NonidealParams::slope_error(0.05));
        let r = confinement_probe(&kind, &cfg(100, 10_000)).unwrap();
        assert_eq!(r.escapes, 100);
        assert!(r.max_excursion > 1.0);
        assert!(r.median_escape_step().unwrap() < 1000);
    }

    #[test]
    fn ideal_tent_never_escapes() {
        let r = confinement_probe(&MapKind::Tent, &cfg(20, 20_000)).unwrap();
        assert_eq!(r.escapes, 0);
        assert_eq!(r.median_escape_step(), None);
        assert!(r.max_excursion <= 1.0);
    }

    #[test]
    fn steep_slopes_escape() {
        let r = confinement_probe(&MapKind::Generalized { m: 3.2 }, &cfg(100, 10_000)).unwrap();
        assert_eq!(r.escapes, 100);
        assert_eq!(r.escape_rate(), 1.0);
    }

    #[test]
    fn slightly_steep_symmetric_map_is_confined() {
        for m in [-2.05, 2.05] {
            let r = confinement_probe(&MapKind::Generalized { m }, &cfg(10, 100_000)).unwrap();
            assert_eq!(r.escapes, 0, "m = {m}");
            assert!(r.max_excursion <= 1.0);
        }
    }

    #[test]
    fn escape_steps_line_up_with_count() {
        let kind = MapKind::perturbed(MapKind::Tent, NonidealParams::slope_error(1e-4));
        let r = confinement_probe(&kind, &cfg(50, 5000)).unwrap();
        assert_eq!(r.escape_steps.len(), 50);
        assert_eq!(r.escape_steps.iter().flatten().count(), r.escapes);
        assert!(r.escapes <= r.trials);
    }

    #[test]
    fn escape_frequency_is_monotone_in_slope_error() {
        let mut last = 0;
        for delta in [0.0, 1e-5, 1e-4, 1e-3, 1e-2, 5e-2] {
            let kind = MapKind::perturbed(MapKind::Tent, NonidealParams::slope_error(delta));
            let r = confinement_probe(&kind, &cfg(100, 10_000)).unwrap();
            assert!(r.escapes >= last, "delta = {delta}: {} < {last}", r.escapes);
            last = r.escapes;
        }
        assert_eq!(last, 100);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(confinement_probe(&MapKind::Tent, &cfg(0, 10)).is_err());
    }
}

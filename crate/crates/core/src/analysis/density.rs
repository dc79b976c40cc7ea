use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{Interval, MapKind, Orbit, OrbitConfig};

/// Equal-width histogram normalized to unit integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub heights: Vec<f64>,
}

impl DensityHistogram {
    /// Bins `samples` over `range`; values outside are clamped into the end bins.
    pub fn from_samples(
        range: Interval,
        n_bins: usize,
        samples: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 bins, got {n_bins}"
            )));
        }
        let width = range.width() / n_bins as f64;
        let mut counts = vec![0u64; n_bins];
        for x in samples {
            let i = ((x - range.lo) / width).floor();
            let i = if i < 0.0 {
                0
            } else {
                (i as usize).min(n_bins - 1)
            };
            counts[i] += 1;
        }
        let edges = (0..=n_bins)
            .map(|i| range.lo + range.width() * i as f64 / n_bins as f64)
            .collect();
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientData {
                required: 1,
                actual: 0,
            });
        }
        let heights = counts
            .iter()
            .map(|&c| c as f64 / (total as f64 * width))
            .collect();
        Ok(DensityHistogram {
            edges,
            counts,
            heights,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Sum of height times width over all bins.
    pub fn integral(&self) -> f64 {
        self.heights
            .iter()
            .enumerate()
            .map(|(i, h)| h * self.bin_width(i))
            .sum()
    }

    /// Largest deviation of any normalized height from `level`.
    pub fn max_deviation_from(&self, level: f64) -> f64 {
        self.heights
            .iter()
            .map(|h| (h - level).abs())
            .fold(0.0, f64::max)
    }
}

/// Histogram of the post-transient states of one orbit, or of their
/// absolute values when `use_abs` is set (binned over `[0, bound]`).
pub fn density_histogram(
    kind: &MapKind,
    cfg: &OrbitConfig,
    n_transient: usize,
    n_bins: usize,
    use_abs: bool,
) -> Result<DensityHistogram> {
    if cfg.n_steps <= n_transient {
        return Err(Error::invalid("n_steps must exceed n_transient"));
    }
    let domain = kind.domain();
    let range = if use_abs {
        Interval::new(0.0, domain.bound())
    } else {
        domain
    };
    let mut orbit = Orbit::new(kind, cfg)?;
    let samples: Vec<f64> = orbit
        .by_ref()
        .skip(n_transient)
        .map(|x| if use_abs { x.abs() } else { x })
        .collect();
    if let Some(step) = orbit.escaped_at() {
        return Err(Error::Escaped { step });
    }
    DensityHistogram::from_samples(range, n_bins, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::NonidealParams;

    #[test]
    fn tent_density_is_flat() {
        let cfg = OrbitConfig::new(0.2718, 1_001_000).seed(5);
        let h = density_histogram(&MapKind::Tent, &cfg, 1000, 20, false).unwrap();
        assert_eq!(h.total(), 1_000_000);
        assert!(h.max_deviation_from(1.0) < 0.05, "{:?}", h.heights);
        assert!((h.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modified_tent_abs_density_is_flat() {
        let cfg = OrbitConfig::new(0.2718, 1_001_000).seed(6);
        let h = density_histogram(&MapKind::ModifiedTent, &cfg, 1000, 20, true).unwrap();
        assert_eq!(h.edges[0], 0.0);
        assert_eq!(*h.edges.last().unwrap(), 1.0);
        assert!(h.max_deviation_from(1.0) < 0.05, "{:?}", h.heights);
    }

    #[test]
    fn contracting_map_puts_all_mass_at_zero() {
        let cfg = OrbitConfig::new(0.9, 2000).seed(2);
        let h = density_histogram(&MapKind::Generalized { m: 0.5 }, &cfg, 1000, 21, false).unwrap();
        assert_eq!(h.counts[10], 1000);
        assert!((h.edges[10]..h.edges[11]).contains(&0.0));
    }

    #[test]
    fn escape_is_an_error() {
        let kind = MapKind::perturbed(MapKind::Tent, NonidealParams::slope_error(0.05));
        let cfg = OrbitConfig::new(0.3, 100_000).seed(1);
        assert!(matches!(
            density_histogram(&kind, &cfg, 10, 10, false),
            Err(Error::Escaped { .. })
        ));
    }

    #[test]
    fn parameter_checks() {
        let cfg = OrbitConfig::new(0.3, 100);
        assert!(density_histogram(&MapKind::Tent, &cfg, 10, 1, false).is_err());
        assert!(density_histogram(&MapKind::Tent, &cfg, 100, 10, false).is_err());
    }

    #[test]
    fn normalization_with_uneven_counts() {
        let samples = [0.05, 0.1, 0.1, 0.95, 1.0, 0.5, 0.51];
        let h = DensityHistogram::from_samples(Interval::UNIT, 7, samples).unwrap();
        assert_eq!(h.total(), samples.len() as u64);
        assert!((h.integral() - 1.0).abs() < 1e-12);
    }
}

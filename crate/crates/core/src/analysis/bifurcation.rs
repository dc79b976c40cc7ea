use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{MapKind, Orbit, OrbitConfig, CONFINED_SLOPE_BOUND};
use crate::seed::derive_seed;

/// Scan settings for the slope-`m` family.
///
/// The defaults start every column at `x0 = 1e-12` (a small positive state)
/// with a dither well below `(|m| - 1) * x0` for the grid spacings in use, so
/// the sign of the initial state survives the transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationConfig {
    pub m_lo: f64,
    pub m_hi: f64,
    pub n_m: usize,
    /// Bins over `[-1, 1]`. Odd counts keep 0 at the centre of a bin.
    pub x_bins: usize,
    pub n_transient: usize,
    pub n_keep: usize,
    pub x0: f64,
    pub dither: f64,
    pub seed: u64,
    pub escape_study: bool,
}

impl Default for BifurcationConfig {
    fn default() -> Self {
        BifurcationConfig {
            m_lo: -2.99,
            m_hi: 2.99,
            n_m: 600,
            x_bins: 401,
            n_transient: 1_000,
            n_keep: 10_000,
            x0: 1e-12,
            dither: 1e-15,
            seed: 0,
            escape_study: false,
        }
    }
}

impl BifurcationConfig {
    pub fn m_grid(&self) -> Vec<f64> {
        if self.n_m == 1 {
            return vec![self.m_lo];
        }
        let span = self.m_hi - self.m_lo;
        (0..self.n_m)
            .map(|i| self.m_lo + span * i as f64 / (self.n_m - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_m == 0 || self.x_bins == 0 || self.n_keep == 0 {
            return Err(Error::invalid("n_m, x_bins and n_keep must be positive"));
        }
        if !(self.m_lo.is_finite() && self.m_hi.is_finite() && self.m_lo <= self.m_hi) {
            return Err(Error::invalid(format!(
                "bad m range [{}, {}]",
                self.m_lo, self.m_hi
            )));
        }
        let widest = self.m_lo.abs().max(self.m_hi.abs());
        if !self.escape_study && widest >= CONFINED_SLOPE_BOUND {
            return Err(Error::invalid(format!(
                "m range reaches |m| = {widest}; enable escape study beyond (-3, 3)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ColumnStatus {
    Binned,
    /// The orbit left `[-1, 1]`; nothing was binned.
    Escaped {
        step: usize,
    },
    /// `m = 0` has no map; nothing was binned.
    InvalidSlope,
}

/// One `m` column of the diagram together with summary statistics of the
/// kept states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationColumn {
    pub m: f64,
    pub counts: Vec<u64>,
    pub status: ColumnStatus,
    pub min: f64,
    pub max: f64,
    /// Consecutive kept pairs with `x_k * x_{k+1} < 0`.
    pub sign_changes: usize,
    /// Last kept state.
    pub terminal: f64,
}

impl BifurcationColumn {
    pub fn is_binned(&self) -> bool {
        self.status == ColumnStatus::Binned
    }

    pub fn kept(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub config: BifurcationConfig,
    pub x_edges: Vec<f64>,
    pub columns: Vec<BifurcationColumn>,
}

impl BifurcationDiagram {
    pub fn m_grid(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.m).collect()
    }

    /// Visit count for x bin `row` (0 = lowest x) in column `col`.
    pub fn density(&self, row: usize, col: usize) -> u64 {
        self.columns[col].counts[row]
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.x_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn bin_of(&self, x: f64) -> usize {
        bin_index(x, self.columns.first().map_or(1, |c| c.counts.len()))
    }

    /// Column whose `m` is closest to `m`.
    pub fn nearest_column(&self, m: f64) -> Option<&BifurcationColumn> {
        self.columns
            .iter()
            .min_by(|a, b| (a.m - m).abs().total_cmp(&(b.m - m).abs()))
    }
}

fn bin_index(x: f64, bins: usize) -> usize {
    let i = ((x + 1.0) / 2.0 * bins as f64).floor();
    if i < 0.0 {
        0
    } else {
        (i as usize).min(bins - 1)
    }
}

fn scan_column(cfg: &BifurcationConfig, index: usize, m: f64) -> Result<BifurcationColumn> {
    let mut column = BifurcationColumn {
        m,
        counts: vec![0; cfg.x_bins],
        status: ColumnStatus::Binned,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        sign_changes: 0,
        terminal: f64::NAN,
    };
    if m == 0.0 {
        column.status = ColumnStatus::InvalidSlope;
        return Ok(column);
    }
    let orbit_cfg = OrbitConfig::new(cfg.x0, cfg.n_transient + cfg.n_keep)
        .dither(cfg.dither)
        .seed(derive_seed(cfg.seed, index as u64))
        .escape_study(cfg.escape_study);
    let mut orbit = Orbit::new(&MapKind::Generalized { m }, &orbit_cfg)?;
    let mut prev: Option<f64> = None;
    while let Some(x) = orbit.next() {
        if orbit.step() <= cfg.n_transient || orbit.escaped_at().is_some() {
            continue;
        }
        column.counts[bin_index(x, cfg.x_bins)] += 1;
        column.min = column.min.min(x);
        column.max = column.max.max(x);
        if prev.is_some_and(|p| p * x < 0.0) {
            column.sign_changes += 1;
        }
        prev = Some(x);
        column.terminal = x;
    }
    if let Some(step) = orbit.escaped_at() {
        column.counts.fill(0);
        column.status = ColumnStatus::Escaped { step };
    }
    Ok(column)
}

/// Iterates the slope-`m` map for every grid value, discards the transient
/// and bins the kept states into `x_bins` bins over `[-1, 1]`.
///
/// Columns are independent and run in parallel; each uses a generator
/// seeded from `(seed, column index)`, so the result does not depend on the
/// thread count.
pub fn bifurcation_scan(cfg: &BifurcationConfig) -> Result<BifurcationDiagram> {
    cfg.validate()?;
    let columns = cfg
        .m_grid()
        .into_par_iter()
        .enumerate()
        .map(|(i, m)| scan_column(cfg, i, m))
        .collect::<Result<Vec<_>>>()?;
    let x_edges = (0..=cfg.x_bins)
        .map(|i| -1.0 + 2.0 * i as f64 / cfg.x_bins as f64)
        .collect();
    Ok(BifurcationDiagram {
        config: *cfg,
        x_edges,
        columns,
    })
}

//! Chaos diagnostics over orbits of the maps in [`crate::maps`].

mod bifurcation;
mod confinement;
mod density;
mod lyapunov;

pub use bifurcation::{
    bifurcation_scan, BifurcationColumn, BifurcationConfig, BifurcationDiagram, ColumnStatus,
};
pub use confinement::{confinement_probe, ConfinementConfig, ConfinementReport};
pub use density::{density_histogram, DensityHistogram};
pub use lyapunov::{estimate_lyapunov, LyapunovEstimate};

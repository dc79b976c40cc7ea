use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use modtent::analysis::{BifurcationDiagram, ColumnStatus};
use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::error::CliError;

/// Record written next to every output file. Replaying it with
/// `modtent replay` regenerates the outputs byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub master_seed: u64,
    pub params: Command,
    /// Fully resolved library inputs (map kind, orbit configuration, ...).
    pub resolved: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(params: &Command, master_seed: u64, resolved: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: params.name().into(),
            master_seed,
            params: params.clone(),
            resolved,
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// `<primary>.manifest.json`
    pub fn path_for(primary: &Path) -> PathBuf {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write(&self, primary: &Path) -> Result<PathBuf, CliError> {
        let path = Self::path_for(primary);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn orbit_csv(x0: f64, states: &[f64], notes: &[String]) -> String {
    let mut out = String::with_capacity(24 * (states.len() + 2));
    out.push_str("step,x\n");
    let _ = writeln!(out, "0,{}", fmt_f64(x0));
    for (i, &x) in states.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, fmt_f64(x));
    }
    for note in notes {
        let _ = writeln!(out, "# {note}");
    }
    out
}

/// Long-form `m,x_bin_center,count` rows for every binned column, followed
/// by one comment line per flagged column.
pub fn bifurcation_csv(diagram: &BifurcationDiagram) -> String {
    let centers = diagram.bin_centers();
    let mut out = String::from("m,x_bin_center,count\n");
    for column in diagram.columns.iter().filter(|c| c.is_binned()) {
        let m = fmt_f64(column.m);
        for (center, count) in centers.iter().zip(&column.counts) {
            let _ = writeln!(out, "{m},{},{count}", fmt_f64(*center));
        }
    }
    for note in flagged_columns(diagram) {
        let _ = writeln!(out, "# {note}");
    }
    out
}

pub fn flagged_columns(diagram: &BifurcationDiagram) -> Vec<String> {
    diagram
        .columns
        .iter()
        .filter_map(|c| match c.status {
            ColumnStatus::Binned => None,
            ColumnStatus::Escaped { step } => {
                Some(format!("m={} escaped at step {step}", fmt_f64(c.m)))
            }
            ColumnStatus::InvalidSlope => Some(format!("m={} invalid slope", fmt_f64(c.m))),
        })
        .collect()
}

/// Binary greyscale PGM (`P5`, maxval 255). One pixel column per `m`, one
/// row per x bin with `x = +1` at the top. Each column is scaled by its own
/// peak so that `255 - 255 * count / peak` is darker where states are
/// denser; flagged columns are left white.
pub fn bifurcation_pgm(diagram: &BifurcationDiagram) -> Vec<u8> {
    let width = diagram.columns.len();
    let height = diagram.x_edges.len() - 1;
    let mut pixels = vec![255u8; width * height];
    for (col, column) in diagram.columns.iter().enumerate() {
        let peak = column.counts.iter().copied().max().unwrap_or(0);
        if !column.is_binned() || peak == 0 {
            continue;
        }
        for (bin, &count) in column.counts.iter().enumerate() {
            let row = height - 1 - bin;
            let shade = (255.0 * count as f64 / peak as f64).round() as u8;
            pixels[row * width + col] = 255 - shade;
        }
    }
    encode_pgm(width, height, &pixels)
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modtent::analysis::BifurcationConfig;
use modtent::maps::{EscapePolicy, Interval, MapKind, NonidealParams, DEFAULT_DITHER};
use modtent::trng::DEFAULT_ALPHA;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "modtent",
    version,
    about = "Tent-family chaotic map experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Iterate a map and write the orbit as CSV.
    Orbit(OrbitArgs),
    /// Scan the slope-m family and write a density diagram (CSV + PGM).
    Bifurcate(BifurcateArgs),
    /// Estimate the Lyapunov exponent of a map.
    Lyapunov(LyapunovArgs),
    /// Generate partition bits from an orbit.
    Bits(BitsArgs),
    /// Run the randomness test battery on a bit file or a generated stream.
    Test(TestArgs),
    /// Count escapes of a (possibly perturbed) map over random trials.
    Confine(ConfineArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Orbit(_) => "orbit",
            Command::Bifurcate(_) => "bifurcate",
            Command::Lyapunov(_) => "lyapunov",
            Command::Bits(_) => "bits",
            Command::Test(_) => "test",
            Command::Confine(_) => "confine",
            Command::Replay(_) => "replay",
        }
    }
}

/// Map selection and implementation errors.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MapArgs {
    /// tent | bernoulli | modtent | gen:<m>
    #[arg(long)]
    pub map: String,
    /// Relative slope error applied to every segment.
    #[arg(long, allow_hyphen_values = true)]
    pub slope_error: Option<f64>,
    /// Additive output error.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    /// Output clamp as `lo,hi`.
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    pub saturate: Option<Interval>,
    /// Allow |m| >= 3 and initial states on or outside the domain boundary.
    #[arg(long)]
    pub escape_study: bool,
}

impl MapArgs {
    pub fn kind(&self) -> Result<MapKind, String> {
        let base = parse_map(&self.map)?;
        if self.slope_error.is_none() && self.offset.is_none() && self.saturate.is_none() {
            return Ok(base);
        }
        Ok(MapKind::perturbed(
            base,
            NonidealParams {
                slope_error: self.slope_error.unwrap_or(0.0),
                offset: self.offset.unwrap_or(0.0),
                saturation: self.saturate,
            },
        ))
    }
}

pub fn parse_map(s: &str) -> Result<MapKind, String> {
    match s {
        "tent" => Ok(MapKind::Tent),
        "bernoulli" => Ok(MapKind::Bernoulli),
        "modtent" => Ok(MapKind::ModifiedTent),
        _ => {
            let m = s.strip_prefix("gen:").ok_or_else(|| {
                format!("unknown map {s:?}; expected tent, bernoulli, modtent or gen:<m>")
            })?;
            let m: f64 = m.parse().map_err(|_| format!("bad slope in {s:?}"))?;
            Ok(MapKind::Generalized { m })
        }
    }
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound {hi:?}"))?;
    Ok(Interval::new(lo, hi))
}

/// Orbit initial state and noise.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OrbitParams {
    /// Initial state; drawn from the seed when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Dither half-width.
    #[arg(long, default_value_t = DEFAULT_DITHER)]
    pub dither: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyArg {
    Halt,
    Extrapolate,
}

impl From<PolicyArg> for EscapePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Halt => EscapePolicy::HaltOnEscape,
            PolicyArg::Extrapolate => EscapePolicy::Extrapolate,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub orbit: OrbitParams,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Halt)]
    pub policy: PolicyArg,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BifurcateArgs {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub m_lo: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub m_hi: f64,
    /// Number of m columns.
    #[arg(long, default_value_t = 600)]
    pub columns: usize,
    /// Number of x bins over [-1, 1].
    #[arg(long, default_value_t = BifurcationConfig::default().x_bins)]
    pub bins: usize,
    #[arg(long, default_value_t = BifurcationConfig::default().n_transient)]
    pub transient: usize,
    #[arg(long, default_value_t = BifurcationConfig::default().n_keep)]
    pub keep: usize,
    #[arg(long, default_value_t = BifurcationConfig::default().x0)]
    pub x0: f64,
    #[arg(long, default_value_t = BifurcationConfig::default().dither)]
    pub dither: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Long-form CSV output path.
    #[arg(long)]
    pub out: PathBuf,
    /// PGM image path; defaults to the CSV path with a .pgm extension.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub orbit: OrbitParams,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub transient: usize,
    /// Print JSON instead of key=value text.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON result here (with a manifest alongside).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitFormat {
    /// MSB-first packed bytes, final byte zero-padded.
    Packed,
    /// One '0'/'1' character per bit, trailing newline.
    Ascii,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BitsArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub orbit: OrbitParams,
    #[arg(long)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = BitFormat::Packed)]
    pub format: BitFormat,
    /// Partition threshold on |x|.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TestArgs {
    /// Bit file to test. Mutually exclusive with --map.
    #[arg(long, conflicts_with = "map")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BitFormat::Packed)]
    pub format: BitFormat,
    /// Bit count of a packed file; defaults to 8 bits per byte.
    #[arg(long)]
    pub bits: Option<usize>,
    /// tent | bernoulli | modtent | gen:<m>
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub slope_error: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub escape_study: bool,
    #[command(flatten)]
    pub orbit: OrbitParams,
    #[arg(long, default_value_t = 1_000_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl TestArgs {
    pub fn map_args(&self) -> Option<MapArgs> {
        self.map.as_ref().map(|map| MapArgs {
            map: map.clone(),
            slope_error: self.slope_error,
            offset: self.offset,
            saturate: None,
            escape_study: self.escape_study,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConfineArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_DITHER)]
    pub dither: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

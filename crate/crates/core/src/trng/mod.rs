//! Random bit generation from orbits by partition membership, Markov
//! transition estimates, and a statistical test battery.

mod bits;
mod markov;
mod stats;

pub use bits::{extract_bits, generate_bits, BitStream, PartitionRule, Provenance};
pub use markov::{estimate_markov, MarkovEstimate};
pub use stats::{
    block_chisquare_test, monobit_test, run_suite, runs_test, serial_correlation_test, Outcome,
    TestEntry, TestReport, DEFAULT_ALPHA, SUITE_MIN_BITS,
};

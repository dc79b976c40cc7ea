//! Frequency, runs, serial-correlation and block chi-square tests.
//!
//! All p-values use large-sample approximations (normal or chi-square).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use super::BitStream;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Shortest stream accepted by [`run_suite`].
pub const SUITE_MIN_BITS: usize = 10_000;

const MIN_TEST_BITS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "reason", rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// A precondition of the test did not hold.
    Skipped(String),
    /// The test could not run.
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub outcome: Outcome,
}

impl TestEntry {
    fn judged(name: String, statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = if p_value.is_nan() {
            0.0
        } else {
            p_value.clamp(0.0, 1.0)
        };
        let outcome = if p_value >= alpha {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        TestEntry {
            name,
            statistic,
            p_value,
            outcome,
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn skipped(&self) -> bool {
        matches!(self.outcome, Outcome::Skipped(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub alpha: f64,
    pub entries: Vec<TestEntry>,
}

impl TestReport {
    /// Passes iff every entry that was not skipped passed.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed() || e.skipped())
    }

    pub fn entry(&self, name: &str) -> Option<&TestEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn require(bits: &BitStream, required: usize) -> Result<()> {
    if bits.len() < required {
        Err(Error::InsufficientData {
            required,
            actual: bits.len(),
        })
    } else {
        Ok(())
    }
}

fn two_sided_normal(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Frequency test. Statistic `|#ones - n/2| / (sqrt(n) / 2)`.
pub fn monobit_test(bits: &BitStream, alpha: f64) -> Result<TestEntry> {
    check_alpha(alpha)?;
    require(bits, MIN_TEST_BITS)?;
    let n = bits.len() as f64;
    let s = (bits.count_ones() as f64 - n / 2.0).abs() / (n.sqrt() / 2.0);
    Ok(TestEntry::judged(
        "monobit".into(),
        s,
        two_sided_normal(s),
        alpha,
    ))
}

/// Wald-Wolfowitz runs test with the mean `2 n pi0 pi1 + 1` and the exact
/// permutation variance. Skipped when the ones fraction is more than
/// `2 / sqrt(n)` from one half.
pub fn runs_test(bits: &BitStream, alpha: f64) -> Result<TestEntry> {
    check_alpha(alpha)?;
    require(bits, MIN_TEST_BITS)?;
    let n = bits.len() as f64;
    let ones = bits.count_ones() as f64;
    let pi1 = ones / n;
    if (pi1 - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(TestEntry {
            name: "runs".into(),
            statistic: f64::NAN,
            p_value: 0.0,
            outcome: Outcome::Skipped(format!(
                "ones fraction {pi1:.4} fails the frequency precondition"
            )),
        });
    }
    let runs = 1 + bits
        .iter()
        .zip(bits.iter().skip(1))
        .filter(|(a, b)| a != b)
        .count();
    let (n0, n1) = (n - ones, ones);
    let mean = 2.0 * n0 * n1 / n + 1.0;
    let var = 2.0 * n0 * n1 * (2.0 * n0 * n1 - n) / (n * n * (n - 1.0));
    let z = (runs as f64 - mean) / var.sqrt();
    Ok(TestEntry::judged(
        "runs".into(),
        z,
        two_sided_normal(z),
        alpha,
    ))
}

/// Lag-`lag` autocorrelation of the centred bits, tested against zero with
/// variance `1/n`. A constant stream counts as fully correlated.
pub fn serial_correlation_test(bits: &BitStream, lag: usize, alpha: f64) -> Result<TestEntry> {
    check_alpha(alpha)?;
    if lag == 0 {
        return Err(Error::invalid("lag must be at least 1"));
    }
    require(bits, lag + MIN_TEST_BITS + 1)?;
    let n = bits.len();
    let mean = bits.count_ones() as f64 / n as f64;
    let values: Vec<f64> = bits.iter().map(|b| b as u8 as f64 - mean).collect();
    let var = values.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let r = if var == 0.0 {
        1.0
    } else {
        let cov = values
            .iter()
            .zip(&values[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (n - lag) as f64;
        cov / var
    };
    let z = r * (n as f64).sqrt();
    Ok(TestEntry::judged(
        format!("serial_lag{lag}"),
        r,
        two_sided_normal(z),
        alpha,
    ))
}

/// Chi-square over the `2^block_bits` patterns of non-overlapping blocks.
pub fn block_chisquare_test(bits: &BitStream, block_bits: usize, alpha: f64) -> Result<TestEntry> {
    check_alpha(alpha)?;
    if !(2..=4).contains(&block_bits) {
        return Err(Error::invalid(format!(
            "block size must be 2, 3 or 4, got {block_bits}"
        )));
    }
    let patterns = 1usize << block_bits;
    require(bits, 20 * patterns)?;
    let blocks = bits.len() / block_bits;
    let mut counts = vec![0u64; patterns];
    let mut it = bits.iter();
    for _ in 0..blocks {
        let word = it
            .by_ref()
            .take(block_bits)
            .fold(0usize, |acc, b| acc << 1 | b as usize);
        counts[word] += 1;
    }
    let expected = blocks as f64 / patterns as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((patterns - 1) as f64).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(TestEntry::judged(
        format!("block{block_bits}_chisq"),
        chi2,
        dist.sf(chi2),
        alpha,
    ))
}

/// Monobit, runs, lag-1 serial correlation and 2-bit block chi-square.
pub fn run_suite(bits: &BitStream, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    require(bits, SUITE_MIN_BITS)?;
    let results = [
        ("monobit", monobit_test(bits, alpha)),
        ("runs", runs_test(bits, alpha)),
        ("serial_lag1", serial_correlation_test(bits, 1, alpha)),
        ("block2_chisq", block_chisquare_test(bits, 2, alpha)),
    ];
    let entries = results
        .into_iter()
        .map(|(name, r)| {
            r.unwrap_or_else(|e| TestEntry {
                name: name.into(),
                statistic: f64::NAN,
                p_value: 0.0,
                outcome: Outcome::Error(e.to_string()),
            })
        })
        .collect();
    Ok(TestReport { alpha, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn stream(n: usize, f: impl Fn(usize) -> bool) -> BitStream {
        (0..n).map(f).collect()
    }

    fn reference_bits(n: usize, seed: u64) -> BitStream {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| rng.random::<bool>()).collect()
    }

    #[test]
    fn monobit_examples() {
        let balanced = stream(10_000, |i| i < 5000);
        let e = monobit_test(&balanced, 0.01).unwrap();
        assert_eq!(e.statistic, 0.0);
        assert!(e.passed());

        // |5300 - 5000| / (sqrt(10^4) / 2) = 300 / 50 = 6.
        let biased = stream(10_000, |i| i < 5300);
        let e = monobit_test(&biased, 0.01).unwrap();
        assert!((e.statistic - 6.0).abs() < 1e-12);
        assert!(!e.passed());
        assert!(e.p_value < 1e-8);
    }

    #[test]
    fn runs_examples() {
        let alternating = stream(10_000, |i| i % 2 == 1);
        let e = runs_test(&alternating, 0.01).unwrap();
        assert!(e.statistic > 50.0);
        assert_eq!(e.outcome, Outcome::Fail);

        let blocky = stream(10_000, |i| i >= 5000);
        let e = runs_test(&blocky, 0.01).unwrap();
        assert!(e.statistic < -50.0);
        assert_eq!(e.outcome, Outcome::Fail);

        let ones = stream(10_000, |_| true);
        assert!(runs_test(&ones, 0.01).unwrap().skipped());
    }

    #[test]
    fn runs_counts_alternation_exactly() {
        // 10^4 alternating bits have 10^4 runs: z = (10^4 - 5001) / sd.
        let alternating = stream(10_000, |i| i % 2 == 1);
        let n = 10_000.0f64;
        let var = 2.0 * 25e6 * (50e6 - n) / (n * n * (n - 1.0));
        let e = runs_test(&alternating, 0.01).unwrap();
        assert!((e.statistic - (10_000.0 - 5001.0) / var.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn serial_examples() {
        let alternating = stream(10_000, |i| i % 2 == 1);
        let lag1 = serial_correlation_test(&alternating, 1, 0.01).unwrap();
        assert!((lag1.statistic + 1.0).abs() < 1e-12);
        assert!(!lag1.passed());
        let lag2 = serial_correlation_test(&alternating, 2, 0.01).unwrap();
        assert!((lag2.statistic - 1.0).abs() < 1e-12);
        assert!(!lag2.passed());

        let constant = stream(1000, |_| false);
        assert!(!serial_correlation_test(&constant, 1, 0.01)
            .unwrap()
            .passed());
        assert!(serial_correlation_test(&stream(100, |_| true), 1, 0.01).is_err());
    }

    #[test]
    fn block_examples() {
        let alternating = stream(10_000, |i| i % 2 == 1);
        let e = block_chisquare_test(&alternating, 2, 0.01).unwrap();
        // All 5000 blocks are "01": chi2 = 3 * 1250 + 3750^2 / 1250.
        assert!((e.statistic - (3.0 * 1250.0 + 3750.0f64.powi(2) / 1250.0)).abs() < 1e-9);
        assert!(!e.passed());
        assert!(block_chisquare_test(&alternating, 5, 0.01).is_err());
        assert!(block_chisquare_test(&stream(79, |_| true), 2, 0.01).is_err());
    }

    #[test]
    fn reference_generator_passes() {
        let bits = reference_bits(100_000, 2024);
        for k in 2..=4 {
            assert!(
                block_chisquare_test(&bits, k, 0.01).unwrap().passed(),
                "block {k}"
            );
        }
        let report = run_suite(&bits, 0.01).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn chi_square_tail_matches_closed_form() {
        // For 2 degrees of freedom the survival function is exp(-x/2).
        let dist = ChiSquared::new(2.0).unwrap();
        for x in [0.5, 3.0, 9.21] {
            assert!((dist.sf(x) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn short_streams_rejected() {
        let bits = stream(99, |i| i % 3 == 0);
        assert!(matches!(
            monobit_test(&bits, 0.01),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            runs_test(&bits, 0.01),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            run_suite(&stream(9999, |_| true), 0.01),
            Err(Error::InsufficientData { .. })
        ));
        assert!(monobit_test(&stream(1000, |_| true), 1.5).is_err());
    }

    #[test]
    fn p_values_in_unit_interval() {
        for seed in 0..20 {
            let bits = reference_bits(10_000, seed);
            let report = run_suite(&bits, 0.01).unwrap();
            for e in &report.entries {
                assert!((0.0..=1.0).contains(&e.p_value));
                assert_eq!(e.passed(), e.p_value >= report.alpha);
            }
        }
    }

    #[test]
    fn verdict_is_monotone() {
        let mut report = run_suite(&reference_bits(20_000, 1), 0.01).unwrap();
        let before = report.passed();
        report
            .entries
            .push(TestEntry::judged("extra".into(), 9.0, 0.0, 0.01));
        assert!(!report.passed());
        assert!(before || !report.passed());
    }
}

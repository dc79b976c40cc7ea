use serde::{Deserialize, Serialize};

use super::BitStream;
use crate::error::{Error, Result};

/// Maximum-likelihood transition probabilities of a two-state chain.
///
/// `p = P(1 | previous 1)` and `q = P(0 | previous 0)`; either is `None`
/// when its state never occurs as a predecessor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovEstimate {
    pub n11: u64,
    pub n10: u64,
    pub n00: u64,
    pub n01: u64,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

impl MarkovEstimate {
    pub fn transitions(&self) -> u64 {
        self.n11 + self.n10 + self.n00 + self.n01
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn estimate_markov(bits: &BitStream) -> Result<MarkovEstimate> {
    if bits.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: bits.len(),
        });
    }
    let mut counts = [[0u64; 2]; 2];
    let mut it = bits.iter();
    let mut prev = it.next().unwrap();
    for bit in it {
        counts[prev as usize][bit as usize] += 1;
        prev = bit;
    }
    let [[n00, n01], [n10, n11]] = counts;
    Ok(MarkovEstimate {
        n11,
        n10,
        n00,
        n01,
        p: ratio(n11, n11 + n10),
        q: ratio(n00, n00 + n01),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alternating_stream() {
        let e = estimate_markov(&BitStream::from_ascii("010101").unwrap()).unwrap();
        assert_eq!(e.p, Some(0.0));
        assert_eq!(e.q, Some(0.0));
        assert_eq!((e.n01, e.n10), (3, 2));
    }

    #[test]
    fn constant_ones() {
        let e = estimate_markov(&BitStream::from_ascii("1111").unwrap()).unwrap();
        assert_eq!(e.p, Some(1.0));
        assert_eq!(e.q, None);
    }

    #[test]
    fn too_short() {
        assert_eq!(
            estimate_markov(&BitStream::from_ascii("1").unwrap()),
            Err(Error::InsufficientData {
                required: 2,
                actual: 1
            })
        );
    }

    proptest! {
        #[test]
        fn counts_cover_every_transition(bits in proptest::collection::vec(any::<bool>(), 2..500)) {
            let s: BitStream = bits.into_iter().collect();
            let e = estimate_markov(&s).unwrap();
            prop_assert_eq!(e.transitions(), s.len() as u64 - 1);
            if let Some(p) = e.p {
                prop_assert_eq!(p, e.n11 as f64 / (e.n11 + e.n10) as f64);
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{MapKind, Orbit, OrbitConfig, OrbitResult};

/// Bit 1 for states in `A = {|x| < threshold}`, bit 0 for the macro-state
/// `B = {|x| >= threshold}`. The boundary belongs to `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionRule {
    pub threshold: f64,
}

impl Default for PartitionRule {
    fn default() -> Self {
        PartitionRule { threshold: 0.5 }
    }
}

impl PartitionRule {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::invalid(format!(
                "threshold must lie in (0, 1), got {threshold}"
            )));
        }
        Ok(PartitionRule { threshold })
    }

    #[inline]
    pub fn classify(&self, x: f64) -> bool {
        x.abs() < self.threshold
    }
}

/// Where a bit stream came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: MapKind,
    pub config: OrbitConfig,
    pub rule: PartitionRule,
}

/// Packed bit sequence, most significant bit first within each byte. The
/// final partial byte is zero-padded.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
    pub provenance: Option<Provenance>,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitStream {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
            provenance: None,
        }
    }

    pub fn push(&mut self, bit: bool) {
        let shift = 7 - (self.len % 8);
        if shift == 7 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << shift;
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bytes[i / 8] >> (7 - i % 8) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bytes[i / 8] >> (7 - i % 8) & 1 == 1)
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn as_packed(&self) -> &[u8] {
        &self.bytes
    }

    /// Reads `len` bits from a packed buffer. Padding bits past `len` must
    /// be zero.
    pub fn from_packed(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::invalid(format!(
                "{len} bits need {} bytes, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        if !len.is_multiple_of(8) && bytes[bytes.len() - 1] & (0xFF >> (len % 8)) != 0 {
            return Err(Error::invalid("nonzero padding bits in final byte"));
        }
        Ok(BitStream {
            bytes: bytes.to_vec(),
            len,
            provenance: None,
        })
    }

    /// One `'0'`/`'1'` character per bit.
    pub fn to_ascii(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    /// Parses `'0'`/`'1'` characters; ASCII whitespace is ignored.
    pub fn from_ascii(text: &str) -> Result<Self> {
        let mut stream = BitStream::with_capacity(text.len());
        for c in text.chars().filter(|c| !c.is_ascii_whitespace()) {
            match c {
                '0' => stream.push(false),
                '1' => stream.push(true),
                other => return Err(Error::invalid(format!("unexpected character {other:?}"))),
            }
        }
        Ok(stream)
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut stream = BitStream::new();
        for bit in iter {
            stream.push(bit);
        }
        stream
    }
}

/// One bit per orbit state.
pub fn extract_bits(orbit: &OrbitResult, rule: &PartitionRule) -> BitStream {
    orbit.states.iter().map(|&x| rule.classify(x)).collect()
}

/// Streams an orbit straight into bits without keeping the states.
pub fn generate_bits(kind: &MapKind, cfg: &OrbitConfig, rule: &PartitionRule) -> Result<BitStream> {
    let mut stream = BitStream::with_capacity(cfg.n_steps);
    for x in Orbit::new(kind, cfg)? {
        stream.push(rule.classify(x));
    }
    stream.provenance = Some(Provenance {
        kind: kind.clone(),
        config: *cfg,
        rule: *rule,
    });
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::iterate_orbit;
    use proptest::prelude::*;

    fn orbit(states: Vec<f64>) -> OrbitResult {
        OrbitResult {
            states,
            escaped_at: None,
            absorbed_at_zero: None,
        }
    }

    #[test]
    fn partition_of_hand_orbit() {
        let bits = extract_bits(
            &orbit(vec![-0.6, 0.8, -0.4, 0.8]),
            &PartitionRule::default(),
        );
        assert_eq!(bits.to_ascii(), "0010");
        let zeros = extract_bits(&orbit(vec![0.0, 0.0, 0.0]), &PartitionRule::default());
        assert_eq!(zeros.to_ascii(), "111");
    }

    #[test]
    fn boundary_goes_to_b() {
        let rule = PartitionRule::default();
        assert!(!rule.classify(0.5));
        assert!(!rule.classify(-0.5));
        assert!(rule.classify(0.4999999999999999));
        assert!(PartitionRule::new(0.0).is_err());
        assert!(PartitionRule::new(1.0).is_err());
    }

    #[test]
    fn packing_layout() {
        let s = BitStream::from_ascii("101100001111").unwrap();
        assert_eq!(s.len(), 12);
        assert_eq!(s.as_packed(), &[0b1011_0000, 0b1111_0000]);
        assert_eq!(s.count_ones(), 7);
        assert_eq!(s.get(0), Some(true));
        assert_eq!(s.get(1), Some(false));
        assert_eq!(s.get(12), None);
        assert!(BitStream::from_packed(&[0xFF, 0xFF], 12).is_err());
        assert!(BitStream::from_packed(&[0xFF], 12).is_err());
        assert!(BitStream::from_ascii("0102").is_err());
    }

    #[test]
    fn tent_and_modified_tent_bits_agree() {
        let cfg = OrbitConfig::new(0.377, 2000).dither(0.0);
        let rule = PartitionRule::default();
        let t = extract_bits(&iterate_orbit(&MapKind::Tent, &cfg).unwrap(), &rule);
        let m = extract_bits(&iterate_orbit(&MapKind::ModifiedTent, &cfg).unwrap(), &rule);
        assert_eq!(t, m);
        let streamed = generate_bits(&MapKind::ModifiedTent, &cfg, &rule).unwrap();
        assert_eq!(streamed.to_ascii(), m.to_ascii());
        assert_eq!(streamed.provenance.unwrap().kind, MapKind::ModifiedTent);
    }

    proptest! {
        #[test]
        fn packed_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let s: BitStream = bits.iter().copied().collect();
            prop_assert_eq!(s.len(), bits.len());
            prop_assert_eq!(s.as_packed().len(), bits.len().div_ceil(8));
            let back = BitStream::from_packed(s.as_packed(), s.len()).unwrap();
            prop_assert_eq!(back.iter().collect::<Vec<_>>(), bits.clone());
            let ascii = BitStream::from_ascii(&s.to_ascii()).unwrap();
            prop_assert_eq!(ascii, s);
        }
    }
}

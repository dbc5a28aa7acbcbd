//! Explicit binary strings over {0,1}.

use std::fmt;
use std::str::FromStr;

/// A materialized binary string. Each element is 0 or 1.
///
/// Expanded texts live here; compressed representations keep lengths as
/// arbitrary-precision integers and only materialize under an explicit cap.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn with_capacity(cap: usize) -> Self {
        BitString { bits: Vec::with_capacity(cap) }
    }

    /// Builds from raw 0/1 values. Panics on anything else.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bit values must be 0 or 1");
        BitString { bits }
    }

    pub fn zeros(len: usize) -> Self {
        BitString { bits: vec![0; len] }
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        self.bits.push(bit);
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    /// Bitwise complement.
    pub fn complement(&self) -> BitString {
        BitString { bits: self.bits.iter().map(|b| 1 - b).collect() }
    }

    /// Positions of the 1 bits, ascending.
    pub fn one_positions(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
            .collect()
    }
}

impl std::ops::Index<usize> for BitString {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.bits[i]
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    // Debug prints the raw string; long values read better in assertion
    // failures than a Vec of integers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseBitStringError {
    pub position: usize,
    pub byte: u8,
}

impl fmt::Display for ParseBitStringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid bitstring byte {:?} at position {}",
            self.byte as char, self.position
        )
    }
}

impl std::error::Error for ParseBitStringError {}

impl FromStr for BitString {
    type Err = ParseBitStringError;

    /// Parses ASCII '0'/'1'; whitespace (including newlines) is skipped so
    /// multi-line files concatenate.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for (position, byte) in s.bytes().enumerate() {
            match byte {
                b'0' => bits.push(0),
                b'1' => bits.push(1),
                b if b.is_ascii_whitespace() => {}
                byte => return Err(ParseBitStringError { position, byte }),
            }
        }
        Ok(BitString { bits })
    }
}

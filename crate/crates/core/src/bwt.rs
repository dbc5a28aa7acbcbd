//! Burrows-Wheeler transform, inverse, run counting, run-length coding, and
//! the BWT-compressible hard-string family.
//!
//! The transform appends a sentinel `$` (lexicographically below 0 and 1),
//! sorts all rotations, and keeps the last column. Since the sentinel is
//! unique and smallest, rotation order equals suffix order of the
//! sentinel-terminated text, which is what the sort comparator uses.
//!
//! The hard family rewrites the blocked-disjointness string with 4-bit
//! gadgets (0 -> 1011, 1 -> 1101 inside block patterns, plain 0 -> 0^4B)
//! so the result stays query-equivalent under the index map [`sigma`] while
//! its transform has O(B*N) runs.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::bitstring::BitString;
use crate::hard::{blocked_digits, blocked_from_index, disjoint, BlockedInstance, HardError};
use crate::slp::{balanced_fold, Rule, Slp};
use crate::util::ceil_log2;

pub const SENTINEL: u8 = b'$';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BwtError {
    #[error("expected exactly one sentinel `$`, found {0}")]
    SentinelCount(usize),
    #[error("invalid symbol {0:?}, expected `0`, `1`, or `$`")]
    BadSymbol(char),
    #[error("inconsistent rotation cycle; the input is not the transform of any string")]
    InconsistentCycle,
    #[error("malformed run-length code: {0}")]
    MalformedCode(String),
    #[error("hard string of {len} bits exceeds cap {cap}")]
    CapExceeded { len: u128, cap: u64 },
    #[error("hard string bit at sigma index {index} is {got}, disjointness says {expected}")]
    SigmaMismatch { index: u64, got: u8, expected: bool },
    #[error("transform of the hard string has {runs} runs, above the bound {bound}")]
    RunsBoundExceeded { runs: usize, bound: usize },
    #[error(transparent)]
    Hard(#[from] HardError),
}

/// A string over {0, 1, $} with exactly one sentinel; the image alphabet of
/// the transform.
#[derive(Clone, PartialEq, Eq)]
pub struct BwtText {
    symbols: Vec<u8>,
}

impl BwtText {
    pub fn from_ascii(symbols: Vec<u8>) -> Result<Self, BwtError> {
        let mut sentinels = 0;
        for &c in &symbols {
            match c {
                b'0' | b'1' => {}
                SENTINEL => sentinels += 1,
                other => return Err(BwtError::BadSymbol(other as char)),
            }
        }
        if sentinels != 1 {
            return Err(BwtError::SentinelCount(sentinels));
        }
        Ok(BwtText { symbols })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn sentinel_position(&self) -> usize {
        self.symbols
            .iter()
            .position(|&c| c == SENTINEL)
            .expect("constructor guarantees one sentinel")
    }
}

impl fmt::Display for BwtText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(std::str::from_utf8(&self.symbols).expect("ascii"))
    }
}

impl fmt::Debug for BwtText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl FromStr for BwtText {
    type Err = BwtError;

    fn from_str(s: &str) -> Result<Self, BwtError> {
        BwtText::from_ascii(s.bytes().filter(|b| !b.is_ascii_whitespace()).collect())
    }
}

fn text_with_sentinel(s: &BitString) -> Vec<u8> {
    let mut t = Vec::with_capacity(s.len() + 1);
    t.extend(s.iter().map(|b| b + b'0'));
    t.push(SENTINEL);
    t
}

fn last_column(t: &[u8], sorted_starts: &[usize]) -> BwtText {
    let symbols = sorted_starts
        .iter()
        .map(|&i| if i == 0 { SENTINEL } else { t[i - 1] })
        .collect();
    BwtText { symbols }
}

/// Burrows-Wheeler transform: last column of the sorted rotation list of
/// s + `$`, with `$` < `0` < `1` (which is plain ASCII byte order).
pub fn bwt(s: &BitString) -> BwtText {
    // Short strings sort faster than the thread pool wakes up.
    #[cfg(feature = "parallel")]
    if s.len() >= (1 << 15) {
        return bwt_par(s);
    }
    bwt_seq(s)
}

/// Sequential rotation sort, kept callable for benchmarking against the
/// parallel path.
pub fn bwt_seq(s: &BitString) -> BwtText {
    let t = text_with_sentinel(s);
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_unstable_by(|&i, &j| t[i..].cmp(&t[j..]));
    last_column(&t, &order)
}

#[cfg(feature = "parallel")]
pub fn bwt_par(s: &BitString) -> BwtText {
    let t = text_with_sentinel(s);
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.par_sort_unstable_by(|&i, &j| t[i..].cmp(&t[j..]));
    last_column(&t, &order)
}

/// Inverse transform. Walks the last-to-first mapping backwards from the
/// sentinel's row; a premature return to that row means the input is not a
/// valid transform image.
pub fn ibwt(t: &BwtText) -> Result<BitString, BwtError> {
    let symbols = &t.symbols;
    let m = symbols.len();
    let sentinel_row = t.sentinel_position();

    let mut counts = [0usize; 3];
    let class = |c: u8| match c {
        SENTINEL => 0usize,
        b'0' => 1,
        _ => 2,
    };
    for &c in symbols {
        counts[class(c)] += 1;
    }
    let starts = [0, counts[0], counts[0] + counts[1]];
    let mut seen = [0usize; 3];
    let mut lf = vec![0usize; m];
    for (i, &c) in symbols.iter().enumerate() {
        let k = class(c);
        lf[i] = starts[k] + seen[k];
        seen[k] += 1;
    }

    let mut out = Vec::with_capacity(m - 1);
    let mut row = sentinel_row;
    for _ in 0..m - 1 {
        row = lf[row];
        if row == sentinel_row {
            return Err(BwtError::InconsistentCycle);
        }
        out.push(symbols[row] - b'0');
    }
    out.reverse();
    Ok(BitString::from_bits(out))
}

/// Number of maximal equal-bit blocks after deleting the sentinel.
pub fn runs(t: &BwtText) -> usize {
    count_runs(t.symbols.iter().copied().filter(|&c| c != SENTINEL))
}

/// Run count of a plain bit string.
pub fn runs_bits(s: &BitString) -> usize {
    count_runs(s.iter())
}

fn count_runs<I: Iterator<Item = u8>>(bits: I) -> usize {
    let mut runs = 0;
    let mut prev = None;
    for b in bits {
        if prev != Some(b) {
            runs += 1;
            prev = Some(b);
        }
    }
    runs
}

/// Run-length code of a transform: the sentinel position plus (bit, length)
/// pairs for each run. Serializes as
/// `{"sentinel_position":_,"runs":[[bit,len],...],"total_length":_}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLengthCode {
    pub sentinel_position: usize,
    pub runs: Vec<(u8, usize)>,
    pub total_length: usize,
}

/// Declared slack for the encoded-size ceiling; the reported size meets the
/// ceiling exactly.
pub const RLE_SIZE_SLACK: u64 = 0;

impl RunLengthCode {
    /// Reported size: one bit plus a length field per run, plus the sentinel
    /// position, all fields ceil(log2(L+1)) bits wide for source length L.
    pub fn encoded_bits(&self) -> u64 {
        let w = ceil_log2(self.total_length as u64 + 1) as u64;
        self.runs.len() as u64 * (1 + w) + w
    }

    /// Declared ceiling for [`encoded_bits`](Self::encoded_bits).
    pub fn declared_size_bound(run_count: u64, source_len: u64) -> u64 {
        let w = ceil_log2(source_len + 1) as u64;
        run_count * (w + 1) + w + RLE_SIZE_SLACK
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run-length code serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, BwtError> {
        let code: RunLengthCode =
            serde_json::from_str(json).map_err(|e| BwtError::MalformedCode(e.to_string()))?;
        code.check()?;
        Ok(code)
    }

    fn check(&self) -> Result<(), BwtError> {
        let mut sum = 0usize;
        for (i, &(bit, len)) in self.runs.iter().enumerate() {
            if bit > 1 {
                return Err(BwtError::MalformedCode(format!("run {i} holds bit {bit}")));
            }
            if len == 0 {
                return Err(BwtError::MalformedCode(format!("run {i} has zero length")));
            }
            if i > 0 && self.runs[i - 1].0 == bit {
                return Err(BwtError::MalformedCode(format!("runs {} and {i} do not alternate", i - 1)));
            }
            sum += len;
        }
        if sum != self.total_length {
            return Err(BwtError::MalformedCode(format!(
                "run lengths sum to {sum}, total_length says {}",
                self.total_length
            )));
        }
        if self.sentinel_position > self.total_length {
            return Err(BwtError::MalformedCode(format!(
                "sentinel position {} beyond length {}",
                self.sentinel_position, self.total_length
            )));
        }
        Ok(())
    }
}

pub fn rle_encode(t: &BwtText) -> RunLengthCode {
    let mut runs: Vec<(u8, usize)> = Vec::new();
    for bit in t.symbols.iter().filter(|&&c| c != SENTINEL).map(|&c| c - b'0') {
        match runs.last_mut() {
            Some((b, len)) if *b == bit => *len += 1,
            _ => runs.push((bit, 1)),
        }
    }
    RunLengthCode {
        sentinel_position: t.sentinel_position(),
        runs,
        total_length: t.len() - 1,
    }
}

pub fn rle_decode(code: &RunLengthCode) -> Result<BwtText, BwtError> {
    code.check()?;
    let mut symbols = Vec::with_capacity(code.total_length + 1);
    for &(bit, len) in &code.runs {
        symbols.extend(std::iter::repeat_n(bit + b'0', len));
    }
    symbols.insert(code.sentinel_position, SENTINEL);
    BwtText::from_ascii(symbols)
}

fn h_block_bits(inst: &BlockedInstance, block: usize) -> Vec<u8> {
    let b = inst.block_size();
    (1..=b)
        .map(|j| {
            let element = (block - 1) * b + j;
            u8::from(!inst.y().contains(&element))
        })
        .collect()
}

const GADGET_ZERO: [u8; 4] = [1, 0, 1, 1];
const GADGET_ONE: [u8; 4] = [1, 1, 0, 1];

fn h_prime_bits(inst: &BlockedInstance, block: usize) -> Vec<u8> {
    h_block_bits(inst, block)
        .into_iter()
        .flat_map(|bit| if bit == 1 { GADGET_ONE } else { GADGET_ZERO })
        .collect()
}

/// Length of the hard string, (4B)^N, when it fits in a u128.
pub fn hard_string_len(block_size: usize, block_count: usize) -> Option<u128> {
    (4u128 * block_size as u128).checked_pow(block_count as u32)
}

/// Builds the hard string s' for a blocked instance by N substitution
/// rounds starting from "1": each round replaces 0 with 0^4B and 1 with the
/// gadget-expanded pattern of one block. Rounds run block N first so that
/// block 1 is the least significant digit of [`sigma`], mirroring the
/// blocked-set index order.
pub fn build_bwt_hard(inst: &BlockedInstance, cap: u64) -> Result<BitString, BwtError> {
    let b = inst.block_size();
    let n = inst.block_count();
    let len = hard_string_len(b, n).ok_or(BwtError::CapExceeded { len: u128::MAX, cap })?;
    if len > cap as u128 {
        return Err(BwtError::CapExceeded { len, cap });
    }
    let mut cur = vec![1u8];
    for round in 1..=n {
        let block = n + 1 - round;
        let gadget = h_prime_bits(inst, block);
        let mut next = Vec::with_capacity(cur.len() * 4 * b);
        for &bit in &cur {
            if bit == 1 {
                next.extend_from_slice(&gadget);
            } else {
                next.resize(next.len() + 4 * b, 0);
            }
        }
        cur = next;
    }
    debug_assert_eq!(cur.len() as u128, len);
    Ok(BitString::from_bits(cur))
}

/// Index map of the hard string: with a_i the 0-based digit of block i, the
/// answer bit of a blocked set sits at sum (4*a_i + 1) * (4B)^(i-1). The map
/// is independent of Y and injective over blocked sets.
pub fn sigma(x: &[usize], block_size: usize, block_count: usize) -> Result<BigUint, HardError> {
    let digits = blocked_digits(x, block_size, block_count)?;
    let base = BigUint::from(4 * block_size);
    let mut idx = BigUint::zero();
    for &a in digits.iter().rev() {
        idx = idx * &base + BigUint::from(4 * a + 1);
    }
    Ok(idx)
}

/// Grammar deriving the same hard string, used by the probe bench. For k
/// remaining rounds, one symbol derives the expansion of a '1' and one the
/// matching zero run of length (4B)^k.
pub fn build_bwt_hard_grammar(inst: &BlockedInstance) -> Slp {
    let b = inst.block_size();
    let n = inst.block_count();
    let mut rules = vec![Rule::Terminal(0), Rule::Terminal(1)];
    let mut zero = 0usize;
    let mut one = 1usize;
    for k in 1..=n {
        let zero_items = vec![zero; 4 * b];
        let next_zero = balanced_fold(&mut rules, &zero_items);
        let one_items: Vec<usize> = h_block_bits(inst, k)
            .into_iter()
            .flat_map(|bit| {
                let cell = if bit == 1 { GADGET_ONE } else { GADGET_ZERO };
                cell.map(|c| if c == 1 { one } else { zero })
            })
            .collect();
        let next_one = balanced_fold(&mut rules, &one_items);
        zero = next_zero;
        one = next_one;
    }
    if one != rules.len() - 1 {
        rules.push(rules[one]);
    }
    Slp::new(rules)
}

/// Runs bound declared for the hard family: runs(bwt(s')) <= 512 * B * N.
pub fn hard_runs_bound(block_size: usize, block_count: usize) -> usize {
    512 * block_size * block_count
}

/// Summary of one hard-instance check.
#[derive(Debug, Clone)]
pub struct BwtHardCheck {
    pub length: usize,
    pub runs: usize,
    pub runs_bound: usize,
    pub sets_checked: u64,
}

/// Verifies the three hard-family laws on one instance: exact length, the
/// sigma property against brute-force disjointness for every blocked set,
/// and the runs bound on the transform.
pub fn check_bwt_hard(inst: &BlockedInstance, cap: u64) -> Result<BwtHardCheck, BwtError> {
    let b = inst.block_size();
    let n = inst.block_count();
    let s = build_bwt_hard(inst, cap)?;
    let expected_len = hard_string_len(b, n).expect("length fits under cap");
    assert_eq!(s.len() as u128, expected_len);

    let total = inst
        .blocked_set_count()
        .to_u64()
        .expect("blocked sets enumerable under cap");
    for idx in 0..total {
        let x = blocked_from_index(&BigUint::from(idx), b, n)?;
        let pos = sigma(&x, b, n)?.to_usize().expect("sigma under cap");
        let got = s[pos];
        let expected = disjoint(&x, inst.y());
        if (got == 1) != expected {
            return Err(BwtError::SigmaMismatch { index: idx, got, expected });
        }
    }

    let run_count = runs(&bwt(&s));
    let bound = hard_runs_bound(b, n);
    if run_count > bound {
        return Err(BwtError::RunsBoundExceeded { runs: run_count, bound });
    }
    Ok(BwtHardCheck { length: s.len(), runs: run_count, runs_bound: bound, sets_checked: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard::{blocked_index, build_blsd_grammar};
    use crate::rng::DetRng;
    use crate::slp::DEFAULT_EXPAND_CAP;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn bwt_of_reference_string() {
        assert_eq!(bwt(&bits("010110")).to_string(), "01$1100");
    }

    #[test]
    fn bwt_trivial_cases() {
        assert_eq!(bwt(&bits("")).to_string(), "$");
        assert_eq!(bwt(&bits("0")).to_string(), "0$");
    }

    #[test]
    fn ibwt_of_reference_string() {
        let t: BwtText = "01$1100".parse().unwrap();
        assert_eq!(ibwt(&t).unwrap().to_string(), "010110");
    }

    #[test]
    fn ibwt_of_sentinel_only() {
        let t: BwtText = "$".parse().unwrap();
        assert_eq!(ibwt(&t).unwrap().to_string(), "");
    }

    #[test]
    fn round_trip_exhaustive_short() {
        for len in 0..=10usize {
            for val in 0u32..(1 << len) {
                let s = BitString::from_bits((0..len).map(|i| ((val >> i) & 1) as u8).collect());
                let back = ibwt(&bwt(&s)).unwrap();
                assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn bwt_seq_matches_default() {
        let mut rng = DetRng::new(5);
        for _ in 0..20 {
            let len = rng.next_below(300);
            let s = BitString::from_bits((0..len).map(|_| rng.next_bool() as u8).collect());
            assert_eq!(bwt_seq(&s), bwt(&s));
        }
    }

    #[test]
    fn malformed_sentinels_rejected() {
        assert!(matches!("0110".parse::<BwtText>(), Err(BwtError::SentinelCount(0))));
        assert!(matches!("0$1$".parse::<BwtText>(), Err(BwtError::SentinelCount(2))));
        assert!(matches!("0a$".parse::<BwtText>(), Err(BwtError::BadSymbol('a'))));
    }

    #[test]
    fn non_image_input_rejected() {
        let t: BwtText = "10$".parse().unwrap();
        assert!(matches!(ibwt(&t), Err(BwtError::InconsistentCycle)));
    }

    #[test]
    fn runs_of_reference_string() {
        let t: BwtText = "01$1100".parse().unwrap();
        assert_eq!(runs(&t), 3);
        assert_eq!(runs_bits(&bits("0000")), 1);
        assert_eq!(runs_bits(&bits("0101")), 4);
    }

    #[test]
    fn rle_round_trip_on_reference_string() {
        let t: BwtText = "01$1100".parse().unwrap();
        let code = rle_encode(&t);
        assert_eq!(code.sentinel_position, 2);
        assert_eq!(code.runs, vec![(0, 1), (1, 3), (0, 2)]);
        assert_eq!(code.total_length, 6);
        assert_eq!(rle_decode(&code).unwrap(), t);

        let json = code.to_json();
        assert_eq!(RunLengthCode::from_json(&json).unwrap(), code);
    }

    #[test]
    fn rle_of_sentinel_only() {
        let t: BwtText = "$".parse().unwrap();
        let code = rle_encode(&t);
        assert_eq!(code.sentinel_position, 0);
        assert!(code.runs.is_empty());
        assert_eq!(code.encoded_bits(), 0);
        assert_eq!(rle_decode(&code).unwrap(), t);
    }

    #[test]
    fn rle_round_trip_random_strings() {
        let mut rng = DetRng::new(11);
        for _ in 0..50 {
            let len = rng.next_below(1000);
            let s = BitString::from_bits((0..len).map(|_| rng.next_bool() as u8).collect());
            let t = bwt(&s);
            let code = rle_encode(&t);
            assert_eq!(rle_decode(&code).unwrap(), t);
            assert!(code.encoded_bits()
                <= RunLengthCode::declared_size_bound(code.runs.len() as u64, len as u64));
        }
    }

    #[test]
    fn rle_rejects_malformed_codes() {
        let bad = RunLengthCode { sentinel_position: 0, runs: vec![(0, 1), (0, 1)], total_length: 2 };
        assert!(matches!(rle_decode(&bad), Err(BwtError::MalformedCode(_))));
        let bad = RunLengthCode { sentinel_position: 5, runs: vec![(0, 2)], total_length: 2 };
        assert!(matches!(rle_decode(&bad), Err(BwtError::MalformedCode(_))));
    }

    #[test]
    fn gadget_expansion_of_01_pattern() {
        // Block pattern "01" expands to 1011 then 1101.
        let inst = BlockedInstance::new(2, 1, vec![1]).unwrap();
        assert_eq!(h_block_bits(&inst, 1), vec![0, 1]);
        assert_eq!(h_prime_bits(&inst, 1), vec![1, 0, 1, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn hard_string_b1_n1() {
        let inst = BlockedInstance::new(1, 1, vec![]).unwrap();
        let s = build_bwt_hard(&inst, 1024).unwrap();
        assert_eq!(s.to_string(), "1101");
        // The only blocked set is {1}; its answer bit is at sigma = 1.
        assert_eq!(sigma(&[1], 1, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(s[1], 1);
    }

    #[test]
    fn sigma_of_example_set() {
        // X = {2,4,7} has digits (1,0,0): 5 + 1*12 + 1*144.
        assert_eq!(sigma(&[2, 4, 7], 3, 3).unwrap(), BigUint::from(161u32));
        let inst = BlockedInstance::new(3, 3, vec![1, 3, 5, 9]).unwrap();
        let s = build_bwt_hard(&inst, 1 << 20).unwrap();
        assert_eq!(s[161], 1);
        assert!(disjoint(&[2, 4, 7], inst.y()));
    }

    #[test]
    fn sigma_is_injective_on_small_instances() {
        for b in 1..=4usize {
            for n in 1..=4usize {
                let total = (b as u64).pow(n as u32);
                let mut seen = std::collections::BTreeSet::new();
                for idx in 0..total {
                    let x = blocked_from_index(&BigUint::from(idx), b, n).unwrap();
                    assert!(seen.insert(sigma(&x, b, n).unwrap()), "collision at B={b} N={n}");
                }
            }
        }
    }

    #[test]
    fn hard_string_agrees_with_blsd_string_under_both_index_maps() {
        let inst = BlockedInstance::new(3, 3, vec![1, 3, 5, 9]).unwrap();
        let plain = build_blsd_grammar(&inst).expand(DEFAULT_EXPAND_CAP).unwrap();
        let hard = build_bwt_hard(&inst, 1 << 20).unwrap();
        for idx in 0..27u64 {
            let x = blocked_from_index(&BigUint::from(idx), 3, 3).unwrap();
            let plain_pos = blocked_index(&x, 3, 3).unwrap().to_usize().unwrap();
            let hard_pos = sigma(&x, 3, 3).unwrap().to_usize().unwrap();
            assert_eq!(plain[plain_pos], hard[hard_pos], "set {x:?}");
        }
    }

    #[test]
    fn hard_check_example_instance() {
        let inst = BlockedInstance::new(3, 3, vec![1, 3, 5, 9]).unwrap();
        let check = check_bwt_hard(&inst, 1 << 20).unwrap();
        assert_eq!(check.length, 1728);
        assert_eq!(check.sets_checked, 27);
        assert!(check.runs <= check.runs_bound);
    }

    #[test]
    fn hard_cap_is_enforced() {
        let inst = BlockedInstance::new(4, 4, vec![]).unwrap();
        assert!(matches!(
            build_bwt_hard(&inst, 1024),
            Err(BwtError::CapExceeded { len: 65536, cap: 1024 })
        ));
    }

    #[test]
    fn hard_grammar_derives_hard_string() {
        let mut rng = DetRng::new(3);
        for b in 1..=3usize {
            for n in 1..=3usize {
                let y = rng.subset(b * n);
                let inst = BlockedInstance::new(b, n, y).unwrap();
                let direct = build_bwt_hard(&inst, 1 << 20).unwrap();
                let via_grammar = build_bwt_hard_grammar(&inst).expand(1 << 20).unwrap();
                assert_eq!(via_grammar, direct, "B={b} N={n}");
            }
        }
    }
}

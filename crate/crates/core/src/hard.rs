//! Hard-grammar generators and the set/index codecs that address characters
//! "by sets".
//!
//! Two families: the set-disjointness grammar over a universe [m] (one
//! character per subset, 2^m in total) and the blocked lopsided variant over
//! [B*N] (one character per blocked set, B^N in total). In both, the bit at a
//! set's index is 1 exactly when that set is disjoint from the generator's Y.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::slp::{balanced_fold, LengthTable, Rule, Slp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardError {
    #[error("element {element} outside universe 1..={universe}")]
    ElementOutOfUniverse { element: usize, universe: usize },
    #[error("duplicate element {element}")]
    DuplicateElement { element: usize },
    #[error("block {block} holds {count} elements, expected exactly 1")]
    NotBlocked { block: usize, count: usize },
    #[error("index {index} out of range for {space}")]
    IndexOutOfRange { index: BigUint, space: String },
    #[error("universe of {0} indices too large for an exhaustive sweep")]
    UniverseTooLarge(u128),
    #[error("encoding mismatch at index {index}: grammar bit {got}, disjointness {expected}")]
    EncodingMismatch { index: u64, got: u8, expected: bool },
}

/// A set-disjointness instance: universe {1..m} and the preprocessed set Y.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetInstance {
    universe: usize,
    y: Vec<usize>,
}

impl SetInstance {
    pub fn new(universe: usize, mut y: Vec<usize>) -> Result<Self, HardError> {
        assert!(universe >= 1, "universe size must be positive");
        y.sort_unstable();
        validate_elements(&y, universe)?;
        Ok(SetInstance { universe, y })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }
}

/// A blocked instance: universe {1..B*N} split into N consecutive blocks of
/// size B. Y is unrestricted; query sets X are blocked (one element per
/// block).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockedInstance {
    block_size: usize,
    block_count: usize,
    y: Vec<usize>,
}

impl BlockedInstance {
    pub fn new(block_size: usize, block_count: usize, mut y: Vec<usize>) -> Result<Self, HardError> {
        assert!(block_size >= 1 && block_count >= 1, "B and N must be positive");
        y.sort_unstable();
        validate_elements(&y, block_size * block_count)?;
        Ok(BlockedInstance { block_size, block_count, y })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn universe(&self) -> usize {
        self.block_size * self.block_count
    }

    /// Number of blocked sets, B^N.
    pub fn blocked_set_count(&self) -> BigUint {
        BigUint::from(self.block_size).pow(self.block_count as u32)
    }
}

fn validate_elements(sorted: &[usize], universe: usize) -> Result<(), HardError> {
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(HardError::DuplicateElement { element: pair[0] });
        }
    }
    for &e in sorted {
        if e == 0 || e > universe {
            return Err(HardError::ElementOutOfUniverse { element: e, universe });
        }
    }
    Ok(())
}

/// Ground-truth oracle: X and Y share no element.
pub fn disjoint(x: &[usize], y: &[usize]) -> bool {
    x.iter().all(|e| !y.contains(e))
}

/// Index of a subset of {1..m} under the characteristic-vector order:
/// element e contributes 2^(e-1). The empty set maps to 0 and {1..m} to
/// 2^m - 1.
pub fn set_index(x: &[usize], m: usize) -> Result<BigUint, HardError> {
    let mut idx = BigUint::zero();
    for &e in x {
        if e == 0 || e > m {
            return Err(HardError::ElementOutOfUniverse { element: e, universe: m });
        }
        idx.set_bit((e - 1) as u64, true);
    }
    Ok(idx)
}

/// Inverse of [`set_index`]: decodes an index in 0..2^m back to the subset.
pub fn set_from_index(idx: &BigUint, m: usize) -> Result<Vec<usize>, HardError> {
    if idx.bits() > m as u64 {
        return Err(HardError::IndexOutOfRange {
            index: idx.clone(),
            space: format!("2^{m} subsets"),
        });
    }
    Ok((1..=m).filter(|&e| idx.bit((e - 1) as u64)).collect())
}

/// Per-block digits of a blocked set: digit i is the chosen element's offset
/// within block i, in 0..B. Errors if some block does not hold exactly one
/// element.
pub fn blocked_digits(x: &[usize], block_size: usize, block_count: usize) -> Result<Vec<usize>, HardError> {
    let mut digits = vec![None; block_count];
    for &e in x {
        if e == 0 || e > block_size * block_count {
            return Err(HardError::ElementOutOfUniverse { element: e, universe: block_size * block_count });
        }
        let block = (e - 1) / block_size;
        if digits[block].is_some() {
            return Err(HardError::NotBlocked { block: block + 1, count: 2 });
        }
        digits[block] = Some((e - 1) % block_size);
    }
    digits
        .into_iter()
        .enumerate()
        .map(|(b, d)| d.ok_or(HardError::NotBlocked { block: b + 1, count: 0 }))
        .collect()
}

/// Index of a blocked set in lexicographic order: with a_i the digit of
/// block i, the index is sum a_i * B^(i-1) (block 1 least significant).
pub fn blocked_index(x: &[usize], block_size: usize, block_count: usize) -> Result<BigUint, HardError> {
    let digits = blocked_digits(x, block_size, block_count)?;
    let base = BigUint::from(block_size);
    let mut idx = BigUint::zero();
    for &a in digits.iter().rev() {
        idx = idx * &base + BigUint::from(a);
    }
    Ok(idx)
}

/// Inverse of [`blocked_index`].
pub fn blocked_from_index(idx: &BigUint, block_size: usize, block_count: usize) -> Result<Vec<usize>, HardError> {
    let total = BigUint::from(block_size).pow(block_count as u32);
    if idx >= &total {
        return Err(HardError::IndexOutOfRange {
            index: idx.clone(),
            space: format!("{block_size}^{block_count} blocked sets"),
        });
    }
    let base = BigUint::from(block_size);
    let mut rest = idx.clone();
    let mut x = Vec::with_capacity(block_count);
    for block in 0..block_count {
        let digit = (&rest % &base).to_usize().expect("digit below B");
        rest /= &base;
        x.push(block * block_size + digit + 1);
    }
    Ok(x)
}

/// Builds the SD grammar for Y over {1..m}: exactly 2m+1 rules deriving a
/// string of length 2^m whose bit at `set_index(X)` is 1 iff X and Y are
/// disjoint.
///
/// Layout: m zero-run symbols 0^(2^(i-1)) as a doubling chain, then the
/// answer chain g_0..g_m where g_0 = '1' and g_i doubles g_{i-1} when i is
/// not in Y, or pads it with 0^(2^(i-1)) when it is.
pub fn build_sd_grammar(inst: &SetInstance) -> Slp {
    let m = inst.universe;
    let mut rules = Vec::with_capacity(2 * m + 1);
    rules.push(Rule::Terminal(0));
    for i in 1..m {
        rules.push(Rule::Pair(i - 1, i - 1));
    }
    let zero_run = |i: usize| i - 1; // symbol deriving 0^(2^(i-1)), for i in 1..=m
    rules.push(Rule::Terminal(1));
    let mut g = rules.len() - 1;
    for i in 1..=m {
        let right = if inst.y.contains(&i) { zero_run(i) } else { g };
        rules.push(Rule::Pair(g, right));
        g = rules.len() - 1;
    }
    debug_assert_eq!(rules.len(), 2 * m + 1);
    Slp::new(rules)
}

/// Builds the blocked-LSD grammar for Y over [B*N]: at most 2BN+1 rules
/// deriving a string of length B^N whose bit at `blocked_index(X)` is 1 iff
/// the blocked set X and Y are disjoint.
///
/// N zero-run symbols 0^(B^(i-1)) are derived bottom-up, each by a balanced
/// B-fold of the previous one; the answer chain then folds, per block, B
/// references that are either the previous answer symbol or the matching
/// zero run. The balanced fold keeps the string and the rule count identical
/// to a left-nested chain while the depth stays logarithmic in B.
pub fn build_blsd_grammar(inst: &BlockedInstance) -> Slp {
    let b = inst.block_size;
    let n = inst.block_count;
    let mut rules = Vec::with_capacity(2 * b * n + 1);

    let mut zero_runs = Vec::with_capacity(n);
    rules.push(Rule::Terminal(0));
    zero_runs.push(0);
    for i in 1..n {
        let copies = vec![zero_runs[i - 1]; b];
        zero_runs.push(balanced_fold(&mut rules, &copies));
    }

    rules.push(Rule::Terminal(1));
    let mut g = rules.len() - 1;
    for (block, &zero_run) in zero_runs.iter().enumerate() {
        let items: Vec<usize> = (1..=b)
            .map(|j| {
                let element = block * b + j;
                if inst.y.contains(&element) {
                    zero_run
                } else {
                    g
                }
            })
            .collect();
        g = balanced_fold(&mut rules, &items);
    }

    // The start symbol must be the last rule. B = 1 degenerates to pure
    // aliasing, so duplicate the final symbol's rule if needed.
    if g != rules.len() - 1 {
        rules.push(rules[g]);
    }
    debug_assert!(rules.len() <= 2 * b * n + 1);
    Slp::new(rules)
}

fn sweep_first_error<F>(total: u64, check: F) -> Option<HardError>
where
    F: Fn(u64) -> Option<HardError> + Sync + Send,
{
    // Single checks are sub-microsecond: batch them (or task overhead swamps
    // the sweep) and stay sequential when the whole sweep is small. Totals
    // are capped at 2^26, so usize is safe.
    #[cfg(feature = "parallel")]
    if total >= (1 << 13) {
        return (0..total as usize)
            .into_par_iter()
            .with_min_len(1024)
            .find_map_first(|i| check(i as u64));
    }
    (0..total).find_map(check)
}

const EXHAUSTIVE_SWEEP_LIMIT: u128 = 1 << 26;

fn sd_check_at(slp: &Slp, lengths: &LengthTable, inst: &SetInstance, idx: u64) -> Option<HardError> {
    let big = BigUint::from(idx);
    let x = set_from_index(&big, inst.universe).expect("index in range");
    let expected = disjoint(&x, &inst.y);
    let got = slp.access_with(lengths, &big).expect("index below L");
    if (got == 1) != expected {
        Some(HardError::EncodingMismatch { index: idx, got, expected })
    } else {
        None
    }
}

/// Exhaustive oracle equivalence for one SD instance: every subset index of
/// the generated grammar must equal brute-force disjointness. Returns the
/// number of indices checked.
pub fn check_sd_encoding(inst: &SetInstance) -> Result<u64, HardError> {
    let total: u128 = 1u128 << inst.universe.min(127);
    if inst.universe >= 127 || total > EXHAUSTIVE_SWEEP_LIMIT {
        return Err(HardError::UniverseTooLarge(total));
    }
    let total = total as u64;
    let slp = build_sd_grammar(inst);
    let lengths = slp.lengths();
    match sweep_first_error(total, |idx| sd_check_at(&slp, &lengths, inst, idx)) {
        Some(err) => Err(err),
        None => Ok(total),
    }
}

/// Sequential variant of [`check_sd_encoding`], kept callable for
/// benchmarking against the parallel path.
pub fn check_sd_encoding_seq(inst: &SetInstance) -> Result<u64, HardError> {
    let total: u128 = 1u128 << inst.universe.min(127);
    if inst.universe >= 127 || total > EXHAUSTIVE_SWEEP_LIMIT {
        return Err(HardError::UniverseTooLarge(total));
    }
    let total = total as u64;
    let slp = build_sd_grammar(inst);
    let lengths = slp.lengths();
    match (0..total).find_map(|idx| sd_check_at(&slp, &lengths, inst, idx)) {
        Some(err) => Err(err),
        None => Ok(total),
    }
}

fn blsd_check_at(slp: &Slp, lengths: &LengthTable, inst: &BlockedInstance, idx: u64) -> Option<HardError> {
    let big = BigUint::from(idx);
    let x = blocked_from_index(&big, inst.block_size, inst.block_count).expect("index in range");
    let expected = disjoint(&x, &inst.y);
    let got = slp.access_with(lengths, &big).expect("index below L");
    if (got == 1) != expected {
        Some(HardError::EncodingMismatch { index: idx, got, expected })
    } else {
        None
    }
}

/// Exhaustive oracle equivalence for one blocked instance over all B^N
/// blocked sets.
pub fn check_blsd_encoding(inst: &BlockedInstance) -> Result<u64, HardError> {
    let total = inst.blocked_set_count();
    let total = match total.to_u64() {
        Some(t) if (t as u128) <= EXHAUSTIVE_SWEEP_LIMIT => t,
        _ => {
            return Err(HardError::UniverseTooLarge(
                total.to_u128().unwrap_or(u128::MAX),
            ))
        }
    };
    let slp = build_blsd_grammar(inst);
    let lengths = slp.lengths();
    match sweep_first_error(total, |idx| blsd_check_at(&slp, &lengths, inst, idx)) {
        Some(err) => Err(err),
        None => Ok(total),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::DEFAULT_EXPAND_CAP;

    #[test]
    fn disjoint_on_small_sets() {
        assert!(disjoint(&[2, 4], &[1, 3]));
        assert!(disjoint(&[], &[1, 2, 3]));
        assert!(!disjoint(&[1], &[1]));
    }

    #[test]
    fn set_index_ordering() {
        assert_eq!(set_index(&[], 3).unwrap(), BigUint::zero());
        assert_eq!(set_index(&[1, 2], 3).unwrap(), BigUint::from(3u32));
        assert_eq!(set_index(&[1, 2, 3], 3).unwrap(), BigUint::from(7u32));
    }

    #[test]
    fn set_index_rejects_out_of_universe() {
        assert!(matches!(
            set_index(&[4], 3),
            Err(HardError::ElementOutOfUniverse { element: 4, universe: 3 })
        ));
    }

    #[test]
    fn set_index_is_a_bijection() {
        let m = 6;
        for idx in 0u64..(1 << m) {
            let big = BigUint::from(idx);
            let x = set_from_index(&big, m).unwrap();
            assert_eq!(set_index(&x, m).unwrap(), big);
        }
    }

    #[test]
    fn blocked_index_ordering() {
        // N=2, B=3: {1,4},{2,4},{3,4},{1,5},...
        assert_eq!(blocked_index(&[1, 4], 3, 2).unwrap(), BigUint::zero());
        assert_eq!(blocked_index(&[2, 4], 3, 2).unwrap(), BigUint::from(1u32));
        assert_eq!(blocked_index(&[3, 4], 3, 2).unwrap(), BigUint::from(2u32));
        assert_eq!(blocked_index(&[1, 5], 3, 2).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn blocked_index_of_first_disjoint_set_in_example2() {
        // {2,4,8} is the third 1-position of the example string.
        assert_eq!(blocked_index(&[2, 4, 8], 3, 3).unwrap(), BigUint::from(10u32));
    }

    #[test]
    fn blocked_index_rejects_non_blocked() {
        assert!(matches!(
            blocked_index(&[1, 2, 4], 3, 2),
            Err(HardError::NotBlocked { block: 1, count: 2 })
        ));
        assert!(matches!(
            blocked_index(&[1], 3, 2),
            Err(HardError::NotBlocked { block: 2, count: 0 })
        ));
    }

    #[test]
    fn blocked_index_is_a_bijection() {
        let (b, n) = (3, 3);
        for idx in 0u64..27 {
            let big = BigUint::from(idx);
            let x = blocked_from_index(&big, b, n).unwrap();
            assert_eq!(blocked_index(&x, b, n).unwrap(), big);
        }
    }

    #[test]
    fn sd_grammar_reproduces_worked_example() {
        let inst = SetInstance::new(4, vec![1, 3]).unwrap();
        let slp = build_sd_grammar(&inst);
        assert_eq!(slp.rule_count(), 9);
        assert_eq!(slp.expand(DEFAULT_EXPAND_CAP).unwrap().to_string(), "1010000010100000");
    }

    #[test]
    fn sd_grammar_empty_y_is_all_ones() {
        let inst = SetInstance::new(2, vec![]).unwrap();
        let slp = build_sd_grammar(&inst);
        assert_eq!(slp.expand(DEFAULT_EXPAND_CAP).unwrap().to_string(), "1111");
    }

    #[test]
    fn sd_grammar_full_y() {
        let inst = SetInstance::new(2, vec![1, 2]).unwrap();
        let slp = build_sd_grammar(&inst);
        assert_eq!(slp.expand(DEFAULT_EXPAND_CAP).unwrap().to_string(), "1000");
    }

    #[test]
    fn blsd_grammar_reproduces_worked_example() {
        let inst = BlockedInstance::new(3, 3, vec![1, 3, 5, 9]).unwrap();
        let slp = build_blsd_grammar(&inst);
        assert!(slp.rule_count() <= 2 * 3 * 3 + 1);
        assert_eq!(
            slp.expand(DEFAULT_EXPAND_CAP).unwrap().to_string(),
            "010000010010000010000000000"
        );
    }

    #[test]
    fn blsd_grammar_trivial_cases() {
        let inst = BlockedInstance::new(2, 1, vec![]).unwrap();
        assert_eq!(build_blsd_grammar(&inst).expand(16).unwrap().to_string(), "11");

        // Y covers block 2 entirely: every blocked set intersects Y.
        let inst = BlockedInstance::new(3, 2, vec![4, 5, 6]).unwrap();
        assert_eq!(build_blsd_grammar(&inst).expand(16).unwrap().to_string(), "000000000");
    }

    #[test]
    fn blsd_grammar_degenerate_b1() {
        let empty = BlockedInstance::new(1, 3, vec![]).unwrap();
        assert_eq!(build_blsd_grammar(&empty).expand(16).unwrap().to_string(), "1");

        let hit = BlockedInstance::new(1, 3, vec![2]).unwrap();
        assert_eq!(build_blsd_grammar(&hit).expand(16).unwrap().to_string(), "0");
    }

    #[test]
    fn check_sd_accepts_and_counts() {
        let inst = SetInstance::new(4, vec![1, 3]).unwrap();
        assert_eq!(check_sd_encoding(&inst).unwrap(), 16);
    }

    #[test]
    fn check_blsd_accepts_and_counts() {
        let inst = BlockedInstance::new(3, 3, vec![1, 3, 5, 9]).unwrap();
        assert_eq!(check_blsd_encoding(&inst).unwrap(), 27);
    }
}

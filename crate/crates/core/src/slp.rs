//! Straight-line programs: validation, length tables, expansion, random
//! access, depth, and the SLPv1 text codec.
//!
//! An SLP is an ordered rule list defining symbols; each rule is either a
//! terminal bit or the concatenation of two earlier symbols. The last rule is
//! the start symbol and derives exactly one binary string. Derived lengths
//! can be exponential in the rule count, so they are kept as
//! arbitrary-precision integers and materialization goes through an explicit
//! cap.
//!
//! All indices exposed by this crate are zero-based: rules are `0..n` inside
//! `Slp` (the SLPv1 text format numbers them from 1), and `access(i)` returns
//! the `i`-th character of the derived string counting from 0.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::bitstring::BitString;
use crate::util::ceil_log2_big;

/// Default materialization cap: 2^24 bits.
pub const DEFAULT_EXPAND_CAP: u64 = 1 << 24;

/// One derivation rule. `Pair` indices are zero-based positions of earlier
/// rules in the rule list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Terminal(u8),
    Pair(usize, usize),
}

/// An ordered rule list; the start symbol is the last rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slp {
    rules: Vec<Rule>,
}

/// Exact derived length of every symbol, indexed like the rule list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthTable {
    lens: Vec<BigUint>,
}

impl LengthTable {
    pub fn get(&self, symbol: usize) -> &BigUint {
        &self.lens[symbol]
    }

    /// Derived length of the start symbol.
    pub fn start_len(&self) -> &BigUint {
        self.lens.last().expect("length table is never empty")
    }

    pub fn len(&self) -> usize {
        self.lens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlpError {
    #[error("grammar has no rules")]
    EmptyGrammar,
    #[error("rule {rule} references symbol {referenced} at or after itself")]
    ForwardReference { rule: usize, referenced: usize },
    #[error("rule {rule} holds terminal value {value}, expected 0 or 1")]
    BadTerminal { rule: usize, value: u8 },
    #[error("derived length {len} exceeds materialization cap {cap}")]
    CapExceeded { len: BigUint, cap: u64 },
    #[error("index {index} out of range for string of length {len}")]
    OutOfRange { index: BigUint, len: BigUint },
    #[error("SLPv1 parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Outcome of validating a rule list. Zero violations iff every invariant
/// holds; on success carries the rule count and the exact length table.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<SlpError>,
    pub rule_count: usize,
    pub lengths: Option<LengthTable>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Slp {
    pub fn new(rules: Vec<Rule>) -> Self {
        Slp { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Zero-based index of the start symbol (the last rule).
    pub fn start(&self) -> usize {
        self.rules.len() - 1
    }

    /// Checks every structural invariant. Reported rule indices are
    /// one-based, matching the SLPv1 text format.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.rules.is_empty() {
            violations.push(SlpError::EmptyGrammar);
            return ValidationReport { violations, rule_count: 0, lengths: None };
        }
        for (i, rule) in self.rules.iter().enumerate() {
            match *rule {
                Rule::Terminal(b) if b > 1 => {
                    violations.push(SlpError::BadTerminal { rule: i + 1, value: b });
                }
                Rule::Terminal(_) => {}
                Rule::Pair(j, k) => {
                    for referenced in [j, k] {
                        if referenced >= i {
                            violations.push(SlpError::ForwardReference {
                                rule: i + 1,
                                referenced: referenced + 1,
                            });
                        }
                    }
                }
            }
        }
        let lengths = violations.is_empty().then(|| self.lengths());
        ValidationReport { violations, rule_count: self.rules.len(), lengths }
    }

    /// Returns the first violation as an error, or the length table.
    pub fn validated(&self) -> Result<LengthTable, SlpError> {
        let report = self.validate();
        match report.violations.into_iter().next() {
            Some(v) => Err(v),
            None => Ok(report.lengths.expect("valid grammar has lengths")),
        }
    }

    /// Exact derived length of every symbol. Length additivity
    /// (len(pair) = len(left) + len(right)) holds by construction.
    ///
    /// Caller must ensure the grammar is valid; panics on forward references.
    pub fn lengths(&self) -> LengthTable {
        let mut lens: Vec<BigUint> = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            let len = match *rule {
                Rule::Terminal(_) => BigUint::one(),
                Rule::Pair(j, k) => &lens[j] + &lens[k],
            };
            lens.push(len);
        }
        LengthTable { lens }
    }

    /// Materializes the derived string of the start symbol, refusing above
    /// `cap` bits.
    pub fn expand(&self, cap: u64) -> Result<BitString, SlpError> {
        let lengths = self.validated()?;
        self.expand_symbol_with(&lengths, self.start(), cap)
    }

    /// Materializes the derived string of an arbitrary symbol.
    pub fn expand_symbol_with(
        &self,
        lengths: &LengthTable,
        symbol: usize,
        cap: u64,
    ) -> Result<BitString, SlpError> {
        let len = lengths.get(symbol);
        if len > &BigUint::from(cap) {
            return Err(SlpError::CapExceeded { len: len.clone(), cap });
        }
        let len = len.to_usize().expect("length under cap fits usize");
        let mut out = BitString::with_capacity(len);
        // Explicit stack; derivation paths can be as long as the rule list.
        let mut stack = vec![symbol];
        while let Some(sym) = stack.pop() {
            match self.rules[sym] {
                Rule::Terminal(b) => out.push(b),
                Rule::Pair(j, k) => {
                    stack.push(k);
                    stack.push(j);
                }
            }
        }
        debug_assert_eq!(out.len(), len);
        Ok(out)
    }

    /// Random access: the `i`-th character (zero-based) of the derived
    /// string, by descent through the length table. Goes left when the index
    /// falls inside the left child, otherwise subtracts the left length and
    /// goes right.
    pub fn access_with(&self, lengths: &LengthTable, i: &BigUint) -> Result<u8, SlpError> {
        let total = lengths.start_len();
        if i >= total {
            return Err(SlpError::OutOfRange { index: i.clone(), len: total.clone() });
        }
        let mut sym = self.start();
        let mut offset = i.clone();
        loop {
            match self.rules[sym] {
                Rule::Terminal(b) => {
                    debug_assert!(offset.is_zero());
                    return Ok(b);
                }
                Rule::Pair(j, k) => {
                    let left_len = lengths.get(j);
                    if &offset < left_len {
                        sym = j;
                    } else {
                        offset -= left_len;
                        sym = k;
                    }
                }
            }
        }
    }

    /// Convenience wrapper that validates and builds the length table first.
    pub fn access(&self, i: &BigUint) -> Result<u8, SlpError> {
        let lengths = self.validated()?;
        self.access_with(&lengths, i)
    }

    /// Longest derivation path from the start symbol to a terminal, in edges.
    pub fn depth(&self) -> u64 {
        let mut depths: Vec<u64> = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            let d = match *rule {
                Rule::Terminal(_) => 0,
                Rule::Pair(j, k) => 1 + depths[j].max(depths[k]),
            };
            depths.push(d);
        }
        *depths.last().expect("depth of empty grammar")
    }

    /// Word size the probe model defaults to: ceil(log2 L), at least 1.
    pub fn default_word_size(&self, lengths: &LengthTable) -> usize {
        (ceil_log2_big(lengths.start_len()) as usize).max(1)
    }

    /// Serializes to the SLPv1 text format.
    ///
    /// ```text
    /// SLPv1 <n>
    /// <i> T <0|1>
    /// <i> N <j> <k>
    /// ```
    ///
    /// Rule numbers are one-based and strictly increasing; the final rule is
    /// the start symbol.
    pub fn to_slpv1(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("SLPv1 {}\n", self.rules.len()));
        for (i, rule) in self.rules.iter().enumerate() {
            match *rule {
                Rule::Terminal(b) => out.push_str(&format!("{} T {}\n", i + 1, b)),
                Rule::Pair(j, k) => {
                    out.push_str(&format!("{} N {} {}\n", i + 1, j + 1, k + 1))
                }
            }
        }
        out
    }

    /// Parses the SLPv1 text format. Only well-formed grammars are produced:
    /// rule numbers must run 1..n in order and pair references must point
    /// strictly backwards.
    pub fn from_slpv1(text: &str) -> Result<Slp, SlpError> {
        let parse_err = |line: usize, msg: &str| SlpError::Parse { line, msg: msg.into() };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty input, expected `SLPv1 <n>` header"))?;
        let mut header_parts = header.split_whitespace();
        match header_parts.next() {
            Some("SLPv1") => {}
            _ => return Err(parse_err(1, "expected `SLPv1 <n>` header")),
        }
        let n: usize = header_parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(1, "header rule count is not a number"))?;
        if header_parts.next().is_some() {
            return Err(parse_err(1, "trailing tokens after header"));
        }
        if n == 0 {
            return Err(parse_err(1, "rule count must be at least 1"));
        }

        let mut rules = Vec::with_capacity(n);
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            if rules.len() == n {
                return Err(parse_err(line_no, "more rules than the header declares"));
            }
            let mut tok = line.split_whitespace();
            let i: usize = tok
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(line_no, "rule index is not a number"))?;
            if i != rules.len() + 1 {
                return Err(parse_err(line_no, "rule index out of order"));
            }
            match tok.next() {
                Some("T") => {
                    let b: u8 = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line_no, "terminal bit is not a number"))?;
                    if b > 1 {
                        return Err(parse_err(line_no, "terminal bit must be 0 or 1"));
                    }
                    rules.push(Rule::Terminal(b));
                }
                Some("N") => {
                    let mut field = || -> Result<usize, SlpError> {
                        tok.next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| parse_err(line_no, "pair reference is not a number"))
                    };
                    let j = field()?;
                    let k = field()?;
                    for r in [j, k] {
                        if r == 0 || r >= i {
                            return Err(parse_err(line_no, "pair reference must point backwards"));
                        }
                    }
                    rules.push(Rule::Pair(j - 1, k - 1));
                }
                _ => return Err(parse_err(line_no, "expected rule kind `T` or `N`")),
            }
            if tok.next().is_some() {
                return Err(parse_err(line_no, "trailing tokens after rule"));
            }
        }
        if rules.len() != n {
            return Err(SlpError::Parse {
                line: text.lines().count(),
                msg: format!("header declares {} rules, found {}", n, rules.len()),
            });
        }
        Ok(Slp { rules })
    }
}

impl fmt::Display for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_slpv1())
    }
}

/// Concatenates the given symbols with a balanced tree of pair rules pushed
/// onto `rules`, returning the root symbol. Creates `items.len() - 1` rules;
/// a single item is returned as-is.
pub(crate) fn balanced_fold(rules: &mut Vec<Rule>, items: &[usize]) -> usize {
    match items.len() {
        0 => unreachable!("fold of zero symbols"),
        1 => items[0],
        len => {
            let mid = len / 2;
            let left = balanced_fold(rules, &items[..mid]);
            let right = balanced_fold(rules, &items[mid..]);
            rules.push(Rule::Pair(left, right));
            rules.len() - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard::{build_sd_grammar, SetInstance};

    fn sd_example() -> Slp {
        build_sd_grammar(&SetInstance::new(4, vec![1, 3]).unwrap())
    }

    #[test]
    fn validate_accepts_sd_example() {
        let slp = sd_example();
        let report = slp.validate();
        assert!(report.is_valid());
        assert_eq!(report.rule_count, 9);
        assert_eq!(report.lengths.unwrap().start_len(), &BigUint::from(16u32));
    }

    #[test]
    fn validate_rejects_self_reference() {
        let slp = Slp::new(vec![Rule::Pair(0, 0)]);
        let report = slp.validate();
        assert_eq!(
            report.violations,
            vec![
                SlpError::ForwardReference { rule: 1, referenced: 1 },
                SlpError::ForwardReference { rule: 1, referenced: 1 },
            ]
        );
    }

    #[test]
    fn validate_rejects_empty() {
        let report = Slp::new(vec![]).validate();
        assert_eq!(report.violations, vec![SlpError::EmptyGrammar]);
    }

    #[test]
    fn lengths_of_terminal() {
        let slp = Slp::new(vec![Rule::Terminal(0)]);
        let t = slp.lengths();
        assert_eq!(t.get(0), &BigUint::one());
    }

    #[test]
    fn length_additivity_on_every_rule() {
        let slp = sd_example();
        let t = slp.lengths();
        for (i, rule) in slp.rules().iter().enumerate() {
            if let Rule::Pair(j, k) = *rule {
                assert_eq!(t.get(i), &(t.get(j) + t.get(k)));
            }
        }
    }

    #[test]
    fn expand_sd_example_matches_known_string() {
        let slp = sd_example();
        assert_eq!(slp.expand(DEFAULT_EXPAND_CAP).unwrap().to_string(), "1010000010100000");
    }

    #[test]
    fn expand_single_terminal() {
        let slp = Slp::new(vec![Rule::Terminal(1)]);
        assert_eq!(slp.expand(16).unwrap().to_string(), "1");
    }

    #[test]
    fn expand_refuses_above_cap() {
        let slp = sd_example();
        match slp.expand(8) {
            Err(SlpError::CapExceeded { len, cap }) => {
                assert_eq!(len, BigUint::from(16u32));
                assert_eq!(cap, 8);
            }
            other => panic!("expected CapExceeded, got {other:?}"),
        }
    }

    #[test]
    fn access_third_character_of_sd_example() {
        let slp = sd_example();
        assert_eq!(slp.access(&BigUint::from(2u32)).unwrap(), 1);
    }

    #[test]
    fn access_out_of_range() {
        let slp = sd_example();
        match slp.access(&BigUint::from(16u32)) {
            Err(SlpError::OutOfRange { index, len }) => {
                assert_eq!(index, BigUint::from(16u32));
                assert_eq!(len, BigUint::from(16u32));
            }
            other => panic!("expected OutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn access_agrees_with_expand_everywhere() {
        // Exhaustive comparison against the expansion oracle.
        let slp = sd_example();
        let lengths = slp.lengths();
        let expanded = slp.expand(DEFAULT_EXPAND_CAP).unwrap();
        for i in 0..expanded.len() {
            assert_eq!(
                slp.access_with(&lengths, &BigUint::from(i)).unwrap(),
                expanded[i],
                "position {i}"
            );
        }
    }

    #[test]
    fn depth_of_terminal_is_zero() {
        assert_eq!(Slp::new(vec![Rule::Terminal(0)]).depth(), 0);
    }

    #[test]
    fn depth_of_doubling_chain() {
        let k = 7;
        let mut rules = vec![Rule::Terminal(0)];
        for i in 1..k {
            rules.push(Rule::Pair(i - 1, i - 1));
        }
        assert_eq!(Slp::new(rules).depth(), (k - 1) as u64);
    }

    #[test]
    fn depth_matches_recursive_oracle() {
        fn oracle(slp: &Slp, sym: usize) -> u64 {
            match slp.rules()[sym] {
                Rule::Terminal(_) => 0,
                Rule::Pair(j, k) => 1 + oracle(slp, j).max(oracle(slp, k)),
            }
        }
        let slp = sd_example();
        assert_eq!(slp.depth(), oracle(&slp, slp.start()));
    }

    #[test]
    fn slpv1_round_trip() {
        let slp = sd_example();
        let text = slp.to_slpv1();
        let back = Slp::from_slpv1(&text).unwrap();
        assert_eq!(back, slp);
    }

    #[test]
    fn slpv1_missing_header() {
        let err = Slp::from_slpv1("1 T 0\n").unwrap_err();
        assert!(matches!(err, SlpError::Parse { line: 1, .. }));
    }

    #[test]
    fn slpv1_index_out_of_order() {
        let err = Slp::from_slpv1("SLPv1 2\n1 T 0\n3 T 1\n").unwrap_err();
        match err {
            SlpError::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("out of order"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slpv1_forward_reference_rejected() {
        let err = Slp::from_slpv1("SLPv1 2\n1 T 0\n2 N 2 1\n").unwrap_err();
        assert!(matches!(err, SlpError::Parse { line: 3, .. }));
    }
}

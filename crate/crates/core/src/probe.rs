//! Cell-probe accounting: fixed-width cell memory with counted reads, the
//! packed read-everything store, the descent store, their hybrid, and the
//! probe-count bench sweep.
//!
//! The memory abstraction only exposes reads through a per-query session
//! that counts them, so a structure cannot observe a cell without paying a
//! probe. Computation between probes is free: once a querier has probed
//! bits, it may decode and work on them arbitrarily.

use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::bwt::build_bwt_hard_grammar;
use crate::grid::{compile_answer_grammar, PointSet};
use crate::hard::{build_blsd_grammar, build_sd_grammar, BlockedInstance, SetInstance};
use crate::rng::DetRng;
use crate::slp::{LengthTable, Rule, Slp, SlpError};
use crate::util::{ceil_log2, ceil_log2_big};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbeError {
    #[error("index {index} out of range for string of length {len}")]
    OutOfRange { index: BigUint, len: BigUint },
    #[error("unknown bench family {0:?} (expected sd, blsd, rc, or bwt-hard)")]
    UnknownFamily(String),
    #[error("left length of symbol {symbol} does not fit the declared field width")]
    LengthFieldOverflow { symbol: usize },
    #[error(transparent)]
    InvalidGrammar(#[from] SlpError),
}

/// An array of w-bit cells, written once at construction. All reads go
/// through a [`ProbeSession`].
#[derive(Debug, Clone)]
pub struct CellMemory {
    word_size: usize,
    bits: Vec<u8>,
}

impl CellMemory {
    /// Packs a bit buffer into cells, zero-padding the tail cell.
    fn from_bits(word_size: usize, mut bits: Vec<u8>) -> Self {
        assert!(word_size >= 1, "cell width must be at least one bit");
        let rem = bits.len() % word_size;
        if rem != 0 {
            bits.resize(bits.len() + (word_size - rem), 0);
        }
        CellMemory { word_size, bits }
    }

    pub fn word_size(&self) -> usize {
        self.word_size
    }

    pub fn cell_count(&self) -> usize {
        self.bits.len() / self.word_size
    }

    fn cell(&self, idx: usize) -> &[u8] {
        &self.bits[idx * self.word_size..(idx + 1) * self.word_size]
    }
}

/// One query session over a memory: owns the probe counter. Sessions are
/// independent, so concurrent queriers each carry their own.
pub struct ProbeSession<'a> {
    mem: &'a CellMemory,
    probes: u64,
}

impl<'a> ProbeSession<'a> {
    pub fn new(mem: &'a CellMemory) -> Self {
        ProbeSession { mem, probes: 0 }
    }

    /// Counted read of one cell.
    pub fn probe(&mut self, cell: usize) -> &'a [u8] {
        self.probes += 1;
        self.mem.cell(cell)
    }

    pub fn probes(&self) -> u64 {
        self.probes
    }
}

fn push_bits_u64(buf: &mut Vec<u8>, value: u64, width: usize) {
    debug_assert!(width == 64 || value < (1u64 << width).max(1));
    for k in (0..width).rev() {
        buf.push(((value >> k) & 1) as u8);
    }
}

fn push_bits_big(buf: &mut Vec<u8>, value: &BigUint, width: usize) {
    debug_assert!(value.bits() as usize <= width);
    for k in (0..width).rev() {
        buf.push(u8::from(value.bit(k as u64)));
    }
}

fn read_bits_u64(bits: &[u8], offset: usize, width: usize) -> u64 {
    bits[offset..offset + width].iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

fn read_bits_big(bits: &[u8], offset: usize, width: usize) -> BigUint {
    let mut acc = BigUint::zero();
    for &b in &bits[offset..offset + width] {
        acc = (acc << 1u8) + b;
    }
    acc
}

/// Fixed-width rule encoding: 1 + 2*ceil(log2 n) bits per rule, packed
/// back-to-back across cells.
#[derive(Debug, Clone)]
pub struct PackedStore {
    mem: CellMemory,
    rule_count: usize,
    bits_per_rule: usize,
}

impl PackedStore {
    pub fn rule_count(&self) -> usize {
        self.rule_count
    }

    pub fn bits_per_rule(&self) -> usize {
        self.bits_per_rule
    }

    pub fn total_bits(&self) -> usize {
        self.rule_count * self.bits_per_rule
    }

    pub fn cell_count(&self) -> usize {
        self.mem.cell_count()
    }

    pub fn word_size(&self) -> usize {
        self.mem.word_size()
    }
}

/// Encodes a grammar into a packed store. Terminals carry their bit in the
/// first index field; a single-rule grammar has zero-width index fields, so
/// its tag bit doubles as the terminal bit.
pub fn pack_grammar(slp: &Slp, word_size: usize) -> PackedStore {
    let n = slp.rule_count();
    let field = ceil_log2(n as u64) as usize;
    let bits_per_rule = 1 + 2 * field;
    let mut bits = Vec::with_capacity(n * bits_per_rule);
    for rule in slp.rules() {
        match *rule {
            Rule::Terminal(b) => {
                if field == 0 {
                    push_bits_u64(&mut bits, b as u64, 1);
                } else {
                    push_bits_u64(&mut bits, 0, 1);
                    push_bits_u64(&mut bits, b as u64, field);
                    push_bits_u64(&mut bits, 0, field);
                }
            }
            Rule::Pair(j, k) => {
                push_bits_u64(&mut bits, 1, 1);
                push_bits_u64(&mut bits, j as u64, field);
                push_bits_u64(&mut bits, k as u64, field);
            }
        }
    }
    PackedStore { mem: CellMemory::from_bits(word_size, bits), rule_count: n, bits_per_rule }
}

fn decode_packed_rules(bits: &[u8], rule_count: usize) -> Vec<Rule> {
    let field = ceil_log2(rule_count as u64) as usize;
    let bits_per_rule = 1 + 2 * field;
    (0..rule_count)
        .map(|r| {
            let at = r * bits_per_rule;
            let tag = bits[at];
            if field == 0 {
                Rule::Terminal(tag)
            } else if tag == 0 {
                Rule::Terminal(read_bits_u64(bits, at + 1, field) as u8)
            } else {
                Rule::Pair(
                    read_bits_u64(bits, at + 1, field) as usize,
                    read_bits_u64(bits, at + 1 + field, field) as usize,
                )
            }
        })
        .collect()
}

/// Decodes the stored rule list back out (through a counted session whose
/// count is discarded). Round-trips `pack_grammar` exactly.
pub fn unpack_rules(store: &PackedStore) -> Vec<Rule> {
    let mut session = ProbeSession::new(&store.mem);
    let bits = read_all_cells(store, &mut session);
    decode_packed_rules(&bits, store.rule_count)
}

fn read_all_cells(store: &PackedStore, session: &mut ProbeSession<'_>) -> Vec<u8> {
    let mut bits = Vec::with_capacity(store.mem.cell_count() * store.mem.word_size());
    for c in 0..store.mem.cell_count() {
        bits.extend_from_slice(session.probe(c));
    }
    bits
}

/// Read-everything query: probes every cell of the packed store (a count
/// independent of the index), then answers for free from the decoded
/// grammar.
pub fn probe_read_all(store: &PackedStore, i: &BigUint) -> Result<(u8, u64), ProbeError> {
    let mut session = ProbeSession::new(&store.mem);
    let bits = read_all_cells(store, &mut session);
    let slp = Slp::new(decode_packed_rules(&bits, store.rule_count));
    let lengths = slp.lengths();
    let bit = slp.access_with(&lengths, i).map_err(|e| match e {
        SlpError::OutOfRange { index, len } => ProbeError::OutOfRange { index, len },
        other => ProbeError::InvalidGrammar(other),
    })?;
    Ok((bit, session.probes()))
}

/// Per-symbol records (tag, left, right, left_length) in identical
/// fixed-width slots, each padded to a whole number of cells so one symbol
/// visit probes exactly `cells_per_symbol` cells.
#[derive(Debug, Clone)]
pub struct DescentStore {
    mem: CellMemory,
    rule_count: usize,
    cells_per_symbol: usize,
    index_width: usize,
    length_width: usize,
    total_len: BigUint,
}

impl DescentStore {
    pub fn build(slp: &Slp, lengths: &LengthTable, word_size: usize) -> Result<Self, ProbeError> {
        let n = slp.rule_count();
        let total_len = lengths.start_len().clone();
        let index_width = ceil_log2(n as u64) as usize;
        let length_width = ceil_log2_big(&(&total_len + 1u32)) as usize;
        let record_bits = 1 + 2 * index_width + length_width;
        let cells_per_symbol = record_bits.div_ceil(word_size);
        let slot_bits = cells_per_symbol * word_size;

        let mut bits = Vec::with_capacity(n * slot_bits);
        for (sym, rule) in slp.rules().iter().enumerate() {
            let start = bits.len();
            match *rule {
                Rule::Terminal(b) => {
                    push_bits_u64(&mut bits, 0, 1);
                    if index_width > 0 {
                        push_bits_u64(&mut bits, b as u64, index_width);
                        push_bits_u64(&mut bits, 0, index_width);
                        push_bits_u64(&mut bits, 0, length_width);
                    } else {
                        // Single-rule grammar: the bit rides in the length
                        // field, which is at least one bit wide.
                        push_bits_u64(&mut bits, b as u64, length_width);
                    }
                }
                Rule::Pair(j, k) => {
                    let left_len = lengths.get(j);
                    if left_len.bits() as usize > length_width {
                        return Err(ProbeError::LengthFieldOverflow { symbol: sym });
                    }
                    push_bits_u64(&mut bits, 1, 1);
                    push_bits_u64(&mut bits, j as u64, index_width);
                    push_bits_u64(&mut bits, k as u64, index_width);
                    push_bits_big(&mut bits, left_len, length_width);
                }
            }
            bits.resize(start + slot_bits, 0);
        }
        Ok(DescentStore {
            mem: CellMemory::from_bits(word_size, bits),
            rule_count: n,
            cells_per_symbol,
            index_width,
            length_width,
            total_len,
        })
    }

    pub fn cells_per_symbol(&self) -> usize {
        self.cells_per_symbol
    }

    pub fn cell_count(&self) -> usize {
        self.mem.cell_count()
    }

    pub fn total_len(&self) -> &BigUint {
        &self.total_len
    }
}

/// Descent query: probes the record of every node on the derivation path.
/// The probe count is (nodes visited) * cells_per_symbol.
pub fn probe_descent(store: &DescentStore, i: &BigUint) -> Result<(u8, u64), ProbeError> {
    if i >= &store.total_len {
        return Err(ProbeError::OutOfRange { index: i.clone(), len: store.total_len.clone() });
    }
    let mut session = ProbeSession::new(&store.mem);
    let mut sym = store.rule_count - 1;
    let mut offset = i.clone();
    loop {
        let mut record = Vec::with_capacity(store.cells_per_symbol * store.mem.word_size());
        for c in 0..store.cells_per_symbol {
            record.extend_from_slice(session.probe(sym * store.cells_per_symbol + c));
        }
        let tag = record[0];
        if tag == 0 {
            let bit = if store.index_width > 0 {
                read_bits_u64(&record, 1, store.index_width) as u8
            } else {
                read_bits_u64(&record, 1, store.length_width) as u8
            };
            return Ok((bit, session.probes()));
        }
        let left = read_bits_u64(&record, 1, store.index_width) as usize;
        let right = read_bits_u64(&record, 1 + store.index_width, store.index_width) as usize;
        let left_len = read_bits_big(&record, 1 + 2 * store.index_width, store.length_width);
        if offset < left_len {
            sym = left;
        } else {
            offset -= left_len;
            sym = right;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    ReadAll,
    Descent,
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureKind::ReadAll => f.write_str("read_all"),
            StructureKind::Descent => f.write_str("descent"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridAnswer {
    pub bit: u8,
    pub probes: u64,
    pub chosen: StructureKind,
}

/// Both stores side by side; queries go to the one with the smaller
/// worst-case probe count for this instance (ties favor read-all).
#[derive(Debug, Clone)]
pub struct HybridStore {
    packed: PackedStore,
    descent: DescentStore,
    descent_worst: u64,
}

impl HybridStore {
    pub fn build(slp: &Slp, word_size: usize) -> Result<Self, ProbeError> {
        let lengths = slp.validated()?;
        let packed = pack_grammar(slp, word_size);
        let descent = DescentStore::build(slp, &lengths, word_size)?;
        let descent_worst = (slp.depth() + 1) * descent.cells_per_symbol as u64;
        Ok(HybridStore { packed, descent, descent_worst })
    }

    /// Worst-case probes of the read-everything component: its cell count.
    pub fn read_all_worst(&self) -> u64 {
        self.packed.cell_count() as u64
    }

    /// Worst-case probes of the descent component: (depth+1) record visits.
    pub fn descent_worst(&self) -> u64 {
        self.descent_worst
    }

    pub fn chosen(&self) -> StructureKind {
        if self.read_all_worst() <= self.descent_worst() {
            StructureKind::ReadAll
        } else {
            StructureKind::Descent
        }
    }

    /// Worst-case probes of the hybrid: the min of its components.
    pub fn worst_case(&self) -> u64 {
        self.read_all_worst().min(self.descent_worst())
    }

    pub fn access(&self, i: &BigUint) -> Result<HybridAnswer, ProbeError> {
        let chosen = self.chosen();
        let (bit, probes) = match chosen {
            StructureKind::ReadAll => probe_read_all(&self.packed, i)?,
            StructureKind::Descent => probe_descent(&self.descent, i)?,
        };
        Ok(HybridAnswer { bit, probes, chosen })
    }
}

/// One-shot build-and-query of the hybrid structure.
pub fn hybrid_access(slp: &Slp, word_size: usize, i: &BigUint) -> Result<HybridAnswer, ProbeError> {
    HybridStore::build(slp, word_size)?.access(i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchFamily {
    Sd,
    Blsd,
    Rc,
    BwtHard,
}

impl BenchFamily {
    pub fn name(self) -> &'static str {
        match self {
            BenchFamily::Sd => "sd",
            BenchFamily::Blsd => "blsd",
            BenchFamily::Rc => "rc",
            BenchFamily::BwtHard => "bwt-hard",
        }
    }
}

impl std::str::FromStr for BenchFamily {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self, ProbeError> {
        match s {
            "sd" => Ok(BenchFamily::Sd),
            "blsd" => Ok(BenchFamily::Blsd),
            "rc" => Ok(BenchFamily::Rc),
            "bwt-hard" => Ok(BenchFamily::BwtHard),
            other => Err(ProbeError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordPolicy {
    /// ceil(log2 L) bits, at least 1.
    Auto,
    Fixed(usize),
}

/// One row of the probe bench report. The CSV schema is
/// (family, params, n, L, w, structure, worst_probes, mean_probes);
/// `read_all_worst` and `descent_worst` carry the per-component worst cases
/// the hybrid row is compared against.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub family: String,
    pub params: String,
    #[serde(rename = "n")]
    pub rule_count: usize,
    #[serde(rename = "L")]
    pub string_len: String,
    #[serde(rename = "w")]
    pub word_size: usize,
    pub structure: String,
    pub worst_probes: u64,
    pub mean_probes: f64,
    pub read_all_worst: u64,
    pub descent_worst: u64,
}

/// Index count above which the sweep samples instead of enumerating.
const FULL_SWEEP_LIMIT: u64 = 1 << 16;
const SAMPLED_QUERIES: usize = 4096;

fn instance_rng(seed: u64, k: usize) -> DetRng {
    DetRng::new(seed ^ (k as u64).wrapping_mul(0x9e3779b97f4a7c15))
}

/// Rebuilds the grammar behind one bench row, so a reported instance can be
/// reproduced from (family, k, seed) alone.
pub fn bench_instance_grammar(family: BenchFamily, k: usize, seed: u64) -> (Slp, String) {
    let mut rng = instance_rng(seed, k);
    bench_instance(family, k, &mut rng)
}

fn bench_instance(family: BenchFamily, k: usize, rng: &mut DetRng) -> (Slp, String) {
    match family {
        BenchFamily::Sd => {
            let inst = SetInstance::new(k, rng.subset(k)).expect("valid instance");
            (build_sd_grammar(&inst), format!("m={k}"))
        }
        BenchFamily::Blsd => {
            let inst = BlockedInstance::new(k, k, rng.subset(k * k)).expect("valid instance");
            (build_blsd_grammar(&inst), format!("B={k};N={k}"))
        }
        BenchFamily::Rc => {
            let (w, h, p) = (1usize << k, 1usize << k, 1usize << k);
            let points = (0..p)
                .map(|_| (rng.next_below(w) + 1, rng.next_below(h) + 1))
                .collect();
            let ps = PointSet::new(w, h, points).expect("points on grid");
            (
                compile_answer_grammar(&ps).expect("power-of-two width compiles"),
                format!("W={w};H={h};P={p}"),
            )
        }
        BenchFamily::BwtHard => {
            let inst = BlockedInstance::new(k, k, rng.subset(k * k)).expect("valid instance");
            (build_bwt_hard_grammar(&inst), format!("B={k};N={k}"))
        }
    }
}

/// Uniform index below `len` from the deterministic generator.
pub fn sample_index(rng: &mut DetRng, len: &BigUint) -> BigUint {
    if let Some(l) = len.to_u64() {
        return BigUint::from(rng.next_u64() % l);
    }
    let nbits = len.bits();
    loop {
        let mut candidate = BigUint::zero();
        for _ in 0..nbits.div_ceil(64) {
            candidate = (candidate << 64u32) + rng.next_u64();
        }
        candidate >>= (nbits.div_ceil(64) * 64 - nbits) as u32;
        if &candidate < len {
            return candidate;
        }
    }
}

fn measure_probes(store: &HybridStore, queries: &[BigUint]) -> (u64, f64) {
    let tally = |i: &BigUint| store.access(i).expect("query below L").probes;
    #[cfg(feature = "parallel")]
    let (worst, total) = queries
        .par_iter()
        .map(|i| {
            let p = tally(i);
            (p, p as u128)
        })
        .reduce(|| (0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    #[cfg(not(feature = "parallel"))]
    let (worst, total) = queries.iter().map(|i| {
        let p = tally(i);
        (p, p as u128)
    }).fold((0u64, 0u128), |a, b| (a.0.max(b.0), a.1 + b.1));
    (worst, total as f64 / queries.len() as f64)
}

/// Sweeps one instance family over parameter k in lo..=hi and reports
/// measured probe counts of the hybrid structure next to its components'
/// worst cases. Deterministic for a fixed seed.
pub fn bench_sweep(
    family: BenchFamily,
    lo: usize,
    hi: usize,
    policy: WordPolicy,
    seed: u64,
) -> Result<Vec<BenchRecord>, ProbeError> {
    let mut records = Vec::new();
    for k in lo..=hi {
        let mut rng = instance_rng(seed, k);
        let (slp, params) = bench_instance(family, k, &mut rng);
        let lengths = slp.validated()?;
        let len = lengths.start_len().clone();
        let word_size = match policy {
            WordPolicy::Auto => (ceil_log2_big(&len) as usize).max(1),
            WordPolicy::Fixed(w) => w.max(1),
        };
        let store = HybridStore::build(&slp, word_size)?;
        let queries: Vec<BigUint> = match len.to_u64() {
            Some(l) if l <= FULL_SWEEP_LIMIT => (0..l).map(BigUint::from).collect(),
            _ => (0..SAMPLED_QUERIES).map(|_| sample_index(&mut rng, &len)).collect(),
        };
        let (worst, mean) = measure_probes(&store, &queries);
        records.push(BenchRecord {
            family: family.name().to_string(),
            params,
            rule_count: slp.rule_count(),
            string_len: len.to_string(),
            word_size,
            structure: format!("hybrid:{}", store.chosen()),
            worst_probes: worst,
            mean_probes: mean,
            read_all_worst: store.read_all_worst(),
            descent_worst: store.descent_worst(),
        });
    }
    Ok(records)
}

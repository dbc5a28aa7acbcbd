//! 2D dominance counting on a grid, the answer-string oracle, and the
//! answer-string grammar compiler.
//!
//! The answer string of a point set on a W x H grid concatenates, row by row
//! and left to right, the parity of every dominance count: bit (y-1)*W +
//! (x-1) is `|{p : px <= x, py <= y}| mod 2`. The compiler represents that
//! string as an SLP by sweeping rows top to bottom with a one-dimensional
//! range tree over the columns, maintaining a negation symbol for every tree
//! symbol. Adding a point at column c flips the suffix of the current row
//! starting at c: the leaf-to-root path is rebuilt (two new symbols per
//! level, one plus its negation) and right-hanging siblings swap to their
//! preexisting negations for free.

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bitstring::BitString;
use crate::slp::{balanced_fold, Rule, Slp, DEFAULT_EXPAND_CAP};
use crate::util::{ceil_log2, next_power_of_two};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("point or query ({x},{y}) outside {width}x{height} grid")]
    OutOfGrid { x: usize, y: usize, width: usize, height: usize },
    #[error("answer string of {cells} bits exceeds materialization cap {cap}")]
    CapExceeded { cells: u128, cap: u64 },
    #[error("grid width {0} is not a power of two and auto-padding is disabled")]
    WidthNotPowerOfTwo(usize),
    #[error("compiled grammar disagrees with the answer oracle at bit {position}")]
    CompilerMismatch { position: usize },
    #[error("compiled grammar has {rules} rules, above the declared bound {bound}")]
    RuleBoundExceeded { rules: usize, bound: usize },
}

/// A multiset of 1-based integer points on a W x H grid. Duplicates are
/// allowed and carry parity semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    width: usize,
    height: usize,
    points: Vec<(usize, usize)>,
}

impl PointSet {
    pub fn new(width: usize, height: usize, points: Vec<(usize, usize)>) -> Result<Self, GridError> {
        assert!(width >= 1 && height >= 1, "grid dimensions must be positive");
        for &(x, y) in &points {
            if x == 0 || x > width || y == 0 || y > height {
                return Err(GridError::OutOfGrid { x, y, width, height });
            }
        }
        Ok(PointSet { width, height, points })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn points(&self) -> &[(usize, usize)] {
        &self.points
    }

    /// Same points on a grid whose width is padded up to the next power of
    /// two with zero-filled columns.
    pub fn padded(&self) -> PointSet {
        PointSet {
            width: next_power_of_two(self.width),
            height: self.height,
            points: self.points.clone(),
        }
    }

    /// Exact number of points inside the dominance rectangle [1,x] x [1,y],
    /// counting multiplicity.
    pub fn dominance_count(&self, x: usize, y: usize) -> Result<usize, GridError> {
        if x == 0 || x > self.width || y == 0 || y > self.height {
            return Err(GridError::OutOfGrid { x, y, width: self.width, height: self.height });
        }
        Ok(self.points.iter().filter(|&&(px, py)| px <= x && py <= y).count())
    }
}

/// The full answer string: dominance parities of every (x, y), row by row.
pub fn answer_oracle(ps: &PointSet) -> Result<BitString, GridError> {
    answer_oracle_with_cap(ps, DEFAULT_EXPAND_CAP)
}

pub fn answer_oracle_with_cap(ps: &PointSet, cap: u64) -> Result<BitString, GridError> {
    let cells = ps.width as u128 * ps.height as u128;
    if cells > cap as u128 {
        return Err(GridError::CapExceeded { cells, cap });
    }
    // Small grids finish before the thread pool wakes up.
    #[cfg(feature = "parallel")]
    if cells >= (1 << 19) {
        return Ok(answer_oracle_par(ps));
    }
    Ok(answer_oracle_seq(ps))
}

fn points_by_row(ps: &PointSet) -> Vec<Vec<usize>> {
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); ps.height + 1];
    for &(px, py) in &ps.points {
        by_row[py].push(px);
    }
    by_row
}

/// Scans rows y0..=y1 given column parities for everything above, writing
/// one answer row at a time: flip the columns hit by the row's points, then
/// emit running prefix parities.
fn scan_rows_into(by_row: &[Vec<usize>], col: &mut [u8], y0: usize, y1: usize, out: &mut [u8]) {
    let width = col.len() - 1;
    let mut at = 0;
    for row in &by_row[y0..=y1] {
        for &px in row {
            col[px] ^= 1;
        }
        let mut parity = 0u8;
        for &c in &col[1..] {
            parity ^= c;
            out[at] = parity;
            at += 1;
        }
    }
    debug_assert_eq!(at, (y1 - y0 + 1) * width);
}

/// Sequential oracle, kept callable for benchmarking against the parallel
/// path. Bounds are the caller's responsibility.
pub fn answer_oracle_seq(ps: &PointSet) -> BitString {
    let by_row = points_by_row(ps);
    let mut col = vec![0u8; ps.width + 1];
    let mut out = vec![0u8; ps.width * ps.height];
    scan_rows_into(&by_row, &mut col, 1, ps.height, &mut out);
    BitString::from_bits(out)
}

#[cfg(feature = "parallel")]
pub fn answer_oracle_par(ps: &PointSet) -> BitString {
    // Contiguous row chunks written straight into one output buffer: each
    // chunk rebuilds the column parities above it in O(P), then scans
    // incrementally like the sequential path.
    const ROW_CHUNK: usize = 64;
    let by_row = points_by_row(ps);
    let width = ps.width;
    let mut out = vec![0u8; width * ps.height];
    out.par_chunks_mut(ROW_CHUNK * width)
        .enumerate()
        .for_each(|(chunk_no, chunk)| {
            let y0 = chunk_no * ROW_CHUNK + 1;
            let y1 = (y0 + ROW_CHUNK - 1).min(ps.height);
            let mut col = vec![0u8; width + 1];
            for &(px, py) in &ps.points {
                if py < y0 {
                    col[px] ^= 1;
                }
            }
            scan_rows_into(&by_row, &mut col, y0, y1, chunk);
        });
    BitString::from_bits(out)
}

/// Declared slack constant for the compiled rule-count bound.
pub const COMPILED_RULE_SLACK: usize = 4;

/// Declared ceiling on the compiled grammar's rule count for a padded width
/// W, height H, and P points.
pub fn compiled_rule_bound(padded_width: usize, height: usize, points: usize) -> usize {
    4 * padded_width
        + 2 * points * ceil_log2(padded_width as u64) as usize
        + 2 * (height - 1)
        + 2 * ceil_log2(height as u64) as usize
        + COMPILED_RULE_SLACK
}

/// Compiler output plus the bookkeeping that tests and the CLI report.
#[derive(Debug, Clone)]
pub struct CompiledAnswerGrammar {
    pub slp: Slp,
    pub original_width: usize,
    pub padded_width: usize,
    /// Every (symbol, negation) pair maintained by the sweep; the second
    /// derives the bitwise complement of the first.
    pub negation_pairs: Vec<(usize, usize)>,
}

/// A reference into the persistent row tree. The `negated` flag reads the
/// node through its complement, which is how whole right-hanging subtrees
/// switch to their negations without new symbols.
#[derive(Clone, Copy)]
struct NodeRef {
    idx: usize,
    negated: bool,
}

impl NodeRef {
    fn negate(self) -> NodeRef {
        NodeRef { idx: self.idx, negated: !self.negated }
    }

    fn through(self, parent_negated: bool) -> NodeRef {
        NodeRef { idx: self.idx, negated: self.negated ^ parent_negated }
    }
}

enum Node {
    Leaf { sym: usize, neg: usize },
    Internal { sym: usize, neg: usize, left: NodeRef, right: NodeRef },
}

struct RowTree {
    nodes: Vec<Node>,
}

impl RowTree {
    fn sym(&self, r: NodeRef) -> usize {
        let (sym, neg) = match self.nodes[r.idx] {
            Node::Leaf { sym, neg } => (sym, neg),
            Node::Internal { sym, neg, .. } => (sym, neg),
        };
        if r.negated {
            neg
        } else {
            sym
        }
    }

    fn neg_sym(&self, r: NodeRef) -> usize {
        self.sym(r.negate())
    }

    /// Flips the row suffix starting at `col`, returning the new root. Pushes
    /// exactly two rules (symbol and negation) per internal level; the leaf
    /// swaps to its preexisting negation.
    fn flip(
        &mut self,
        rules: &mut Vec<Rule>,
        pairs: &mut Vec<(usize, usize)>,
        at: NodeRef,
        width: usize,
        col: usize,
    ) -> NodeRef {
        if width == 1 {
            return at.negate();
        }
        let (left, right) = match self.nodes[at.idx] {
            Node::Internal { left, right, .. } => (left.through(at.negated), right.through(at.negated)),
            Node::Leaf { .. } => unreachable!("internal node expected above width 1"),
        };
        let half = width / 2;
        let (new_left, new_right) = if col < half {
            (self.flip(rules, pairs, left, half, col), right.negate())
        } else {
            (left, self.flip(rules, pairs, right, half, col - half))
        };
        rules.push(Rule::Pair(self.sym(new_left), self.sym(new_right)));
        let sym = rules.len() - 1;
        rules.push(Rule::Pair(self.neg_sym(new_left), self.neg_sym(new_right)));
        let neg = rules.len() - 1;
        pairs.push((sym, neg));
        self.nodes.push(Node::Internal { sym, neg, left: new_left, right: new_right });
        NodeRef { idx: self.nodes.len() - 1, negated: false }
    }
}

/// Compiles the answer string of a point set into a grammar, padding the
/// width up to a power of two. The result derives the answer string of
/// `ps.padded()`.
pub fn compile_answer_grammar(ps: &PointSet) -> Result<Slp, GridError> {
    compile_answer_grammar_detailed(ps, true).map(|c| c.slp)
}

pub fn compile_answer_grammar_detailed(
    ps: &PointSet,
    auto_pad: bool,
) -> Result<CompiledAnswerGrammar, GridError> {
    let padded_width = next_power_of_two(ps.width);
    if padded_width != ps.width && !auto_pad {
        return Err(GridError::WidthNotPowerOfTwo(ps.width));
    }
    let levels = ceil_log2(padded_width as u64) as usize;

    // Shared all-zero / all-one chains double as the initial tree and as the
    // negation targets for untouched subtrees.
    let mut rules = vec![Rule::Terminal(0), Rule::Terminal(1)];
    let mut pairs = vec![(0usize, 1usize)];
    let mut zeros = vec![0usize];
    let mut ones = vec![1usize];
    for l in 1..=levels {
        rules.push(Rule::Pair(zeros[l - 1], zeros[l - 1]));
        zeros.push(rules.len() - 1);
        rules.push(Rule::Pair(ones[l - 1], ones[l - 1]));
        ones.push(rules.len() - 1);
        pairs.push((zeros[l], ones[l]));
    }

    let mut tree = RowTree { nodes: vec![Node::Leaf { sym: zeros[0], neg: ones[0] }] };
    let mut level_roots = vec![0usize];
    for l in 1..=levels {
        let child = NodeRef { idx: level_roots[l - 1], negated: false };
        tree.nodes.push(Node::Internal { sym: zeros[l], neg: ones[l], left: child, right: child });
        level_roots.push(tree.nodes.len() - 1);
    }
    let mut root = NodeRef { idx: level_roots[levels], negated: false };

    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); ps.height + 1];
    for &(px, py) in &ps.points {
        by_row[py].push(px - 1);
    }

    let mut row_syms = Vec::with_capacity(ps.height);
    for row in by_row.iter().skip(1) {
        for &col in row {
            root = tree.flip(&mut rules, &mut pairs, root, padded_width, col);
        }
        row_syms.push(tree.sym(root));
    }

    let start = balanced_fold(&mut rules, &row_syms);
    if start != rules.len() - 1 {
        // A point-free instance can end on a reused row symbol; the start
        // symbol must be the last rule, so duplicate it.
        rules.push(rules[start]);
    }

    let bound = compiled_rule_bound(padded_width, ps.height, ps.points.len());
    if rules.len() > bound {
        return Err(GridError::RuleBoundExceeded { rules: rules.len(), bound });
    }
    Ok(CompiledAnswerGrammar {
        slp: Slp::new(rules),
        original_width: ps.width,
        padded_width,
        negation_pairs: pairs,
    })
}

/// Summary of one oracle-equivalence run of the compiler.
#[derive(Debug, Clone)]
pub struct CompilerCheck {
    pub original_width: usize,
    pub padded_width: usize,
    pub rule_count: usize,
    pub rule_bound: usize,
    pub bits_checked: usize,
}

/// Compiles, expands, and compares bit-for-bit against the answer oracle of
/// the padded instance; also enforces the declared rule-count bound.
pub fn check_answer_compiler(ps: &PointSet) -> Result<CompilerCheck, GridError> {
    let compiled = compile_answer_grammar_detailed(ps, true)?;
    let padded = ps.padded();
    let expected = answer_oracle(&padded)?;
    let got = compiled
        .slp
        .expand(DEFAULT_EXPAND_CAP)
        .expect("compiled grammar is valid and under cap");
    if got != expected {
        let position = got
            .iter()
            .zip(expected.iter())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| got.len().min(expected.len()));
        return Err(GridError::CompilerMismatch { position });
    }
    Ok(CompilerCheck {
        original_width: compiled.original_width,
        padded_width: compiled.padded_width,
        rule_count: compiled.slp.rule_count(),
        rule_bound: compiled_rule_bound(compiled.padded_width, ps.height, ps.points.len()),
        bits_checked: expected.len(),
    })
}

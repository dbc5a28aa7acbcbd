//! LZ77 factorization, LZ78 parsing, and the grammar-size comparison record.
//!
//! The LZ77 variant is self-referential greedy leftmost-longest with pure
//! copy/literal factors (no trailing character per factor); a copy may
//! overlap the factor it produces. Its factor count lower-bounds the rule
//! count of any grammar deriving the same string, which `lz_report` asserts
//! per instance.
//!
//! LZ78 builds the usual prefix-closed phrase dictionary; input that ends
//! mid-walk emits a final (prefix, no extension) marker counted as one
//! phrase so decoding is exact on all lengths.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstring::BitString;
use crate::slp::{Slp, SlpError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LzError {
    #[error(transparent)]
    Expand(#[from] SlpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lz77Factor {
    Literal(u8),
    /// Copy of `len` bits starting at `source`, which is strictly before the
    /// factor's own start (the copied range may overlap the factor).
    Copy { source: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lz77Parse {
    factors: Vec<Lz77Factor>,
}

impl Lz77Parse {
    pub fn factors(&self) -> &[Lz77Factor] {
        &self.factors
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn decode(&self) -> BitString {
        let mut out: Vec<u8> = Vec::new();
        for &f in &self.factors {
            match f {
                Lz77Factor::Literal(b) => out.push(b),
                Lz77Factor::Copy { source, len } => {
                    for k in 0..len {
                        let b = out[source + k];
                        out.push(b);
                    }
                }
            }
        }
        BitString::from_bits(out)
    }
}

/// Greedy leftmost-longest factorization: at each position take the longest
/// match starting strictly earlier (leftmost source on ties), or a literal
/// when no earlier position matches even one bit.
pub fn lz77_parse(s: &BitString) -> Lz77Parse {
    let bits = s.as_slice();
    let mut factors = Vec::new();
    let mut p = 0;
    while p < bits.len() {
        let mut best_len = 0;
        let mut best_src = 0;
        for q in 0..p {
            if bits[q] != bits[p] {
                continue;
            }
            let mut l = 1;
            while p + l < bits.len() && bits[q + l] == bits[p + l] {
                l += 1;
            }
            if l > best_len {
                best_len = l;
                best_src = q;
            }
        }
        if best_len == 0 {
            factors.push(Lz77Factor::Literal(bits[p]));
            p += 1;
        } else {
            factors.push(Lz77Factor::Copy { source: best_src, len: best_len });
            p += best_len;
        }
    }
    Lz77Parse { factors }
}

/// One LZ78 phrase: the longest already-seen phrase (0 is the empty phrase)
/// plus an extension bit; `None` marks the final partial phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lz78Phrase {
    pub prefix: usize,
    pub extension: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lz78Parse {
    phrases: Vec<Lz78Phrase>,
}

impl Lz78Parse {
    pub fn phrases(&self) -> &[Lz78Phrase] {
        &self.phrases
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.len()
    }

    pub fn decode(&self) -> BitString {
        // Phrase strings, 1-based; phrase 0 is empty.
        let mut strings: Vec<Vec<u8>> = vec![Vec::new()];
        let mut out = Vec::new();
        for &Lz78Phrase { prefix, extension } in &self.phrases {
            let mut s = strings[prefix].clone();
            if let Some(b) = extension {
                s.push(b);
            }
            out.extend_from_slice(&s);
            strings.push(s);
        }
        BitString::from_bits(out)
    }
}

/// Standard LZ78 dictionary parse over the binary alphabet.
pub fn lz78_parse(s: &BitString) -> Lz78Parse {
    // children[node][bit] -> phrase id; node 0 is the empty phrase.
    let mut children: Vec<[Option<usize>; 2]> = vec![[None; 2]];
    let mut phrases = Vec::new();
    let mut node = 0usize;
    for b in s.iter() {
        match children[node][b as usize] {
            Some(next) => node = next,
            None => {
                let id = children.len();
                children[node][b as usize] = Some(id);
                children.push([None; 2]);
                phrases.push(Lz78Phrase { prefix: node, extension: Some(b) });
                node = 0;
            }
        }
    }
    if node != 0 {
        phrases.push(Lz78Phrase { prefix: node, extension: None });
    }
    Lz78Parse { phrases }
}

/// Comparison record for one grammar: its size against the LZ sizes of the
/// string it derives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LzReport {
    pub grammar_size: usize,
    pub string_length: usize,
    pub lz77_factors: usize,
    pub lz78_phrases: usize,
    pub lz77_variant: String,
}

pub const LZ77_VARIANT: &str = "self-referential greedy leftmost-longest, copy/literal factors";

/// Expands the grammar and reports both parse sizes. The factor count of the
/// LZ77 variant never exceeds the rule count of a grammar deriving the same
/// string; that law is asserted here per instance.
pub fn lz_report(slp: &Slp, cap: u64) -> Result<LzReport, LzError> {
    let s = slp.expand(cap)?;
    let lz77 = lz77_parse(&s);
    let lz78 = lz78_parse(&s);
    assert!(
        lz77.factor_count() <= slp.rule_count(),
        "LZ77 produced {} factors for a grammar of {} rules",
        lz77.factor_count(),
        slp.rule_count()
    );
    Ok(LzReport {
        grammar_size: slp.rule_count(),
        string_length: s.len(),
        lz77_factors: lz77.factor_count(),
        lz78_phrases: lz78.phrase_count(),
        lz77_variant: LZ77_VARIANT.to_string(),
    })
}

//! Grammar-compressed strings and the constructions around them: straight-
//! line programs with validated random access, set-disjointness hard-grammar
//! generators, a range-counting answer-string compiler, butterfly-graph
//! reachability via dominance counting, Burrows-Wheeler and Lempel-Ziv
//! codecs, and a cell-probe harness that meters memory reads.
//!
//! Everything is exact at desk scale: derived lengths are arbitrary-
//! precision, materialization is capped, and each construction ships with a
//! brute-force oracle it is checked against.
//!
//! The `parallel` feature (on by default) runs the data-parallel inner loops
//! (exhaustive verification sweeps, rotation sorts, oracle grids, probe
//! sweeps) on rayon; without it everything falls back to sequential code
//! with identical results.

pub mod bitstring;
pub mod butterfly;
pub mod bwt;
pub mod grid;
pub mod hard;
pub mod lz;
pub mod probe;
pub mod rng;
pub mod slp;
pub mod util;

pub use bitstring::BitString;
pub use hard::{BlockedInstance, SetInstance};
pub use slp::{LengthTable, Rule, Slp, SlpError, DEFAULT_EXPAND_CAP};

//! Small integer helpers shared across modules.

use num_bigint::BigUint;
use num_traits::Zero;

/// ceil(log2(x)) for x >= 1; returns 0 for x <= 1.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// ceil(log2(x)) for arbitrary-precision x >= 1; returns 0 for x <= 1.
pub fn ceil_log2_big(x: &BigUint) -> u64 {
    if x.is_zero() {
        return 0;
    }
    let minus_one = x - 1u32;
    minus_one.bits()
}

/// Smallest power of two >= x (x >= 1).
pub fn next_power_of_two(x: usize) -> usize {
    x.max(1).next_power_of_two()
}

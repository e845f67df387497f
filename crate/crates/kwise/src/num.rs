//! Scalar abstractions for the exact-arithmetic lanes.
//!
//! Counting vectors by residue and ranking them lexicographically needs
//! integers up to 2^N; the signed Pascal triangle needs entries up to
//! C(n, n/2). Both get a machine-width backend for small instances and an
//! arbitrary-precision backend beyond, behind one trait each. Concrete
//! aliases live at the crate root.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use std::ops::{Add, AddAssign, Neg};

/// Unsigned exact counting scalar: u64/u128 while counts fit, BigUint beyond.
pub trait Count: Zero + One + Clone + Ord + Add<Output = Self> + AddAssign {
    /// Largest vector length N such that 2^N is representable. `None` means
    /// unbounded.
    fn max_count_bits() -> Option<u32>;
    fn from_biguint(v: &BigUint) -> Option<Self>;
}

impl Count for u64 {
    fn max_count_bits() -> Option<u32> {
        Some(63)
    }
    fn from_biguint(v: &BigUint) -> Option<Self> {
        u64::try_from(v).ok()
    }
}

impl Count for u128 {
    fn max_count_bits() -> Option<u32> {
        Some(127)
    }
    fn from_biguint(v: &BigUint) -> Option<Self> {
        u128::try_from(v).ok()
    }
}

impl Count for BigUint {
    fn max_count_bits() -> Option<u32> {
        None
    }
    fn from_biguint(v: &BigUint) -> Option<Self> {
        Some(v.clone())
    }
}

/// Signed triangle entry scalar: i64/i128 below ~120 rows, BigInt beyond.
pub trait Entry:
    Zero + One + Clone + Ord + Add<Output = Self> + AddAssign + Neg<Output = Self>
{
    /// Largest row count for which entries (bounded by central binomials)
    /// are guaranteed representable. `None` means unbounded.
    fn max_rows() -> Option<u32>;
    fn from_i64(v: i64) -> Self;
}

impl Entry for i64 {
    fn max_rows() -> Option<u32> {
        // C(60, 30) < 2^60
        Some(60)
    }
    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Entry for i128 {
    fn max_rows() -> Option<u32> {
        // C(120, 60) < 2^117
        Some(120)
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

impl Entry for BigInt {
    fn max_rows() -> Option<u32> {
        None
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

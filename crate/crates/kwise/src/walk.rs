//! Partial-sum paths S_n = Σ_{i≤n} X_i, optionally reduced mod m.

use crate::error::{Error, Result};
use crate::seed::Sign;
use crate::sign_seq::SignSequence;

/// Partial sums of a ±1 sequence, with an optional reduced-mod-m track and
/// checkpoint indices I_j attached by block constructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    sums: Vec<i64>,
    modulus: Option<u32>,
    reduced: Option<Vec<u32>>,
    checkpoints: Vec<u64>,
}

impl WalkPath {
    /// Sums S_1..S_n (or S'_0..S'_n when the caller included X_0).
    pub fn sums(&self) -> &[i64] {
        &self.sums
    }

    pub fn modulus(&self) -> Option<u32> {
        self.modulus
    }

    /// Parallel track of S_i mod m, present when a modulus was given.
    pub fn reduced(&self) -> Option<&[u32]> {
        self.reduced.as_deref()
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<u64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn max(&self) -> i64 {
        *self.sums.iter().max().expect("nonempty by construction")
    }

    pub fn min(&self) -> i64 {
        *self.sums.iter().min().expect("nonempty by construction")
    }

    pub fn max_abs(&self) -> i64 {
        self.sums.iter().map(|s| s.abs()).max().expect("nonempty")
    }
}

/// Accumulates partial sums of `xs`; with a modulus, also the reduced track.
///
/// Errors on empty input and on modulus 0.
pub fn accumulate_walk(xs: &[Sign], modulus: Option<u32>) -> Result<WalkPath> {
    if xs.is_empty() {
        return Err(Error::InvalidParameter("empty sign sequence".into()));
    }
    if modulus == Some(0) {
        return Err(Error::InvalidParameter("modulus must be positive".into()));
    }
    let mut sums = Vec::with_capacity(xs.len());
    let mut acc = 0i64;
    for &x in xs {
        assert!(x == 1 || x == -1, "sign sequence contract violated: {x}");
        acc += x as i64;
        sums.push(acc);
    }
    let reduced = modulus.map(|m| {
        sums.iter()
            .map(|&s| (s.rem_euclid(m as i64)) as u32)
            .collect()
    });
    Ok(WalkPath {
        sums,
        modulus,
        reduced,
        checkpoints: Vec::new(),
    })
}

/// Convenience wrapper over [`accumulate_walk`] for constructed sequences.
pub fn walk_of(seq: &SignSequence, modulus: Option<u32>) -> Result<WalkPath> {
    accumulate_walk(seq.values(), modulus)
}

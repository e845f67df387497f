//! The m = 4 warm-up construction: condition i.i.d. signs so every length-L
//! block has product +1.
//!
//! Realized without rejection: the first L−1 entries of each block are fresh
//! draws and the L-th is the product of those L−1 (a bijection onto the
//! conditioned block law). A product-+1 block has an even number of −1's, so
//! its sum is L − 4·(#pairs of −1's) ≡ 0 (mod 4) whenever 4 | L, making
//! S_{jL} ≡ 0 (mod 4) combinatorially — for every seed, not just with high
//! probability. Any k < L positions miss a coordinate of every block, so the
//! family stays k-wise independent.

use crate::error::{Error, Result};
use crate::lab::{FiniteSeedSpace, SequenceSampler};
use crate::seed::{SeedStream, Sign};
use crate::sign_seq::{ConstructionParams, ConstructionTag, SignSequence};

fn check_m4_params(k: u32, block_len: u64) -> Result<()> {
    if block_len <= k as u64 {
        return Err(Error::InvalidParameter(format!(
            "block length L = {block_len} must exceed k = {k}"
        )));
    }
    if block_len % 4 != 0 {
        return Err(Error::InvalidParameter(format!(
            "block length L = {block_len} must be divisible by 4"
        )));
    }
    Ok(())
}

/// Blocks of length L with the last entry forced to the product of the rest.
///
/// `horizon` must be a positive multiple of L.
pub fn build_m4_sequence(
    k: u32,
    block_len: u64,
    horizon: u64,
    stream: &mut SeedStream,
) -> Result<SignSequence> {
    check_m4_params(k, block_len)?;
    if horizon == 0 || horizon % block_len != 0 {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must be a positive multiple of L = {block_len}"
        )));
    }
    let values = m4_values(block_len, horizon as usize, stream);
    Ok(SignSequence::from_parts(
        values,
        ConstructionTag::M4Block,
        ConstructionParams {
            k: Some(k),
            m: Some(4),
            epsilon: None,
            block_len: Some(block_len),
        },
    ))
}

fn m4_values(block_len: u64, len: usize, stream: &mut SeedStream) -> Vec<Sign> {
    let l = block_len as usize;
    let blocks = len.div_ceil(l);
    let mut values = Vec::with_capacity(blocks * l);
    for _ in 0..blocks {
        let mut product = 1i8;
        for _ in 0..l - 1 {
            let x = stream.next_sign();
            product *= x;
            values.push(x);
        }
        values.push(product);
    }
    values.truncate(len);
    values
}

/// Monte-Carlo sampler; lengths that are not block multiples are generated a
/// block over and truncated.
pub struct M4Sampler {
    pub k: u32,
    pub block_len: u64,
}

impl SequenceSampler for M4Sampler {
    fn sample_sequence(&self, stream: &mut SeedStream, len: usize) -> Vec<Sign> {
        m4_values(self.block_len, len, stream)
    }
    fn name(&self) -> String {
        format!("m4(L={})", self.block_len)
    }
}

/// Finite seed space of `blocks` consecutive blocks: L−1 free bits per block,
/// position aL+L the forced product. Positions are 1-based.
pub struct M4Finite {
    pub block_len: u64,
    pub blocks: u32,
}

impl FiniteSeedSpace for M4Finite {
    fn seed_bits(&self) -> u32 {
        self.blocks * (self.block_len as u32 - 1)
    }
    fn sign(&self, seed: u64, index: u64) -> Sign {
        assert!(
            index >= 1 && index <= self.block_len * self.blocks as u64,
            "position out of range"
        );
        let free = self.block_len - 1;
        let block = (index - 1) / self.block_len;
        let offset = (index - 1) % self.block_len;
        let bit = |b: u64| -> Sign {
            if seed >> b & 1 == 0 {
                1
            } else {
                -1
            }
        };
        if offset < free {
            bit(block * free + offset)
        } else {
            let base = block * free;
            let minus_count = (0..free).filter(|&o| seed >> (base + o) & 1 == 1).count();
            if minus_count % 2 == 0 {
                1
            } else {
                -1
            }
        }
    }
}

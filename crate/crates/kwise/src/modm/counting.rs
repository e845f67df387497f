//! Exact counting of ±1 vectors by sum residue, and lexicographic ranking
//! within a residue class.
//!
//! Both are dynamic programs over partial sums mod m, generic over the
//! counting scalar: u64/u128 while 2^N fits, BigUint beyond. No 2^N table is
//! ever materialized; a rank query costs O(N·m) scalar additions.

use crate::error::{Error, Result};
use crate::num::Count;
use crate::seed::Sign;

/// `counts[r]` = #{v ∈ {±1}^len : Σ v_i ≡ r (mod m)}. Total is 2^len.
pub fn residue_counts<C: Count>(len: u64, m: u32) -> Result<Vec<C>> {
    Ok(count_tables(len, m)?.pop().expect("len+1 rows"))
}

/// All rows of the DP: row l holds the residue counts for length-l vectors.
fn count_tables<C: Count>(len: u64, m: u32) -> Result<Vec<Vec<C>>> {
    if m < 2 {
        return Err(Error::InvalidParameter("modulus must be ≥ 2".into()));
    }
    if let Some(bits) = C::max_count_bits() {
        if len > bits as u64 {
            return Err(Error::InvalidParameter(format!(
                "length {len} overflows the counting scalar (max {bits} bits)"
            )));
        }
    }
    let m = m as usize;
    let mut rows: Vec<Vec<C>> = Vec::with_capacity(len as usize + 1);
    let mut row: Vec<C> = vec![C::zero(); m];
    row[0] = C::one();
    rows.push(row.clone());
    for _ in 0..len {
        let mut next: Vec<C> = vec![C::zero(); m];
        for (r, cell) in next.iter_mut().enumerate() {
            let up = row[(r + 1) % m].clone();
            let down = row[(r + m - 1) % m].clone();
            *cell = up + down;
        }
        rows.push(next.clone());
        row = next;
    }
    Ok(rows)
}

/// Rank oracle for length-n vectors under the lexicographic order with
/// position 0 most significant and −1 < +1.
pub struct RankTables<C> {
    n: u64,
    m: u32,
    /// rows[l][r]: residue counts for suffixes of length l.
    rows: Vec<Vec<C>>,
}

impl<C: Count> RankTables<C> {
    pub fn new(n: u64, m: u32) -> Result<Self> {
        Ok(RankTables {
            n,
            m,
            rows: count_tables(n, m)?,
        })
    }

    /// Length of the vectors being ranked.
    pub fn vector_len(&self) -> u64 {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.m
    }

    /// #{v ∈ {±1}^n : Σ v ≡ r (mod m)}.
    pub fn class_count(&self, r: u32) -> &C {
        &self.rows[self.n as usize][(r % self.m) as usize]
    }

    /// Residue of Σ v mod m.
    pub fn residue_of(v: &[Sign], m: u32) -> u32 {
        let sum: i64 = v.iter().map(|&x| x as i64).sum();
        sum.rem_euclid(m as i64) as u32
    }

    /// Number of vectors with the same length and sum residue as `v` that
    /// precede it lexicographically.
    pub fn rank_in_class(&self, v: &[Sign]) -> C {
        assert_eq!(v.len() as u64, self.n, "vector length mismatch");
        let m = self.m as i64;
        let target = Self::residue_of(v, self.m) as i64;
        let mut rank = C::zero();
        let mut prefix = 0i64;
        for (i, &x) in v.iter().enumerate() {
            if x == 1 {
                // branch where position i takes −1 instead; any suffix with
                // the complementary residue stays below v
                let needed = (target - prefix + 1).rem_euclid(m) as usize;
                let suffix_len = v.len() - i - 1;
                rank += self.rows[suffix_len][needed].clone();
            }
            prefix += x as i64;
        }
        rank
    }
}

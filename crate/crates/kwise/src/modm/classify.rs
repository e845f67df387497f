//! Block classification: partition {±1}^N by sum residue mod m into trimmed
//! equal-size classes G_0, G_2, …, G_{m−2} plus the leftover set S.
//!
//! A is the minimum class count over even residues; within each residue
//! class the A lexicographically-smallest vectors form G_j and the rest go
//! to S, so |S| = 2^N − (m/2)·A. Any deterministic trimming rule works for
//! the construction; lexicographic rank keeps membership computable in
//! O(N·m) without materializing 2^N vectors.

use crate::error::{Error, Result};
use crate::modm::counting::RankTables;
use crate::num::Count;
use crate::seed::Sign;
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Label of a length-N block: class G_j (j even) or the leftover set S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BlockLabel {
    /// In G_j, where j is the block's sum residue mod m.
    Class(u32),
    /// In S.
    Leftover,
}

impl BlockLabel {
    pub fn is_leftover(&self) -> bool {
        matches!(self, BlockLabel::Leftover)
    }
}

/// Exact sizes of the classification of {±1}^n by sum residue mod m.
#[derive(Debug, Clone)]
pub struct BlockClassification {
    n: u64,
    m: u32,
    class_size: BigUint,
    residue_counts: Vec<BigUint>,
    leftover_size: BigUint,
}

impl BlockClassification {
    /// Requires even n (sums of an even number of ±1 are even) and even
    /// m ≥ 2.
    pub fn new(n: u64, m: u32) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "block length must be even and positive, got {n}"
            )));
        }
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "working modulus must be even and ≥ 2, got {m}"
            )));
        }
        let residue_counts: Vec<BigUint> = super::counting::residue_counts(n, m)?;
        let class_size = (0..m)
            .step_by(2)
            .map(|r| residue_counts[r as usize].clone())
            .min()
            .expect("m ≥ 2");
        let total = BigUint::one() << n;
        let leftover_size = &total - &class_size * BigUint::from(m / 2);
        Ok(BlockClassification {
            n,
            m,
            class_size,
            residue_counts,
            leftover_size,
        })
    }

    pub fn block_len(&self) -> u64 {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.m
    }

    /// The common class size A.
    pub fn class_size(&self) -> &BigUint {
        &self.class_size
    }

    pub fn residue_count(&self, r: u32) -> &BigUint {
        &self.residue_counts[(r % self.m) as usize]
    }

    /// |S| = 2^n − (m/2)·A.
    pub fn leftover_size(&self) -> &BigUint {
        &self.leftover_size
    }

    /// p_S = |S| / 2^n, as f64 for reporting.
    pub fn leftover_fraction(&self) -> f64 {
        big_ratio_f64(&self.leftover_size, self.n)
    }
}

/// x / 2^shift as f64; good enough for reports (exact math never uses it).
fn big_ratio_f64(x: &BigUint, shift: u64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits();
    // keep 53 significant bits
    let (mantissa, dropped) = if bits > 53 {
        let d = bits - 53;
        (u64::try_from(x >> d).expect("53 bits"), d as i64)
    } else {
        (u64::try_from(x).expect("≤53 bits"), 0)
    };
    mantissa as f64 * 2f64.powi((dropped - shift as i64) as i32)
}

/// Lazy membership oracle over a chosen counting scalar.
pub struct Membership<C> {
    tables: RankTables<C>,
    class_size: C,
}

impl<C: Count> Membership<C> {
    pub fn new(classification: &BlockClassification) -> Result<Self> {
        let tables = RankTables::new(classification.n, classification.m)?;
        let class_size = C::from_biguint(classification.class_size()).ok_or_else(|| {
            Error::InvalidParameter("class size overflows the counting scalar".into())
        })?;
        Ok(Membership {
            tables,
            class_size,
        })
    }

    /// Label of `v`: G_j for its residue j if its lex rank within the class
    /// is below A, else S.
    pub fn label(&self, v: &[Sign]) -> BlockLabel {
        let r = RankTables::<C>::residue_of(v, self.tables.modulus());
        debug_assert!(r % 2 == 0, "even-length blocks have even residues");
        if self.tables.rank_in_class(v) < self.class_size {
            BlockLabel::Class(r)
        } else {
            BlockLabel::Leftover
        }
    }
}

/// Materialized classification for small n: label of every vector, indexed
/// by its lex code (bit n−1−i of the code set ⟺ position i is +1).
///
/// Test oracle for [`Membership`]; refuses n > 20.
pub fn materialize(classification: &BlockClassification) -> Result<Vec<BlockLabel>> {
    let n = classification.n;
    if n > 20 {
        return Err(Error::BudgetExceeded(format!(
            "materializing 2^{n} labels"
        )));
    }
    let m = classification.m;
    let a = classification.class_size();
    let mut seen = vec![BigUint::zero(); m as usize];
    let mut labels = Vec::with_capacity(1 << n);
    for code in 0u64..(1 << n) {
        let v: Vec<Sign> = (0..n)
            .map(|i| if code >> (n - 1 - i) & 1 == 1 { 1 } else { -1 })
            .collect();
        let r = RankTables::<u64>::residue_of(&v, m);
        let label = if &seen[r as usize] < a {
            BlockLabel::Class(r)
        } else {
            BlockLabel::Leftover
        };
        seen[r as usize] += BigUint::one();
        labels.push(label);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_m4_has_empty_leftover() {
        let cls = BlockClassification::new(4, 4).unwrap();
        assert_eq!(cls.class_size(), &BigUint::from(8u32));
        assert!(cls.leftover_size().is_zero());
        // so no vector is ever labeled S
        let membership: Membership<u64> = Membership::new(&cls).unwrap();
        for code in 0u64..16 {
            let v: Vec<Sign> = (0..4)
                .map(|i| if code >> (3 - i) & 1 == 1 { 1 } else { -1 })
                .collect();
            assert!(!membership.label(&v).is_leftover());
        }
    }

    #[test]
    fn n4_m6_single_leftover() {
        // sums of 4 signs: −4,−2,0,2,4 → residues 2,4,0,2,4, so counts are
        // residue 0 → 6, residue 2 → 5, residue 4 → 5; A = 5, |S| = 1
        let cls = BlockClassification::new(4, 6).unwrap();
        assert_eq!(cls.class_size(), &BigUint::from(5u32));
        assert_eq!(cls.leftover_size(), &BigUint::from(1u32));
        let labels = materialize(&cls).unwrap();
        let leftovers: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_leftover())
            .map(|(c, _)| c)
            .collect();
        assert_eq!(leftovers.len(), 1);
        // trimmed vector = lex-largest of the over-full residue-0 class:
        // (+1,+1,−1,−1) = code 0b1100
        assert_eq!(leftovers[0], 0b1100);
    }

    #[test]
    fn membership_agrees_with_materialized_up_to_n12() {
        for &(n, m) in &[(4u64, 6u32), (6, 6), (8, 4), (10, 6), (12, 8)] {
            let cls = BlockClassification::new(n, m).unwrap();
            let labels = materialize(&cls).unwrap();
            let membership: Membership<u64> = Membership::new(&cls).unwrap();
            for code in 0u64..(1 << n) {
                let v: Vec<Sign> = (0..n)
                    .map(|i| if code >> (n - 1 - i) & 1 == 1 { 1 } else { -1 })
                    .collect();
                assert_eq!(
                    membership.label(&v),
                    labels[code as usize],
                    "n={n} m={m} code={code:b}"
                );
            }
        }
    }

    #[test]
    fn leftover_size_identity() {
        for &(n, m) in &[(4u64, 6u32), (8, 6), (12, 10), (16, 4)] {
            let cls = BlockClassification::new(n, m).unwrap();
            let total = BigUint::one() << n;
            assert_eq!(
                cls.leftover_size() + cls.class_size() * BigUint::from(m / 2),
                total
            );
        }
    }

    #[test]
    fn class_members_have_matching_residue() {
        let cls = BlockClassification::new(8, 6).unwrap();
        let membership: Membership<u64> = Membership::new(&cls).unwrap();
        for code in 0u64..256 {
            let v: Vec<Sign> = (0..8)
                .map(|i| if code >> (7 - i) & 1 == 1 { 1 } else { -1 })
                .collect();
            if let BlockLabel::Class(j) = membership.label(&v) {
                assert_eq!(j, RankTables::<u64>::residue_of(&v, 6));
            }
        }
    }

    #[test]
    fn odd_parameters_rejected() {
        assert!(BlockClassification::new(5, 4).is_err());
        assert!(BlockClassification::new(4, 5).is_err());
        assert!(BlockClassification::new(0, 4).is_err());
    }

    #[test]
    fn big_m6_n72_single_leftover() {
        // the m=6 working classification at λ=1: exactly one trimmed vector,
        // the all-plus block (sum 72 ≡ 0 mod 6, lex-largest in its class)
        let cls = BlockClassification::new(72, 6).unwrap();
        assert_eq!(cls.leftover_size(), &BigUint::one());
        let membership: Membership<u128> = Membership::new(&cls).unwrap();
        assert!(membership.label(&[1; 72]).is_leftover());
        let mut nearly = [1i8; 72];
        nearly[71] = -1;
        assert!(!membership.label(&nearly).is_leftover());
    }
}

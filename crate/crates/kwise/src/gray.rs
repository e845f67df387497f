//! The pairwise-independent "gray walk".
//!
//! Strings of the infinite Gray code are read as finite subsets A_i ⊆ ℕ
//! (a 1 in place j means j ∈ A_i), and the construction multiplies seed signs
//! over those subsets:
//!
//! ```text
//! X_i = Π_{j ∈ A_i} ξ_j,       S_n = X_1 + … + X_n.
//! ```
//!
//! The X_i are pairwise independent (any two distinct subsets differ, so
//! X_i·X_i' is a nonempty product of fair signs), yet the walk is almost
//! surely bounded: with J = min{j ≥ 1 : ξ_j = −1},
//!
//! ```text
//! sup_n |S_n| = 2^{J−1} + 1 = sup_n S_n + 2 = −inf_n S_n.
//! ```
//!
//! Subsets come in two orderings: the Gray listing (closed form
//! `i XOR (i >> 1)`, validated against the recursive reflect-and-extend
//! listing) and the plain lexicographic/Walsh ordering (mask = binary digits
//! of i), for which boundedness also holds but with constant 2^J instead.

use crate::error::{Error, Result};
use crate::lab::{exact_uniform_sweep, FiniteSeedSpace, IndependenceReport, SequenceSampler};
use crate::seed::{SeedStream, Sign};
use crate::sign_seq::{ConstructionParams, ConstructionTag, SignSequence};
use crate::walk::{accumulate_walk, WalkPath};

/// Ordering of the subset strings A_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetOrder {
    /// Infinite Gray code listing (consecutive subsets differ in one element).
    Gray,
    /// Lexicographic / standard Walsh ordering: A_i = binary digits of i.
    Lexicographic,
}

/// Closed-form mask of the i-th Gray string: bit j−1 set ⟺ j ∈ A_i.
#[inline]
pub fn gray_mask(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Inverse of [`gray_mask`]: the listing index whose subset has this mask.
pub fn gray_index_of_mask(mask: u64) -> u64 {
    // prefix XOR: fold shifts of the running value, not of the input
    let mut i = mask;
    let mut shift = 1;
    while shift < 64 {
        i ^= i >> shift;
        shift <<= 1;
    }
    i
}

#[inline]
fn order_mask(i: u64, order: SubsetOrder) -> u64 {
    match order {
        SubsetOrder::Gray => gray_mask(i),
        SubsetOrder::Lexicographic => i,
    }
}

/// The i-th subset of the infinite Gray code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraySubset {
    index: u64,
    mask: u64,
}

impl GraySubset {
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Members as 1-based naturals, ascending.
    pub fn members(&self) -> Vec<u32> {
        (0..64).filter(|b| self.mask >> b & 1 == 1).map(|b| b + 1).collect()
    }

    /// Largest element, `None` for A_0 = ∅.
    pub fn max_member(&self) -> Option<u32> {
        if self.mask == 0 {
            None
        } else {
            Some(64 - self.mask.leading_zeros())
        }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }
}

/// The i-th string of the infinite Gray code, as a subset.
pub fn gray_subset(i: u64) -> GraySubset {
    GraySubset {
        index: i,
        mask: gray_mask(i),
    }
}

/// The order-n Gray code by the recursive reflect-and-extend rule: two copies
/// of the order n−1 code, the second reversed, with the n-th place set to 0
/// and 1 respectively. Returned as subset masks in listing order.
///
/// This is the independent oracle the closed form is validated against.
pub fn recursive_gray_code(order: u32) -> Vec<u64> {
    assert!(order <= 24, "oracle listing would be enormous");
    let mut code: Vec<u64> = vec![0];
    for n in 1..=order {
        let top = 1u64 << (n - 1);
        let mut next = Vec::with_capacity(code.len() * 2);
        next.extend_from_slice(&code);
        next.extend(code.iter().rev().map(|m| m | top));
        code = next;
    }
    code
}

/// Number of seed values ξ_1..ξ_b needed to evaluate X_i for all i ≤ n.
pub fn needed_prefix(n: u64) -> usize {
    (64 - n.leading_zeros()) as usize
}

fn product_over_mask(mask: u64, xi: &[Sign]) -> Result<Sign> {
    let needed = if mask == 0 {
        0
    } else {
        (64 - mask.leading_zeros()) as usize
    };
    if xi.len() < needed {
        return Err(Error::InsufficientSeed {
            needed,
            have: xi.len(),
        });
    }
    let mut sign = 1i8;
    let mut m = mask;
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        sign *= xi[b];
        m &= m - 1;
    }
    Ok(sign)
}

/// X_i = Π_{j ∈ A_i} ξ_j. The empty product X_0 is +1.
pub fn gray_sign(i: u64, xi: &[Sign]) -> Result<Sign> {
    product_over_mask(gray_mask(i), xi)
}

/// X_i under a chosen subset ordering.
pub fn ordered_sign(i: u64, xi: &[Sign], order: SubsetOrder) -> Result<Sign> {
    product_over_mask(order_mask(i, order), xi)
}

/// Partial sums of the gray walk driven by the seed prefix `xi`.
///
/// Default indexing is S_n = Σ_{i=1}^n X_i (n values). With `include_x0`
/// the path is the shifted S'_n = Σ_{i=0}^n X_i, carrying n+1 values from
/// S'_0 = 1; its extremes are symmetric (sup S' = −inf S' = 2^{J−1}).
pub fn gray_walk_path(xi: &[Sign], n: u64, include_x0: bool) -> Result<WalkPath> {
    gray_walk_path_ordered(xi, n, include_x0, SubsetOrder::Gray)
}

/// [`gray_walk_path`] generalized over the subset ordering.
pub fn gray_walk_path_ordered(
    xi: &[Sign],
    n: u64,
    include_x0: bool,
    order: SubsetOrder,
) -> Result<WalkPath> {
    if n == 0 {
        return Err(Error::InvalidParameter("horizon n must be ≥ 1".into()));
    }
    let start = if include_x0 { 0 } else { 1 };
    let signs: Vec<Sign> = (start..=n)
        .map(|i| ordered_sign(i, xi, order))
        .collect::<Result<_>>()?;
    accumulate_walk(&signs, None)
}

/// X_1..X_len as a [`SignSequence`], drawing the seed prefix from `stream`.
pub fn gray_sequence(stream: &mut SeedStream, len: usize) -> SignSequence {
    gray_sequence_ordered(stream, len, SubsetOrder::Gray)
}

pub fn gray_sequence_ordered(
    stream: &mut SeedStream,
    len: usize,
    order: SubsetOrder,
) -> SignSequence {
    let xi = stream.take_signs(needed_prefix(len as u64));
    let values: Vec<Sign> = (1..=len as u64)
        .map(|i| ordered_sign(i, &xi, order).expect("prefix sized for len"))
        .collect();
    SignSequence::from_parts(values, ConstructionTag::Gray, ConstructionParams::default())
}

/// Sequence sampler for the Monte-Carlo harness.
pub struct GraySampler {
    pub order: SubsetOrder,
}

impl SequenceSampler for GraySampler {
    fn sample_sequence(&self, stream: &mut SeedStream, len: usize) -> Vec<Sign> {
        gray_sequence_ordered(stream, len, self.order).values().to_vec()
    }
    fn name(&self) -> String {
        match self.order {
            SubsetOrder::Gray => "gray".into(),
            SubsetOrder::Lexicographic => "walsh-lex".into(),
        }
    }
}

/// Walk extremes predicted from the seed prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremes {
    Bounded {
        /// J = min{j ≥ 1 : ξ_j = −1}.
        j_min: u32,
        /// sup_n |S_n| = 2^{J−1} + 1.
        sup_abs: i64,
        /// sup_n S_n = 2^{J−1} − 1.
        sup: i64,
        /// inf_n S_n = −(2^{J−1} + 1).
        inf: i64,
    },
    /// No −1 in the prefix: the walk climbs past every bound seen so far.
    UnboundedSoFar { prefix_len: usize },
}

/// Extremes of the gray walk from the position of the first −1 seed.
pub fn predicted_extremes(xi: &[Sign]) -> Extremes {
    match xi.iter().position(|&v| v == -1) {
        Some(pos) => {
            let j = pos as u32 + 1;
            let half = 1i64 << (j - 1);
            Extremes::Bounded {
                j_min: j,
                sup_abs: half + 1,
                sup: half - 1,
                inf: -(half + 1),
            }
        }
        None => Extremes::UnboundedSoFar {
            prefix_len: xi.len(),
        },
    }
}

/// Finite seed space of the construction: J fair bits ξ_1..ξ_J determine
/// X_i for every i < 2^J. Index is the listing index i (0 allowed).
pub struct GrayFinite {
    pub j_bits: u32,
    pub order: SubsetOrder,
}

impl FiniteSeedSpace for GrayFinite {
    fn seed_bits(&self) -> u32 {
        self.j_bits
    }
    fn sign(&self, seed: u64, index: u64) -> Sign {
        let mask = order_mask(index, self.order);
        debug_assert!(mask < (1 << self.j_bits), "index outside seed space");
        if (mask & seed).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Exhaustively verifies pairwise independence over all 2^J seed prefixes:
/// every pair 1 ≤ i < i' < 2^J must have the exactly uniform joint law
/// (each outcome count 2^{J−2}).
///
/// Index 0 is excluded: X_0 is the empty product, identically +1, so its
/// joint tables are degenerate by definition rather than by failure.
///
/// The budget is J ≤ 14: the sweep holds one 2^J-bit vector per index and
/// visits all ~2^{2J−1} pairs, which is 32 MB and a few seconds at 14 and
/// grows by 4× per step beyond.
pub fn verify_pairwise_exact(j_bits: u32) -> Result<IndependenceReport> {
    if j_bits > 14 {
        return Err(Error::BudgetExceeded(format!(
            "J = {j_bits} exceeds the all-pairs enumeration budget of 14"
        )));
    }
    if j_bits < 2 {
        return Err(Error::InvalidParameter(
            "need J ≥ 2 for a nondegenerate pair sweep".into(),
        ));
    }
    let space = GrayFinite {
        j_bits,
        order: SubsetOrder::Gray,
    };
    let positions: Vec<u64> = (1..(1u64 << j_bits)).collect();
    exact_uniform_sweep(&space, &positions, 2, "gray")
}

/// The index c completing (a, b) to a multiplicatively dependent triple:
/// A_c = A_a Δ A_b, so X_a·X_b·X_c ≡ +1 identically.
pub fn dependent_triple_completion(a: u64, b: u64) -> u64 {
    gray_index_of_mask(gray_mask(a) ^ gray_mask(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::exact_joint;

    #[test]
    fn listing_of_first_nine_subsets() {
        let expected: [&[u32]; 9] = [
            &[],
            &[1],
            &[1, 2],
            &[2],
            &[2, 3],
            &[1, 2, 3],
            &[1, 3],
            &[3],
            &[3, 4],
        ];
        for (i, want) in expected.iter().enumerate() {
            assert_eq!(
                gray_subset(i as u64).members(),
                *want,
                "A_{i} mismatch"
            );
        }
    }

    #[test]
    fn closed_form_matches_recursive_oracle_to_2_16() {
        let oracle = recursive_gray_code(16);
        assert_eq!(oracle.len(), 1 << 16);
        for (i, &mask) in oracle.iter().enumerate() {
            assert_eq!(gray_mask(i as u64), mask, "divergence at i = {i}");
        }
    }

    #[test]
    fn hamiltonian_property_to_2_16() {
        for i in 0u64..(1 << 16) {
            let diff = gray_mask(i) ^ gray_mask(i + 1);
            assert_eq!(diff.count_ones(), 1, "A_{i} → A_{} differ in ≠1 place", i + 1);
        }
    }

    #[test]
    fn mask_inverse_roundtrip() {
        for i in 0u64..(1 << 12) {
            assert_eq!(gray_index_of_mask(gray_mask(i)), i);
        }
    }

    #[test]
    fn gray_sign_examples() {
        // X_0: empty product
        assert_eq!(gray_sign(0, &[]).unwrap(), 1);
        // singleton {1}
        assert_eq!(gray_sign(1, &[-1]).unwrap(), -1);
        // A_5 = {1,2,3}: (−1)(−1)(+1) = +1
        assert_eq!(gray_sign(5, &[-1, -1, 1]).unwrap(), 1);
        // insufficient prefix
        assert!(matches!(
            gray_sign(5, &[-1, -1]),
            Err(Error::InsufficientSeed { needed: 3, have: 2 })
        ));
    }

    #[test]
    fn primed_walk_examples() {
        // all +1 seeds: S'_0..S'_3 = 1,2,3,4
        let w = gray_walk_path(&[1, 1], 3, true).unwrap();
        assert_eq!(w.sums(), &[1, 2, 3, 4]);

        // ξ_1 = −1: S'_0 = 1, S'_1 = 0
        let w = gray_walk_path(&[-1], 1, true).unwrap();
        assert_eq!(w.sums(), &[1, 0]);

        // first −1 at j = 3: path over times 0..7 is 1,2,3,4,3,2,1,0
        let w = gray_walk_path(&[1, 1, -1], 7, true).unwrap();
        assert_eq!(w.sums(), &[1, 2, 3, 4, 3, 2, 1, 0]);
        assert_eq!(w.max(), 4); // 2^{j−1} over the first 2^j steps
    }

    #[test]
    fn predicted_extremes_examples() {
        match predicted_extremes(&[-1, 1, 1]) {
            Extremes::Bounded {
                j_min,
                sup_abs,
                sup,
                inf,
            } => {
                assert_eq!((j_min, sup_abs, sup, inf), (1, 2, 0, -2));
            }
            _ => panic!("expected bounded"),
        }
        match predicted_extremes(&[1, 1, -1, 1]) {
            Extremes::Bounded {
                j_min,
                sup_abs,
                sup,
                inf,
            } => {
                assert_eq!((j_min, sup_abs, sup, inf), (3, 5, 3, -5));
            }
            _ => panic!("expected bounded"),
        }
        assert_eq!(
            predicted_extremes(&[1; 10]),
            Extremes::UnboundedSoFar { prefix_len: 10 }
        );
    }

    #[test]
    fn pairwise_exact_small() {
        let report = verify_pairwise_exact(3).unwrap();
        assert!(report.passed);
        // 7 singletons + C(7,2) pairs
        assert_eq!(report.tuples_tested, 7 + 21);

        let report = verify_pairwise_exact(7).unwrap();
        assert!(report.passed);

        assert!(matches!(
            verify_pairwise_exact(15),
            Err(Error::BudgetExceeded(_))
        ));

        // one pair tabulated directly: J=5, indices (1,2) → each pattern 8
        let space = GrayFinite {
            j_bits: 5,
            order: SubsetOrder::Gray,
        };
        assert_eq!(exact_joint(&space, &[1, 2]).unwrap(), vec![8, 8, 8, 8]);
    }

    #[test]
    fn dependent_triple_detected() {
        // X_3 = X_1·X_2: masks 1 ^ 3 = 2 = mask of index 3
        assert_eq!(dependent_triple_completion(1, 2), 3);
        let space = GrayFinite {
            j_bits: 5,
            order: SubsetOrder::Gray,
        };
        let report = exact_uniform_sweep(&space, &[1, 2, 3], 3, "gray").unwrap();
        assert!(!report.passed, "triple (X_1,X_2,X_3) must be flagged");
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].indices, vec![1, 2, 3]);

        // the joint table shows the forced product: patterns with
        // X_1·X_2·X_3 = −1 never occur
        let table = exact_joint(&space, &[1, 2, 3]).unwrap();
        for pattern in 0..8usize {
            let product_minus = (pattern.count_ones() % 2) == 1;
            if product_minus {
                assert_eq!(table[pattern], 0);
            } else {
                assert_eq!(table[pattern], 8); // 2^5 / 4
            }
        }
    }

    #[test]
    fn enumeration_moment_identities_j8() {
        // Σ_seeds S_n = 0 and Σ_seeds S_n² = n·2^J for all n < 2^J
        let j = 8u32;
        let space = GrayFinite {
            j_bits: j,
            order: SubsetOrder::Gray,
        };
        let horizon = (1usize << j) - 1;
        let mut sum = vec![0i64; horizon + 1];
        let mut sum_sq = vec![0i64; horizon + 1];
        for seed in 0u64..(1 << j) {
            let mut s = 0i64;
            for i in 1..=horizon as u64 {
                s += space.sign(seed, i) as i64;
                sum[i as usize] += s;
                sum_sq[i as usize] += s * s;
            }
        }
        for n in 1..=horizon {
            assert_eq!(sum[n], 0, "Σ S_{n} ≠ 0");
            assert_eq!(sum_sq[n], (n as i64) << j, "Σ S_{n}² ≠ n·2^J");
        }
    }

    #[test]
    fn observed_extremes_match_prediction() {
        // J ∈ {1..6}, a few random tails, horizon 2^{J+4}
        for j in 1u32..=6 {
            for rep in 0..8u64 {
                let mut stream = SeedStream::new(0xEC0).derive(j as u64).derive(rep);
                let horizon = 1u64 << (j + 4);
                let mut xi: Vec<Sign> = vec![1; j as usize - 1];
                xi.push(-1);
                xi.extend(stream.take_signs(needed_prefix(horizon)));
                let walk = gray_walk_path(&xi, horizon, false).unwrap();
                let half = 1i64 << (j - 1);
                assert_eq!(walk.max(), half - 1, "J={j} rep={rep}");
                assert!(walk.min() >= -(half + 1), "J={j} rep={rep}");
                assert!(walk.max_abs() <= half + 1, "J={j} rep={rep}");
            }
        }
    }

    #[test]
    fn lexicographic_order_is_pairwise_independent_too() {
        // Walsh masks are distinct and nonzero for i ≥ 1, so every pair and
        // singleton character vanishes over the full seed space
        let space = GrayFinite {
            j_bits: 6,
            order: SubsetOrder::Lexicographic,
        };
        let positions: Vec<u64> = (1..64).collect();
        let report = exact_uniform_sweep(&space, &positions, 2, "walsh-lex").unwrap();
        assert!(report.passed);
        // and the same multiplicative dependence exists: X_1·X_2 = X_3
        let report = exact_uniform_sweep(&space, &[1, 2, 3], 3, "walsh-lex").unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn lexicographic_walk_is_bounded_by_2_pow_j() {
        // partial sums of the Walsh system in Paley order telescope to
        // Σ_{k ∈ bits(n+1), k < J} W_{o_k}·2^k, so |S_n| ≤ 2^J
        for rep in 0..16u64 {
            let mut stream = SeedStream::new(0x1e).derive(rep);
            let horizon = 1u64 << 12;
            let xi = stream.take_signs(needed_prefix(horizon));
            let j = xi.iter().position(|&v| v == -1).unwrap() as u32 + 1;
            let walk =
                gray_walk_path_ordered(&xi, horizon, false, SubsetOrder::Lexicographic)
                    .unwrap();
            assert!(
                walk.max_abs() <= 1i64 << j,
                "rep={rep}: |S_n| = {} > 2^{j}",
                walk.max_abs()
            );
        }
    }

    #[test]
    fn sequence_prefix_stability() {
        let a = gray_sequence(&mut SeedStream::new(5), 100);
        let b = gray_sequence(&mut SeedStream::new(5), 1000);
        assert_eq!(a.values(), &b.values()[..100]);
    }
}

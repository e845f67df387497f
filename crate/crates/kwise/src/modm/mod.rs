//! Walks that vanish mod m at checkpoints while staying k-wise independent.
//!
//! The m = 4 warm-up ([`m4`]) conditions each length-L block to have product
//! +1, which already forces S_{jL} ≡ 0 (mod 4) for every seed. The general
//! construction works for any m: split the seed into blocks of length
//! N = 2⌈λm²⌉, classify each block by sum residue into trimmed equal-size
//! classes G_j (plus an exponentially small leftover set S), and sample
//! conditioned prefixes Y^μ whose sums hit a prescribed residue μ
//! ([`lemma`]). The assembly ([`assemble`]) re-targets μ ≡ −S_ρ (mod m) at
//! every step, so each minimal sample returns the walk to 0 mod m at a
//! checkpoint I_j = jL, and the failure probability telescopes to
//! Σ 2^{−c−1}ε = ε.
//!
//! λ is not a free knob: [`choose_lambda`] walks the grid {1, 2, 4, …} and
//! accepts the first value for which the tail property
//! P(L^μ = aL) ≤ 2^{−a−1}ε (for all a > 1) is *certified* in exact rational
//! arithmetic — binomial tails evaluated exactly up to a = 64 and dominated
//! by a geometric majorant beyond.

pub mod assemble;
pub mod classify;
pub mod counting;
pub mod lemma;
pub mod m4;

pub use assemble::{assemble_sequence, AssembledRun};
pub use classify::{materialize, BlockClassification, BlockLabel, Membership};
pub use counting::{residue_counts, RankTables};
pub use lemma::{AnyLemmaSampler, LemmaSample, LemmaSampler};
pub use m4::{build_m4_sequence, M4Finite, M4Sampler};

use crate::error::{Error, Result};
use crate::lab::{chi_square_on_tuples, IndependenceReport, SequenceSampler};
use crate::seed::{SeedStream, Sign};
use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Parameters of the general construction.
///
/// Invariants: m even (odd requests are doubled), N = 2⌈λm²⌉,
/// L = (k+1)·N = 2(k+1)⌈λm²⌉.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModmParams {
    pub k: u32,
    /// Modulus as requested by the caller.
    pub requested_m: u32,
    /// Even working modulus (2·requested_m if that was odd).
    pub m: u32,
    pub epsilon: f64,
    pub lambda: f64,
    /// Block length N = 2⌈λm²⌉.
    pub block_n: u64,
    /// Step length L = (k+1)·N; checkpoints sit at multiples of L.
    pub step_l: u64,
}

impl ModmParams {
    /// Builds parameters for an explicit λ (no tail certification).
    pub fn with_lambda(k: u32, m: u32, epsilon: f64, lambda: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "k = 0 is meaningless for a k-wise independence order".into(),
            ));
        }
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "modulus m = {m} must be ≥ 2"
            )));
        }
        if !(0.0 < epsilon && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ε = {epsilon} must lie in (0, 1)"
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "λ = {lambda} must be positive"
            )));
        }
        let m_eff = if m % 2 == 0 { m } else { 2 * m };
        let ceil_term = (lambda * (m_eff as f64) * (m_eff as f64)).ceil() as u64;
        let block_n = 2 * ceil_term;
        let step_l = (k as u64 + 1) * block_n;
        Ok(ModmParams {
            k,
            requested_m: m,
            m: m_eff,
            epsilon,
            lambda,
            block_n,
            step_l,
        })
    }
}

/// How far the binomial tails are evaluated exactly before the geometric
/// majorant takes over.
const EXACT_TAIL_A_MAX: u64 = 64;

/// Smallest grid λ ∈ {1, 2, 4, …} whose tail property is certified exactly.
pub fn choose_lambda(k: u32, m: u32, epsilon: f64) -> Result<ModmParams> {
    let mut lambda = 1.0f64;
    let mut diagnostics = Vec::new();
    while lambda <= (1u64 << 20) as f64 {
        let params = ModmParams::with_lambda(k, m, epsilon, lambda)?;
        let classification = BlockClassification::new(params.block_n, params.m)?;
        match certify_tail_property(&params, &classification) {
            Ok(()) => return Ok(params),
            Err(why) => diagnostics.push(format!("λ={lambda}: {why}")),
        }
        lambda *= 2.0;
    }
    Err(Error::SearchExhausted(format!(
        "no λ ≤ 2^20 certifies P(L^μ = aL) ≤ 2^(−a−1)ε for k={k}, m={m}, ε={epsilon}: {}",
        diagnostics.join("; ")
    )))
}

/// Exact certificate of the sample-length tail property for the given
/// parameters.
///
/// With p = |S|/2^N, the stopping count satisfies
/// P(B > b) = Σ_{j≤k} C(b,j)(1−p)^j p^{b−j}, so
/// P(L^μ = aL) ≤ P(B > (a−1)(k+1)); that tail is compared against 2^{−a−1}ε
/// in exact rationals for 2 ≤ a ≤ 64. Beyond, the majorant
/// V(b) = Σ_{j≤k} C(b,j) p^{b−j} ≥ P(B > b) shrinks by a factor ≤ 2p per
/// block once b ≥ 2k−1, so V(b_64) ≤ 2^{−65}ε together with (2p)^{k+1} ≤ 1/2
/// dominates every remaining a geometrically.
fn certify_tail_property(
    params: &ModmParams,
    classification: &BlockClassification,
) -> std::result::Result<(), String> {
    let leftover = classification.leftover_size();
    if leftover.is_zero() {
        return Ok(()); // B = k+1 identically; every tail is zero
    }
    let k = params.k as u64;
    let two_pow_n = BigUint::one() << params.block_n;
    let p = BigRational::new(
        BigInt::from(leftover.clone()),
        BigInt::from(two_pow_n.clone()),
    );
    let q = BigRational::one() - &p;
    let eps = BigRational::from_float(params.epsilon).expect("ε is finite");

    let tail = |b: u64| -> BigRational {
        let mut acc = BigRational::zero();
        for j in 0..=k.min(b) {
            let c = BigInt::from(binomial(BigUint::from(b), BigUint::from(j)));
            acc += BigRational::from(c) * q.pow(j as i32) * p.pow((b - j) as i32);
        }
        acc
    };
    for a in 2..=EXACT_TAIL_A_MAX {
        let b = (a - 1) * (k + 1);
        let bound = &eps / BigRational::from(BigInt::from(2u8).pow(a as u32 + 1));
        if tail(b) > bound {
            return Err(format!("exact tail at a={a} exceeds 2^(−{}−1)ε", a));
        }
    }
    // geometric majorant at the edge
    let b_edge = (EXACT_TAIL_A_MAX - 1) * (k + 1);
    let mut majorant = BigRational::zero();
    for j in 0..=k {
        let c = BigInt::from(binomial(BigUint::from(b_edge), BigUint::from(j)));
        majorant += BigRational::from(c) * p.pow((b_edge - j) as i32);
    }
    let edge_bound =
        &eps / BigRational::from(BigInt::from(2u8).pow(EXACT_TAIL_A_MAX as u32 + 1));
    if majorant > edge_bound {
        return Err("majorant at a=64 exceeds 2^(−65)ε".into());
    }
    // (2p)^{k+1} ≤ 1/2, as integers: 2^{k+2}·|S|^{k+1} ≤ 2^{N(k+1)}
    let lhs = (BigUint::one() << (k + 2)) * leftover.pow(k as u32 + 1);
    let rhs = BigUint::one() << (params.block_n * (k + 1));
    if lhs > rhs {
        return Err("geometric ratio 2p exceeds 2^(−1/(k+1))".into());
    }
    debug_assert!(p.is_positive() && q.is_positive());
    Ok(())
}

/// Monte-Carlo sampler for the assembled general construction.
pub struct ModmSampler {
    sampler: AnyLemmaSampler,
}

impl ModmSampler {
    pub fn new(params: &ModmParams) -> Result<Self> {
        Ok(ModmSampler {
            sampler: AnyLemmaSampler::new(params)?,
        })
    }

    pub fn params(&self) -> &ModmParams {
        self.sampler.params()
    }

    pub fn lemma_sampler(&self) -> &AnyLemmaSampler {
        &self.sampler
    }
}

impl SequenceSampler for ModmSampler {
    fn sample_sequence(&self, stream: &mut SeedStream, len: usize) -> Vec<Sign> {
        let step_l = self.sampler.params().step_l;
        let horizon = (len as u64).div_ceil(step_l) * step_l;
        let run = assemble_sequence(&self.sampler, horizon, stream)
            .expect("assembly fails only on bad horizon or exhausted budget");
        let mut values = run.sequence.values().to_vec();
        values.truncate(len);
        values
    }
    fn name(&self) -> String {
        let p = self.sampler.params();
        format!("modm(k={}, m={}, L={})", p.k, p.m, p.step_l)
    }
}

/// Statistical k-wise independence check of explicit index sets, delegating
/// to the chi-square harness. Each set must hold at most k distinct indices.
pub fn verify_kwise<S: SequenceSampler>(
    sampler: &S,
    k: u32,
    index_sets: &[Vec<u64>],
    trials: u64,
    alpha: f64,
    seed: u64,
) -> Result<IndependenceReport> {
    let mut tuples = Vec::with_capacity(index_sets.len());
    for set in index_sets {
        let mut t = set.clone();
        t.sort_unstable();
        t.dedup();
        if t.len() > k as usize {
            return Err(Error::InvalidParameter(format!(
                "index set {set:?} has {} distinct indices, more than k = {k}",
                t.len()
            )));
        }
        if t.is_empty() || t[0] == 0 {
            return Err(Error::InvalidParameter(
                "index sets are 1-based and nonempty".into(),
            ));
        }
        tuples.push(t);
    }
    chi_square_on_tuples(sampler, &tuples, trials, alpha, seed)
}

/// Adversarial k-tuples inside [1, 4L]: consecutive windows centered on every
/// multiple of the inner block length N and of the step length L, where any
/// dependence leak would live (straddling both block boundaries and the
/// stopping time's resolution).
pub fn boundary_tuples(params: &ModmParams, k: usize) -> Vec<Vec<u64>> {
    let horizon = 4 * params.step_l;
    let mut tuples: Vec<Vec<u64>> = Vec::new();
    let mut push_window = |center: u64| {
        let half = (k as u64 - 1) / 2;
        let lo = center.saturating_sub(half).max(1);
        let tuple: Vec<u64> = (lo..lo + k as u64).filter(|&i| i <= horizon).collect();
        if tuple.len() == k && !tuples.contains(&tuple) {
            tuples.push(tuple);
        }
    };
    let mut boundary = params.block_n;
    while boundary <= horizon {
        push_window(boundary);
        push_window(boundary + 1);
        boundary += params.block_n;
    }
    push_window(1 + (k as u64 - 1) / 2); // flush against the start
    push_window(horizon - k as u64 + 1); // and the end
    tuples
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_invariants() {
        let p = ModmParams::with_lambda(3, 4, 0.1, 1.0).unwrap();
        assert_eq!(p.block_n, 32);
        assert_eq!(p.step_l, 128);
        assert_eq!(p.m, 4);
        assert_eq!(p.step_l % p.block_n, 0);
        assert!(p.step_l > p.k as u64);

        // odd m doubles internally
        let p = ModmParams::with_lambda(2, 3, 0.1, 1.0).unwrap();
        assert_eq!(p.requested_m, 3);
        assert_eq!(p.m, 6);
        assert_eq!(p.block_n, 72);

        assert!(ModmParams::with_lambda(0, 4, 0.1, 1.0).is_err());
        assert!(ModmParams::with_lambda(2, 4, 1.0, 1.0).is_err());
        assert!(ModmParams::with_lambda(2, 1, 0.1, 1.0).is_err());
    }

    #[test]
    fn choose_lambda_regression_anchors() {
        // k=1, m=2, ε=0.5: N = 2⌈4λ⌉; at λ=1 the leftover set is empty
        // (sums of an even count of signs are all ≡ 0 mod 2)
        let p = choose_lambda(1, 2, 0.5).unwrap();
        assert_eq!((p.lambda, p.block_n, p.step_l), (1.0, 8, 16));

        // m=4 classes are exactly balanced, leftover empty, λ=1 certifies
        let p = choose_lambda(3, 4, 0.1).unwrap();
        assert_eq!((p.lambda, p.block_n, p.step_l), (1.0, 32, 128));

        // m=6 leaves a single leftover vector; tails are ≈ 2^{−72}, λ=1
        let p = choose_lambda(2, 6, 0.1).unwrap();
        assert_eq!((p.lambda, p.block_n, p.step_l), (1.0, 72, 216));

        // odd m doubles before sizing: m=3 runs on the m=6 machinery
        let p = choose_lambda(2, 3, 0.2).unwrap();
        assert_eq!((p.requested_m, p.m, p.block_n), (3, 6, 72));
    }

    #[test]
    fn chosen_l_scales_like_m_squared() {
        let k = 2;
        let eps = 0.1;
        let mut last_l = 0;
        for m in [2u32, 4, 6, 8] {
            let p = choose_lambda(k, m, eps).unwrap();
            assert_eq!(p.step_l, (k as u64 + 1) * p.block_n);
            assert_eq!(p.block_n, 2 * ((p.lambda * (m * m) as f64).ceil() as u64));
            assert!(p.step_l > last_l, "L must grow with m");
            last_l = p.step_l;
        }
    }

    #[test]
    fn certification_rejects_a_leaky_lambda() {
        // N = 4, m = 6 has p_S = 1/16: far too heavy for ε = 0.1 tails
        let params = ModmParams::with_lambda(1, 6, 0.1, 0.05).unwrap();
        let cls = BlockClassification::new(params.block_n, params.m).unwrap();
        assert!(certify_tail_property(&params, &cls).is_err());
    }

    #[test]
    fn verify_kwise_validates_sets() {
        let params = ModmParams::with_lambda(2, 6, 0.1, 0.05).unwrap();
        let sampler = ModmSampler::new(&params).unwrap();
        assert!(verify_kwise(&sampler, 2, &[vec![1, 2, 3]], 1000, 0.01, 1).is_err());
        assert!(verify_kwise(&sampler, 2, &[vec![0, 1]], 1000, 0.01, 1).is_err());
        // duplicates collapse
        let rep = verify_kwise(&sampler, 2, &[vec![5, 5, 9]], 1000, 0.01, 1).unwrap();
        assert_eq!(rep.tuples_tested, 1);
    }

    #[test]
    fn boundary_tuples_straddle_blocks() {
        let params = ModmParams::with_lambda(2, 6, 0.1, 0.05).unwrap(); // N=4, L=12
        let tuples = boundary_tuples(&params, 3);
        assert!(!tuples.is_empty());
        for t in &tuples {
            assert_eq!(t.len(), 3);
            assert!(t.windows(2).all(|w| w[1] == w[0] + 1));
            assert!(*t.last().unwrap() <= 48);
            assert!(t[0] >= 1);
        }
        // at least one window straddles the first block boundary
        assert!(tuples.iter().any(|t| t.contains(&4) && t.contains(&5)));
    }
}

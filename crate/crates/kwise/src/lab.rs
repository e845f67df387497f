//! Generic independence verification: exact joint-distribution enumeration
//! over finite seed spaces, chi-square k-tuple testing at scale, moment
//! identities, and the fourth-moment tail bound.
//!
//! Two regimes, deliberately kept independent of each other:
//!
//! - **EXACT**: the construction exposes its finite seed space (J bits) and we
//!   enumerate all 2^J assignments. Joint uniformity of every tuple of size
//!   ≤ k is equivalent to all character sums Σ_seeds Π_{i∈U} X_i vanishing
//!   for nonempty U with |U| ≤ k, which one bitvector sweep checks; direct
//!   tabulation ([`exact_joint`]) is the slower oracle used to cross-check
//!   and to print tables for violations.
//! - **MONTE_CARLO**: chi-square goodness of fit of sampled k-tuples against
//!   the uniform law on {±1}^k, Bonferroni-corrected across tuples.

use crate::error::{Error, Result};
use crate::seed::{SeedStream, Sign};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exhaustive-enumeration budget: seed spaces up to 2^22.
pub const EXACT_SEED_BITS_LIMIT: u32 = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestMode {
    Exact,
    MonteCarlo,
}

/// One offending tuple: observed joint table next to the expected one.
///
/// Table layout: entry `pattern` counts realizations where sign at
/// `indices[r]` is −1 iff bit r of `pattern` is set.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub indices: Vec<u64>,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub statistic: f64,
    pub p_value: Option<f64>,
}

/// Verdict on a set of index tuples.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    pub mode: TestMode,
    pub construction: String,
    pub tuples_tested: usize,
    /// Sample size per tuple (trial count, or seed-space size in EXACT mode).
    pub sample_size: u64,
    pub alpha: Option<f64>,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

// ---------------------------------------------------------------------------
// EXACT mode
// ---------------------------------------------------------------------------

/// A construction whose randomness is a finite vector of fair bits.
///
/// `sign(seed, index)` must be a pure function; `index` uses the
/// construction's natural indexing (1-based positions for block
/// constructions, Gray index i ≥ 0 for the gray walk).
pub trait FiniteSeedSpace {
    fn seed_bits(&self) -> u32;
    fn sign(&self, seed: u64, index: u64) -> Sign;
}

/// i.i.d. signs: position i ≥ 1 reads seed bit i−1.
pub struct IidBits(pub u32);

impl FiniteSeedSpace for IidBits {
    fn seed_bits(&self) -> u32 {
        self.0
    }
    fn sign(&self, seed: u64, index: u64) -> Sign {
        assert!(
            (1..=self.0 as u64).contains(&index),
            "iid position out of range"
        );
        if (seed >> (index - 1)) & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

fn check_exact_budget(bits: u32) -> Result<()> {
    if bits > EXACT_SEED_BITS_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "seed space 2^{bits} exceeds 2^{EXACT_SEED_BITS_LIMIT}; use MONTE_CARLO"
        )));
    }
    Ok(())
}

/// Exact joint counts of the sign pattern at `indices` over the full seed
/// space. The table entries sum to 2^seed_bits.
pub fn exact_joint<G: FiniteSeedSpace>(space: &G, indices: &[u64]) -> Result<Vec<u64>> {
    check_exact_budget(space.seed_bits())?;
    assert!(indices.len() < 26, "joint table too wide");
    let mut counts = vec![0u64; 1 << indices.len()];
    for seed in 0u64..(1 << space.seed_bits()) {
        let mut pattern = 0usize;
        for (r, &ix) in indices.iter().enumerate() {
            if space.sign(seed, ix) == -1 {
                pattern |= 1 << r;
            }
        }
        counts[pattern] += 1;
    }
    Ok(counts)
}

/// Sweep over all index tuples of size 1..=max_k drawn from `positions`,
/// checking exact joint uniformity via character sums.
///
/// A tuple T has the uniform joint law iff Σ_seeds Π_{i∈U} X_i = 0 for every
/// nonempty U ⊆ T, so sweeping all subsets of size ≤ max_k settles every
/// tuple at once. Violating subsets get their table re-derived by
/// [`exact_joint`] (the independent tabulation route).
pub fn exact_uniform_sweep<G: FiniteSeedSpace>(
    space: &G,
    positions: &[u64],
    max_k: usize,
    construction: &str,
) -> Result<IndependenceReport> {
    check_exact_budget(space.seed_bits())?;
    let seeds: u64 = 1 << space.seed_bits();
    let words = (seeds as usize).div_ceil(64);

    // bit s of vectors[r] set ⟺ sign(s, positions[r]) == −1
    let vectors: Vec<Vec<u64>> = positions
        .iter()
        .map(|&p| {
            let mut v = vec![0u64; words];
            for seed in 0..seeds {
                if space.sign(seed, p) == -1 {
                    v[(seed >> 6) as usize] |= 1 << (seed & 63);
                }
            }
            v
        })
        .collect();

    let half = seeds / 2;
    let mut violating_subsets: Vec<Vec<usize>> = Vec::new();
    let mut subsets_checked = 0usize;

    // DFS over subsets in increasing index order, XOR-accumulating one level
    // at a time; scratch[d] holds the accumulated vector at depth d+1.
    let mut scratch: Vec<Vec<u64>> = vec![vec![0u64; words]; max_k];
    let mut chosen: Vec<usize> = Vec::with_capacity(max_k);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        vectors: &[Vec<u64>],
        start: usize,
        max_k: usize,
        half: u64,
        scratch: &mut [Vec<u64>],
        chosen: &mut Vec<usize>,
        violations: &mut Vec<Vec<usize>>,
        checked: &mut usize,
    ) {
        let depth = chosen.len();
        if depth == max_k {
            return;
        }
        for i in start..vectors.len() {
            // scratch[depth] = previous level XOR vectors[i]
            if depth == 0 {
                scratch[0].copy_from_slice(&vectors[i]);
            } else {
                let (prev, cur) = scratch.split_at_mut(depth);
                for (dst, (a, b)) in cur[0]
                    .iter_mut()
                    .zip(prev[depth - 1].iter().zip(vectors[i].iter()))
                {
                    *dst = a ^ b;
                }
            }
            chosen.push(i);
            *checked += 1;
            let ones: u64 = scratch[depth].iter().map(|w| w.count_ones() as u64).sum();
            if ones != half {
                violations.push(chosen.clone());
            }
            rec(
                vectors, i + 1, max_k, half, scratch, chosen, violations, checked,
            );
            chosen.pop();
        }
    }

    rec(
        &vectors,
        0,
        max_k,
        half,
        &mut scratch,
        &mut chosen,
        &mut violating_subsets,
        &mut subsets_checked,
    );

    let mut violations = Vec::new();
    for subset in violating_subsets {
        let indices: Vec<u64> = subset.iter().map(|&r| positions[r]).collect();
        let observed = exact_joint(space, &indices)?;
        let cells = observed.len();
        let expected = vec![seeds as f64 / cells as f64; cells];
        let statistic = chi_square_stat(&observed, &expected);
        violations.push(Violation {
            indices,
            observed,
            expected,
            statistic,
            p_value: None,
        });
    }

    Ok(IndependenceReport {
        mode: TestMode::Exact,
        construction: construction.to_string(),
        tuples_tested: subsets_checked,
        sample_size: seeds,
        alpha: None,
        passed: violations.is_empty(),
        violations,
    })
}

// ---------------------------------------------------------------------------
// MONTE_CARLO mode
// ---------------------------------------------------------------------------

/// A construction that can realize a fresh finite sequence from a stream.
/// Position i ≥ 1 of the realization is element i−1 of the returned vector.
pub trait SequenceSampler: Sync {
    fn sample_sequence(&self, stream: &mut SeedStream, len: usize) -> Vec<Sign>;
    fn name(&self) -> String;
}

/// Fully independent fair signs.
pub struct IidSampler;

impl SequenceSampler for IidSampler {
    fn sample_sequence(&self, stream: &mut SeedStream, len: usize) -> Vec<Sign> {
        stream.take_signs(len)
    }
    fn name(&self) -> String {
        "iid".into()
    }
}

/// Configuration for [`chi_square_tuples`].
#[derive(Debug, Clone)]
pub struct ChiSquareConfig {
    /// Tuple size k.
    pub k: usize,
    pub num_tuples: usize,
    pub trials: u64,
    /// Family-wise significance level (Bonferroni-corrected across tuples).
    pub alpha: f64,
    /// Seed for drawing the random index tuples.
    pub tuple_seed: u64,
    /// Inclusive 1-based index window tuples are drawn from.
    pub window: (u64, u64),
    /// Seed for the realization streams (trial t uses `derive(t)`).
    pub seed: u64,
}

const TUPLE_DRAW_TAG: u64 = 0x7479_6c65;

/// Draws `num_tuples` k-tuples of distinct indices in the window,
/// deterministically from `tuple_seed`.
pub fn draw_tuples(cfg: &ChiSquareConfig) -> Vec<Vec<u64>> {
    let (lo, hi) = cfg.window;
    assert!(lo >= 1 && hi >= lo, "bad window");
    let span = hi - lo + 1;
    assert!(span as usize >= cfg.k, "window narrower than tuple size");
    let mut stream = SeedStream::new(cfg.tuple_seed).derive(TUPLE_DRAW_TAG);
    let mut tuples = Vec::with_capacity(cfg.num_tuples);
    for _ in 0..cfg.num_tuples {
        let mut t: Vec<u64> = Vec::with_capacity(cfg.k);
        while t.len() < cfg.k {
            let ix = lo + stream.next_word() % span;
            if !t.contains(&ix) {
                t.push(ix);
            }
        }
        t.sort_unstable();
        tuples.push(t);
    }
    tuples
}

/// Chi-square test of `num_tuples` random k-tuples against the uniform joint
/// law, over `trials` independent realizations of the construction.
pub fn chi_square_tuples<C: SequenceSampler>(
    sampler: &C,
    cfg: &ChiSquareConfig,
) -> Result<IndependenceReport> {
    let tuples = draw_tuples(cfg);
    chi_square_on_tuples(sampler, &tuples, cfg.trials, cfg.alpha, cfg.seed)
}

/// Chi-square test of explicitly given tuples of 1-based indices.
pub fn chi_square_on_tuples<C: SequenceSampler>(
    sampler: &C,
    tuples: &[Vec<u64>],
    trials: u64,
    alpha: f64,
    seed: u64,
) -> Result<IndependenceReport> {
    if tuples.is_empty() {
        return Err(Error::InvalidParameter("no tuples to test".into()));
    }
    let k = tuples.iter().map(|t| t.len()).max().unwrap();
    let min_trials = 100u64 << k;
    if trials < min_trials {
        return Err(Error::InvalidParameter(format!(
            "{trials} trials inadequate for k={k}; need ≥ {min_trials} (100·2^k)"
        )));
    }
    let max_index = tuples
        .iter()
        .flat_map(|t| t.iter().copied())
        .max()
        .unwrap() as usize;

    let base = SeedStream::new(seed);
    // Per-trial substreams make the reduction order irrelevant: counts are
    // integers, addition commutes, so the merged tables are identical for any
    // worker count.
    let counts: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .fold(
            || tuples.iter().map(|t| vec![0u64; 1 << t.len()]).collect(),
            |mut acc: Vec<Vec<u64>>, trial| {
                let mut stream = base.derive(trial);
                let seq = sampler.sample_sequence(&mut stream, max_index);
                for (table, tuple) in acc.iter_mut().zip(tuples.iter()) {
                    let mut pattern = 0usize;
                    for (r, &ix) in tuple.iter().enumerate() {
                        if seq[(ix - 1) as usize] == -1 {
                            pattern |= 1 << r;
                        }
                    }
                    table[pattern] += 1;
                }
                acc
            },
        )
        .reduce(
            || tuples.iter().map(|t| vec![0u64; 1 << t.len()]).collect(),
            |mut a, b| {
                for (ta, tb) in a.iter_mut().zip(b.iter()) {
                    for (x, y) in ta.iter_mut().zip(tb.iter()) {
                        *x += y;
                    }
                }
                a
            },
        );

    let per_test_alpha = alpha / tuples.len() as f64;
    let mut violations = Vec::new();
    for (tuple, observed) in tuples.iter().zip(counts.iter()) {
        debug_assert_eq!(observed.iter().sum::<u64>(), trials);
        let cells = observed.len();
        let expected = vec![trials as f64 / cells as f64; cells];
        let statistic = chi_square_stat(observed, &expected);
        let p = chi_square_p_value(statistic, (cells - 1) as f64);
        if p < per_test_alpha {
            violations.push(Violation {
                indices: tuple.clone(),
                observed: observed.clone(),
                expected,
                statistic,
                p_value: Some(p),
            });
        }
    }

    Ok(IndependenceReport {
        mode: TestMode::MonteCarlo,
        construction: sampler.name(),
        tuples_tested: tuples.len(),
        sample_size: trials,
        alpha: Some(alpha),
        passed: violations.is_empty(),
        violations,
    })
}

/// Pearson statistic Σ (obs − exp)²/exp.
pub fn chi_square_stat(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected.iter())
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Upper-tail p-value of the chi-square distribution with `df` degrees of
/// freedom.
pub fn chi_square_p_value(stat: f64, df: f64) -> f64 {
    let dist = ChiSquared::new(df).expect("df > 0");
    dist.sf(stat)
}

// ---------------------------------------------------------------------------
// Moments and the fourth-moment tail bound
// ---------------------------------------------------------------------------

/// Empirical moments of S_n with jackknife standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub n: u64,
    pub samples: usize,
    /// (estimate, standard error) triples.
    pub mean: (f64, f64),
    pub second: (f64, f64),
    pub fourth: (f64, f64),
}

/// Jackknife standard error of the mean of `xs`. For a plain mean the
/// leave-one-out replicates collapse to the classical s/√T formula; computed
/// through that identity rather than T passes.
fn jackknife_se(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let t = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / t;
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    (ss / (t * (t - 1.0))).sqrt()
}

/// Empirical E S_n, E S_n², E S_n⁴ from independent samples of S_n.
pub fn moment_report(samples: &[i64], n: u64) -> Result<MomentReport> {
    if samples.len() < 1000 {
        return Err(Error::InvalidParameter(format!(
            "{} samples is below the 10^3 floor",
            samples.len()
        )));
    }
    let t = samples.len() as f64;
    let s1 = samples.iter().map(|&s| s as f64);
    let s2 = samples.iter().map(|&s| (s as f64) * (s as f64));
    let s4 = samples.iter().map(|&s| {
        let v = (s as f64) * (s as f64);
        v * v
    });
    Ok(MomentReport {
        n,
        samples: samples.len(),
        mean: (s1.clone().sum::<f64>() / t, jackknife_se(s1)),
        second: (s2.clone().sum::<f64>() / t, jackknife_se(s2)),
        fourth: (s4.clone().sum::<f64>() / t, jackknife_se(s4)),
    })
}

/// Empirical P(S_n² > M) against the Paley–Zygmund-style lower bound
/// (n − M)² / (3n² − 2n) valid for (≥4)-wise independent steps.
#[derive(Debug, Clone, Serialize)]
pub struct TailBoundCheck {
    pub n: u64,
    pub threshold: f64,
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard error of the empirical probability.
    pub se: f64,
}

impl TailBoundCheck {
    /// The check the reports assert: empirical ≥ bound − slack·SE.
    pub fn satisfied(&self, slack_sigmas: f64) -> bool {
        self.empirical >= self.bound - slack_sigmas * self.se
    }
}

pub fn tail_bound_check(samples: &[i64], n: u64, threshold: f64) -> Result<TailBoundCheck> {
    if !(threshold < n as f64) {
        return Err(Error::InvalidParameter(format!(
            "threshold M = {threshold} must be below E S_n² = n = {n}"
        )));
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let t = samples.len() as f64;
    let hits = samples
        .iter()
        .filter(|&&s| (s as f64) * (s as f64) > threshold)
        .count() as f64;
    let p = hits / t;
    let nf = n as f64;
    let bound = (nf - threshold) * (nf - threshold) / (3.0 * nf * nf - 2.0 * nf);
    Ok(TailBoundCheck {
        n,
        threshold,
        empirical: p,
        bound,
        se: (p * (1.0 - p) / t).sqrt(),
    })
}
